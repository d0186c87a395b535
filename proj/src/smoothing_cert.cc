// Copyright 2026 The gedcert Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gedcert/smoothing_cert.h"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace gedcert {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Outcome "noisy bit is 1" at a changed position has probability `clean` under
// the clean input and `pert` under the perturbed one.
std::vector<RatioRegion> KindRegions(int radius, double clean, double pert) {
  std::vector<RatioRegion> out;
  for (int k = 0; k <= radius; ++k) {
    const double choose =
        boost::math::binomial_coefficient<double>(static_cast<unsigned>(radius),
                                                  static_cast<unsigned>(k));
    RatioRegion r;
    r.p_clean = choose * std::pow(clean, k) * std::pow(1.0 - clean, radius - k);
    r.p_pert = choose * std::pow(pert, k) * std::pow(1.0 - pert, radius - k);
    r.ratio = std::pow(clean / pert, k) * std::pow((1.0 - clean) / (1.0 - pert), radius - k);
    out.push_back(r);
  }
  return out;
}

void CheckNondegenerate(int radius, double p_add, double p_del) {
  if (radius == 0) return;
  if (!(p_add > 0.0 && p_add < 1.0 && p_del > 0.0 && p_del < 1.0)) {
    throw std::invalid_argument("flip probabilities must lie in (0, 1) for a nonzero radius");
  }
}

double NormalQuantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double NormalCdf(double x) {
  return boost::math::cdf(boost::math::normal_distribution<double>(), x);
}

}  // namespace

std::vector<RatioRegion> Regions(const RadiusTuple& r, const SparseMeasure& m) {
  m.Validate();
  if (r.ra_add < 0 || r.ra_del < 0 || r.rx_add < 0 || r.rx_del < 0) {
    throw std::invalid_argument("radii must be nonnegative");
  }
  CheckNondegenerate(r.ra_add + r.ra_del, m.pa_add, m.pa_del);
  CheckNondegenerate(r.rx_add + r.rx_del, m.px_add, m.px_del);

  std::vector<RatioRegion> joint = {RatioRegion{}};
  auto extend = [&](int radius, double clean, double pert) {
    if (radius == 0) return;
    std::vector<RatioRegion> next;
    for (const RatioRegion& a : joint) {
      for (const RatioRegion& b : KindRegions(radius, clean, pert)) {
        next.push_back(RatioRegion{a.ratio * b.ratio, a.p_clean * b.p_clean,
                                   a.p_pert * b.p_pert});
      }
    }
    joint.swap(next);
  };
  // Inserted bits: clean 0 -> noisy 1 w.p. p_add; perturbed 1 -> 1 w.p. 1 - p_del.
  extend(r.ra_add, m.pa_add, 1.0 - m.pa_del);
  extend(r.ra_del, 1.0 - m.pa_del, m.pa_add);
  extend(r.rx_add, m.px_add, 1.0 - m.px_del);
  extend(r.rx_del, 1.0 - m.px_del, m.px_add);

  std::sort(joint.begin(), joint.end(),
            [](const RatioRegion& a, const RatioRegion& b) { return a.ratio > b.ratio; });
  std::vector<RatioRegion> merged;
  for (const RatioRegion& region : joint) {
    if (!merged.empty() &&
        std::abs(merged.back().ratio - region.ratio) <= 1e-12 * merged.back().ratio) {
      merged.back().p_clean += region.p_clean;
      merged.back().p_pert += region.p_pert;
    } else {
      merged.push_back(region);
    }
  }
  return merged;
}

double NpBound(double p, const std::vector<RatioRegion>& regions, BoundSide side) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability outside [0, 1]");
  std::vector<RatioRegion> order = regions;
  std::stable_sort(order.begin(), order.end(),
                   [side](const RatioRegion& a, const RatioRegion& b) {
                     return side == BoundSide::kLower ? a.ratio > b.ratio : a.ratio < b.ratio;
                   });
  double remaining = p;
  double total = 0.0;
  for (const RatioRegion& r : order) {
    if (r.p_clean <= 0.0) {
      // Free for the upper bound, useless for the lower one.
      if (side == BoundSide::kUpper) total += r.p_pert;
      continue;
    }
    if (remaining <= 0.0) continue;
    const double take = std::min(remaining, r.p_clean);
    total += r.p_pert * (take / r.p_clean);
    remaining -= take;
  }
  return std::clamp(total, 0.0, 1.0);
}

double TupleMargin(double pa_lower, std::optional<double> pb_upper,
                   const RadiusTuple& r, const SparseMeasure& m, CertRule rule) {
  const std::vector<RatioRegion> regions = Regions(r, m);
  const double lower = NpBound(pa_lower, regions, BoundSide::kLower);
  if (rule == CertRule::kBinary) return lower - 0.5;
  if (!pb_upper) throw std::invalid_argument("multiclass rule needs a runner-up bound");
  return lower - NpBound(*pb_upper, regions, BoundSide::kUpper);
}

bool CertifyTuple(double pa_lower, std::optional<double> pb_upper,
                  const RadiusTuple& r, const SparseMeasure& m, CertRule rule) {
  return TupleMargin(pa_lower, pb_upper, r, m, rule) > 0.0;
}

std::vector<RadiusTuple> ParetoTuples(const CostModel& cm, double epsilon) {
  if (!(epsilon >= 0.0) || std::isinf(epsilon)) {
    throw std::invalid_argument("smoothing budgets must be finite and nonnegative");
  }
  const Cost costs[4] = {cm.ca_add, cm.ca_del, cm.cx_add, cm.cx_del};
  for (const Cost& c : costs) {
    if (c.is_zero()) throw std::invalid_argument("zero edit costs give unbounded radii");
  }
  auto max_radius = [&](int kind, double budget) {
    if (costs[kind].is_infinite() || budget < 0.0) return 0;
    return static_cast<int>(std::floor((budget + kBudgetSlack) / costs[kind].value()));
  };
  auto cost_of = [&](const int r[4]) {
    double total = 0.0;
    for (int k = 0; k < 4; ++k) total += r[k] == 0 ? 0.0 : r[k] * costs[k].value();
    return total;
  };

  auto spend = [&](int kind, int radius) {
    return radius == 0 ? 0.0 : radius * costs[kind].value();
  };

  std::vector<RadiusTuple> out;
  for (int ra_add = 0; ra_add <= max_radius(0, epsilon); ++ra_add) {
    const double left1 = epsilon - spend(0, ra_add);
    for (int ra_del = 0; ra_del <= max_radius(1, left1); ++ra_del) {
      const double left2 = left1 - spend(1, ra_del);
      for (int rx_add = 0; rx_add <= max_radius(2, left2); ++rx_add) {
        const double left3 = left2 - spend(2, rx_add);
        int r[4] = {ra_add, ra_del, rx_add, max_radius(3, left3)};
        bool maximal = true;
        for (int k = 0; k < 4 && maximal; ++k) {
          if (costs[k].is_infinite()) continue;
          ++r[k];
          maximal = !FitsBudget(cost_of(r), epsilon);
          --r[k];
        }
        if (maximal) out.push_back(RadiusTuple{r[0], r[1], r[2], r[3]});
      }
    }
  }
  return out;
}

SmoothingCertificate CertifyGedSmoothing(const std::vector<std::int64_t>& counts,
                                         const CostModel& cm, const SparseMeasure& m,
                                         double alpha,
                                         const std::vector<double>& epsilons,
                                         CertRule rule, std::optional<int> label) {
  if (counts.empty()) throw std::invalid_argument("no vote counts");
  std::int64_t total = 0;
  std::size_t best = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 0) throw std::invalid_argument("negative vote count");
    total += counts[k];
    if (counts[k] > counts[best]) best = k;
  }
  if (label) {
    if (*label < 0 || static_cast<std::size_t>(*label) >= counts.size()) {
      throw std::invalid_argument("label outside the vote vector");
    }
    best = static_cast<std::size_t>(*label);
  }
  std::int64_t runner_up = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (k != best) runner_up = std::max(runner_up, counts[k]);
  }
  SmoothingCertificate out;
  out.label = static_cast<int>(best);
  out.pa_lower = ClopperPearson(counts[best], total, alpha, BoundSide::kLower);
  out.pb_upper = ClopperPearson(runner_up, total, alpha, BoundSide::kUpper);
  const std::optional<double> pb =
      rule == CertRule::kMulticlass ? std::optional<double>(out.pb_upper) : std::nullopt;

  std::map<RadiusTuple, double> cache;
  auto margin = [&](const RadiusTuple& r) {
    auto it = cache.find(r);
    if (it != cache.end()) return it->second;
    double value = -kInf;
    try {
      value = TupleMargin(out.pa_lower, pb, r, m, rule);
    } catch (const std::invalid_argument&) {
      // Degenerate flip probabilities cannot certify a nonzero radius.
    }
    cache.emplace(r, value);
    return value;
  };

  const double zero_margin = margin(RadiusTuple{});
  bool prefix = true;
  for (double eps : epsilons) {
    if (!(zero_margin > 0.0)) {
      out.verdicts.push_back(Verdict::kAbstain);
      out.margins.push_back(zero_margin);
      prefix = false;
      continue;
    }
    double worst = kInf;
    for (const RadiusTuple& r : ParetoTuples(cm, eps)) worst = std::min(worst, margin(r));
    const bool certified = worst > 0.0;
    out.verdicts.push_back(certified ? Verdict::kCertified : Verdict::kNotCertified);
    out.margins.push_back(worst);
    prefix = prefix && certified;
    if (prefix) out.max_certified_epsilon = std::max(out.max_certified_epsilon, eps);
  }
  return out;
}

double CohenRadius(double pa_lower, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(pa_lower >= 0.0 && pa_lower <= 1.0)) {
    throw std::invalid_argument("probability outside [0, 1]");
  }
  if (pa_lower <= 0.5) return 0.0;
  if (pa_lower >= 1.0) return kInf;
  return sigma * NormalQuantile(pa_lower);
}

CenterSmoothingResult CenterSmoothFromLower(double p_lower,
                                            const std::vector<double>& sorted,
                                            double epsilon, double sigma,
                                            double alpha2) {
  if (sorted.empty()) throw std::invalid_argument("no sample distances");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be nonnegative");
  CenterSmoothingResult out;
  out.p_lower = p_lower;
  if (!(p_lower > 0.5)) return out;
  out.p_shifted = p_lower >= 1.0 ? 1.0 : NormalCdf(NormalQuantile(p_lower) - epsilon / sigma);
  if (!(out.p_shifted > 0.5)) return out;
  // Smallest order statistic that upper-bounds the p_shifted-quantile with
  // confidence 1 - alpha2.
  const auto n = static_cast<std::int64_t>(sorted.size());
  std::int64_t lo = 1, hi = n + 1;
  while (lo < hi) {
    const std::int64_t mid = (lo + hi) / 2;
    if (ClopperPearson(mid, n, alpha2, BoundSide::kLower) >= out.p_shifted) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  if (lo > n) return out;
  out.abstain = false;
  out.delta_bound = sorted[static_cast<std::size_t>(lo - 1)];
  return out;
}

CenterSmoothingResult CenterSmoothCertify(std::vector<double> distances,
                                          double epsilon, double sigma,
                                          const CenterSmoothingParams& params) {
  if (distances.empty()) throw std::invalid_argument("no sample distances");
  std::sort(distances.begin(), distances.end());
  const double radius = Median(distances) + params.delta;
  const auto inside = static_cast<std::int64_t>(
      std::upper_bound(distances.begin(), distances.end(), radius) - distances.begin());
  const double p_lower = ClopperPearson(inside, static_cast<std::int64_t>(distances.size()),
                                        params.alpha1, BoundSide::kLower);
  return CenterSmoothFromLower(p_lower, distances, epsilon, sigma, params.alpha2);
}

}  // namespace gedcert
