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

#include "gedcert/smoothing.h"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "gedcert/parallel.h"
#include "gedcert/rng.h"

namespace gedcert {
namespace {

bool IsProbability(double p) { return p >= 0.0 && p <= 1.0; }

constexpr std::uint64_t kFeatureStream = 0;
constexpr std::uint64_t kDirectedStream = 1;
constexpr std::uint64_t kUndirectedStream = 2;
constexpr std::int64_t kChunk = 1024;

}  // namespace

void SparseMeasure::Validate() const {
  if (!IsProbability(px_add) || !IsProbability(px_del) || !IsProbability(pa_add) ||
      !IsProbability(pa_del)) {
    throw std::invalid_argument("flip probabilities must lie in [0, 1]");
  }
}

void GaussianMeasure::Validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("sigma must be positive");
  }
}

AttributedGraph SampleSparse(const AttributedGraph& g, const SparseMeasure& m,
                             std::uint64_t seed, std::uint64_t index,
                             const std::vector<int>& node_keys) {
  const int n = g.num_nodes();
  if (!node_keys.empty() && static_cast<int>(node_keys.size()) != n) {
    throw std::invalid_argument("need one noise key per node");
  }
  auto key = [&](int i) -> std::uint64_t {
    return static_cast<std::uint64_t>(
        node_keys.empty() ? i : node_keys[static_cast<std::size_t>(i)]);
  };
  const CounterRng rng(seed);
  AttributedGraph out = g;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < g.num_features(); ++c) {
      const bool bit = g.X(r, c) != 0;
      const double p = bit ? m.px_del : m.px_add;
      if (p > 0.0 && rng.Uniform({index, kFeatureStream, key(r),
                                  static_cast<std::uint64_t>(c)}) < p) {
        out.X(r, c) = bit ? 0 : 1;
      }
    }
  }
  for (int r = 0; r < n; ++r) {
    for (int c = g.undirected ? r + 1 : 0; c < n; ++c) {
      if (r == c) continue;
      const bool bit = g.A(r, c) != 0;
      const double p = bit ? m.pa_del : m.pa_add;
      if (p <= 0.0) continue;
      const double u =
          g.undirected
              ? rng.Uniform({index, kUndirectedStream, std::min(key(r), key(c)),
                             std::max(key(r), key(c))})
              : rng.Uniform({index, kDirectedStream, key(r), key(c)});
      if (u < p) {
        out.A(r, c) = bit ? 0 : 1;
        if (g.undirected) out.A(c, r) = out.A(r, c);
      }
    }
  }
  return out;
}

Eigen::MatrixXd GaussianNoise(Eigen::Index rows, Eigen::Index cols,
                              const GaussianMeasure& m, std::uint64_t seed,
                              std::uint64_t index) {
  const CounterRng rng(seed);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      out(r, c) = m.sigma * rng.Gaussian(index, static_cast<std::uint64_t>(r),
                                         static_cast<std::uint64_t>(c), 0x5eed);
    }
  }
  return out;
}

VoteCounts MajorityVote(const GraphLabeler& base, const AttributedGraph& g,
                        const SparseMeasure& m, int num_classes,
                        const MonteCarloOptions& options,
                        const std::vector<int>& node_keys) {
  m.Validate();
  if (options.samples < 1) throw std::invalid_argument("need at least one sample");
  if (num_classes < 1) throw std::invalid_argument("need at least one class");
  VoteCounts out;
  out.samples = options.samples;
  std::vector<std::vector<int>> chunk;
  for (std::int64_t start = 0; start < options.samples; start += kChunk) {
    const std::int64_t size = std::min(kChunk, options.samples - start);
    chunk.assign(static_cast<std::size_t>(size), {});
    ParallelFor(static_cast<std::size_t>(size), options.threads, [&](std::size_t i) {
      const std::uint64_t index =
          options.first_index + static_cast<std::uint64_t>(start) + i;
      chunk[i] = base(SampleSparse(g, m, options.seed, index, node_keys));
    });
    for (const std::vector<int>& labels : chunk) {
      if (out.counts.size() == 0) {
        out.counts.setZero(static_cast<Eigen::Index>(labels.size()), num_classes);
      }
      if (static_cast<Eigen::Index>(labels.size()) != out.counts.rows()) {
        throw std::runtime_error("base model changed its output size");
      }
      for (std::size_t c = 0; c < labels.size(); ++c) {
        if (labels[c] < 0 || labels[c] >= num_classes) {
          throw std::out_of_range("base model label out of range");
        }
        ++out.counts(static_cast<Eigen::Index>(c), labels[c]);
      }
    }
  }
  for (Eigen::Index c = 0; c < out.counts.rows(); ++c) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < out.counts.cols(); ++k) {
      if (out.counts(c, k) > out.counts(c, best)) best = k;
    }
    out.labels.push_back(static_cast<int>(best));
  }
  return out;
}

SchemeKind ParseSchemeKind(const std::string& text) {
  if (text == "majority") return SchemeKind::kMajority;
  if (text == "expected") return SchemeKind::kExpected;
  if (text == "median") return SchemeKind::kMedian;
  if (text == "center") return SchemeKind::kCenter;
  throw std::invalid_argument("unknown smoothing scheme: " + text);
}

std::vector<Eigen::MatrixXd> SampleOutputs(
    const MatrixModel& base, const Eigen::MatrixXd& x, const GaussianMeasure& m,
    const MonteCarloOptions& options,
    const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& noise_map) {
  m.Validate();
  if (options.samples < 1) throw std::invalid_argument("need at least one sample");
  std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(options.samples));
  ParallelFor(out.size(), options.threads, [&](std::size_t i) {
    Eigen::MatrixXd noise =
        GaussianNoise(x.rows(), x.cols(), m, options.seed, options.first_index + i);
    if (noise_map) noise = noise_map(noise);
    out[i] = base(x + noise);
  });
  return out;
}

double Median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of no values");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

std::size_t CenterIndex(const std::vector<Eigen::MatrixXd>& samples) {
  if (samples.empty()) throw std::invalid_argument("center of no samples");
  const std::size_t n = samples.size();
  if (n == 1) return 0;
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                               static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (samples[i] - samples[j]).norm();
      dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
      dist(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = d;
    }
  }
  std::size_t best = 0;
  double best_median = 0.0;
  std::vector<double> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.push_back(dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    const double med = Median(row);
    if (i == 0 || med < best_median) {
      best = i;
      best_median = med;
    }
  }
  return best;
}

Eigen::MatrixXd ApplyScheme(SchemeKind kind, const std::vector<Eigen::MatrixXd>& samples) {
  if (samples.empty()) throw std::invalid_argument("scheme applied to no samples");
  switch (kind) {
    case SchemeKind::kExpected: {
      Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(samples[0].rows(), samples[0].cols());
      for (const auto& s : samples) sum += s;
      return sum / static_cast<double>(samples.size());
    }
    case SchemeKind::kMedian: {
      Eigen::MatrixXd out(samples[0].rows(), samples[0].cols());
      std::vector<double> values(samples.size());
      for (Eigen::Index r = 0; r < out.rows(); ++r) {
        for (Eigen::Index c = 0; c < out.cols(); ++c) {
          for (std::size_t i = 0; i < samples.size(); ++i) values[i] = samples[i](r, c);
          out(r, c) = Median(values);
        }
      }
      return out;
    }
    case SchemeKind::kCenter:
      return samples[CenterIndex(samples)];
    case SchemeKind::kMajority:
      break;
  }
  throw std::invalid_argument("majority vote needs discrete outputs");
}

double ClopperPearson(std::int64_t successes, std::int64_t trials, double alpha,
                      BoundSide side) {
  if (trials < 1 || successes < 0 || successes > trials) {
    throw std::invalid_argument("need 0 <= successes <= trials and trials >= 1");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const double k = static_cast<double>(successes);
  const double n = static_cast<double>(trials);
  double a = 0.0, b = 0.0, target = 0.0;
  if (side == BoundSide::kLower) {
    if (successes == 0) return 0.0;
    // P(Bin(n, p) >= k) = I_p(k, n - k + 1) = alpha.
    a = k;
    b = n - k + 1.0;
    target = alpha;
  } else {
    if (successes == trials) return 1.0;
    // P(Bin(n, p) <= k) = alpha, i.e. I_p(k + 1, n - k) = 1 - alpha.
    a = k + 1.0;
    b = n - k;
    target = 1.0 - alpha;
  }
  double lo = 0.0, hi = 1.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-16; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (boost::math::ibeta(a, b, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double PermutationHarness(const GraphLabeler& base, bool graph_level,
                          const AttributedGraph& g, const SparseMeasure& m,
                          int num_classes, const MonteCarloOptions& options,
                          int trials) {
  const int n = g.num_nodes();
  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  const std::vector<int> clean = base(g);
  const VoteCounts reference = MajorityVote(base, g, m, num_classes, options);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    const Permutation p(perm);
    const AttributedGraph moved = ApplyIsomorphism(p, g);
    auto component = [&](int i) { return graph_level ? i : p[i]; };

    const std::vector<int> moved_clean = base(moved);
    if (moved_clean.size() != clean.size()) {
      throw std::logic_error("base model output size is not preserved");
    }
    for (std::size_t i = 0; i < clean.size(); ++i) {
      if (moved_clean[static_cast<std::size_t>(component(static_cast<int>(i)))] != clean[i]) {
        throw std::logic_error("base model is not permutation equivariant");
      }
    }

    const VoteCounts coupled =
        MajorityVote(base, moved, m, num_classes, options, p.Inverse().data());
    double deviation = 0.0;
    for (std::size_t i = 0; i < reference.labels.size(); ++i) {
      const int j = component(static_cast<int>(i));
      const bool same_label =
          coupled.labels[static_cast<std::size_t>(j)] == reference.labels[i];
      const bool same_counts =
          coupled.counts.row(j) == reference.counts.row(static_cast<Eigen::Index>(i));
      deviation += (same_label && same_counts) ? 0.0 : 1.0;
    }
    worst = std::max(worst, deviation);
  }
  return worst;
}

Eigen::MatrixXd IsometryAction::ApplyLinear(const Eigen::MatrixXd& points) const {
  return points * linear.transpose();
}

Eigen::MatrixXd IsometryAction::Apply(const Eigen::MatrixXd& points) const {
  return ApplyLinear(points).rowwise() + shift.transpose();
}

Eigen::MatrixXd IsometryAction::Invert(const Eigen::MatrixXd& points) const {
  return (points.rowwise() - shift.transpose()) * linear;
}

IsometryAction IsometryAction::Identity(int dims) {
  return IsometryAction{Eigen::MatrixXd::Identity(dims, dims), Eigen::VectorXd::Zero(dims)};
}

double IsometryHarness(const MatrixModel& base, SchemeKind kind,
                       const Eigen::MatrixXd& x, const GaussianMeasure& m,
                       const MonteCarloOptions& options,
                       const std::vector<IsometryAction>& actions) {
  const Eigen::MatrixXd reference = ApplyScheme(kind, SampleOutputs(base, x, m, options));
  const Eigen::MatrixXd clean = base(x);
  double worst = 0.0;
  for (const IsometryAction& action : actions) {
    const double premise =
        (base(action.Apply(x)) - action.Apply(clean)).cwiseAbs().maxCoeff();
    if (!(premise <= 1e-10 * (1.0 + clean.cwiseAbs().maxCoeff()))) {
      throw std::logic_error("base model is not equivariant to the action");
    }
    const Eigen::MatrixXd moved = ApplyScheme(
        kind, SampleOutputs(base, action.Apply(x), m, options,
                            [&](const Eigen::MatrixXd& noise) {
                              return action.ApplyLinear(noise);
                            }));
    worst = std::max(worst, (action.Invert(moved) - reference).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace gedcert
