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

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "gedcert/models.h"
#include "oracles/oracles.h"

namespace gedcert {
namespace {

CostModel Costs(double a_add, double a_del, double x_add, double x_del) {
  auto cost = [](double v) { return std::isinf(v) ? Cost::Infinite() : Cost(v); };
  CostModel cm;
  cm.ca_add = cost(a_add);
  cm.ca_del = cost(a_del);
  cm.cx_add = cost(x_add);
  cm.cx_del = cost(x_del);
  return cm;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(RegionsTest, ZeroRadiusIsOneUnitRegion) {
  const auto regions = Regions(RadiusTuple{}, SparseMeasure{});
  ASSERT_EQ(regions.size(), 1U);
  EXPECT_EQ(regions[0].ratio, 1.0);
  EXPECT_EQ(regions[0].p_clean, 1.0);
  EXPECT_EQ(regions[0].p_pert, 1.0);
}

TEST(RegionsTest, TwoRegionExample) {
  SparseMeasure m;
  m.pa_add = 0.2;
  m.pa_del = 0.4;
  const auto regions = Regions(RadiusTuple{1, 0, 0, 0}, m);
  ASSERT_EQ(regions.size(), 2U);
  EXPECT_NEAR(regions[0].ratio, 2.0, 1e-15);
  EXPECT_NEAR(regions[0].p_clean, 0.8, 1e-15);
  EXPECT_NEAR(regions[0].p_pert, 0.4, 1e-15);
  EXPECT_NEAR(regions[1].ratio, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(regions[1].p_clean, 0.2, 1e-15);
  EXPECT_NEAR(regions[1].p_pert, 0.6, 1e-15);
  EXPECT_NEAR(NpBound(0.9, regions, BoundSide::kLower), 0.7, 1e-12);
  EXPECT_TRUE(CertifyTuple(0.9, std::nullopt, RadiusTuple{1, 0, 0, 0}, m, CertRule::kBinary));
}

TEST(RegionsTest, DegenerateProbabilitiesThrow) {
  SparseMeasure m{0.1, 0.1, 0.0, 0.4};
  EXPECT_THROW(Regions(RadiusTuple{1, 0, 0, 0}, m), std::invalid_argument);
  EXPECT_NO_THROW(Regions(RadiusTuple{0, 0, 1, 1}, m));
}

SparseMeasure RandomMeasure(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.02, 0.98);
  return SparseMeasure{u(rng), u(rng), u(rng), u(rng)};
}

RadiusTuple RandomTuple(std::mt19937_64& rng, int max_bits) {
  RadiusTuple r;
  int* fields[4] = {&r.ra_add, &r.ra_del, &r.rx_add, &r.rx_del};
  const int bits = static_cast<int>(rng() % static_cast<unsigned>(max_bits + 1));
  for (int b = 0; b < bits; ++b) ++*fields[rng() % 4];
  return r;
}

TEST(RegionsTest, MassesSumToOne) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto regions = Regions(RandomTuple(rng, 10), RandomMeasure(rng));
    double clean = 0.0, pert = 0.0;
    for (const auto& r : regions) {
      clean += r.p_clean;
      pert += r.p_pert;
      EXPECT_GE(r.p_clean, 0.0);
      EXPECT_GE(r.p_pert, 0.0);
    }
    EXPECT_NEAR(clean, 1.0, 1e-12);
    EXPECT_NEAR(pert, 1.0, 1e-12);
  }
}

TEST(NpBoundTest, MatchesAtomicEnumeration) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const SparseMeasure m = RandomMeasure(rng);
    const RadiusTuple r = RandomTuple(rng, 10);
    const auto regions = Regions(r, m);
    for (int k = 0; k < 5; ++k) {
      const double p = u(rng);
      EXPECT_NEAR(NpBound(p, regions, BoundSide::kLower),
                  oracle::NeymanPearsonAtoms(p, r, m, true), 1e-10);
      EXPECT_NEAR(NpBound(p, regions, BoundSide::kUpper),
                  oracle::NeymanPearsonAtoms(p, r, m, false), 1e-10);
    }
  }
}

TEST(NpBoundTest, OrderingAndMonotonicity) {
  std::mt19937_64 rng(3);
  EXPECT_EQ(NpBound(0.37, {RatioRegion{}}, BoundSide::kLower), 0.37);
  EXPECT_EQ(NpBound(0.37, {RatioRegion{}}, BoundSide::kUpper), 0.37);
  for (int trial = 0; trial < 100; ++trial) {
    const auto regions = Regions(RandomTuple(rng, 8), RandomMeasure(rng));
    double prev_lo = 0.0, prev_hi = 0.0;
    for (double p = 0.0; p <= 1.0; p += 0.05) {
      const double lo = NpBound(p, regions, BoundSide::kLower);
      const double hi = NpBound(p, regions, BoundSide::kUpper);
      EXPECT_LE(lo, hi + 1e-15);
      EXPECT_GE(lo, prev_lo - 1e-15);
      EXPECT_GE(hi, prev_hi - 1e-15);
      prev_lo = lo;
      prev_hi = hi;
    }
  }
}

TEST(CertifyTupleTest, SmallerRadiiStayCertified) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.5, 1.0);
  int certified = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const SparseMeasure m = RandomMeasure(rng);
    const RadiusTuple r = RandomTuple(rng, 6);
    const double pa = u(rng);
    EXPECT_EQ(CertifyTuple(pa, std::nullopt, RadiusTuple{}, m, CertRule::kBinary), pa > 0.5);
    if (!CertifyTuple(pa, std::nullopt, r, m, CertRule::kBinary)) continue;
    ++certified;
    RadiusTuple smaller = r;
    int* fields[4] = {&smaller.ra_add, &smaller.ra_del, &smaller.rx_add, &smaller.rx_del};
    for (int* f : fields) {
      if (*f == 0) continue;
      --*f;
      EXPECT_TRUE(CertifyTuple(pa, std::nullopt, smaller, m, CertRule::kBinary));
      ++*f;
    }
    // A runner-up bound below 1 - pa can only help the multiclass rule.
    EXPECT_TRUE(
        CertifyTuple(pa, std::max(0.0, 1.0 - pa - 0.01), r, m, CertRule::kMulticlass));
  }
  EXPECT_GT(certified, 20);
}

TEST(ParetoTest, Examples) {
  const std::vector<RadiusTuple> two = ParetoTuples(Costs(2, 1, kInf, kInf), 2.0);
  ASSERT_EQ(two.size(), 2U);
  EXPECT_EQ(two[0], (RadiusTuple{0, 2, 0, 0}));
  EXPECT_EQ(two[1], (RadiusTuple{1, 0, 0, 0}));
  const std::vector<RadiusTuple> none = ParetoTuples(Costs(2, 3, kInf, 5), 1.5);
  ASSERT_EQ(none.size(), 1U);
  EXPECT_EQ(none[0], RadiusTuple{});
  EXPECT_THROW(ParetoTuples(Costs(0, 1, 1, 1), 1.0), std::invalid_argument);
}

TEST(ParetoTest, MatchesBoxScan) {
  std::mt19937_64 rng(5);
  const double choices[] = {0.5, 1.0, 1.5, 2.0, 3.0, kInf};
  for (int trial = 0; trial < 150; ++trial) {
    const CostModel cm = Costs(choices[rng() % 6], choices[rng() % 6], choices[rng() % 6],
                               choices[rng() % 6]);
    const double eps = 0.5 * static_cast<double>(rng() % 13);
    std::vector<RadiusTuple> got = ParetoTuples(cm, eps);
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, oracle::ParetoByScan(cm, eps)) << "trial " << trial;
  }
}

TEST(GedSmoothingTest, VerdictsAndAbstention) {
  SparseMeasure m{0.1, 0.3, 0.1, 0.3};
  const CostModel cm = Costs(1, 1, 1, 1);
  const std::vector<double> grid = {0, 0.5, 1, 2, 3, 4, 6, 8};
  const SmoothingCertificate strong =
      CertifyGedSmoothing({5, 9990, 5}, cm, m, 0.001, grid);
  EXPECT_EQ(strong.label, 1);
  EXPECT_EQ(strong.verdicts.front(), Verdict::kCertified);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    EXPECT_FALSE(strong.verdicts[i] == Verdict::kCertified &&
                 strong.verdicts[i - 1] != Verdict::kCertified);
    EXPECT_LE(strong.margins[i], strong.margins[i - 1] + 1e-15);
  }
  EXPECT_GE(strong.max_certified_epsilon, 1.0);
  const SmoothingCertificate weak = CertifyGedSmoothing({50, 52}, cm, m, 0.001, grid);
  for (Verdict v : weak.verdicts) EXPECT_EQ(v, Verdict::kAbstain);
  EXPECT_EQ(weak.max_certified_epsilon, -1.0);
  // A label fixed by a separate prediction sample is bounded as given.
  const SmoothingCertificate fixed =
      CertifyGedSmoothing({5, 9990, 5}, cm, m, 0.001, grid, CertRule::kBinary, 0);
  EXPECT_EQ(fixed.label, 0);
  for (Verdict v : fixed.verdicts) EXPECT_EQ(v, Verdict::kAbstain);
  EXPECT_THROW(CertifyGedSmoothing({1, 2}, cm, m, 0.001, grid, CertRule::kBinary, 2),
               std::invalid_argument);
  // Budgets below every cost certify iff the prediction itself is confident.
  const SmoothingCertificate small =
      CertifyGedSmoothing({0, 700, 300}, Costs(2, 2, 2, 2), m, 0.001, {0.0, 1.5});
  EXPECT_EQ(small.verdicts[1], Verdict::kCertified);
  // Degenerate probabilities cannot certify a nonzero radius.
  const SmoothingCertificate degenerate = CertifyGedSmoothing(
      {0, 1000}, cm, SparseMeasure{0.0, 0.3, 0.1, 0.3}, 0.001, {0.0, 1.0});
  EXPECT_EQ(degenerate.verdicts[0], Verdict::kCertified);
  EXPECT_EQ(degenerate.verdicts[1], Verdict::kNotCertified);
}

TEST(GedSmoothingTest, HigherInsertionCostCertifiesMore) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> votes(500, 1000);
  const SparseMeasure m{0.1, 0.4, 0.05, 0.5};
  const std::vector<double> grid = {0, 1, 2, 3, 4, 5, 6};
  for (int trial = 0; trial < 50; ++trial) {
    const std::int64_t top = votes(rng);
    const std::vector<std::int64_t> counts = {top, 1000 - top};
    for (CertRule rule : {CertRule::kBinary, CertRule::kMulticlass}) {
      const SmoothingCertificate cheap =
          CertifyGedSmoothing(counts, Costs(1, 1, kInf, kInf), m, 0.01, grid, rule);
      const SmoothingCertificate dear =
          CertifyGedSmoothing(counts, Costs(4, 1, kInf, kInf), m, 0.01, grid, rule);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_GE(dear.margins[i], cheap.margins[i] - 1e-15);
      }
    }
  }
}

TEST(GedSmoothingTest, InvariantUnderIsomorphism) {
  std::mt19937_64 rng(7);
  const GnnModel gcn = RandomModel(Architecture::kGcn, {4, 8, 3}, 3, 44);
  const GraphLabeler base = [&](const AttributedGraph& s) {
    return ArgmaxRows(GcnForward(gcn, s));
  };
  const SparseMeasure m{0.05, 0.2, 0.02, 0.2};
  MonteCarloOptions opt;
  opt.samples = 500;
  opt.seed = 3;
  const std::vector<double> grid = {0, 1, 2, 3};
  for (int trial = 0; trial < 10; ++trial) {
    const AttributedGraph g = oracle::RandomGraph(rng, 6, 4, 0.4, true);
    std::vector<int> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const Permutation p(perm);
    const VoteCounts a = MajorityVote(base, g, m, 3, opt);
    const VoteCounts b =
        MajorityVote(base, ApplyIsomorphism(p, g), m, 3, opt, p.Inverse().data());
    for (int i = 0; i < 6; ++i) {
      auto row = [](const VoteCounts& v, int r) {
        return std::vector<std::int64_t>(v.counts.row(r).begin(), v.counts.row(r).end());
      };
      const auto ca = CertifyGedSmoothing(row(a, i), Costs(1, 1, 1, 1), m, 0.01, grid);
      const auto cb = CertifyGedSmoothing(row(b, p[i]), Costs(1, 1, 1, 1), m, 0.01, grid);
      EXPECT_EQ(ca.verdicts, cb.verdicts);
      EXPECT_EQ(ca.label, cb.label);
    }
  }
}

TEST(CohenTest, RadiusValues) {
  EXPECT_EQ(CohenRadius(0.5, 0.2), 0.0);
  EXPECT_EQ(CohenRadius(0.3, 0.2), 0.0);
  EXPECT_NEAR(CohenRadius(0.99, 0.2), 0.46527, 1e-4);
  double prev = 0.0;
  for (double p = 0.51; p < 1.0; p += 0.01) {
    const double r = CohenRadius(p, 0.7);
    EXPECT_GT(r, prev);
    prev = r;
  }
  EXPECT_THROW(CohenRadius(0.9, 0.0), std::invalid_argument);
}

TEST(CenterSmoothingTest, BoundaryCases) {
  const std::vector<double> zeros(200, 0.0);
  const CenterSmoothingResult r = CenterSmoothCertify(zeros, 0.0, 1.0);
  EXPECT_FALSE(r.abstain);
  EXPECT_EQ(r.delta_bound, 0.0);
  EXPECT_TRUE(CenterSmoothFromLower(0.5, zeros, 0.0, 1.0, 0.005).abstain);
  // A large perturbation pushes the shifted mass below one half.
  EXPECT_TRUE(CenterSmoothCertify(zeros, 10.0, 1.0).abstain);
  EXPECT_THROW(CenterSmoothCertify({}, 0.0, 1.0), std::invalid_argument);
}

TEST(CenterSmoothingTest, DeltaBetweenMedianAndMax) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> d(1000);
    for (double& v : d) v = std::abs(gauss(rng));
    const CenterSmoothingResult r = CenterSmoothCertify(d, 0.05, 0.5);
    if (r.abstain) continue;
    std::sort(d.begin(), d.end());
    EXPECT_GE(r.delta_bound, d[499]);
    EXPECT_LE(r.delta_bound, d.back());
  }
}

TEST(CenterSmoothingTest, QuantileCoverage) {
  // Gaussian outputs in R^3 around a fixed center: distances are sigma * chi(3).
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss;
  const double sigma = 0.3, alpha2 = 0.05, p_lower = 0.9, eps = 0.2;
  const boost::math::chi_squared_distribution<double> chi2(3.0);
  int runs = 0, covered = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> d(300);
    for (double& v : d) {
      const double a = gauss(rng), b = gauss(rng), c = gauss(rng);
      v = sigma * std::sqrt(a * a + b * b + c * c);
    }
    std::sort(d.begin(), d.end());
    const CenterSmoothingResult r = CenterSmoothFromLower(p_lower, d, eps, 1.0, alpha2);
    ASSERT_FALSE(r.abstain);
    const double truth = sigma * std::sqrt(boost::math::quantile(chi2, r.p_shifted));
    ++runs;
    covered += r.delta_bound >= truth ? 1 : 0;
  }
  EXPECT_GE(static_cast<double>(covered) / runs, 1.0 - alpha2);
}

}  // namespace
}  // namespace gedcert
