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

#include "acceptance/criteria.h"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <unistd.h>

#include "gedcert/cert_attr.h"
#include "gedcert/cert_struct.h"
#include "gedcert/io.h"
#include "gedcert/knapsack.h"
#include "gedcert/runner.h"
#include "gedcert/smoothing.h"
#include "gedcert/smoothing_cert.h"
#include "gedcert/synthetic.h"
#include "oracles/oracles.h"

namespace gedcert::acceptance {
namespace {

using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Attribute / structure (insertion, deletion) cost patterns of the soundness
// sweep.
constexpr std::pair<double, double> kCostPatterns[] = {{1, 1}, {4, 1}, {1, 4}, {2, 3}};

int Count(int full, const SuiteOptions& options) {
  return std::max(1, static_cast<int>(std::lround(full * options.scale)));
}

std::string Format(const char* fmt, double a = 0, double b = 0, double c = 0,
                   double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c, d);
  return buf;
}

// Runs `body`, times it and fails the criterion if it overran `limit`.
CriterionResult Timed(int id, std::string name, double limit,
                      const std::function<bool(std::string&)>& body) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  const auto start = Clock::now();
  try {
    r.pass = body(r.detail);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (r.seconds > limit) {
    r.pass = false;
    r.detail += Format("; over the %.0f s limit", limit);
  }
  return r;
}

CostModel AttributeCosts(double add, double del) {
  CostModel cm;
  cm.cx_add = Cost(add);
  cm.cx_del = Cost(del);
  return cm;
}

double MinOverOthers(const Eigen::MatrixXd& margins, int row, int label) {
  double m = kInf;
  for (int k = 0; k < margins.cols(); ++k) {
    if (k != label) m = std::min(m, margins(row, k));
  }
  return m;
}

// True when no admissible flip set changes the prediction at `target`.
bool PprRobust(const oracle::PprInstance& inst, const FragileEdgeSet& fragile, int target,
               int label) {
  for (int k = 0; k < inst.logits.cols(); ++k) {
    if (k == label) continue;
    const oracle::FlipSearch w = oracle::ExhaustiveFlips(
        inst.model.alpha, inst.logits, inst.graph.A, fragile.fragile, fragile.rho,
        fragile.cost_add.value(), fragile.cost_del.value(), target, label, k);
    if (!(w.min_margin > 0.0)) return false;
  }
  return true;
}

int RunCommand(const std::string& command) {
  const int status = std::system(command.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

std::string Slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

bool Nonincreasing(const std::vector<SummaryRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].certified_accuracy > rows[i - 1].certified_accuracy) return false;
  }
  return true;
}

std::vector<AttributedGraph> RandomGraphSet(std::uint64_t seed, int count, int features) {
  std::mt19937_64 rng(seed);
  std::vector<AttributedGraph> graphs;
  for (int i = 0; i < count; ++i) {
    AttributedGraph g = oracle::RandomGraph(rng, 5 + static_cast<int>(rng() % 4), features,
                                            0.35, true);
    g.labels.clear();
    graphs.push_back(std::move(g));
  }
  return graphs;
}

}  // namespace

CriterionResult KnapsackExactness(const SuiteOptions& options) {
  return Timed(1, "knapsack exactness", 10.0, [&](std::string& detail) {
    std::mt19937_64 rng(1001);
    const int n = Count(500, options);
    int mismatches = 0;
    for (int t = 0; t < n; ++t) {
      const TwoCostInstance inst = oracle::RandomTwoCost(rng, 4, 4, 6);
      const double got = CombineGlobal(PrecomputeLocal(inst), inst.cost_add, inst.cost_del,
                                       inst.epsilon, inst.rho)
                             .value;
      mismatches += got == oracle::Knapsack(inst) ? 0 : 1;
    }
    detail = Format("%.0f/%.0f instances differ from the exhaustive optimum", mismatches, n);
    return mismatches == 0;
  });
}

CriterionResult RelaxationDominance(const SuiteOptions& options) {
  return Timed(2, "relaxation dominance + KKT", 10.0, [&](std::string& detail) {
    std::mt19937_64 rng(1001);
    const int n = Count(500, options);
    int below = 0;
    for (int t = 0; t < n; ++t) {
      const TwoCostInstance inst = oracle::RandomTwoCost(rng, 4, 4, 6);
      const double relaxed = SolveRelaxed(GeneralInstance::FromTwoCost(inst)).value;
      below += relaxed >= oracle::Knapsack(inst) ? 0 : 1;
    }
    std::mt19937_64 general(2002);
    double worst = 0.0;
    for (int t = 0; t < n; ++t) {
      const GeneralInstance inst = oracle::RandomGeneral(general, 5, 5);
      worst = std::max(worst, VerifyKkt(inst, SolveRelaxed(inst)));
    }
    detail = Format("%.0f relaxed values below exact; max KKT residual %.3g", below, worst);
    return below == 0 && worst < 1e-8;
  });
}

CriterionResult SoundnessByEnumeration(const SuiteOptions& options) {
  return Timed(3, "certificate soundness by enumeration", 300.0, [&](std::string& detail) {
    const int n = Count(50, options);
    int violations = 0;
    int certified[4] = {0, 0, 0, 0};
    int total[4] = {0, 0, 0, 0};

    std::mt19937_64 rng(3003);
    for (int t = 0; t < n; ++t) {
      const auto [add, del] = kCostPatterns[t % 4];
      const oracle::CertInstance inst = oracle::RandomAttributeInstance(rng, add, del);
      const oracle::AttributeWorstCase w =
          oracle::ExhaustiveAttributes(inst.model, inst.graph, inst.cm);
      const auto ibp = IbpCertify(inst.model, inst.graph, inst.cm);
      const auto poly = PolytopeCertify(inst.model, inst.graph, inst.cm);
      for (std::size_t v = 0; v < ibp.size(); ++v) {
        total[0] += 1;
        total[1] += 1;
        if (ibp[v].certified) {
          ++certified[0];
          violations += w.robust[v] && ibp[v].label == w.labels[v] ? 0 : 1;
        }
        if (poly[v].certified) {
          ++certified[1];
          violations += w.robust[v] && poly[v].label == w.labels[v] ? 0 : 1;
        }
      }
    }

    for (int t = 0; t < n; ++t) {
      const bool undirected = t % 2 == 1;
      oracle::CertInstance inst = oracle::RandomGraphClsInstance(rng, 5, undirected);
      const auto [add, del] = kCostPatterns[t % 4];
      inst.cm.ca_add = Cost(add);
      inst.cm.ca_del = Cost(del);
      inst.cm.epsilon = std::min(inst.cm.epsilon, 3.0);
      const int classes = inst.model.num_classes();
      std::vector<GraphCertificate> certs = {GraphClsCertify(inst.model, inst.graph, inst.cm)};
      if (undirected) {
        certs.push_back(GraphClsCertifySymmetric(inst.model, inst.graph, inst.cm));
      }
      for (std::size_t c = 0; c < certs.size(); ++c) {
        const int y = certs[c].summary.label;
        ++total[2];
        if (!certs[c].summary.certified) continue;
        ++certified[2];
        // The plain bound covers directed edits; the dual covers symmetric ones.
        for (int k = 0; k < classes; ++k) {
          if (k == y) continue;
          const oracle::GraphWorstCase w =
              oracle::ExhaustiveGraphCls(inst.model, inst.graph, inst.cm, y, k, c == 1);
          violations += w.min_margin > 0.0 ? 0 : 1;
        }
      }
    }

    for (int t = 0; t < n; ++t) {
      oracle::PprInstance inst = oracle::RandomPprInstance(rng, 5, 8);
      const auto [add, del] = kCostPatterns[t % 4];
      inst.fragile.cost_add = Cost(add);
      inst.fragile.cost_del = Cost(del);
      for (int v = 0; v < inst.graph.num_nodes(); ++v) {
        const NodeCertificate c =
            PippnpCertify(inst.model, inst.logits, inst.graph, inst.fragile, v);
        ++total[3];
        if (!c.certified) continue;
        ++certified[3];
        violations += PprRobust(inst, inst.fragile, v, c.label) ? 0 : 1;
      }
    }
    detail = Format("%.0f violations; certified ibp %.0f, polytope %.0f, ", violations,
                    certified[0], certified[1]) +
             Format("graphcls %.0f, pippnp %.0f", certified[2], certified[3]) +
             Format(" of %.0f/%.0f/%.0f/%.0f", total[0], total[1], total[2], total[3]);
    return violations == 0 && certified[0] > 0 && certified[1] > 0 && certified[2] > 0 &&
           certified[3] > 0;
  });
}

CriterionResult UniformCostConsistency(const SuiteOptions& options) {
  return Timed(4, "uniform-cost consistency", 300.0, [&](std::string& detail) {
    const int n = Count(50, options);
    const double factors[] = {2.0, 3.0, 0.5, 4.0};
    const double units[] = {1.0, 2.0, 3.0};
    std::mt19937_64 rng(4004);
    int mismatches = 0, compared = 0;
    auto compare = [&](bool a, bool b) {
      ++compared;
      mismatches += a == b ? 0 : 1;
    };
    for (int t = 0; t < n; ++t) {
      const double k = factors[t % 4];
      const double c = units[t % 3];

      // Attribute certificates.
      const oracle::CertInstance attr = oracle::RandomAttributeInstance(rng, c, c);
      CostModel big = attr.cm;  // costs c * k at budget eps
      big.cx_add = Cost(c * k);
      big.cx_del = Cost(c * k);
      CostModel unit = attr.cm;  // costs c at budget eps / k
      unit.epsilon = attr.cm.epsilon / k;
      for (double& r : unit.rho) r /= k;
      const auto ibp_a = IbpCertify(attr.model, attr.graph, big);
      const auto ibp_b = IbpCertify(attr.model, attr.graph, unit);
      const auto poly_a = PolytopeCertify(attr.model, attr.graph, big);
      const auto poly_b = PolytopeCertify(attr.model, attr.graph, unit);
      for (std::size_t v = 0; v < ibp_a.size(); ++v) {
        compare(ibp_a[v].certified, ibp_b[v].certified);
        compare(poly_a[v].certified, poly_b[v].certified);
      }

      // Graph classifier.
      oracle::CertInstance cls = oracle::RandomGraphClsInstance(rng, 6, t % 2 == 0);
      CostModel cls_big = cls.cm, cls_unit = cls.cm;
      cls_big.ca_add = cls_big.ca_del = Cost(c * k);
      cls_unit.ca_add = cls_unit.ca_del = Cost(c);
      cls_unit.epsilon /= k;
      for (double& r : cls_unit.rho) r /= k;
      compare(GraphClsCertify(cls.model, cls.graph, cls_big).summary.certified,
              GraphClsCertify(cls.model, cls.graph, cls_unit).summary.certified);

      // PageRank diffusion.
      const oracle::PprInstance ppr = oracle::RandomPprInstance(rng, 6, 12);
      FragileEdgeSet ppr_big = ppr.fragile, ppr_unit = ppr.fragile;
      ppr_big.cost_add = ppr_big.cost_del = Cost(c * k);
      ppr_unit.cost_add = ppr_unit.cost_del = Cost(c);
      for (double& r : ppr_unit.rho) r /= k;
      for (int v = 0; v < ppr.graph.num_nodes(); ++v) {
        compare(PippnpCertify(ppr.model, ppr.logits, ppr.graph, ppr_big, v).certified,
                PippnpCertify(ppr.model, ppr.logits, ppr.graph, ppr_unit, v).certified);
      }

      // Sparse smoothing.
      std::uniform_int_distribution<int> votes(600, 1000);
      const std::int64_t top = votes(rng);
      const SparseMeasure m{0.05, 0.4, 0.02, 0.5};
      CostModel s_big, s_unit;
      s_big.cx_add = s_big.cx_del = s_big.ca_add = s_big.ca_del = Cost(c * k);
      s_unit.cx_add = s_unit.cx_del = s_unit.ca_add = s_unit.ca_del = Cost(c);
      const double eps = 0.5 * static_cast<double>(rng() % 13);
      const auto sa = CertifyGedSmoothing({top, 1000 - top}, s_big, m, 0.01, {eps});
      const auto sb = CertifyGedSmoothing({top, 1000 - top}, s_unit, m, 0.01, {eps / k});
      compare(sa.verdicts[0] == Verdict::kCertified, sb.verdicts[0] == Verdict::kCertified);
    }
    detail = Format("%.0f/%.0f verdicts differ", mismatches, compared);
    return mismatches == 0;
  });
}

CriterionResult PolicyIterationExact(const SuiteOptions& options) {
  return Timed(5, "policy iteration exact worst case", 120.0, [&](std::string& detail) {
    const int n = Count(30, options);
    std::mt19937_64 rng(5005);
    double worst = 0.0;
    int unconverged = 0;
    for (int t = 0; t < n; ++t) {
      const oracle::PprInstance inst = oracle::RandomPprInstance(rng, 6, 8);
      const int nodes = inst.graph.num_nodes();
      const int target = static_cast<int>(rng() % static_cast<unsigned>(nodes));
      const int other =
          1 + static_cast<int>(rng() % static_cast<unsigned>(inst.logits.cols() - 1));
      const PolicyIterationResult pi = PippnpPolicyIteration(
          inst.model, inst.logits, inst.graph, inst.fragile, target, 0, other);
      const oracle::FlipSearch best = oracle::ExhaustiveFlips(
          inst.model.alpha, inst.logits, inst.graph.A, inst.fragile.fragile,
          inst.fragile.rho, inst.fragile.cost_add.value(), inst.fragile.cost_del.value(),
          target, 0, other);
      unconverged += pi.converged ? 0 : 1;
      worst = std::max(worst, std::abs(pi.margin - best.min_margin));
    }
    detail = Format("max |PI - exhaustive| = %.3g over %.0f instances; %.0f unconverged",
                    worst, n, unconverged);
    return worst <= 1e-8 && unconverged == 0;
  });
}

CriterionResult NeymanPearsonExactness(const SuiteOptions& options) {
  return Timed(6, "Neyman-Pearson exactness", 60.0, [&](std::string& detail) {
    const int n = Count(100, options);
    std::mt19937_64 rng(6006);
    std::uniform_real_distribution<double> prob(0.02, 0.98), unit(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < n; ++t) {
      const SparseMeasure m{prob(rng), prob(rng), prob(rng), prob(rng)};
      RadiusTuple r;
      int* fields[4] = {&r.ra_add, &r.ra_del, &r.rx_add, &r.rx_del};
      const int bits = 1 + static_cast<int>(rng() % 10);
      for (int b = 0; b < bits; ++b) ++*fields[rng() % 4];
      const auto regions = Regions(r, m);
      const double p = unit(rng);
      worst = std::max(worst, std::abs(NpBound(p, regions, BoundSide::kLower) -
                                       oracle::NeymanPearsonAtoms(p, r, m, true)));
      worst = std::max(worst, std::abs(NpBound(p, regions, BoundSide::kUpper) -
                                       oracle::NeymanPearsonAtoms(p, r, m, false)));
    }
    SparseMeasure example;
    example.pa_add = 0.2;
    example.pa_del = 0.4;
    const double worked =
        NpBound(0.9, Regions(RadiusTuple{1, 0, 0, 0}, example), BoundSide::kLower);
    detail = Format("max deviation %.3g; two-region example gives %.17g", worst, worked);
    return worst <= 1e-10 && std::abs(worked - 0.7) <= 1e-12;
  });
}

CriterionResult EquivariancePreservation(const SuiteOptions& options) {
  return Timed(7, "equivariance preservation", 300.0, [&](std::string& detail) {
    const int trials = Count(100, options);
    std::mt19937_64 rng(7007);

    // Premise: the base models are equivariant / invariant.
    double premise = 0.0;
    for (int t = 0; t < trials; ++t) {
      const int n = 2 + static_cast<int>(rng() % 7);
      const AttributedGraph g = oracle::RandomGraph(rng, n, 4, 0.4, t % 2 == 0);
      const Permutation p = oracle::RandomPermutation(rng, n);
      const AttributedGraph moved = ApplyIsomorphism(p, g);
      const GnnModel gcn = RandomModel(Architecture::kGcn, {4, 5, 3}, 3, rng());
      const GnnModel cls = RandomModel(Architecture::kGraphClsMean, {4, 5}, 3, rng());
      premise = std::max(premise, (GcnForward(gcn, moved) - PermuteRows(p, GcnForward(gcn, g)))
                                      .cwiseAbs()
                                      .maxCoeff());
      premise = std::max(premise, (GraphClsForward(cls, moved) - GraphClsForward(cls, g))
                                      .cwiseAbs()
                                      .maxCoeff());
    }

    // Discrete smoothing under permutations.
    const AttributedGraph g = oracle::RandomGraph(rng, 7, 4, 0.4, true);
    const GnnModel gcn = RandomModel(Architecture::kGcn, {4, 6, 3}, 3, 71);
    const GnnModel ppnp = RandomModel(Architecture::kPiPpnp, {4, 6, 3}, 3, 72);
    const GnnModel cls = RandomModel(Architecture::kGraphClsMean, {4, 6}, 3, 73);
    const SparseMeasure m{0.2, 0.3, 0.1, 0.4};
    MonteCarloOptions opt;
    opt.samples = 200;
    opt.seed = 74;
    double discrete = 0.0;
    discrete = std::max(discrete, PermutationHarness(
                                      [&](const AttributedGraph& s) {
                                        return ArgmaxRows(GcnForward(gcn, s));
                                      },
                                      false, g, m, 3, opt, trials));
    discrete = std::max(discrete, PermutationHarness(
                                      [&](const AttributedGraph& s) {
                                        return ArgmaxRows(PippnpForward(ppnp, s));
                                      },
                                      false, g, m, 3, opt, trials));
    discrete = std::max(discrete, PermutationHarness(
                                      [&](const AttributedGraph& s) {
                                        return std::vector<int>{Argmax(GraphClsForward(cls, s))};
                                      },
                                      true, g, m, 3, opt, trials));

    // Gaussian smoothing under Euclidean isometries.
    const int points = 5, dims = 3;
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd x(points, dims);
    for (int i = 0; i < points; ++i) {
      for (int j = 0; j < dims; ++j) x(i, j) = gauss(rng);
    }
    std::vector<IsometryAction> rotations, signed_axes;
    for (int t = 0; t < trials; ++t) {
      Eigen::VectorXd shift(dims);
      for (int j = 0; j < dims; ++j) shift(j) = 2.0 * gauss(rng);
      rotations.push_back({oracle::RandomRotation(rng, dims), shift});
      Eigen::MatrixXd diag = Eigen::MatrixXd::Identity(dims, dims);
      for (int j = 0; j < dims; ++j) diag(j, j) = rng() % 2 == 0 ? 1.0 : -1.0;
      signed_axes.push_back({diag, shift});
    }
    const MatrixModel base = oracle::PointModel(points, 75);
    MonteCarloOptions gopt;
    gopt.samples = 101;
    gopt.seed = 76;
    const GaussianMeasure gm{0.5};
    double continuous = 0.0;
    continuous = std::max(continuous,
                          IsometryHarness(base, SchemeKind::kExpected, x, gm, gopt, rotations));
    continuous = std::max(continuous,
                          IsometryHarness(base, SchemeKind::kCenter, x, gm, gopt, rotations));
    continuous = std::max(continuous,
                          IsometryHarness(base, SchemeKind::kMedian, x, gm, gopt, signed_axes));
    detail = Format("premise %.3g; discrete deviation %.3g; Gaussian deviation %.3g", premise,
                    discrete, continuous);
    return premise <= 1e-10 && discrete == 0.0 && continuous <= 1e-8;
  });
}

CriterionResult GedDesiderata(const SuiteOptions& options) {
  return Timed(8, "GED oracle desiderata", 120.0, [&](std::string& detail) {
    const int n = Count(200, options);
    std::mt19937_64 rng(8008);
    const double costs[] = {0.5, 1.0, 2.0, 3.0};
    int invariance = 0, above = 0, identity_cases = 0, identity_failures = 0;
    for (int t = 0; t < n; ++t) {
      CostModel cm;
      cm.cx_add = Cost(costs[rng() % 4]);
      cm.cx_del = Cost(costs[rng() % 4]);
      cm.ca_add = Cost(costs[rng() % 4]);
      cm.ca_del = Cost(costs[rng() % 4]);
      const int nodes = 1 + static_cast<int>(rng() % 6);
      const bool undirected = rng() % 2 == 0;
      const AttributedGraph x = oracle::RandomGraph(rng, nodes, 2, 0.4, undirected);
      AttributedGraph y = oracle::RandomGraph(rng, nodes, 2, 0.4, undirected);
      if (t % 2 == 0) {
        // A light edit of x, for which the identity is often optimal.
        y = x;
        const int r = static_cast<int>(rng() % static_cast<unsigned>(nodes));
        const int c = static_cast<int>(rng() % 2);
        y.X(r, c) = y.X(r, c) != 0 ? 0 : 1;
      }
      const Cost d = GedBruteForce(x, y, cm).distance;
      const Permutation p = oracle::RandomPermutation(rng, nodes);
      invariance += GedBruteForce(x, ApplyIsomorphism(p, y), cm).distance == d ? 0 : 1;
      const Cost input = EditCost(x, y, cm);
      above += d <= input ? 0 : 1;
      if (oracle::EditCost(x, y, cm) == oracle::Ged(x, y, cm)) {
        ++identity_cases;
        identity_failures += d == input ? 0 : 1;
      }
    }
    detail = Format("%.0f invariance failures, %.0f above the input distance, ", invariance,
                    above) +
             Format("%.0f/%.0f identity-optimal pairs differ", identity_failures,
                    identity_cases);
    return invariance == 0 && above == 0 && identity_failures == 0 && identity_cases > 0;
  });
}

CriterionResult BudgetAndCostTrends(const SuiteOptions& options) {
  return Timed(9, "budget and cost trends on a synthetic SBM", 600.0, [&](std::string& detail) {
    SyntheticParams sp;
    sp.seed = 9009;
    const SyntheticData data = GenerateSynthetic(sp);
    const std::vector<AttributedGraph> dataset = {data.graph};
    const std::int64_t samples =
        std::max<std::int64_t>(1000, std::llround(10000.0 * options.scale));

    auto base_config = [&](Method method) {
      RunConfig c;
      c.method = method;
      c.seed = 9;
      c.prediction_samples = 1000;
      c.certification_samples = samples;
      return c;
    };
    auto with_costs = [](RunConfig c, double xa, double xd, double aa, double ad) {
      auto cost = [](double v) { return std::isinf(v) ? Cost::Infinite() : Cost(v); };
      c.costs.cx_add = cost(xa);
      c.costs.cx_del = cost(xd);
      c.costs.ca_add = cost(aa);
      c.costs.ca_del = cost(ad);
      return c;
    };

    // (a) certified accuracy never increases with the budget.
    std::vector<std::pair<std::string, RunResult>> runs;
    RunConfig ibp = with_costs(base_config(Method::kIbp), 1, 1, kInf, kInf);
    ibp.epsilon_grid = "0:8:1";
    ibp.local_budget = "rel:0.25";
    runs.emplace_back("ibp", RunCertify(ibp, dataset, data.model));
    RunConfig poly = ibp;
    poly.method = Method::kPolytope;
    runs.emplace_back("polytope", RunCertify(poly, dataset, data.model));
    RunConfig smooth_x = with_costs(base_config(Method::kSmoothing), 1, 1, kInf, kInf);
    smooth_x.epsilon_grid = "0:8:1";
    runs.emplace_back("smoothing", RunCertify(smooth_x, dataset, data.model));

    RunConfig ppnp = with_costs(base_config(Method::kPippnp), kInf, kInf, 1, 1);
    ppnp.epsilon_grid = "0:4:1";
    // The fitted layers reused as the logit MLP of a diffused model.
    GnnModel ppnp_model = data.model;
    ppnp_model.arch = Architecture::kPiPpnp;
    ppnp_model.adj_mode = AdjacencyMode::kRowNormSelfLoops;
    ppnp_model.alpha = 0.5;
    // Policy iteration runs on the subgraph of the first ten nodes per block.
    std::vector<int> keep;
    for (int i = 0; i < 10; ++i) {
      keep.push_back(i);
      keep.push_back(sp.nodes_per_block + i);
    }
    AttributedGraph small = MakeGraph(static_cast<int>(keep.size()), sp.num_features);
    small.undirected = true;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      small.X.row(r) = data.graph.X.row(keep[i]);
      small.labels.push_back(data.graph.labels[static_cast<std::size_t>(keep[i])]);
      for (std::size_t j = 0; j < keep.size(); ++j) {
        small.A(r, static_cast<Eigen::Index>(j)) = data.graph.A(keep[i], keep[j]);
      }
    }
    runs.emplace_back("pippnp", RunCertify(ppnp, {small}, ppnp_model));

    RunConfig cls = with_costs(base_config(Method::kGraphCls), kInf, kInf, 1, 1);
    cls.epsilon_grid = "0:6:1";
    const GnnModel cls_model = RandomModel(Architecture::kGraphClsMean, {4, 8}, 2, 92);
    runs.emplace_back("graphcls", RunCertify(cls, RandomGraphSet(93, 30, 4), cls_model));

    bool monotone = true;
    std::string curve;
    for (const auto& [name, result] : runs) {
      monotone = monotone && Nonincreasing(result.summary);
      curve += " " + name + Format(" %.2f->%.2f", result.summary.front().certified_accuracy,
                                   result.summary.back().certified_accuracy);
    }

    // (b) dearer insertions never lower certified accuracy at fixed budgets.
    bool trend = true;
    std::string gains;
    auto compare = [&](const std::string& name, RunConfig cheap, RunConfig dear) {
      cheap.epsilon_grid = dear.epsilon_grid = "2:6:2";
      const RunResult a = RunCertify(cheap, dataset, data.model);
      const RunResult b = RunCertify(dear, dataset, data.model);
      double gain = 0.0;
      for (std::size_t i = 0; i < a.summary.size(); ++i) {
        const double diff = b.summary[i].certified_accuracy - a.summary[i].certified_accuracy;
        trend = trend && diff >= 0.0;
        gain += diff;
      }
      gains += " " + name + Format(" +%.3f", gain);
    };
    RunConfig poly_cheap = with_costs(base_config(Method::kPolytope), 1, 1, kInf, kInf);
    poly_cheap.local_budget = "rel:0.25";
    RunConfig poly_dear = with_costs(base_config(Method::kPolytope), 4, 1, kInf, kInf);
    poly_dear.local_budget = "rel:0.25";
    compare("polytope-attr", poly_cheap, poly_dear);
    compare("smoothing-attr", with_costs(base_config(Method::kSmoothing), 1, 1, kInf, kInf),
            with_costs(base_config(Method::kSmoothing), 4, 1, kInf, kInf));
    compare("smoothing-edge", with_costs(base_config(Method::kSmoothing), kInf, kInf, 1, 1),
            with_costs(base_config(Method::kSmoothing), kInf, kInf, 4, 1));

    detail = std::string("monotone ") + (monotone ? "yes" : "no") + ";" + curve +
             "; cost trend " + (trend ? "yes" : "no") + ";" + gains;
    return monotone && trend;
  });
}

CriterionResult ConfidenceMachinery(const SuiteOptions&) {
  return Timed(10, "confidence machinery", 10.0, [&](std::string& detail) {
    double worst = 0.0;
    for (int n = 1; n <= 30; ++n) {
      worst = std::max(worst, std::abs(ClopperPearson(n, n, 0.01, BoundSide::kLower) -
                                       std::pow(0.01, 1.0 / n)));
    }
    const double cohen = CohenRadius(0.99, 0.2);
    detail = Format("max Clopper-Pearson deviation %.3g; Cohen radius %.6f", worst, cohen);
    return worst <= 1e-10 && std::abs(cohen - 0.46527) <= 1e-4;
  });
}

CriterionResult Determinism(const SuiteOptions& options) {
  return Timed(11, "determinism across thread counts", 300.0, [&](std::string& detail) {
    if (options.cli_path.empty()) {
      detail = "no gedcert executable given";
      return false;
    }
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() /
                         ("gedcert_determinism_" + std::to_string(::getpid()));
    fs::create_directories(dir);

    SyntheticParams sp;
    sp.seed = 1111;
    sp.nodes_per_block = 12;
    const SyntheticData data = GenerateSynthetic(sp);
    WriteJsonFile((dir / "sbm.json").string(), GraphToJson(data.graph));
    WriteJsonFile((dir / "gcn.json").string(), ModelToJson(data.model));
    WriteJsonFile((dir / "ppnp.json").string(),
                  ModelToJson(RandomModel(Architecture::kPiPpnp, {sp.num_features, 8, 2}, 2, 12)));
    WriteJsonFile((dir / "cls.json").string(),
                  ModelToJson(RandomModel(Architecture::kGraphClsMean, {4, 6}, 2, 13)));
    nlohmann::json graphs = nlohmann::json::array();
    for (const AttributedGraph& g : RandomGraphSet(14, 8, 4)) graphs.push_back(GraphToJson(g));
    WriteJsonFile((dir / "graphs.json").string(), {{"graphs", graphs}});

    const std::string d = dir.string() + "/";
    const std::vector<std::pair<std::string, std::string>> configs = {
        {"ibp", "--method ibp --dataset " + d + "sbm.json --weights " + d +
                    "gcn.json --epsilon 0:4:1 --local rel:0.25"},
        {"polytope", "--method polytope --dataset " + d + "sbm.json --weights " + d +
                         "gcn.json --epsilon 0:6:2 --cx-add 4"},
        {"graphcls", "--method graphcls --dataset " + d + "graphs.json --weights " + d +
                         "cls.json --epsilon 0:3:1 --cx-add inf --cx-del inf --ca-add 1 "
                         "--ca-del 2 --symmetric"},
        {"pippnp", "--method pippnp --dataset " + d + "sbm.json --weights " + d +
                       "ppnp.json --epsilon 0:2:1 --cx-add inf --cx-del inf --ca-add 1 "
                       "--ca-del 1"},
        {"smoothing", "--method smoothing --dataset " + d + "sbm.json --weights " + d +
                          "gcn.json --epsilon 0:3:1 --ca-add 2 --ca-del 1 --samples 200 "
                          "--cert-samples 2000 --seed 5"},
    };
    int identical = 0;
    std::string failures;
    for (const auto& [name, args] : configs) {
      std::vector<std::string> outputs;
      bool ok = true;
      for (const char* threads : {"1", "3"}) {
        const std::string out = d + name + "_t" + threads + ".csv";
        const std::string command = "'" + options.cli_path + "' certify " + args +
                                    " --threads " + threads + " --output " + out +
                                    " 2>/dev/null";
        if (RunCommand(command) != 0) {
          ok = false;
          break;
        }
        outputs.push_back(Slurp(out) + "\n--\n" + Slurp(out + ".summary.csv"));
      }
      // Thread count from the environment.
      if (ok) {
        const std::string out = d + name + "_env.csv";
        const std::string command = "GEDCERT_THREADS=2 '" + options.cli_path + "' certify " +
                                    args + " --output " + out + " 2>/dev/null";
        ok = RunCommand(command) == 0;
        if (ok) outputs.push_back(Slurp(out) + "\n--\n" + Slurp(out + ".summary.csv"));
      }
      if (ok && outputs.size() == 3 && outputs[0] == outputs[1] && outputs[0] == outputs[2] &&
          outputs[0].size() > 60) {
        ++identical;
      } else {
        failures += " " + name;
      }
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
    detail = Format("%.0f/%.0f configurations byte-identical", identical,
                    static_cast<double>(configs.size())) +
             (failures.empty() ? "" : "; differing:" + failures);
    return identical == static_cast<int>(configs.size());
  });
}

std::vector<CriterionResult> RunAll(const SuiteOptions& options) {
  using Fn = CriterionResult (*)(const SuiteOptions&);
  const Fn criteria[] = {
      KnapsackExactness,        RelaxationDominance,   SoundnessByEnumeration,
      UniformCostConsistency,   PolicyIterationExact,  NeymanPearsonExactness,
      EquivariancePreservation, GedDesiderata,         BudgetAndCostTrends,
      ConfidenceMachinery,      Determinism,
  };
  std::vector<CriterionResult> results;
  for (Fn f : criteria) results.push_back(f(options));
  return results;
}

std::string FormatLine(const CriterionResult& result) {
  char head[128];
  std::snprintf(head, sizeof(head), "%s %2d %s (%.1f s): ", result.pass ? "PASS" : "FAIL",
                result.id, result.name.c_str(), result.seconds);
  return head + result.detail;
}

}  // namespace gedcert::acceptance
