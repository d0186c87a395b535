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

#ifndef GEDCERT_SMOOTHING_CERT_H_
#define GEDCERT_SMOOTHING_CERT_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "gedcert/certificate.h"
#include "gedcert/graph.h"
#include "gedcert/smoothing.h"

namespace gedcert {

// Number of adversarial bit changes of each kind.
struct RadiusTuple {
  int ra_add = 0;
  int ra_del = 0;
  int rx_add = 0;
  int rx_del = 0;

  bool operator==(const RadiusTuple&) const = default;
  auto operator<=>(const RadiusTuple&) const = default;
  bool Dominates(const RadiusTuple& other) const {
    return ra_add >= other.ra_add && ra_del >= other.ra_del &&
           rx_add >= other.rx_add && rx_del >= other.rx_del;
  }
};

// Set of noise outcomes with a constant likelihood ratio between the clean
// and the perturbed sampling distribution.
struct RatioRegion {
  double ratio = 1.0;  // clean / perturbed
  double p_clean = 1.0;
  double p_pert = 1.0;
};

// Regions for an adversary changing exactly `r` bits. Throws
// std::invalid_argument if a kind with nonzero radius has a flip probability
// of 0 or 1.
std::vector<RatioRegion> Regions(const RadiusTuple& r, const SparseMeasure& m);

// Smallest (kLower) or largest (kUpper) perturbed probability of any event
// with clean probability p.
double NpBound(double p, const std::vector<RatioRegion>& regions, BoundSide side);

enum class CertRule { kBinary, kMulticlass };

// Margin np_lower(pa) - 1/2 (binary) or np_lower(pa) - np_upper(pb)
// (multiclass); the tuple is certified iff it is positive.
double TupleMargin(double pa_lower, std::optional<double> pb_upper,
                   const RadiusTuple& r, const SparseMeasure& m, CertRule rule);

bool CertifyTuple(double pa_lower, std::optional<double> pb_upper,
                  const RadiusTuple& r, const SparseMeasure& m, CertRule rule);

// Radius tuples within the budget that cannot be extended in any direction.
// Kinds with infinite cost stay at zero; zero costs are rejected.
std::vector<RadiusTuple> ParetoTuples(const CostModel& cm, double epsilon);

struct SmoothingCertificate {
  int label = 0;
  double pa_lower = 0.0;
  double pb_upper = 0.0;
  std::vector<Verdict> verdicts;  // per grid budget
  std::vector<double> margins;    // worst tuple margin per grid budget
  // Largest grid budget up to which every budget is certified; -1 if none.
  double max_certified_epsilon = -1.0;
};

// `counts` are majority-vote counts of one output component. The certified
// label is their argmax unless `label` fixes it (e.g. from a separate
// prediction sample).
SmoothingCertificate CertifyGedSmoothing(const std::vector<std::int64_t>& counts,
                                         const CostModel& cm, const SparseMeasure& m,
                                         double alpha,
                                         const std::vector<double>& epsilons,
                                         CertRule rule = CertRule::kBinary,
                                         std::optional<int> label = std::nullopt);

// Certified l2 radius of a Gaussian majority vote.
double CohenRadius(double pa_lower, double sigma);

struct CenterSmoothingParams {
  double alpha1 = 0.005;
  double alpha2 = 0.005;
  double delta = 0.05;
};

struct CenterSmoothingResult {
  bool abstain = true;
  double delta_bound = 0.0;  // output distance bound when not abstaining
  double p_lower = 0.0;
  double p_shifted = 0.0;
};

// `distances` are output distances of independent samples to the center.
CenterSmoothingResult CenterSmoothCertify(std::vector<double> distances,
                                          double epsilon, double sigma,
                                          const CenterSmoothingParams& params = {});

// Second stage given the ball-mass lower bound; `sorted` ascending.
CenterSmoothingResult CenterSmoothFromLower(double p_lower,
                                            const std::vector<double>& sorted,
                                            double epsilon, double sigma, double alpha2);

}  // namespace gedcert

#endif  // GEDCERT_SMOOTHING_CERT_H_
