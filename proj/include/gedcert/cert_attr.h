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

#ifndef GEDCERT_CERT_ATTR_H_
#define GEDCERT_CERT_ATTR_H_

#include <Eigen/Dense>

#include <vector>

#include "gedcert/certificate.h"
#include "gedcert/graph.h"
#include "gedcert/models.h"

namespace gedcert {

// Elementwise pre-activation bounds, one N x h_l pair per layer.
struct LayerBounds {
  std::vector<Eigen::MatrixXd> lower;
  std::vector<Eigen::MatrixXd> upper;
};

// Throws IncompatibleCostError unless both structure costs are infinite.
void RequireAttributeThreatModel(const CostModel& cm);

// First-layer bounds: one relaxed knapsack per output entry.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> IbpFirstLayer(
    const GnnModel& model, const Eigen::MatrixXd& a_hat, const BinaryMatrix& x,
    const CostModel& cm, int threads = 1);
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> IbpFirstLayer(const GnnModel& model,
                                                          const AttributedGraph& g,
                                                          const CostModel& cm);

// Interval propagation through every layer.
LayerBounds IbpBounds(const GnnModel& model, const Eigen::MatrixXd& a_hat,
                      const BinaryMatrix& x, const CostModel& cm, int threads = 1);

std::vector<NodeCertificate> IbpCertify(const GnnModel& model,
                                        const AttributedGraph& g,
                                        const CostModel& cm, int threads = 1);

// Slope of the lower ReLU line for unstable neurons.
enum class OmegaPolicy {
  kChord,  // s / (s - r), same slope as the upper line
  kZero,
  kOne,
};

struct PolytopeOptions {
  OmegaPolicy omega = OmegaPolicy::kChord;
  // Restrict each target node to its L-hop neighbourhood. Exact.
  bool slice = true;
  int threads = 1;
};

// Dual lower bound on Z[target, y] - Z[target, k] given pre-activation
// bounds for all hidden layers.
double PolytopeClassBound(const GnnModel& model, const Eigen::MatrixXd& a_hat,
                          const BinaryMatrix& x, const LayerBounds& bounds,
                          const CostModel& cm, int target, int y, int k,
                          OmegaPolicy omega = OmegaPolicy::kChord);

std::vector<NodeCertificate> PolytopeCertify(const GnnModel& model,
                                             const AttributedGraph& g,
                                             const CostModel& cm,
                                             const PolytopeOptions& options = {});

// Nodes reachable from `target` in at most `hops` steps along nonzeros of
// a_hat rows, ascending.
std::vector<int> HopNeighbourhood(const Eigen::MatrixXd& a_hat, int target, int hops);

}  // namespace gedcert

#endif  // GEDCERT_CERT_ATTR_H_
