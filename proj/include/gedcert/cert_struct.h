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

#ifndef GEDCERT_CERT_STRUCT_H_
#define GEDCERT_CERT_STRUCT_H_

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "gedcert/certificate.h"
#include "gedcert/graph.h"
#include "gedcert/knapsack.h"
#include "gedcert/models.h"

namespace gedcert {

// Multiplies every finite cost by `factor`; budgets are left untouched.
CostModel RescaleBudgets(const CostModel& cm, double factor);

// Requires structure-only costs: finite ca_add/ca_del, infinite cx costs.
void RequireStructureThreatModel(const CostModel& cm);

// ---------------------------------------------------------------------------
// Mean-pooled graph classifier.

struct NeuronInterval {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

// Pre-activation interval of node n's hidden units over every admissible
// rewiring of row n (self-loop fixed, row budget min(rho_n, epsilon)).
NeuronInterval GraphClsNodeBounds(const GnnModel& model, const AttributedGraph& g,
                               const CostModel& cm, int node);

// Linear lower bound on node n's contribution to score_y - score_k:
//   contribution(A') >= (row_n(A'~) . q) / deg_n(A'~) + intercept
// where A'~ is the perturbed adjacency with the self-loop forced.
struct LinearNodeModel {
  int node = 0;
  int label = 0;
  int other = 0;
  Eigen::VectorXd q;
  double intercept = 0.0;
};

LinearNodeModel CrownLinearize(const GnnModel& model, const AttributedGraph& g,
                               int node, const NeuronInterval& bounds, int label,
                               int other);

// Exact contribution of node n to score_y - score_k on adjacency `a`.
double NodeContribution(const GnnModel& model, const AttributedGraph& g,
                        const BinaryMatrix& a, int node, int label, int other);

struct GraphClassBound {
  // Lower bound on score_label - score_other over the threat model.
  double margin = 0.0;
  // A perturbed adjacency maximizing the linearized objective.
  BinaryMatrix worst_adjacency;
};

// Uses node bounds already computed by GraphClsNodeBounds, one per node.
GraphClassBound GraphClsClassBound(const GnnModel& model, const AttributedGraph& g,
                                   const CostModel& cm,
                                   const std::vector<NeuronInterval>& node_bounds,
                                   int label, int other);

// Per-class bounds; the certificate's bound is their minimum.
struct GraphCertificate {
  NodeCertificate summary;
  std::vector<double> class_margins;  // +inf at the predicted class
};

GraphCertificate GraphClsCertify(const GnnModel& model, const AttributedGraph& g,
                                 const CostModel& cm, int graph_id = 0);

struct SymmetryDualOptions {
  int steps = 200;
  double step_size = 0.05;
};

struct SymmetryDualResult {
  double margin = 0.0;          // best bound found
  std::vector<double> history;  // running best after each evaluation
};

// Tightens GraphClsClassBound on undirected graphs by dualizing A' = A'^T
// and running subgradient descent on the multiplier.
SymmetryDualResult GraphClsSymmetryDual(const GnnModel& model,
                                        const AttributedGraph& g,
                                        const CostModel& cm, int label, int other,
                                        const SymmetryDualOptions& options = {});

GraphCertificate GraphClsCertifySymmetric(const GnnModel& model,
                                          const AttributedGraph& g,
                                          const CostModel& cm,
                                          const SymmetryDualOptions& options = {},
                                          int graph_id = 0);

// ---------------------------------------------------------------------------
// PageRank diffusion under local budgets.

struct FragileEdgeSet {
  std::vector<std::pair<int, int>> fragile;  // ordered (row, column) pairs
  std::vector<double> rho;                   // per-node budget; empty: none
  Cost cost_add{1.0};
  Cost cost_del{1.0};

  double LocalBudget(int node) const;
  void Validate(const AttributedGraph& g) const;

  // Every off-diagonal ordered pair except the graph's fixed edges.
  static FragileEdgeSet AllPairs(const AttributedGraph& g, std::vector<double> rho,
                                 Cost cost_add, Cost cost_del);
};

// Per-node budgets max(degree - offset + strength, 0) with degree counted
// without the self-loop.
std::vector<double> DegreeBudgets(const AttributedGraph& g, double offset,
                                  double strength);

struct PolicyIterationOptions {
  int max_iterations = 100;
};

struct PolicyIterationResult {
  double margin = 0.0;  // worst-case score_y - score_c at the target
  std::vector<std::pair<int, int>> flips;  // sorted
  bool converged = false;
  int iterations = 0;
};

// `logits` is the N x K matrix diffused by personalized PageRank.
PolicyIterationResult PippnpPolicyIteration(const GnnModel& model,
                                            const Eigen::MatrixXd& logits,
                                            const AttributedGraph& g,
                                            const FragileEdgeSet& fragile,
                                            int target, int label, int other,
                                            const PolicyIterationOptions& options = {});

// Margin of the target on the graph obtained by applying `flips`.
double PippnpMargin(const GnnModel& model, const Eigen::MatrixXd& logits,
                    const BinaryMatrix& a, int target, int label, int other);

NodeCertificate PippnpCertify(const GnnModel& model, const Eigen::MatrixXd& logits,
                              const AttributedGraph& g, const FragileEdgeSet& fragile,
                              int target, const PolicyIterationOptions& options = {});

}  // namespace gedcert

#endif  // GEDCERT_CERT_STRUCT_H_
