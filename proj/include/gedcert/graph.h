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

#ifndef GEDCERT_GRAPH_H_
#define GEDCERT_GRAPH_H_

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gedcert {

// Raised for malformed inputs (dataset / weight files, CLI values).
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a certificate is asked to run under a threat model it does not
// support, e.g. interval bounds with finite structure costs.
class IncompatibleCostError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using BinaryMatrix =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Absolute slack used whenever an accumulated cost is compared to a budget.
inline constexpr double kBudgetSlack = 1e-9;

inline bool FitsBudget(double cost, double budget) {
  return cost <= budget + kBudgetSlack;
}

// Nonnegative edit cost with a distinguished infinite value. Arithmetic with
// the infinite value short-circuits; it is never represented as a large
// float.
class Cost {
 public:
  constexpr Cost() = default;
  explicit Cost(double value);

  static constexpr Cost Infinite() {
    Cost c;
    c.infinite_ = true;
    return c;
  }

  bool is_infinite() const { return infinite_; }
  bool is_zero() const { return !infinite_ && value_ == 0.0; }
  // +inf for the infinite cost.
  double value() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  // `count` edits of this type. Zero edits of an infinite type cost nothing.
  Cost Times(std::int64_t count) const;
  Cost operator+(const Cost& other) const;
  Cost Scaled(double factor) const;

  bool operator==(const Cost& other) const;
  bool operator<(const Cost& other) const;
  bool operator<=(const Cost& other) const { return !(other < *this); }

  std::string ToString() const;

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

// Parses "inf" or a nonnegative decimal.
Cost ParseCost(const std::string& text);

// Largest k with k * unit_cost <= budget, clipped to `available`.
int MaxAffordable(double budget, const Cost& unit_cost, int available);

struct CostModel {
  Cost cx_add{1.0};
  Cost cx_del{1.0};
  Cost ca_add = Cost::Infinite();
  Cost ca_del = Cost::Infinite();
  double epsilon = 0.0;
  // Per-node budgets. Empty means no local constraint.
  std::vector<double> rho;

  double LocalBudget(int node) const {
    if (rho.empty()) return std::numeric_limits<double>::infinity();
    return rho.at(static_cast<std::size_t>(node));
  }
  // Throws std::invalid_argument on negative budgets or a rho of the wrong
  // length.
  void Validate(int num_nodes) const;
};

// Divides both structure costs by two. Used to report undirected edits, which
// flip two ordered adjacency entries each.
CostModel HalveStructureCosts(const CostModel& cm);

struct AttributedGraph {
  BinaryMatrix X;  // N x D node attributes
  BinaryMatrix A;  // N x N adjacency, counted per ordered entry
  bool undirected = false;
  std::vector<int> labels;  // per node, or a single per-graph label
  std::vector<std::pair<int, int>> fixed_edges;

  int num_nodes() const { return static_cast<int>(X.rows()); }
  int num_features() const { return static_cast<int>(X.cols()); }

  void Validate() const;
  bool SameBits(const AttributedGraph& other) const {
    return X == other.X && A == other.A;
  }
};

AttributedGraph MakeGraph(int num_nodes, int num_features);

class Permutation {
 public:
  Permutation() = default;
  // Node i is moved to position perm[i].
  explicit Permutation(std::vector<int> perm);
  static Permutation Identity(int n);

  int size() const { return static_cast<int>(perm_.size()); }
  int operator[](int i) const { return perm_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& data() const { return perm_; }

  Permutation Inverse() const;
  // (this ∘ inner)[i] = this[inner[i]]: apply `inner` first.
  Permutation Compose(const Permutation& inner) const;

  bool operator==(const Permutation& other) const = default;

 private:
  std::vector<int> perm_;
};

// Total weighted number of flipped bits between g and g2.
Cost EditCost(const AttributedGraph& g, const AttributedGraph& g2,
              const CostModel& cm);

// (PX, PAP^T): row i of X lands in row perm[i].
AttributedGraph ApplyIsomorphism(const Permutation& p, const AttributedGraph& g);
BinaryMatrix PermuteRows(const Permutation& p, const BinaryMatrix& m);
Eigen::MatrixXd PermuteRows(const Permutation& p, const Eigen::MatrixXd& m);

struct GedOptions {
  int max_nodes = 8;
  bool halve_undirected_structure = false;
};

struct GedResult {
  Cost distance;
  Permutation minimizer;
};

// min over all N! node permutations p of EditCost(g, p ⊳ g2). Permutations
// are explored depth-first in lexicographic order, pruning partial
// assignments whose cost already reaches the incumbent.
GedResult GedBruteForce(const AttributedGraph& g, const AttributedGraph& g2,
                        const CostModel& cm, const GedOptions& options = {});

enum class PerturbationScope { kAttributes, kAdjacency };

struct EnumerationOptions {
  PerturbationScope scope = PerturbationScope::kAttributes;
  double cap = 1e6;
  // Adjacency only. Diagonal entries are overwritten by self-loops in every
  // model here, so they are skipped unless requested.
  bool include_diagonal = false;
  // Adjacency only: flip (i,j) and (j,i) together.
  bool symmetric = false;
};

// Number of admissible perturbed graphs (including g itself), computed by a
// per-row counting recursion without enumerating.
double CountPerturbations(const AttributedGraph& g, const CostModel& cm,
                          const EnumerationOptions& options);

// Visits every graph whose scoped matrix differs from g within the global
// budget epsilon and every local budget rho_n; the other matrix is held
// fixed. Throws std::length_error when the count exceeds options.cap.
// Returns the number of graphs visited.
std::size_t EnumeratePerturbations(
    const AttributedGraph& g, const CostModel& cm,
    const EnumerationOptions& options,
    const std::function<void(const AttributedGraph&)>& visit);

}  // namespace gedcert

#endif  // GEDCERT_GRAPH_H_
