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

#ifndef GEDCERT_KNAPSACK_H_
#define GEDCERT_KNAPSACK_H_

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

#include "gedcert/graph.h"

namespace gedcert {

// Role of one (row, column) entry in a two-cost instance. kFixed entries can
// never be selected (e.g. self-loops).
enum class EntryKind : std::uint8_t { kInsert, kDelete, kFixed };

// Knapsack with local constraints where every selectable entry costs either
// `cost_add` or `cost_del`.
struct TwoCostInstance {
  Eigen::MatrixXd values;  // N x M; negative values are allowed
  std::vector<EntryKind> kinds;  // row-major N x M
  Cost cost_add{1.0};
  Cost cost_del{1.0};
  double epsilon = 0.0;
  std::vector<double> rho;  // empty: no local constraint

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
  EntryKind kind(int n, int m) const {
    return kinds[static_cast<std::size_t>(n) * static_cast<std::size_t>(cols()) +
                 static_cast<std::size_t>(m)];
  }
  double LocalBudget(int n) const;
  // Total cost of `adds` insertions and `dels` deletions (+inf if either
  // count uses an infinite cost).
  double PairCost(int adds, int dels) const;
  void Validate() const;

  // Marks entries with mask == 1 as insertions and the rest as deletions.
  static TwoCostInstance FromInsertMask(Eigen::MatrixXd values,
                                        const BinaryMatrix& insert_mask,
                                        Cost cost_add, Cost cost_del,
                                        double epsilon, std::vector<double> rho);
};

// Per-row table of the best value using exactly i insertions and j deletions.
struct LocalTable {
  // (max_adds + 1) x (max_dels + 1); -inf marks (i, j) over the row budget.
  Eigen::MatrixXd alpha;
  // Insertion / deletion columns sorted by (value desc, column asc).
  std::vector<int> add_order;
  std::vector<int> del_order;

  int max_adds() const { return static_cast<int>(alpha.rows()) - 1; }
  int max_dels() const { return static_cast<int>(alpha.cols()) - 1; }
  bool Feasible(int i, int j) const;
  // Columns realizing alpha(i, j), ascending.
  std::vector<int> Selection(int i, int j) const;
};

std::vector<LocalTable> PrecomputeLocal(const TwoCostInstance& instance);

struct KnapsackSolution {
  double value = 0.0;
  // Per row: the selected columns (ascending) and the (insertions,
  // deletions) counts.
  std::vector<std::vector<int>> selection;
  std::vector<std::pair<int, int>> counts;
};

// Dynamic program over rows keyed on the accumulated (insertions, deletions)
// counts. Accepts tables whose alpha entries were modified after
// PrecomputeLocal. With an infinite epsilon rows decouple and each row takes
// its own best entry.
KnapsackSolution CombineGlobal(const std::vector<LocalTable>& tables,
                               const Cost& cost_add, const Cost& cost_del,
                               double epsilon, const std::vector<double>& rho);

// Convenience: PrecomputeLocal followed by CombineGlobal.
KnapsackSolution SolveExact(const TwoCostInstance& instance);

// Knapsack with local constraints and arbitrary per-entry costs (possibly 0
// or +inf), used in relaxed form.
struct GeneralInstance {
  Eigen::MatrixXd values;  // N x M, nonnegative
  Eigen::MatrixXd costs;   // N x M, nonnegative or +inf
  double epsilon = 0.0;
  std::vector<double> rho;  // empty: no local constraint

  double LocalBudget(int n) const;
  void Validate() const;
  static GeneralInstance FromTwoCost(const TwoCostInstance& instance);
};

struct RelaxedSolution {
  double value = 0.0;
  Eigen::MatrixXd Q;  // fractional selection
  Eigen::MatrixXd L;  // per-row greedy fill before the global budget
  double lambda_star = 0.0;
  std::vector<double> kappa_star;
};

// Greedy fractional fill by value-to-cost ratio, first within each row under
// rho, then globally under epsilon. Also returns optimal dual variables.
RelaxedSolution SolveRelaxed(const GeneralInstance& instance);

// Largest violation among stationarity, primal / dual feasibility and
// complementary slackness, plus the primal-dual objective gap.
double VerifyKkt(const GeneralInstance& instance, const RelaxedSolution& sol);

// Dual objective eps*lambda + rho^T kappa + sum max(V - C(lambda+kappa), 0).
// An upper bound on the relaxed optimum for any nonnegative duals.
double DualObjective(const GeneralInstance& instance, double lambda,
                     const std::vector<double>& kappa);

}  // namespace gedcert

#endif  // GEDCERT_KNAPSACK_H_
