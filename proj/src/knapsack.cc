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

#include "gedcert/knapsack.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace gedcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double CountCost(const Cost& add, const Cost& del, int adds, int dels) {
  return (add.Times(adds) + del.Times(dels)).value();
}

// Relative tolerance for deciding that a budget is used up.
bool Exhausted(double used, double budget) {
  if (std::isinf(budget)) return false;
  return budget - used <= 1e-9 * std::max(1.0, budget);
}

}  // namespace

double TwoCostInstance::LocalBudget(int n) const {
  return rho.empty() ? kInf : rho[static_cast<std::size_t>(n)];
}

double TwoCostInstance::PairCost(int adds, int dels) const {
  return CountCost(cost_add, cost_del, adds, dels);
}

void TwoCostInstance::Validate() const {
  if (kinds.size() != static_cast<std::size_t>(values.size())) {
    throw std::invalid_argument("kinds must match the value matrix");
  }
  if (std::isnan(epsilon) || epsilon < 0.0) {
    throw std::invalid_argument("epsilon must be nonnegative");
  }
  if (!rho.empty() && static_cast<int>(rho.size()) != rows()) {
    throw std::invalid_argument("rho must have one entry per row");
  }
  for (double r : rho) {
    if (std::isnan(r) || r < 0.0) throw std::invalid_argument("negative rho");
  }
  if (!values.allFinite()) throw std::invalid_argument("non-finite value");
}

TwoCostInstance TwoCostInstance::FromInsertMask(Eigen::MatrixXd values,
                                                const BinaryMatrix& insert_mask,
                                                Cost cost_add, Cost cost_del,
                                                double epsilon,
                                                std::vector<double> rho) {
  if (insert_mask.rows() != values.rows() || insert_mask.cols() != values.cols()) {
    throw std::invalid_argument("mask shape mismatch");
  }
  TwoCostInstance inst;
  inst.kinds.reserve(static_cast<std::size_t>(values.size()));
  for (int n = 0; n < values.rows(); ++n) {
    for (int m = 0; m < values.cols(); ++m) {
      inst.kinds.push_back(insert_mask(n, m) != 0 ? EntryKind::kInsert
                                                  : EntryKind::kDelete);
    }
  }
  inst.values = std::move(values);
  inst.cost_add = cost_add;
  inst.cost_del = cost_del;
  inst.epsilon = epsilon;
  inst.rho = std::move(rho);
  return inst;
}

bool LocalTable::Feasible(int i, int j) const {
  return i >= 0 && j >= 0 && i <= max_adds() && j <= max_dels() &&
         alpha(i, j) != -kInf;
}

std::vector<int> LocalTable::Selection(int i, int j) const {
  if (!Feasible(i, j)) throw std::out_of_range("infeasible local allocation");
  std::vector<int> cols(add_order.begin(), add_order.begin() + i);
  cols.insert(cols.end(), del_order.begin(), del_order.begin() + j);
  std::sort(cols.begin(), cols.end());
  return cols;
}

std::vector<LocalTable> PrecomputeLocal(const TwoCostInstance& instance) {
  instance.Validate();
  std::vector<LocalTable> tables(static_cast<std::size_t>(instance.rows()));
  for (int n = 0; n < instance.rows(); ++n) {
    LocalTable& t = tables[static_cast<std::size_t>(n)];
    for (int m = 0; m < instance.cols(); ++m) {
      const EntryKind k = instance.kind(n, m);
      if (k == EntryKind::kInsert) t.add_order.push_back(m);
      if (k == EntryKind::kDelete) t.del_order.push_back(m);
    }
    auto by_value = [&](int a, int b) {
      const double va = instance.values(n, a), vb = instance.values(n, b);
      return va != vb ? va > vb : a < b;
    };
    std::sort(t.add_order.begin(), t.add_order.end(), by_value);
    std::sort(t.del_order.begin(), t.del_order.end(), by_value);

    const double budget = instance.LocalBudget(n);
    const int max_adds = MaxAffordable(
        budget, instance.cost_add, static_cast<int>(t.add_order.size()));
    const int max_dels = MaxAffordable(
        budget, instance.cost_del, static_cast<int>(t.del_order.size()));
    t.alpha.setConstant(max_adds + 1, max_dels + 1, -kInf);
    double add_sum = 0.0;
    for (int i = 0; i <= max_adds; ++i) {
      if (i > 0) add_sum += instance.values(n, t.add_order[i - 1]);
      double del_sum = 0.0;
      for (int j = 0; j <= max_dels; ++j) {
        if (j > 0) del_sum += instance.values(n, t.del_order[j - 1]);
        if (FitsBudget(instance.PairCost(i, j), budget)) {
          t.alpha(i, j) = add_sum + del_sum;
        }
      }
    }
  }
  return tables;
}

KnapsackSolution CombineGlobal(const std::vector<LocalTable>& tables,
                               const Cost& cost_add, const Cost& cost_del,
                               double epsilon, const std::vector<double>& rho) {
  const int rows = static_cast<int>(tables.size());
  if (!rho.empty() && static_cast<int>(rho.size()) != rows) {
    throw std::invalid_argument("rho must have one entry per row");
  }
  auto local_budget = [&](int n) {
    return rho.empty() ? kInf : rho[static_cast<std::size_t>(n)];
  };
  auto row_ok = [&](int n, int i, int j) {
    const LocalTable& t = tables[static_cast<std::size_t>(n)];
    return t.Feasible(i, j) &&
           FitsBudget(CountCost(cost_add, cost_del, i, j), local_budget(n));
  };

  KnapsackSolution sol;
  sol.selection.resize(static_cast<std::size_t>(rows));
  sol.counts.assign(static_cast<std::size_t>(rows), {0, 0});

  if (std::isinf(epsilon)) {
    for (int n = 0; n < rows; ++n) {
      const LocalTable& t = tables[static_cast<std::size_t>(n)];
      double best = -kInf;
      std::pair<int, int> arg{0, 0};
      for (int i = 0; i <= t.max_adds(); ++i) {
        for (int j = 0; j <= t.max_dels(); ++j) {
          if (row_ok(n, i, j) && t.alpha(i, j) > best) {
            best = t.alpha(i, j);
            arg = {i, j};
          }
        }
      }
      if (best == -kInf) throw std::invalid_argument("row without feasible entry");
      sol.value += best;
      sol.counts[static_cast<std::size_t>(n)] = arg;
      sol.selection[static_cast<std::size_t>(n)] = t.Selection(arg.first, arg.second);
    }
    return sol;
  }

  using Key = std::pair<int, int>;
  struct Node {
    double value;
    Key prev;
    Key choice;
  };
  std::vector<std::map<Key, Node>> layers(static_cast<std::size_t>(rows) + 1);
  layers[0][{0, 0}] = Node{0.0, {0, 0}, {0, 0}};
  for (int n = 0; n < rows; ++n) {
    const LocalTable& t = tables[static_cast<std::size_t>(n)];
    auto& next = layers[static_cast<std::size_t>(n) + 1];
    for (const auto& [key, node] : layers[static_cast<std::size_t>(n)]) {
      for (int i = 0; i <= t.max_adds(); ++i) {
        for (int j = 0; j <= t.max_dels(); ++j) {
          if (!row_ok(n, i, j)) continue;
          const Key k{key.first + i, key.second + j};
          if (!FitsBudget(CountCost(cost_add, cost_del, k.first, k.second),
                          epsilon)) {
            continue;
          }
          const double v = node.value + t.alpha(i, j);
          auto it = next.find(k);
          if (it == next.end()) {
            next.emplace(k, Node{v, key, {i, j}});
          } else if (v > it->second.value) {
            it->second = Node{v, key, {i, j}};
          }
        }
      }
    }
    if (next.empty()) throw std::invalid_argument("row without feasible entry");
  }

  const auto& last = layers.back();
  auto best = last.begin();
  for (auto it = last.begin(); it != last.end(); ++it) {
    if (it->second.value > best->second.value) best = it;
  }
  sol.value = best->second.value;
  Key key = best->first;
  for (int n = rows - 1; n >= 0; --n) {
    const Node& node = layers[static_cast<std::size_t>(n) + 1].at(key);
    sol.counts[static_cast<std::size_t>(n)] = node.choice;
    sol.selection[static_cast<std::size_t>(n)] =
        tables[static_cast<std::size_t>(n)].Selection(node.choice.first,
                                                      node.choice.second);
    key = node.prev;
  }
  return sol;
}

KnapsackSolution SolveExact(const TwoCostInstance& instance) {
  return CombineGlobal(PrecomputeLocal(instance), instance.cost_add,
                       instance.cost_del, instance.epsilon, instance.rho);
}

double GeneralInstance::LocalBudget(int n) const {
  return rho.empty() ? kInf : rho[static_cast<std::size_t>(n)];
}

void GeneralInstance::Validate() const {
  if (values.rows() != costs.rows() || values.cols() != costs.cols()) {
    throw std::invalid_argument("value and cost matrices differ in shape");
  }
  if (!values.allFinite() || (values.array() < 0.0).any()) {
    throw std::invalid_argument("relaxed values must be finite and nonnegative");
  }
  if ((costs.array().isNaN()).any() || (costs.array() < 0.0).any()) {
    throw std::invalid_argument("costs must be nonnegative");
  }
  if (std::isnan(epsilon) || epsilon < 0.0) {
    throw std::invalid_argument("epsilon must be nonnegative");
  }
  if (!rho.empty() && static_cast<Eigen::Index>(rho.size()) != values.rows()) {
    throw std::invalid_argument("rho must have one entry per row");
  }
  for (double r : rho) {
    if (std::isnan(r) || r < 0.0) throw std::invalid_argument("negative rho");
  }
}

GeneralInstance GeneralInstance::FromTwoCost(const TwoCostInstance& instance) {
  GeneralInstance g;
  g.values = instance.values;
  g.costs.resize(instance.rows(), instance.cols());
  for (int n = 0; n < instance.rows(); ++n) {
    for (int m = 0; m < instance.cols(); ++m) {
      switch (instance.kind(n, m)) {
        case EntryKind::kInsert: g.costs(n, m) = instance.cost_add.value(); break;
        case EntryKind::kDelete: g.costs(n, m) = instance.cost_del.value(); break;
        case EntryKind::kFixed: g.costs(n, m) = kInf; break;
      }
    }
  }
  g.epsilon = instance.epsilon;
  g.rho = instance.rho;
  return g;
}

namespace {

double Ratio(double value, double cost) {
  if (cost == 0.0) return kInf;
  if (std::isinf(cost)) return 0.0;
  return value / cost;
}

// Flat indices sorted by ratio descending, index ascending on ties.
std::vector<int> RatioOrder(const Eigen::MatrixXd& ratio,
                            const std::vector<int>& indices) {
  std::vector<int> order = indices;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double ra = ratio(a), rb = ratio(b);
    return ra != rb ? ra > rb : a < b;
  });
  return order;
}

double Fill(double cap, double cost, double& remaining) {
  if (cap <= 0.0 || std::isinf(cost)) return 0.0;
  if (cost == 0.0 || std::isinf(remaining)) return cap;
  const double affordable = remaining / cost;
  if (affordable < cap) {
    // A partial take exhausts the budget; leave no rounding residue behind.
    remaining = 0.0;
    return affordable;
  }
  remaining = std::max(0.0, remaining - cap * cost);
  return cap;
}

}  // namespace

RelaxedSolution SolveRelaxed(const GeneralInstance& instance) {
  instance.Validate();
  const int rows = static_cast<int>(instance.values.rows());
  const int cols = static_cast<int>(instance.values.cols());
  // Column-major flat indexing matches Eigen's default storage.
  Eigen::MatrixXd ratio(rows, cols);
  for (int n = 0; n < rows; ++n) {
    for (int m = 0; m < cols; ++m) {
      ratio(n, m) = Ratio(instance.values(n, m), instance.costs(n, m));
    }
  }
  auto flat = [rows](int n, int m) { return m * rows + n; };

  RelaxedSolution sol;
  sol.L.setZero(rows, cols);
  sol.Q.setZero(rows, cols);
  for (int n = 0; n < rows; ++n) {
    std::vector<int> idx;
    for (int m = 0; m < cols; ++m) idx.push_back(flat(n, m));
    double remaining = instance.LocalBudget(n);
    for (int f : RatioOrder(ratio, idx)) {
      sol.L(f) = Fill(1.0, instance.costs(f), remaining);
    }
  }
  std::vector<int> all(static_cast<std::size_t>(rows * cols));
  std::iota(all.begin(), all.end(), 0);
  double remaining = instance.epsilon;
  for (int f : RatioOrder(ratio, all)) {
    sol.Q(f) = Fill(sol.L(f), instance.costs(f), remaining);
  }
  sol.value = (instance.values.array() * sol.Q.array()).sum();

  auto used = [&](int n) {
    double u = 0.0;
    for (int m = 0; m < cols; ++m) {
      if (sol.Q(n, m) > 0.0) u += sol.Q(n, m) * instance.costs(n, m);
    }
    return u;
  };
  double global_used = 0.0;
  for (int n = 0; n < rows; ++n) global_used += used(n);

  // lambda: zero while the global budget is slack; otherwise the smallest
  // finite ratio that still received budget. If nothing finite received
  // budget (epsilon ~ 0), the largest finite ratio the rows would accept.
  sol.lambda_star = 0.0;
  if (Exhausted(global_used, instance.epsilon)) {
    double min_taken = kInf, max_wanted = 0.0;
    for (int f = 0; f < rows * cols; ++f) {
      if (std::isinf(ratio(f)) || std::isinf(instance.costs(f))) continue;
      if (sol.Q(f) > 0.0) min_taken = std::min(min_taken, ratio(f));
      if (sol.L(f) > 0.0) max_wanted = std::max(max_wanted, ratio(f));
    }
    sol.lambda_star = std::isinf(min_taken) ? max_wanted : min_taken;
  }

  sol.kappa_star.assign(static_cast<std::size_t>(rows), 0.0);
  for (int n = 0; n < rows; ++n) {
    if (!Exhausted(used(n), instance.LocalBudget(n))) continue;
    double o = kInf, row_max = -kInf;
    for (int m = 0; m < cols; ++m) {
      if (std::isinf(ratio(n, m)) || std::isinf(instance.costs(n, m))) continue;
      row_max = std::max(row_max, ratio(n, m));
      if (sol.L(n, m) > 0.0) o = std::min(o, ratio(n, m));
    }
    if (std::isinf(o)) o = row_max;
    if (std::isinf(o)) continue;
    sol.kappa_star[static_cast<std::size_t>(n)] = std::max(0.0, o - sol.lambda_star);
  }
  return sol;
}

namespace {

// a * b with 0 * inf = 0.
double SafeProduct(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}

}  // namespace

double DualObjective(const GeneralInstance& instance, double lambda,
                     const std::vector<double>& kappa) {
  double g = SafeProduct(instance.epsilon, lambda);
  for (int n = 0; n < instance.values.rows(); ++n) {
    const double k = kappa[static_cast<std::size_t>(n)];
    g += SafeProduct(instance.LocalBudget(n), k);
    for (int m = 0; m < instance.values.cols(); ++m) {
      const double c = instance.costs(n, m);
      if (std::isinf(c)) continue;
      g += std::max(0.0, instance.values(n, m) - c * (lambda + k));
    }
  }
  return g;
}

double VerifyKkt(const GeneralInstance& instance, const RelaxedSolution& sol) {
  const int rows = static_cast<int>(instance.values.rows());
  const int cols = static_cast<int>(instance.values.cols());
  const double lambda = sol.lambda_star;
  double worst = std::max(0.0, -lambda);
  double global_used = 0.0;
  double primal = 0.0;
  for (int n = 0; n < rows; ++n) {
    const double kappa = sol.kappa_star[static_cast<std::size_t>(n)];
    worst = std::max(worst, -kappa);
    double row_used = 0.0;
    for (int m = 0; m < cols; ++m) {
      const double q = sol.Q(n, m), v = instance.values(n, m);
      const double c = instance.costs(n, m);
      worst = std::max({worst, -q, q - 1.0});
      primal += v * q;
      if (std::isinf(c)) {
        worst = std::max(worst, std::abs(q));
        continue;
      }
      row_used += c * q;
      const double reduced = v - c * (lambda + kappa);
      const double u = std::max(reduced, 0.0);
      const double t = std::max(0.0, -reduced);
      worst = std::max(worst, std::abs(-v + c * (lambda + kappa) + u - t));
      worst = std::max(worst, std::abs(u * (1.0 - q)));
      worst = std::max(worst, std::abs(t * q));
    }
    global_used += row_used;
    const double rho = instance.LocalBudget(n);
    if (!std::isinf(rho)) {
      worst = std::max(worst, row_used - rho);
      worst = std::max(worst, std::abs(kappa * (rho - row_used)));
    } else {
      worst = std::max(worst, kappa == 0.0 ? 0.0 : kInf);
    }
  }
  if (!std::isinf(instance.epsilon)) {
    worst = std::max(worst, global_used - instance.epsilon);
    worst = std::max(worst, std::abs(lambda * (instance.epsilon - global_used)));
  } else {
    worst = std::max(worst, lambda == 0.0 ? 0.0 : kInf);
  }
  worst = std::max(worst, std::abs(primal - sol.value));
  worst = std::max(worst, std::abs(DualObjective(instance, lambda, sol.kappa_star) -
                                   sol.value));
  return worst;
}

}  // namespace gedcert
