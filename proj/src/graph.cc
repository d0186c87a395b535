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

#include "gedcert/graph.h"

#include <algorithm>
#include <charconv>
#include <map>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

namespace gedcert {

Cost::Cost(double value) {
  if (std::isnan(value) || value < 0.0) {
    throw std::invalid_argument("cost must be nonnegative");
  }
  if (std::isinf(value)) {
    infinite_ = true;
  } else {
    value_ = value;
  }
}

Cost Cost::Times(std::int64_t count) const {
  if (count < 0) throw std::invalid_argument("negative edit count");
  if (count == 0) return Cost(0.0);
  if (infinite_) return Infinite();
  return Cost(value_ * static_cast<double>(count));
}

Cost Cost::operator+(const Cost& other) const {
  if (infinite_ || other.infinite_) return Infinite();
  return Cost(value_ + other.value_);
}

Cost Cost::Scaled(double factor) const {
  if (!(factor > 0.0) || std::isinf(factor)) {
    throw std::invalid_argument("cost scale factor must be positive and finite");
  }
  if (infinite_) return Infinite();
  return Cost(value_ * factor);
}

bool Cost::operator==(const Cost& other) const {
  if (infinite_ || other.infinite_) return infinite_ == other.infinite_;
  return value_ == other.value_;
}

bool Cost::operator<(const Cost& other) const {
  if (infinite_) return false;
  if (other.infinite_) return true;
  return value_ < other.value_;
}

std::string Cost::ToString() const {
  if (infinite_) return "inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value_);
  return std::string(buf, res.ptr);
}

Cost ParseCost(const std::string& text) {
  if (text == "inf") return Cost::Infinite();
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end ||
      !std::isfinite(v) || v < 0.0) {
    throw SchemaError("invalid cost '" + text + "'");
  }
  return Cost(v);
}

int MaxAffordable(double budget, const Cost& unit_cost, int available) {
  if (available <= 0) return 0;
  if (unit_cost.is_infinite()) return 0;
  if (unit_cost.is_zero() || std::isinf(budget)) return available;
  if (budget < 0.0) return 0;
  const double k = std::floor((budget + kBudgetSlack) / unit_cost.value());
  if (k >= static_cast<double>(available)) return available;
  return static_cast<int>(k);
}

void CostModel::Validate(int num_nodes) const {
  if (std::isnan(epsilon) || epsilon < 0.0) {
    throw std::invalid_argument("epsilon must be nonnegative");
  }
  if (!rho.empty() && static_cast<int>(rho.size()) != num_nodes) {
    throw std::invalid_argument("rho must have one entry per node");
  }
  for (double r : rho) {
    if (std::isnan(r) || r < 0.0) {
      throw std::invalid_argument("local budgets must be nonnegative");
    }
  }
}

CostModel HalveStructureCosts(const CostModel& cm) {
  CostModel out = cm;
  out.ca_add = cm.ca_add.Scaled(0.5);
  out.ca_del = cm.ca_del.Scaled(0.5);
  return out;
}

namespace {

bool IsBinary(const BinaryMatrix& m) {
  return (m.array() <= 1).all();
}

}  // namespace

void AttributedGraph::Validate() const {
  const int n = num_nodes();
  if (A.rows() != n || A.cols() != n) {
    throw std::invalid_argument("adjacency must be N x N");
  }
  if (!IsBinary(X) || !IsBinary(A)) {
    throw std::invalid_argument("graph matrices must be binary");
  }
  if (undirected && A != A.transpose()) {
    throw std::invalid_argument("undirected graph with asymmetric adjacency");
  }
  for (const auto& [i, j] : fixed_edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw std::invalid_argument("fixed edge out of range");
    }
  }
}

AttributedGraph MakeGraph(int num_nodes, int num_features) {
  if (num_nodes < 0 || num_features < 0) {
    throw std::invalid_argument("negative graph dimensions");
  }
  AttributedGraph g;
  g.X = BinaryMatrix::Zero(num_nodes, num_features);
  g.A = BinaryMatrix::Zero(num_nodes, num_nodes);
  return g;
}

Permutation::Permutation(std::vector<int> perm) : perm_(std::move(perm)) {
  std::vector<int> sorted = perm_;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != static_cast<int>(i)) {
      throw std::invalid_argument("permutation is not a bijection");
    }
  }
}

Permutation Permutation::Identity(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  return Permutation(std::move(p));
}

Permutation Permutation::Inverse() const {
  std::vector<int> inv(perm_.size());
  for (std::size_t i = 0; i < perm_.size(); ++i) {
    inv[static_cast<std::size_t>(perm_[i])] = static_cast<int>(i);
  }
  return Permutation(std::move(inv));
}

Permutation Permutation::Compose(const Permutation& inner) const {
  if (inner.size() != size()) {
    throw std::invalid_argument("composing permutations of different size");
  }
  std::vector<int> out(perm_.size());
  for (std::size_t i = 0; i < perm_.size(); ++i) {
    out[i] = perm_[static_cast<std::size_t>(inner.perm_[i])];
  }
  return Permutation(std::move(out));
}

namespace {

void CheckSameShape(const AttributedGraph& g, const AttributedGraph& g2) {
  if (g.num_nodes() != g2.num_nodes() || g.num_features() != g2.num_features() ||
      g.A.rows() != g2.A.rows()) {
    throw std::invalid_argument("graphs differ in N or D");
  }
}

// Cost of turning bit `from` into bit `to`.
double FlipCost(std::uint8_t from, std::uint8_t to, const Cost& add,
                const Cost& del) {
  if (from == to) return 0.0;
  return from == 0 ? add.value() : del.value();
}

}  // namespace

Cost EditCost(const AttributedGraph& g, const AttributedGraph& g2,
              const CostModel& cm) {
  CheckSameShape(g, g2);
  std::int64_t x_add = 0, x_del = 0, a_add = 0, a_del = 0;
  for (Eigen::Index i = 0; i < g.X.size(); ++i) {
    const auto a = g.X.data()[i], b = g2.X.data()[i];
    if (a == 0 && b == 1) ++x_add;
    if (a == 1 && b == 0) ++x_del;
  }
  for (Eigen::Index i = 0; i < g.A.size(); ++i) {
    const auto a = g.A.data()[i], b = g2.A.data()[i];
    if (a == 0 && b == 1) ++a_add;
    if (a == 1 && b == 0) ++a_del;
  }
  return cm.cx_add.Times(x_add) + cm.cx_del.Times(x_del) +
         cm.ca_add.Times(a_add) + cm.ca_del.Times(a_del);
}

BinaryMatrix PermuteRows(const Permutation& p, const BinaryMatrix& m) {
  if (p.size() != m.rows()) throw std::invalid_argument("permutation size");
  BinaryMatrix out(m.rows(), m.cols());
  for (int i = 0; i < p.size(); ++i) out.row(p[i]) = m.row(i);
  return out;
}

Eigen::MatrixXd PermuteRows(const Permutation& p, const Eigen::MatrixXd& m) {
  if (p.size() != m.rows()) throw std::invalid_argument("permutation size");
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (int i = 0; i < p.size(); ++i) out.row(p[i]) = m.row(i);
  return out;
}

AttributedGraph ApplyIsomorphism(const Permutation& p, const AttributedGraph& g) {
  const int n = g.num_nodes();
  if (p.size() != n) throw std::invalid_argument("permutation size mismatch");
  AttributedGraph out = g;
  out.X = PermuteRows(p, g.X);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out.A(p[i], p[j]) = g.A(i, j);
  }
  if (static_cast<int>(g.labels.size()) == n && n > 1) {
    for (int i = 0; i < n; ++i) out.labels[p[i]] = g.labels[i];
  }
  for (auto& [i, j] : out.fixed_edges) {
    i = p[i];
    j = p[j];
  }
  return out;
}

namespace {

class GedSearch {
 public:
  GedSearch(const AttributedGraph& g, const AttributedGraph& g2,
            const CostModel& cm)
      : g_(g), g2_(g2), cm_(cm), n_(g.num_nodes()) {}

  GedResult Run() {
    const Permutation id = Permutation::Identity(n_);
    best_ = EditCost(g_, ApplyIsomorphism(id, g2_), cm_).value();
    best_perm_ = id.data();
    perm_.assign(static_cast<std::size_t>(n_), -1);
    used_.assign(static_cast<std::size_t>(n_), false);
    Extend(0, 0.0);
    GedResult r;
    r.distance = Cost(best_);
    r.minimizer = Permutation(best_perm_);
    return r;
  }

 private:
  // Cost added by placing node i of g2 at position pos, given the nodes
  // 0..i-1 already placed.
  double Increment(int i, int pos) const {
    double c = 0.0;
    for (int d = 0; d < g_.num_features(); ++d) {
      c += FlipCost(g_.X(pos, d), g2_.X(i, d), cm_.cx_add, cm_.cx_del);
    }
    c += FlipCost(g_.A(pos, pos), g2_.A(i, i), cm_.ca_add, cm_.ca_del);
    for (int k = 0; k < i; ++k) {
      const int pk = perm_[static_cast<std::size_t>(k)];
      c += FlipCost(g_.A(pos, pk), g2_.A(i, k), cm_.ca_add, cm_.ca_del);
      c += FlipCost(g_.A(pk, pos), g2_.A(k, i), cm_.ca_add, cm_.ca_del);
    }
    return c;
  }

  void Extend(int i, double partial) {
    if (i == n_) {
      if (partial < best_) {
        best_ = partial;
        best_perm_ = perm_;
      }
      return;
    }
    for (int pos = 0; pos < n_; ++pos) {
      if (used_[static_cast<std::size_t>(pos)]) continue;
      const double next = partial + Increment(i, pos);
      if (next >= best_) continue;
      used_[static_cast<std::size_t>(pos)] = true;
      perm_[static_cast<std::size_t>(i)] = pos;
      Extend(i + 1, next);
      used_[static_cast<std::size_t>(pos)] = false;
    }
  }

  const AttributedGraph& g_;
  const AttributedGraph& g2_;
  const CostModel& cm_;
  const int n_;
  double best_ = 0.0;
  std::vector<int> best_perm_;
  std::vector<int> perm_;
  std::vector<bool> used_;
};

}  // namespace

GedResult GedBruteForce(const AttributedGraph& g, const AttributedGraph& g2,
                        const CostModel& cm, const GedOptions& options) {
  CheckSameShape(g, g2);
  if (g.num_nodes() > options.max_nodes) {
    throw std::invalid_argument("graph too large for brute-force GED");
  }
  const CostModel effective =
      options.halve_undirected_structure ? HalveStructureCosts(cm) : cm;
  return GedSearch(g, g2, effective).Run();
}

namespace {

// One independently flippable unit: a single entry, or a symmetric pair.
struct FlipUnit {
  std::vector<std::pair<int, int>> entries;
  bool insertion = false;
};

struct Scoped {
  const BinaryMatrix* matrix;
  Cost add;
  Cost del;
};

Scoped ScopeOf(const AttributedGraph& g, const CostModel& cm,
               PerturbationScope scope) {
  if (scope == PerturbationScope::kAttributes) return {&g.X, cm.cx_add, cm.cx_del};
  return {&g.A, cm.ca_add, cm.ca_del};
}

std::vector<FlipUnit> BuildUnits(const EnumerationOptions& options,
                                 const Scoped& s) {
  std::vector<FlipUnit> units;
  const BinaryMatrix& m = *s.matrix;
  const bool adjacency = options.scope == PerturbationScope::kAdjacency;
  if (adjacency && options.symmetric && m != m.transpose()) {
    throw std::invalid_argument("symmetric enumeration needs symmetric A");
  }
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      const bool diag = adjacency && r == c;
      if (diag && !options.include_diagonal) continue;
      if (adjacency && options.symmetric && c < r) continue;
      const bool ins = m(r, c) == 0;
      if ((ins ? s.add : s.del).is_infinite()) continue;
      FlipUnit u;
      u.insertion = ins;
      u.entries.emplace_back(r, c);
      if (adjacency && options.symmetric && !diag) u.entries.emplace_back(c, r);
      units.push_back(std::move(u));
    }
  }
  return units;
}

class PerturbationWalker {
 public:
  PerturbationWalker(const CostModel& cm, const Scoped& s,
                     std::vector<FlipUnit> units, int rows,
                     BinaryMatrix* flip_target = nullptr)
      : cm_(cm), s_(s), units_(std::move(units)), target_(flip_target),
        row_add_(static_cast<std::size_t>(rows), 0),
        row_del_(static_cast<std::size_t>(rows), 0) {}

  // Calls `leaf` for every admissible subset; stops early when it returns
  // false.
  template <typename Leaf>
  bool Walk(std::size_t k, Leaf&& leaf) {
    if (k == units_.size()) return leaf();
    if (!Walk(k + 1, leaf)) return false;
    if (!Take(units_[k], +1)) {
      Take(units_[k], -1);
      return true;
    }
    const bool go_on = Walk(k + 1, leaf);
    Take(units_[k], -1);
    return go_on;
  }

 private:
  double Pair(int adds, int dels) const {
    return (s_.add.Times(adds) + s_.del.Times(dels)).value();
  }

  // Applies (+1) or reverts (-1) the unit; returns feasibility after an
  // application.
  bool Take(const FlipUnit& u, int sign) {
    bool ok = true;
    for (const auto& [r, c] : u.entries) {
      auto& cnt = u.insertion ? row_add_[static_cast<std::size_t>(r)]
                              : row_del_[static_cast<std::size_t>(r)];
      cnt += sign;
      (u.insertion ? total_add_ : total_del_) += sign;
      if (target_ != nullptr) (*target_)(r, c) ^= 1;
    }
    if (sign < 0) return true;
    for (const auto& entry : u.entries) {
      const int r = entry.first;
      const auto ri = static_cast<std::size_t>(r);
      if (!FitsBudget(Pair(row_add_[ri], row_del_[ri]), cm_.LocalBudget(r))) {
        ok = false;
      }
    }
    if (!FitsBudget(Pair(total_add_, total_del_), cm_.epsilon)) ok = false;
    return ok;
  }

  const CostModel& cm_;
  Scoped s_;
  std::vector<FlipUnit> units_;
  BinaryMatrix* target_;
  std::vector<int> row_add_;
  std::vector<int> row_del_;
  int total_add_ = 0;
  int total_del_ = 0;
};

double Binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

// Exact count for the non-symmetric case: per-row choices only interact via
// the global (insertions, deletions) totals.
double CountIndependentRows(const std::vector<FlipUnit>& units, int rows,
                            const CostModel& cm, const Scoped& s) {
  std::vector<int> ins(static_cast<std::size_t>(rows), 0);
  std::vector<int> dels(static_cast<std::size_t>(rows), 0);
  for (const FlipUnit& u : units) {
    const auto r = static_cast<std::size_t>(u.entries.front().first);
    (u.insertion ? ins : dels)[r]++;
  }
  auto pair_cost = [&](int a, int d) {
    return (s.add.Times(a) + s.del.Times(d)).value();
  };
  std::map<std::pair<int, int>, double> states{{{0, 0}, 1.0}};
  for (int r = 0; r < rows; ++r) {
    std::map<std::pair<int, int>, double> next;
    const auto ri = static_cast<std::size_t>(r);
    for (int i = 0; i <= ins[ri]; ++i) {
      for (int j = 0; j <= dels[ri]; ++j) {
        if (!FitsBudget(pair_cost(i, j), cm.LocalBudget(r))) continue;
        const double ways = Binomial(ins[ri], i) * Binomial(dels[ri], j);
        for (const auto& [key, count] : states) {
          const int ti = key.first + i, tj = key.second + j;
          if (!FitsBudget(pair_cost(ti, tj), cm.epsilon)) continue;
          next[{ti, tj}] += count * ways;
        }
      }
    }
    states = std::move(next);
  }
  double total = 0.0;
  for (const auto& kv : states) total += kv.second;
  return total;
}

}  // namespace

double CountPerturbations(const AttributedGraph& g, const CostModel& cm,
                          const EnumerationOptions& options) {
  g.Validate();
  cm.Validate(g.num_nodes());
  const Scoped s = ScopeOf(g, cm, options.scope);
  std::vector<FlipUnit> units = BuildUnits(options, s);
  const bool symmetric =
      options.scope == PerturbationScope::kAdjacency && options.symmetric;
  if (!symmetric) {
    return CountIndependentRows(units, static_cast<int>(s.matrix->rows()), cm, s);
  }
  // Pairs couple two rows; count by walking, saturating just above the cap.
  PerturbationWalker walker(cm, s, std::move(units),
                            static_cast<int>(s.matrix->rows()));
  double count = 0.0;
  walker.Walk(0, [&] {
    count += 1.0;
    return count <= options.cap;
  });
  return count;
}

std::size_t EnumeratePerturbations(
    const AttributedGraph& g, const CostModel& cm,
    const EnumerationOptions& options,
    const std::function<void(const AttributedGraph&)>& visit) {
  const double count = CountPerturbations(g, cm, options);
  if (count > options.cap) {
    throw std::length_error("perturbation set exceeds enumeration cap");
  }
  const Scoped s = ScopeOf(g, cm, options.scope);
  AttributedGraph work = g;
  BinaryMatrix& target =
      options.scope == PerturbationScope::kAttributes ? work.X : work.A;
  PerturbationWalker walker(cm, s, BuildUnits(options, s),
                            static_cast<int>(s.matrix->rows()), &target);
  std::size_t visited = 0;
  walker.Walk(0, [&] {
    visit(work);
    ++visited;
    return true;
  });
  return visited;
}

}  // namespace gedcert
