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

#include "gedcert/cert_struct.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace gedcert {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double MinBudget(double a, double b) { return std::min(a, b); }

// Degree of row n once the self-loop is forced.
double LoopDegree(const BinaryMatrix& a, int n) {
  double deg = 1.0;
  for (int m = 0; m < a.cols(); ++m) {
    if (m != n && a(n, m) != 0) deg += 1.0;
  }
  return deg;
}

// Sum over the row with the self-loop forced.
double LoopRowDot(const BinaryMatrix& a, int n, const Eigen::VectorXd& v) {
  double sum = v(n);
  for (int m = 0; m < a.cols(); ++m) {
    if (m != n && a(n, m) != 0) sum += v(m);
  }
  return sum;
}

EntryKind FlipKind(const BinaryMatrix& a, int n, int m) {
  if (n == m) return EntryKind::kFixed;
  return a(n, m) == 0 ? EntryKind::kInsert : EntryKind::kDelete;
}

// One-row instance over the flips of row n with value +v(m) for insertions
// and -v(m) for deletions.
TwoCostInstance RowInstance(const BinaryMatrix& a, int n, const Eigen::VectorXd& v,
                            const CostModel& cm, double budget) {
  TwoCostInstance inst;
  const int cols = static_cast<int>(a.cols());
  inst.values.resize(1, cols);
  inst.kinds.resize(static_cast<std::size_t>(cols));
  for (int m = 0; m < cols; ++m) {
    const EntryKind k = FlipKind(a, n, m);
    inst.kinds[static_cast<std::size_t>(m)] = k;
    inst.values(0, m) = k == EntryKind::kDelete ? -v(m) : v(m);
  }
  inst.cost_add = cm.ca_add;
  inst.cost_del = cm.ca_del;
  inst.epsilon = budget;
  inst.rho = {budget};
  return inst;
}

Eigen::VectorXd ClassDirection(const GnnModel& model, int num_nodes, int label,
                               int other) {
  const int classes = model.num_classes();
  if (label < 0 || label >= classes || other < 0 || other >= classes) {
    throw std::out_of_range("class index out of range");
  }
  return (model.readout.col(label) - model.readout.col(other)) /
         static_cast<double>(std::max(num_nodes, 1));
}

Eigen::MatrixXd HiddenInputs(const GnnModel& model, const AttributedGraph& g) {
  return ToReal(g.X) * model.layers[0].weight;
}

void CheckGraphCls(const GnnModel& model, const AttributedGraph& g,
                   const CostModel& cm) {
  model.Validate();
  if (model.arch != Architecture::kGraphClsMean) {
    throw std::invalid_argument("not a graph classifier");
  }
  g.Validate();
  if (g.num_features() != model.input_dim()) {
    throw std::invalid_argument("feature dimension does not match the model");
  }
  RequireStructureThreatModel(cm);
  cm.Validate(g.num_nodes());
}

std::vector<LinearNodeModel> LinearizeAll(const GnnModel& model,
                                          const AttributedGraph& g,
                                          const std::vector<NeuronInterval>& bounds,
                                          int label, int other) {
  std::vector<LinearNodeModel> out;
  out.reserve(bounds.size());
  for (int n = 0; n < g.num_nodes(); ++n) {
    out.push_back(
        CrownLinearize(model, g, n, bounds[static_cast<std::size_t>(n)], label, other));
  }
  return out;
}

BinaryMatrix ApplyRowSelections(const BinaryMatrix& a,
                                const std::vector<std::vector<int>>& selection) {
  BinaryMatrix out = a;
  for (std::size_t n = 0; n < selection.size(); ++n) {
    for (int m : selection[n]) {
      const int row = static_cast<int>(n);
      out(row, m) = out(row, m) != 0 ? 0 : 1;
    }
  }
  return out;
}

struct RowChoice {
  std::vector<int> add_order;
  std::vector<int> del_order;
};

RowChoice OrderForDegree(const BinaryMatrix& a, int n, const Eigen::VectorXd& q,
                         const Eigen::MatrixXd* dual, double new_degree) {
  RowChoice rc;
  std::vector<double> add_value(static_cast<std::size_t>(a.cols()));
  std::vector<double> del_value(static_cast<std::size_t>(a.cols()));
  for (int m = 0; m < a.cols(); ++m) {
    const double shift = dual == nullptr ? 0.0 : new_degree * (*dual)(n, m);
    add_value[static_cast<std::size_t>(m)] = -q(m) + shift;
    del_value[static_cast<std::size_t>(m)] = q(m) - shift;
    switch (FlipKind(a, n, m)) {
      case EntryKind::kInsert: rc.add_order.push_back(m); break;
      case EntryKind::kDelete: rc.del_order.push_back(m); break;
      case EntryKind::kFixed: break;
    }
  }
  auto by = [](const std::vector<double>& v) {
    return [&v](int x, int y) {
      const double vx = v[static_cast<std::size_t>(x)];
      const double vy = v[static_cast<std::size_t>(y)];
      return vx != vy ? vx > vy : x < y;
    };
  };
  std::sort(rc.add_order.begin(), rc.add_order.end(), by(add_value));
  std::sort(rc.del_order.begin(), rc.del_order.end(), by(del_value));
  return rc;
}

struct LinearizedProblem {
  std::vector<LocalTable> tables;
  double value = 0.0;
  BinaryMatrix worst;
};

// Worst-case tables for the linearized objective
//   sum_n [ -(row_n . q_n) / deg_n - intercept_n + sum_m dual(n, m) A'(n, m) ]
// where `dual` is antisymmetric (null means zero). For each new degree the
// best insertions / deletions are the largest of
//   -q_n(m) + deg' dual(n, m)   and   q_n(m) - deg' dual(n, m).
LinearizedProblem SolveLinearized(const AttributedGraph& g, const CostModel& cm,
                                  const std::vector<LinearNodeModel>& linear,
                                  const Eigen::MatrixXd* dual) {
  const BinaryMatrix& a = g.A;
  const int num_nodes = g.num_nodes();
  LinearizedProblem out;
  out.tables.resize(static_cast<std::size_t>(num_nodes));
  std::vector<std::map<int, RowChoice>> orders(static_cast<std::size_t>(num_nodes));

  if (dual == nullptr) {
    // Degree-independent values: one precomputation over all rows.
    TwoCostInstance inst;
    inst.values.resize(num_nodes, num_nodes);
    inst.kinds.resize(static_cast<std::size_t>(num_nodes) *
                      static_cast<std::size_t>(num_nodes));
    for (int n = 0; n < num_nodes; ++n) {
      const Eigen::VectorXd& q = linear[static_cast<std::size_t>(n)].q;
      for (int m = 0; m < num_nodes; ++m) {
        const EntryKind k = FlipKind(a, n, m);
        inst.kinds[static_cast<std::size_t>(n) * static_cast<std::size_t>(num_nodes) +
                   static_cast<std::size_t>(m)] = k;
        inst.values(n, m) = k == EntryKind::kInsert ? -q(m) : q(m);
      }
    }
    inst.cost_add = cm.ca_add;
    inst.cost_del = cm.ca_del;
    inst.epsilon = cm.epsilon;
    inst.rho = cm.rho;
    out.tables = PrecomputeLocal(inst);
  }

  for (int n = 0; n < num_nodes; ++n) {
    const LinearNodeModel& lin = linear[static_cast<std::size_t>(n)];
    const double degree = LoopDegree(a, n);
    const double clean = LoopRowDot(a, n, lin.q);
    LocalTable& t = out.tables[static_cast<std::size_t>(n)];
    if (dual == nullptr) {
      for (int i = 0; i <= t.max_adds(); ++i) {
        for (int j = 0; j <= t.max_dels(); ++j) {
          if (!t.Feasible(i, j)) continue;
          const double new_degree = std::clamp(degree + i - j, 1.0,
                                                static_cast<double>(num_nodes));
          t.alpha(i, j) = (t.alpha(i, j) - clean) / new_degree - lin.intercept;
        }
      }
      continue;
    }
    double base = 0.0;
    for (int m = 0; m < num_nodes; ++m) {
      if (m != n && a(n, m) != 0) base += (*dual)(n, m);
    }
    const double budget = cm.LocalBudget(n);
    RowChoice shape = OrderForDegree(a, n, lin.q, nullptr, degree);
    const int max_adds = MaxAffordable(budget, cm.ca_add,
                                       static_cast<int>(shape.add_order.size()));
    const int max_dels = MaxAffordable(budget, cm.ca_del,
                                       static_cast<int>(shape.del_order.size()));
    t.alpha.setConstant(max_adds + 1, max_dels + 1, -kInf);
    t.add_order = shape.add_order;
    t.del_order = shape.del_order;
    for (int i = 0; i <= max_adds; ++i) {
      for (int j = 0; j <= max_dels; ++j) {
        const Cost cost = cm.ca_add.Times(i) + cm.ca_del.Times(j);
        if (!FitsBudget(cost.value(), budget)) continue;
        const double new_degree = degree + i - j;
        auto it = orders[static_cast<std::size_t>(n)].find(i - j);
        if (it == orders[static_cast<std::size_t>(n)].end()) {
          it = orders[static_cast<std::size_t>(n)]
                   .emplace(i - j, OrderForDegree(a, n, lin.q, dual, new_degree))
                   .first;
        }
        double sum = 0.0;
        for (int s = 0; s < i; ++s) {
          const int m = it->second.add_order[static_cast<std::size_t>(s)];
          sum += -lin.q(m) + new_degree * (*dual)(n, m);
        }
        for (int s = 0; s < j; ++s) {
          const int m = it->second.del_order[static_cast<std::size_t>(s)];
          sum += lin.q(m) - new_degree * (*dual)(n, m);
        }
        t.alpha(i, j) = (sum - clean) / new_degree - lin.intercept + base;
      }
    }
  }

  const KnapsackSolution sol =
      CombineGlobal(out.tables, cm.ca_add, cm.ca_del, cm.epsilon, cm.rho);
  out.value = sol.value;
  if (dual == nullptr) {
    out.worst = ApplyRowSelections(a, sol.selection);
    return out;
  }
  std::vector<std::vector<int>> selection(static_cast<std::size_t>(num_nodes));
  for (int n = 0; n < num_nodes; ++n) {
    const auto [i, j] = sol.counts[static_cast<std::size_t>(n)];
    const RowChoice& rc = orders[static_cast<std::size_t>(n)].at(i - j);
    auto& sel = selection[static_cast<std::size_t>(n)];
    sel.assign(rc.add_order.begin(), rc.add_order.begin() + i);
    sel.insert(sel.end(), rc.del_order.begin(), rc.del_order.begin() + j);
  }
  out.worst = ApplyRowSelections(a, selection);
  return out;
}

}  // namespace

CostModel RescaleBudgets(const CostModel& cm, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw std::invalid_argument("rescale factor must be positive and finite");
  }
  CostModel out = cm;
  out.cx_add = cm.cx_add.Scaled(factor);
  out.cx_del = cm.cx_del.Scaled(factor);
  out.ca_add = cm.ca_add.Scaled(factor);
  out.ca_del = cm.ca_del.Scaled(factor);
  return out;
}

void RequireStructureThreatModel(const CostModel& cm) {
  if (!cm.cx_add.is_infinite() || !cm.cx_del.is_infinite()) {
    throw IncompatibleCostError(
        "structure certificates require infinite attribute costs");
  }
  if (cm.ca_add.is_infinite() && cm.ca_del.is_infinite()) {
    throw IncompatibleCostError(
        "structure certificates require a finite structure cost");
  }
}

NeuronInterval GraphClsNodeBounds(const GnnModel& model, const AttributedGraph& g,
                                  const CostModel& cm, int node) {
  CheckGraphCls(model, g, cm);
  if (node < 0 || node >= g.num_nodes()) throw std::out_of_range("node out of range");
  const Eigen::MatrixXd hidden = HiddenInputs(model, g);
  const double budget = MinBudget(cm.LocalBudget(node), cm.epsilon);
  const double degree = LoopDegree(g.A, node);
  NeuronInterval out;
  out.lower.resize(hidden.cols());
  out.upper.resize(hidden.cols());
  for (Eigen::Index h = 0; h < hidden.cols(); ++h) {
    const Eigen::VectorXd column = hidden.col(h);
    const double clean = LoopRowDot(g.A, node, column);
    const LocalTable up =
        PrecomputeLocal(RowInstance(g.A, node, column, cm, budget)).front();
    const LocalTable down =
        PrecomputeLocal(RowInstance(g.A, node, -column, cm, budget)).front();
    double hi = -kInf;
    for (int i = 0; i <= up.max_adds(); ++i) {
      for (int j = 0; j <= up.max_dels(); ++j) {
        if (up.Feasible(i, j)) hi = std::max(hi, (clean + up.alpha(i, j)) / (degree + i - j));
      }
    }
    double lo = kInf;
    for (int i = 0; i <= down.max_adds(); ++i) {
      for (int j = 0; j <= down.max_dels(); ++j) {
        if (down.Feasible(i, j)) {
          lo = std::min(lo, (clean - down.alpha(i, j)) / (degree + i - j));
        }
      }
    }
    out.lower(h) = lo;
    out.upper(h) = hi;
  }
  return out;
}

LinearNodeModel CrownLinearize(const GnnModel& model, const AttributedGraph& g,
                               int node, const NeuronInterval& bounds, int label,
                               int other) {
  const Eigen::MatrixXd hidden = HiddenInputs(model, g);
  if (bounds.lower.size() != hidden.cols() || bounds.upper.size() != hidden.cols()) {
    throw std::invalid_argument("bounds do not match the hidden width");
  }
  const Eigen::VectorXd u = ClassDirection(model, g.num_nodes(), label, other);
  Eigen::VectorXd slope = Eigen::VectorXd::Zero(hidden.cols());
  double intercept = 0.0;
  for (Eigen::Index h = 0; h < hidden.cols(); ++h) {
    const double r = bounds.lower(h), s = bounds.upper(h);
    if (r > s + 1e-12 * (1.0 + std::abs(s))) {
      throw std::logic_error("pre-activation lower bound exceeds upper bound");
    }
    if (s <= 0.0) continue;
    if (r >= 0.0) {
      slope(h) = u(h);
      continue;
    }
    const double lambda = s / (s - r);
    slope(h) = u(h) * lambda;
    // Below zero weight the ReLU's upper chord; otherwise a lower line
    // through the origin.
    if (u(h) < 0.0) intercept += -u(h) * lambda * r;
  }
  LinearNodeModel out;
  out.node = node;
  out.label = label;
  out.other = other;
  out.q = hidden * slope;
  out.intercept = intercept;
  return out;
}

double NodeContribution(const GnnModel& model, const AttributedGraph& g,
                        const BinaryMatrix& a, int node, int label, int other) {
  const Eigen::MatrixXd hidden = HiddenInputs(model, g);
  const Eigen::VectorXd u = ClassDirection(model, g.num_nodes(), label, other);
  const double degree = LoopDegree(a, node);
  double total = 0.0;
  for (Eigen::Index h = 0; h < hidden.cols(); ++h) {
    const double z = LoopRowDot(a, node, hidden.col(h)) / degree;
    total += u(h) * std::max(z, 0.0);
  }
  return total;
}

GraphClassBound GraphClsClassBound(const GnnModel& model, const AttributedGraph& g,
                                   const CostModel& cm,
                                   const std::vector<NeuronInterval>& node_bounds,
                                   int label, int other) {
  CheckGraphCls(model, g, cm);
  if (static_cast<int>(node_bounds.size()) != g.num_nodes()) {
    throw std::invalid_argument("need one bound per node");
  }
  const LinearizedProblem p = SolveLinearized(
      g, cm, LinearizeAll(model, g, node_bounds, label, other), nullptr);
  return GraphClassBound{-p.value, p.worst};
}

namespace {

std::vector<NeuronInterval> AllNodeBounds(const GnnModel& model,
                                          const AttributedGraph& g,
                                          const CostModel& cm) {
  std::vector<NeuronInterval> bounds;
  bounds.reserve(static_cast<std::size_t>(g.num_nodes()));
  for (int n = 0; n < g.num_nodes(); ++n) {
    bounds.push_back(GraphClsNodeBounds(model, g, cm, n));
  }
  return bounds;
}

template <typename ClassBound>
GraphCertificate CertifyGraph(const GnnModel& model, const AttributedGraph& g,
                              int graph_id, ClassBound&& class_bound) {
  const int label = Argmax(GraphClsForward(model, g));
  GraphCertificate out;
  out.class_margins.assign(static_cast<std::size_t>(model.num_classes()), kInf);
  double worst = kInf;
  for (int k = 0; k < model.num_classes(); ++k) {
    if (k == label) continue;
    const double m = class_bound(label, k);
    out.class_margins[static_cast<std::size_t>(k)] = m;
    worst = std::min(worst, m);
  }
  out.summary = MakeCertificate(graph_id, label, worst);
  return out;
}

}  // namespace

GraphCertificate GraphClsCertify(const GnnModel& model, const AttributedGraph& g,
                                 const CostModel& cm, int graph_id) {
  CheckGraphCls(model, g, cm);
  const std::vector<NeuronInterval> bounds = AllNodeBounds(model, g, cm);
  return CertifyGraph(model, g, graph_id, [&](int y, int k) {
    return GraphClsClassBound(model, g, cm, bounds, y, k).margin;
  });
}

SymmetryDualResult GraphClsSymmetryDual(const GnnModel& model,
                                        const AttributedGraph& g,
                                        const CostModel& cm, int label, int other,
                                        const SymmetryDualOptions& options) {
  CheckGraphCls(model, g, cm);
  if (!g.undirected) throw std::invalid_argument("symmetry dual needs an undirected graph");
  if (options.steps <= 0) throw std::invalid_argument("steps must be positive");
  if (!(options.step_size > 0.0)) throw std::invalid_argument("step size must be positive");

  const std::vector<LinearNodeModel> linear =
      LinearizeAll(model, g, AllNodeBounds(model, g, cm), label, other);
  const int num_nodes = g.num_nodes();
  Eigen::MatrixXd multiplier = Eigen::MatrixXd::Zero(num_nodes, num_nodes);
  SymmetryDualResult out;
  out.margin = -kInf;
  for (int step = 0; step < options.steps; ++step) {
    Eigen::MatrixXd dual = multiplier - multiplier.transpose();
    const LinearizedProblem p =
        SolveLinearized(g, cm, linear, step == 0 ? nullptr : &dual);
    out.margin = std::max(out.margin, -p.value);
    out.history.push_back(out.margin);
    const Eigen::MatrixXd worst = p.worst.cast<double>();
    multiplier -= options.step_size * (worst - worst.transpose());
  }
  return out;
}

GraphCertificate GraphClsCertifySymmetric(const GnnModel& model,
                                          const AttributedGraph& g,
                                          const CostModel& cm,
                                          const SymmetryDualOptions& options,
                                          int graph_id) {
  CheckGraphCls(model, g, cm);
  return CertifyGraph(model, g, graph_id, [&](int y, int k) {
    return GraphClsSymmetryDual(model, g, cm, y, k, options).margin;
  });
}

// ---------------------------------------------------------------------------

double FragileEdgeSet::LocalBudget(int node) const {
  if (rho.empty()) return kInf;
  return rho.at(static_cast<std::size_t>(node));
}

void FragileEdgeSet::Validate(const AttributedGraph& g) const {
  const int n = g.num_nodes();
  if (!rho.empty() && static_cast<int>(rho.size()) != n) {
    throw std::invalid_argument("rho must have one entry per node");
  }
  for (double r : rho) {
    if (!(r >= 0.0)) throw std::invalid_argument("local budgets must be nonnegative");
  }
  const std::set<std::pair<int, int>> fixed(g.fixed_edges.begin(), g.fixed_edges.end());
  std::set<std::pair<int, int>> seen;
  for (const auto& e : fragile) {
    if (e.first < 0 || e.first >= n || e.second < 0 || e.second >= n) {
      throw std::invalid_argument("fragile edge out of range");
    }
    if (e.first == e.second) throw std::invalid_argument("self-loops cannot be fragile");
    if (fixed.count(e) != 0) throw std::invalid_argument("fragile edge is fixed");
    if (!seen.insert(e).second) throw std::invalid_argument("duplicate fragile edge");
  }
}

FragileEdgeSet FragileEdgeSet::AllPairs(const AttributedGraph& g,
                                        std::vector<double> rho, Cost cost_add,
                                        Cost cost_del) {
  const std::set<std::pair<int, int>> fixed(g.fixed_edges.begin(), g.fixed_edges.end());
  FragileEdgeSet out;
  for (int i = 0; i < g.num_nodes(); ++i) {
    for (int j = 0; j < g.num_nodes(); ++j) {
      if (i != j && fixed.count({i, j}) == 0) out.fragile.emplace_back(i, j);
    }
  }
  out.rho = std::move(rho);
  out.cost_add = cost_add;
  out.cost_del = cost_del;
  return out;
}

std::vector<double> DegreeBudgets(const AttributedGraph& g, double offset,
                                  double strength) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(g.num_nodes()));
  for (int v = 0; v < g.num_nodes(); ++v) {
    out.push_back(std::max(LoopDegree(g.A, v) - 1.0 - offset + strength, 0.0));
  }
  return out;
}

double PippnpMargin(const GnnModel& model, const Eigen::MatrixXd& logits,
                    const BinaryMatrix& a, int target, int label, int other) {
  const Eigen::MatrixXd scores = PippnpForward(model, logits, a);
  return scores(target, label) - scores(target, other);
}

namespace {

// Value of every node under the policy `a`: x = (I - alpha P)^{-1} reward.
Eigen::VectorXd PolicyValue(double alpha, const BinaryMatrix& a,
                            const Eigen::VectorXd& reward) {
  const Eigen::MatrixXd p = PreprocessAdjacency(a, AdjacencyMode::kRowNormSelfLoops);
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(p.rows(), p.cols()) - alpha * p;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  if (system.rows() > 0 && !(lu.rcond() > 1e-14)) {
    throw std::runtime_error("singular diffusion system");
  }
  return lu.solve(reward);
}

}  // namespace

PolicyIterationResult PippnpPolicyIteration(const GnnModel& model,
                                            const Eigen::MatrixXd& logits,
                                            const AttributedGraph& g,
                                            const FragileEdgeSet& fragile,
                                            int target, int label, int other,
                                            const PolicyIterationOptions& options) {
  g.Validate();
  fragile.Validate(g);
  const int n = g.num_nodes();
  if (target < 0 || target >= n) throw std::out_of_range("target out of range");
  if (logits.rows() != n) throw std::invalid_argument("logit rows != N");
  if (label < 0 || label >= logits.cols() || other < 0 || other >= logits.cols()) {
    throw std::out_of_range("class index out of range");
  }
  if (!(model.alpha > 0.0 && model.alpha < 1.0)) {
    throw std::invalid_argument("teleport alpha must lie in (0, 1)");
  }
  if (options.max_iterations <= 0) {
    throw std::invalid_argument("iteration cap must be positive");
  }
  const double alpha = model.alpha;
  const Eigen::VectorXd reward = -(logits.col(label) - logits.col(other));

  std::vector<std::vector<int>> columns(static_cast<std::size_t>(n));
  for (const auto& [i, j] : fragile.fragile) {
    columns[static_cast<std::size_t>(i)].push_back(j);
  }
  for (auto& c : columns) std::sort(c.begin(), c.end());
  // Per row, the flipped columns of the current policy.
  std::vector<std::vector<int>> policy(static_cast<std::size_t>(n));

  auto policy_graph = [&]() {
    BinaryMatrix a = g.A;
    for (int i = 0; i < n; ++i) {
      for (int j : policy[static_cast<std::size_t>(i)]) a(i, j) = a(i, j) != 0 ? 0 : 1;
    }
    return a;
  };

  PolicyIterationResult out;
  double best_value = -kInf;
  std::vector<std::vector<int>> best_policy;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    out.iterations = iter;
    const Eigen::VectorXd x = PolicyValue(alpha, policy_graph(), reward);
    if (x(target) > best_value) {
      best_value = x(target);
      best_policy = policy;
    }
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      const std::vector<int>& cols = columns[static_cast<std::size_t>(i)];
      if (cols.empty()) continue;
      // Mean neighbour value under the current policy.
      const double mean = (x(i) - reward(i)) / alpha;
      TwoCostInstance inst;
      inst.values.resize(1, static_cast<Eigen::Index>(cols.size()));
      inst.kinds.resize(cols.size());
      double scale = 1.0;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const int j = cols[c];
        const bool present = g.A(i, j) != 0;
        inst.kinds[c] = present ? EntryKind::kDelete : EntryKind::kInsert;
        inst.values(0, static_cast<Eigen::Index>(c)) =
            (present ? -1.0 : 1.0) * (x(j) - mean);
        scale += std::abs(inst.values(0, static_cast<Eigen::Index>(c)));
      }
      inst.cost_add = fragile.cost_add;
      inst.cost_del = fragile.cost_del;
      inst.epsilon = kInf;
      inst.rho = {fragile.LocalBudget(i)};
      const KnapsackSolution sol = SolveExact(inst);

      std::vector<int>& current = policy[static_cast<std::size_t>(i)];
      double current_score = 0.0;
      for (int j : current) {
        const auto pos = std::lower_bound(cols.begin(), cols.end(), j) - cols.begin();
        current_score += inst.values(0, pos);
      }
      // Switch only on a strict improvement so float ties cannot cycle.
      if (sol.value > current_score + 1e-13 * scale) {
        current.clear();
        for (int c : sol.selection.front()) current.push_back(cols[static_cast<std::size_t>(c)]);
        changed = true;
      }
    }
    if (!changed) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged) {
    // The final improvement step has not been evaluated yet.
    const Eigen::VectorXd x = PolicyValue(alpha, policy_graph(), reward);
    if (x(target) > best_value) {
      best_value = x(target);
      best_policy = policy;
    }
  }
  out.margin = -(1.0 - alpha) * best_value;
  for (int i = 0; i < n; ++i) {
    for (int j : best_policy[static_cast<std::size_t>(i)]) out.flips.emplace_back(i, j);
  }
  std::sort(out.flips.begin(), out.flips.end());
  return out;
}

NodeCertificate PippnpCertify(const GnnModel& model, const Eigen::MatrixXd& logits,
                              const AttributedGraph& g, const FragileEdgeSet& fragile,
                              int target, const PolicyIterationOptions& options) {
  const Eigen::MatrixXd scores = PippnpForward(model, logits, g.A);
  const int label = Argmax(Eigen::VectorXd(scores.row(target).transpose()));
  double worst = kInf;
  bool flagged = false;
  for (int c = 0; c < scores.cols(); ++c) {
    if (c == label) continue;
    const PolicyIterationResult r =
        PippnpPolicyIteration(model, logits, g, fragile, target, label, c, options);
    worst = std::min(worst, r.margin);
    flagged = flagged || !r.converged;
  }
  NodeCertificate cert = MakeCertificate(target, label, worst);
  cert.flagged = flagged;
  cert.certified = cert.certified && !flagged;
  return cert;
}

}  // namespace gedcert
