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

#include "gedcert/cert_attr.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "gedcert/knapsack.h"
#include "gedcert/parallel.h"

namespace gedcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-entry attribute flip cost: insertion where X = 0, deletion where X = 1.
Eigen::MatrixXd FlipCosts(const BinaryMatrix& x, const CostModel& cm) {
  Eigen::MatrixXd c(x.rows(), x.cols());
  for (int n = 0; n < x.rows(); ++n) {
    for (int d = 0; d < x.cols(); ++d) {
      c(n, d) = x(n, d) == 0 ? cm.cx_add.value() : cm.cx_del.value();
    }
  }
  return c;
}

std::vector<double> SliceRho(const CostModel& cm, const std::vector<int>& rows) {
  if (cm.rho.empty()) return {};
  std::vector<double> out;
  out.reserve(rows.size());
  for (int n : rows) out.push_back(cm.rho[static_cast<std::size_t>(n)]);
  return out;
}

void CheckInputs(const GnnModel& model, const Eigen::MatrixXd& a_hat,
                 const BinaryMatrix& x, const CostModel& cm) {
  model.Validate();
  if (model.arch != Architecture::kGcn) {
    throw std::invalid_argument("attribute certificates expect a GCN");
  }
  if (a_hat.rows() != x.rows() || a_hat.cols() != x.rows()) {
    throw std::invalid_argument("propagation matrix must be N x N");
  }
  if (x.cols() != model.input_dim()) {
    throw std::invalid_argument("feature dimension does not match the model");
  }
  RequireAttributeThreatModel(cm);
  cm.Validate(static_cast<int>(x.rows()));
}

}  // namespace

void RequireAttributeThreatModel(const CostModel& cm) {
  if (!cm.ca_add.is_infinite() || !cm.ca_del.is_infinite()) {
    throw IncompatibleCostError(
        "attribute certificates require infinite structure costs");
  }
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> IbpFirstLayer(
    const GnnModel& model, const Eigen::MatrixXd& a_hat, const BinaryMatrix& x,
    const CostModel& cm, int threads) {
  CheckInputs(model, a_hat, x, cm);
  const DenseLayer& layer = model.layers.front();
  const Eigen::MatrixXd clean =
      (a_hat * (ToReal(x) * layer.weight)).rowwise() + layer.bias.transpose();
  const Eigen::MatrixXd costs = FlipCosts(x, cm);
  const int n_nodes = static_cast<int>(x.rows());
  const int dim = static_cast<int>(x.cols());
  const int width = static_cast<int>(layer.weight.cols());
  Eigen::MatrixXd lower = clean, upper = clean;

  ParallelFor(static_cast<std::size_t>(n_nodes), threads, [&](std::size_t node) {
    const int i = static_cast<int>(node);
    std::vector<int> rows;
    for (int n = 0; n < n_nodes; ++n) {
      if (a_hat(i, n) != 0.0) rows.push_back(n);
    }
    GeneralInstance up, down;
    up.costs.resize(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      up.costs.row(static_cast<Eigen::Index>(r)) = costs.row(rows[r]);
    }
    up.epsilon = cm.epsilon;
    up.rho = SliceRho(cm, rows);
    down.costs = up.costs;
    down.epsilon = up.epsilon;
    down.rho = up.rho;
    up.values.resize(up.costs.rows(), dim);
    down.values.resize(up.costs.rows(), dim);
    for (int j = 0; j < width; ++j) {
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const int n = rows[r];
        for (int d = 0; d < dim; ++d) {
          // Change of Z[i, j] when bit (n, d) flips.
          const double delta =
              a_hat(i, n) * layer.weight(d, j) * (x(n, d) == 0 ? 1.0 : -1.0);
          up.values(static_cast<Eigen::Index>(r), d) = std::max(delta, 0.0);
          down.values(static_cast<Eigen::Index>(r), d) = std::max(-delta, 0.0);
        }
      }
      upper(i, j) += SolveRelaxed(up).value;
      lower(i, j) -= SolveRelaxed(down).value;
    }
  });
  return {lower, upper};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> IbpFirstLayer(const GnnModel& model,
                                                          const AttributedGraph& g,
                                                          const CostModel& cm) {
  return IbpFirstLayer(model, PreprocessAdjacency(g.A, model.adj_mode), g.X, cm);
}

LayerBounds IbpBounds(const GnnModel& model, const Eigen::MatrixXd& a_hat,
                      const BinaryMatrix& x, const CostModel& cm, int threads) {
  LayerBounds b;
  auto [lo, hi] = IbpFirstLayer(model, a_hat, x, cm, threads);
  b.lower.push_back(std::move(lo));
  b.upper.push_back(std::move(hi));
  for (std::size_t l = 1; l < model.layers.size(); ++l) {
    const DenseLayer& layer = model.layers[l];
    // a_hat >= 0, so propagation preserves the order of activation bounds.
    const Eigen::MatrixXd act_lo = a_hat * b.lower.back().cwiseMax(0.0);
    const Eigen::MatrixXd act_hi = a_hat * b.upper.back().cwiseMax(0.0);
    const Eigen::MatrixXd w_pos = layer.weight.cwiseMax(0.0);
    const Eigen::MatrixXd w_neg = layer.weight.cwiseMin(0.0);
    Eigen::MatrixXd next_lo = act_lo * w_pos + act_hi * w_neg;
    Eigen::MatrixXd next_hi = act_hi * w_pos + act_lo * w_neg;
    next_lo.rowwise() += layer.bias.transpose();
    next_hi.rowwise() += layer.bias.transpose();
    b.lower.push_back(std::move(next_lo));
    b.upper.push_back(std::move(next_hi));
  }
  return b;
}

std::vector<NodeCertificate> IbpCertify(const GnnModel& model,
                                        const AttributedGraph& g,
                                        const CostModel& cm, int threads) {
  const Eigen::MatrixXd a_hat = PreprocessAdjacency(g.A, model.adj_mode);
  const std::vector<int> labels = ArgmaxRows(GcnForward(model, a_hat, ToReal(g.X)));
  const LayerBounds b = IbpBounds(model, a_hat, g.X, cm, threads);
  const Eigen::MatrixXd& lo = b.lower.back();
  const Eigen::MatrixXd& hi = b.upper.back();
  std::vector<NodeCertificate> out;
  for (int n = 0; n < g.num_nodes(); ++n) {
    const int y = labels[static_cast<std::size_t>(n)];
    double bound = kInf;
    for (int k = 0; k < lo.cols(); ++k) {
      if (k != y) bound = std::min(bound, lo(n, y) - hi(n, k));
    }
    out.push_back(MakeCertificate(n, y, bound));
  }
  return out;
}

double PolytopeClassBound(const GnnModel& model, const Eigen::MatrixXd& a_hat,
                          const BinaryMatrix& x, const LayerBounds& bounds,
                          const CostModel& cm, int target, int y, int k,
                          OmegaPolicy omega) {
  const int num_layers = static_cast<int>(model.layers.size());
  // Coefficients of the objective on the current layer's pre-activation.
  Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(x.rows(), model.num_classes());
  coef(target, y) = 1.0;
  coef(target, k) = -1.0;
  double constant = 0.0;
  Eigen::MatrixXd input_coef;
  for (int l = num_layers - 1; l >= 0; --l) {
    const DenseLayer& layer = model.layers[static_cast<std::size_t>(l)];
    constant += coef.colwise().sum().dot(layer.bias);
    Eigen::MatrixXd act_coef = a_hat.transpose() * coef * layer.weight.transpose();
    if (l == 0) {
      input_coef = std::move(act_coef);
      break;
    }
    const Eigen::MatrixXd& r = bounds.lower[static_cast<std::size_t>(l) - 1];
    const Eigen::MatrixXd& s = bounds.upper[static_cast<std::size_t>(l) - 1];
    coef.resize(act_coef.rows(), act_coef.cols());
    for (Eigen::Index n = 0; n < act_coef.rows(); ++n) {
      for (Eigen::Index j = 0; j < act_coef.cols(); ++j) {
        const double gamma = act_coef(n, j), lo = r(n, j), hi = s(n, j);
        if (lo >= 0.0) {
          coef(n, j) = gamma;
        } else if (hi <= 0.0) {
          coef(n, j) = 0.0;
        } else {
          const double chord = hi / (hi - lo);
          if (gamma < 0.0) {
            // Upper line chord * (z - lo).
            coef(n, j) = gamma * chord;
            constant -= gamma * chord * lo;
          } else {
            const double slope = omega == OmegaPolicy::kChord ? chord
                                 : omega == OmegaPolicy::kOne ? 1.0
                                                              : 0.0;
            coef(n, j) = gamma * slope;
          }
        }
      }
    }
  }

  // Worst case of <input_coef, X'> over the relaxed attribute budget.
  GeneralInstance inst;
  inst.values.resize(x.rows(), x.cols());
  double clean = 0.0;
  for (int n = 0; n < x.rows(); ++n) {
    for (int d = 0; d < x.cols(); ++d) {
      const double c = input_coef(n, d);
      clean += x(n, d) != 0 ? c : 0.0;
      inst.values(n, d) = x(n, d) == 0 ? std::max(-c, 0.0) : std::max(c, 0.0);
    }
  }
  inst.costs = FlipCosts(x, cm);
  inst.epsilon = cm.epsilon;
  inst.rho = cm.rho;
  const RelaxedSolution sol = SolveRelaxed(inst);
  return constant + clean - DualObjective(inst, sol.lambda_star, sol.kappa_star);
}

std::vector<int> HopNeighbourhood(const Eigen::MatrixXd& a_hat, int target, int hops) {
  const int n = static_cast<int>(a_hat.rows());
  std::vector<int> dist(static_cast<std::size_t>(n), -1);
  std::queue<int> frontier;
  dist[static_cast<std::size_t>(target)] = 0;
  frontier.push(target);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    if (dist[static_cast<std::size_t>(u)] == hops) continue;
    for (int v = 0; v < n; ++v) {
      if (a_hat(u, v) != 0.0 && dist[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
        frontier.push(v);
      }
    }
  }
  std::vector<int> out;
  for (int v = 0; v < n; ++v) {
    if (dist[static_cast<std::size_t>(v)] >= 0) out.push_back(v);
  }
  return out;
}

std::vector<NodeCertificate> PolytopeCertify(const GnnModel& model,
                                             const AttributedGraph& g,
                                             const CostModel& cm,
                                             const PolytopeOptions& options) {
  const Eigen::MatrixXd a_hat = PreprocessAdjacency(g.A, model.adj_mode);
  const std::vector<int> labels = ArgmaxRows(GcnForward(model, a_hat, ToReal(g.X)));
  const LayerBounds full = IbpBounds(model, a_hat, g.X, cm, options.threads);
  const int num_nodes = g.num_nodes();
  const int hops = static_cast<int>(model.layers.size());
  std::vector<NodeCertificate> out(static_cast<std::size_t>(num_nodes));

  ParallelFor(static_cast<std::size_t>(num_nodes), options.threads, [&](std::size_t i) {
    const int t = static_cast<int>(i);
    const int y = labels[i];
    std::vector<int> keep;
    if (options.slice) {
      keep = HopNeighbourhood(a_hat, t, hops);
    } else {
      for (int v = 0; v < num_nodes; ++v) keep.push_back(v);
    }
    const auto m = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd sub_a(m, m);
    BinaryMatrix sub_x(m, g.num_features());
    LayerBounds sub_b;
    for (std::size_t l = 0; l < full.lower.size(); ++l) {
      sub_b.lower.emplace_back(m, full.lower[l].cols());
      sub_b.upper.emplace_back(m, full.upper[l].cols());
    }
    int sub_t = 0;
    for (Eigen::Index r = 0; r < m; ++r) {
      const int v = keep[static_cast<std::size_t>(r)];
      if (v == t) sub_t = static_cast<int>(r);
      for (Eigen::Index c = 0; c < m; ++c) sub_a(r, c) = a_hat(v, keep[static_cast<std::size_t>(c)]);
      sub_x.row(r) = g.X.row(v);
      for (std::size_t l = 0; l < full.lower.size(); ++l) {
        sub_b.lower[l].row(r) = full.lower[l].row(v);
        sub_b.upper[l].row(r) = full.upper[l].row(v);
      }
    }
    CostModel sub_cm = cm;
    sub_cm.rho = SliceRho(cm, keep);

    double bound = kInf;
    for (int k = 0; k < model.num_classes(); ++k) {
      if (k == y) continue;
      bound = std::min(bound, PolytopeClassBound(model, sub_a, sub_x, sub_b, sub_cm,
                                                 sub_t, y, k, options.omega));
    }
    out[i] = MakeCertificate(t, y, bound);
  });
  return out;
}

}  // namespace gedcert
