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

#include "gedcert/synthetic.h"

#include <Eigen/Cholesky>

#include <stdexcept>

#include "gedcert/rng.h"

namespace gedcert {

void SyntheticParams::Validate() const {
  auto probability = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (nodes_per_block < 1 || num_features < 1 || hidden < 1) {
    throw std::invalid_argument("synthetic sizes must be positive");
  }
  if (!probability(p_in) || !probability(p_out) || !probability(p_feature_match) ||
      !probability(p_feature_other)) {
    throw std::invalid_argument("synthetic probabilities must lie in [0, 1]");
  }
  if (!(ridge > 0.0)) throw std::invalid_argument("ridge must be positive");
}

SyntheticData GenerateSynthetic(const SyntheticParams& params) {
  params.Validate();
  const int n = 2 * params.nodes_per_block;
  const int d = params.num_features;
  const CounterRng rng(params.seed);

  SyntheticData out;
  AttributedGraph& g = out.graph;
  g = MakeGraph(n, d);
  g.undirected = true;
  g.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g.labels[static_cast<std::size_t>(i)] = i / params.nodes_per_block;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = g.labels[static_cast<std::size_t>(i)] ==
                               g.labels[static_cast<std::size_t>(j)]
                           ? params.p_in
                           : params.p_out;
      if (rng.Uniform({0, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)}) < p) {
        g.A(i, j) = 1;
        g.A(j, i) = 1;
      }
    }
    for (int f = 0; f < d; ++f) {
      const bool own = f % 2 == g.labels[static_cast<std::size_t>(i)];
      const double p = own ? params.p_feature_match : params.p_feature_other;
      if (rng.Uniform({1, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(f)}) < p) {
        g.X(i, f) = 1;
      }
    }
  }

  GnnModel model = RandomModel(Architecture::kGcn, {d, params.hidden, 2}, 2,
                               SplitMix64(params.seed ^ 0x73796eULL));
  const Eigen::MatrixXd a_hat = PreprocessAdjacency(g.A, model.adj_mode);
  const DenseLayer& first = model.layers[0];
  Eigen::MatrixXd hidden = a_hat * ToReal(g.X) * first.weight;
  hidden.rowwise() += first.bias.transpose();
  hidden = hidden.cwiseMax(0.0);

  Eigen::MatrixXd design(n, params.hidden + 1);
  design.leftCols(params.hidden) = a_hat * hidden;
  design.col(params.hidden).setOnes();
  Eigen::MatrixXd target = -Eigen::MatrixXd::Ones(n, 2);
  for (int i = 0; i < n; ++i) target(i, g.labels[static_cast<std::size_t>(i)]) = 1.0;
  Eigen::MatrixXd gram = design.transpose() * design;
  gram.diagonal().array() += params.ridge;
  const Eigen::MatrixXd beta = gram.ldlt().solve(design.transpose() * target);

  DenseLayer& second = model.layers[1];
  second.weight = beta.topRows(params.hidden);
  second.bias = beta.row(params.hidden).transpose();
  model.Validate();
  out.model = std::move(model);
  return out;
}

}  // namespace gedcert
