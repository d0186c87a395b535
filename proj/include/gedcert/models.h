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

#ifndef GEDCERT_MODELS_H_
#define GEDCERT_MODELS_H_

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "gedcert/graph.h"
#include "json.hpp"

namespace gedcert {

enum class Architecture { kGcn, kPiPpnp, kGraphClsMean };
enum class AdjacencyMode { kSymNormSelfLoops, kRowNormSelfLoops, kRowNorm };

struct DenseLayer {
  Eigen::MatrixXd weight;  // in x out
  Eigen::VectorXd bias;    // out
};

// Inference-only model. For kPiPpnp the layers form the MLP producing the
// logits that are diffused; for kGraphClsMean there is exactly one
// bias-free layer followed by `readout`.
struct GnnModel {
  Architecture arch = Architecture::kGcn;
  AdjacencyMode adj_mode = AdjacencyMode::kSymNormSelfLoops;
  std::vector<DenseLayer> layers;
  double alpha = 0.1;
  Eigen::MatrixXd readout;  // hidden x classes

  int input_dim() const { return static_cast<int>(layers.front().weight.rows()); }
  int num_classes() const;
  void Validate() const;
};

// A with its diagonal set to one.
Eigen::MatrixXd WithSelfLoops(const BinaryMatrix& a);

// Self-loop modes force the diagonal to one (existing loops are not doubled).
// Throws std::invalid_argument for a zero-degree row under kRowNorm.
Eigen::MatrixXd PreprocessAdjacency(const BinaryMatrix& a, AdjacencyMode mode);

// Layer stack on a precomputed propagation matrix: Z = P H W + 1 b^T with
// ReLU between layers. Returns the last pre-activation (N x K).
Eigen::MatrixXd GcnForward(const GnnModel& model, const Eigen::MatrixXd& a_hat,
                           const Eigen::MatrixXd& features);
Eigen::MatrixXd GcnForward(const GnnModel& model, const AttributedGraph& g);

// Same stack without propagation; the logits fed to PageRank diffusion.
Eigen::MatrixXd MlpForward(const GnnModel& model, const Eigen::MatrixXd& features);

// (1 - alpha) (I - alpha D^{-1} A)^{-1} with self-loops forced.
Eigen::MatrixXd PageRankMatrix(double alpha, const BinaryMatrix& a);

// Solves (I - alpha D^{-1} A) Z = (1 - alpha) H by LU.
Eigen::MatrixXd PippnpForward(const GnnModel& model, const Eigen::MatrixXd& logits,
                              const BinaryMatrix& a);
Eigen::MatrixXd PippnpForward(const GnnModel& model, const AttributedGraph& g);

// mean_n ReLU(D^{-1} A~ X W) U with the diagonal of A~ forced to one.
Eigen::VectorXd GraphClsForward(const GnnModel& model, const AttributedGraph& g);

// Row-wise argmax, ties to the smallest class.
std::vector<int> ArgmaxRows(const Eigen::MatrixXd& scores);
int Argmax(const Eigen::VectorXd& scores);

Eigen::MatrixXd ToReal(const BinaryMatrix& m);

std::string ToString(Architecture arch);
std::string ToString(AdjacencyMode mode);
Architecture ParseArchitecture(const std::string& text);
AdjacencyMode ParseAdjacencyMode(const std::string& text);

// Weight JSON: {"arch", "adj_mode", "alpha"?, "layers": [{"W", "b"}], "U"?}.
GnnModel ModelFromJson(const nlohmann::json& j);
nlohmann::json ModelToJson(const GnnModel& model);

// Seeded Gaussian weights scaled by 1/sqrt(fan_in). `dims` lists layer
// widths starting with the input dimension; for kGraphClsMean it is
// {input, hidden} and `classes` sizes the readout.
GnnModel RandomModel(Architecture arch, const std::vector<int>& dims, int classes,
                     std::uint64_t seed);

}  // namespace gedcert

#endif  // GEDCERT_MODELS_H_
