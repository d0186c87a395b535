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

#include "gedcert/models.h"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gedcert/rng.h"

namespace gedcert {

using nlohmann::json;

int GnnModel::num_classes() const {
  if (arch == Architecture::kGraphClsMean) return static_cast<int>(readout.cols());
  return static_cast<int>(layers.back().weight.cols());
}

void GnnModel::Validate() const {
  if (layers.empty()) throw std::invalid_argument("model has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    if (layer.bias.size() != layer.weight.cols()) {
      throw std::invalid_argument("bias length must equal layer width");
    }
    if (l > 0 && layers[l - 1].weight.cols() != layer.weight.rows()) {
      throw std::invalid_argument("layer dimensions do not chain");
    }
  }
  if (arch == Architecture::kPiPpnp && !(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("teleport alpha must lie in (0, 1)");
  }
  if (arch == Architecture::kGraphClsMean) {
    if (layers.size() != 1) {
      throw std::invalid_argument("graph classifier has exactly one layer");
    }
    if (!layers[0].bias.isZero(0.0)) {
      throw std::invalid_argument("graph classifier layer has no bias");
    }
    if (readout.rows() != layers[0].weight.cols() || readout.cols() == 0) {
      throw std::invalid_argument("readout U must be hidden x classes");
    }
  }
}

Eigen::MatrixXd ToReal(const BinaryMatrix& m) { return m.cast<double>(); }

Eigen::MatrixXd WithSelfLoops(const BinaryMatrix& a) {
  Eigen::MatrixXd out = a.cast<double>();
  out.diagonal().setOnes();
  return out;
}

Eigen::MatrixXd PreprocessAdjacency(const BinaryMatrix& a, AdjacencyMode mode) {
  if (a.rows() != a.cols()) throw std::invalid_argument("adjacency must be square");
  Eigen::MatrixXd m =
      mode == AdjacencyMode::kRowNorm ? a.cast<double>() : WithSelfLoops(a);
  const Eigen::VectorXd deg = m.rowwise().sum();
  if (mode == AdjacencyMode::kSymNormSelfLoops) {
    const Eigen::VectorXd inv_sqrt = deg.array().rsqrt();
    return inv_sqrt.asDiagonal() * m * inv_sqrt.asDiagonal();
  }
  for (Eigen::Index i = 0; i < deg.size(); ++i) {
    if (deg(i) == 0.0) throw std::invalid_argument("zero-degree row in row_norm");
  }
  return deg.cwiseInverse().asDiagonal() * m;
}

namespace {

Eigen::MatrixXd Stack(const GnnModel& model, const Eigen::MatrixXd* a_hat,
                      const Eigen::MatrixXd& features) {
  model.Validate();
  if (features.cols() != model.input_dim()) {
    throw std::invalid_argument("feature dimension does not match the model");
  }
  if (a_hat != nullptr && (a_hat->rows() != features.rows() ||
                           a_hat->cols() != features.rows())) {
    throw std::invalid_argument("propagation matrix must be N x N");
  }
  Eigen::MatrixXd h = features;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const DenseLayer& layer = model.layers[l];
    Eigen::MatrixXd z = h * layer.weight;
    if (a_hat != nullptr) z = (*a_hat) * z;
    z.rowwise() += layer.bias.transpose();
    if (l + 1 == model.layers.size()) return z;
    h = z.cwiseMax(0.0);
  }
  return h;
}

}  // namespace

Eigen::MatrixXd GcnForward(const GnnModel& model, const Eigen::MatrixXd& a_hat,
                           const Eigen::MatrixXd& features) {
  return Stack(model, &a_hat, features);
}

Eigen::MatrixXd GcnForward(const GnnModel& model, const AttributedGraph& g) {
  return GcnForward(model, PreprocessAdjacency(g.A, model.adj_mode), ToReal(g.X));
}

Eigen::MatrixXd MlpForward(const GnnModel& model, const Eigen::MatrixXd& features) {
  return Stack(model, nullptr, features);
}

namespace {

Eigen::MatrixXd DiffusionSystem(double alpha, const BinaryMatrix& a) {
  const Eigen::MatrixXd p = PreprocessAdjacency(a, AdjacencyMode::kRowNormSelfLoops);
  return Eigen::MatrixXd::Identity(p.rows(), p.cols()) - alpha * p;
}

}  // namespace

Eigen::MatrixXd PageRankMatrix(double alpha, const BinaryMatrix& a) {
  const Eigen::MatrixXd system = DiffusionSystem(alpha, a);
  return (1.0 - alpha) *
         system.partialPivLu().solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
}

Eigen::MatrixXd PippnpForward(const GnnModel& model, const Eigen::MatrixXd& logits,
                              const BinaryMatrix& a) {
  if (!(model.alpha > 0.0 && model.alpha < 1.0)) {
    throw std::invalid_argument("teleport alpha must lie in (0, 1)");
  }
  if (logits.rows() != a.rows()) throw std::invalid_argument("logit rows != N");
  const Eigen::MatrixXd system = DiffusionSystem(model.alpha, a);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  // Diagonal dominance keeps the system regular; guard anyway.
  if (system.rows() > 0 && !(lu.rcond() > 1e-14)) {
    throw std::runtime_error("singular diffusion system");
  }
  return lu.solve((1.0 - model.alpha) * logits);
}

Eigen::MatrixXd PippnpForward(const GnnModel& model, const AttributedGraph& g) {
  return PippnpForward(model, MlpForward(model, ToReal(g.X)), g.A);
}

Eigen::VectorXd GraphClsForward(const GnnModel& model, const AttributedGraph& g) {
  model.Validate();
  if (model.arch != Architecture::kGraphClsMean) {
    throw std::invalid_argument("not a graph classifier");
  }
  if (g.num_features() != model.input_dim()) {
    throw std::invalid_argument("feature dimension does not match the model");
  }
  const Eigen::MatrixXd p =
      PreprocessAdjacency(g.A, AdjacencyMode::kRowNormSelfLoops);
  const Eigen::MatrixXd hidden = (p * (ToReal(g.X) * model.layers[0].weight)).cwiseMax(0.0);
  if (hidden.rows() == 0) return Eigen::VectorXd::Zero(model.readout.cols());
  return (hidden * model.readout).colwise().mean().transpose();
}

int Argmax(const Eigen::VectorXd& scores) {
  int best = 0;
  for (int k = 1; k < scores.size(); ++k) {
    if (scores(k) > scores(best)) best = k;
  }
  return best;
}

std::vector<int> ArgmaxRows(const Eigen::MatrixXd& scores) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(scores.rows()));
  for (int n = 0; n < scores.rows(); ++n) out.push_back(Argmax(scores.row(n).transpose()));
  return out;
}

std::string ToString(Architecture arch) {
  switch (arch) {
    case Architecture::kGcn: return "gcn";
    case Architecture::kPiPpnp: return "pippnp";
    case Architecture::kGraphClsMean: return "graphcls";
  }
  return "";
}

std::string ToString(AdjacencyMode mode) {
  switch (mode) {
    case AdjacencyMode::kSymNormSelfLoops: return "sym_norm_selfloops";
    case AdjacencyMode::kRowNormSelfLoops: return "row_norm_selfloops";
    case AdjacencyMode::kRowNorm: return "row_norm";
  }
  return "";
}

Architecture ParseArchitecture(const std::string& text) {
  if (text == "gcn") return Architecture::kGcn;
  if (text == "pippnp") return Architecture::kPiPpnp;
  if (text == "graphcls") return Architecture::kGraphClsMean;
  throw SchemaError("unknown architecture '" + text + "'");
}

AdjacencyMode ParseAdjacencyMode(const std::string& text) {
  if (text == "sym_norm_selfloops") return AdjacencyMode::kSymNormSelfLoops;
  if (text == "row_norm_selfloops") return AdjacencyMode::kRowNormSelfLoops;
  if (text == "row_norm") return AdjacencyMode::kRowNorm;
  throw SchemaError("unknown adjacency mode '" + text + "'");
}

namespace {

Eigen::MatrixXd MatrixFromJson(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw SchemaError(std::string(what) + " must be a nonempty matrix");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw SchemaError(std::string(what) + " has ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw SchemaError(std::string(what) + " must be numeric");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

json MatrixToJson(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

GnnModel ModelFromJson(const json& j) {
  if (!j.is_object()) throw SchemaError("weights must be a JSON object");
  GnnModel m;
  try {
    m.arch = ParseArchitecture(j.at("arch").get<std::string>());
    m.adj_mode = ParseAdjacencyMode(
        j.value("adj_mode", std::string(m.arch == Architecture::kGcn
                                            ? "sym_norm_selfloops"
                                            : "row_norm_selfloops")));
    if (j.contains("alpha")) m.alpha = j.at("alpha").get<double>();
    for (const json& lj : j.at("layers")) {
      DenseLayer layer;
      layer.weight = MatrixFromJson(lj.at("W"), "W");
      if (lj.contains("b")) {
        const auto& b = lj.at("b");
        layer.bias.resize(static_cast<Eigen::Index>(b.size()));
        for (std::size_t i = 0; i < b.size(); ++i) {
          layer.bias(static_cast<Eigen::Index>(i)) = b[i].get<double>();
        }
      } else {
        layer.bias = Eigen::VectorXd::Zero(layer.weight.cols());
      }
      m.layers.push_back(std::move(layer));
    }
    if (j.contains("U")) m.readout = MatrixFromJson(j.at("U"), "U");
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed weights: ") + e.what());
  }
  try {
    m.Validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return m;
}

json ModelToJson(const GnnModel& model) {
  json j;
  j["arch"] = ToString(model.arch);
  j["adj_mode"] = ToString(model.adj_mode);
  if (model.arch == Architecture::kPiPpnp) j["alpha"] = model.alpha;
  json layers = json::array();
  for (const DenseLayer& layer : model.layers) {
    json lj;
    lj["W"] = MatrixToJson(layer.weight);
    lj["b"] = std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size());
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);
  if (model.arch == Architecture::kGraphClsMean) j["U"] = MatrixToJson(model.readout);
  return j;
}

GnnModel RandomModel(Architecture arch, const std::vector<int>& dims, int classes,
                     std::uint64_t seed) {
  if (dims.size() < 2) throw std::invalid_argument("need at least two dims");
  RngStream rng(seed, 0x77656967ULL);
  GnnModel m;
  m.arch = arch;
  m.adj_mode = arch == Architecture::kGcn ? AdjacencyMode::kSymNormSelfLoops
                                          : AdjacencyMode::kRowNormSelfLoops;
  auto gaussian = [&](int rows, int cols) {
    Eigen::MatrixXd w(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) w(r, c) = scale * rng.Gaussian();
    }
    return w;
  };
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer;
    layer.weight = gaussian(dims[l], dims[l + 1]);
    layer.bias = Eigen::VectorXd::Zero(dims[l + 1]);
    if (arch != Architecture::kGraphClsMean) {
      for (int i = 0; i < dims[l + 1]; ++i) layer.bias(i) = 0.1 * rng.Gaussian();
    }
    m.layers.push_back(std::move(layer));
  }
  if (arch == Architecture::kGraphClsMean) {
    if (dims.size() != 2) throw std::invalid_argument("graph classifier dims");
    m.readout = gaussian(dims[1], classes);
  }
  m.Validate();
  return m;
}

}  // namespace gedcert
