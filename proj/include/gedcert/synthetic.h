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

#ifndef GEDCERT_SYNTHETIC_H_
#define GEDCERT_SYNTHETIC_H_

#include <cstdint>

#include "gedcert/graph.h"
#include "gedcert/models.h"

namespace gedcert {

// Two-block stochastic block model with binary features. Feature f belongs
// to class f % 2 and is switched on with `p_feature_match` for nodes of that
// class and `p_feature_other` otherwise.
struct SyntheticParams {
  int nodes_per_block = 40;
  double p_in = 0.1;
  double p_out = 0.01;
  int num_features = 16;
  double p_feature_match = 0.3;
  double p_feature_other = 0.05;
  int hidden = 16;
  double ridge = 1e-2;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct SyntheticData {
  AttributedGraph graph;  // undirected, with per-node labels
  GnnModel model;         // two-layer GCN
};

// The first GCN layer is random; the second is a ridge regression of +-1
// class indicators on the propagated hidden features.
SyntheticData GenerateSynthetic(const SyntheticParams& params);

}  // namespace gedcert

#endif  // GEDCERT_SYNTHETIC_H_
