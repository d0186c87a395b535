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

#ifndef GEDCERT_IO_H_
#define GEDCERT_IO_H_

#include <string>
#include <vector>

#include "gedcert/graph.h"
#include "json.hpp"

namespace gedcert {

// Graph JSON:
//   {"num_nodes", "num_features", "features": [[0|1,...]], "edges": [[i,j]],
//    "undirected", "labels"?, "fixed_edges"?}
// Undirected edges are expanded to both orientations. Throws SchemaError.
AttributedGraph GraphFromJson(const nlohmann::json& j);
nlohmann::json GraphToJson(const AttributedGraph& g);

// A dataset file is either one graph object or {"graphs": [graph, ...]}.
std::vector<AttributedGraph> ReadDataset(const std::string& path);
void WriteJsonFile(const std::string& path, const nlohmann::json& j);
nlohmann::json ReadJsonFile(const std::string& path);

}  // namespace gedcert

#endif  // GEDCERT_IO_H_
