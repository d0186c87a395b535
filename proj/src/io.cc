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

#include "gedcert/io.h"

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace gedcert {

using nlohmann::json;

namespace {

int RequireInt(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw SchemaError(std::string("missing integer field '") + key + "'");
  }
  return j.at(key).get<int>();
}

std::pair<int, int> ParseEdge(const json& e, int n) {
  if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
      !e[1].is_number_integer()) {
    throw SchemaError("edge must be [i, j]");
  }
  const int i = e[0].get<int>(), j = e[1].get<int>();
  if (i < 0 || j < 0 || i >= n || j >= n) throw SchemaError("edge out of range");
  return {i, j};
}

}  // namespace

AttributedGraph GraphFromJson(const json& j) {
  if (!j.is_object()) throw SchemaError("graph must be a JSON object");
  const int n = RequireInt(j, "num_nodes");
  const int d = RequireInt(j, "num_features");
  if (n < 0 || d < 0) throw SchemaError("negative graph dimensions");
  AttributedGraph g = MakeGraph(n, d);

  const json& feats = j.value("features", json::array());
  if (!feats.is_array() || static_cast<int>(feats.size()) != n) {
    throw SchemaError("features must have num_nodes rows");
  }
  for (int r = 0; r < n; ++r) {
    const json& row = feats[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != d) {
      throw SchemaError("feature row has wrong length");
    }
    for (int c = 0; c < d; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1)) {
        throw SchemaError("features must be 0/1");
      }
      g.X(r, c) = static_cast<std::uint8_t>(v.get<int>());
    }
  }

  g.undirected = j.value("undirected", false);
  const json& edges = j.value("edges", json::array());
  if (!edges.is_array()) throw SchemaError("edges must be an array");
  for (const json& e : edges) {
    const auto [a, b] = ParseEdge(e, n);
    g.A(a, b) = 1;
    if (g.undirected) g.A(b, a) = 1;
  }

  if (j.contains("labels")) {
    const json& labels = j.at("labels");
    if (!labels.is_array()) throw SchemaError("labels must be an array");
    for (const json& l : labels) {
      if (!l.is_number_integer()) throw SchemaError("labels must be integers");
      g.labels.push_back(l.get<int>());
    }
  }
  if (j.contains("fixed_edges")) {
    if (!j.at("fixed_edges").is_array()) throw SchemaError("fixed_edges");
    for (const json& e : j.at("fixed_edges")) {
      g.fixed_edges.push_back(ParseEdge(e, n));
    }
  }
  return g;
}

json GraphToJson(const AttributedGraph& g) {
  json j;
  const int n = g.num_nodes();
  j["num_nodes"] = n;
  j["num_features"] = g.num_features();
  json feats = json::array();
  for (int r = 0; r < n; ++r) {
    json row = json::array();
    for (int c = 0; c < g.num_features(); ++c) row.push_back(int{g.X(r, c)});
    feats.push_back(std::move(row));
  }
  j["features"] = std::move(feats);
  json edges = json::array();
  for (int a = 0; a < n; ++a) {
    for (int b = g.undirected ? a : 0; b < n; ++b) {
      if (g.A(a, b) != 0) edges.push_back({a, b});
    }
  }
  j["edges"] = std::move(edges);
  j["undirected"] = g.undirected;
  if (!g.labels.empty()) j["labels"] = g.labels;
  if (!g.fixed_edges.empty()) {
    json fe = json::array();
    for (const auto& [a, b] : g.fixed_edges) fe.push_back({a, b});
    j["fixed_edges"] = std::move(fe);
  }
  return j;
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError("malformed JSON in '" + path + "': " + e.what());
  }
}

void WriteJsonFile(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(1) << '\n';
}

std::vector<AttributedGraph> ReadDataset(const std::string& path) {
  const json j = ReadJsonFile(path);
  std::vector<AttributedGraph> graphs;
  try {
    if (j.is_object() && j.contains("graphs")) {
      for (const json& gj : j.at("graphs")) graphs.push_back(GraphFromJson(gj));
    } else {
      graphs.push_back(GraphFromJson(j));
    }
    for (const auto& g : graphs) g.Validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return graphs;
}

}  // namespace gedcert
