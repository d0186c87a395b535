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

// gedcert: certify graph models, generate synthetic data and weights, and
// run the built-in oracle checks.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "acceptance/criteria.h"
#include "gedcert/graph.h"
#include "gedcert/io.h"
#include "gedcert/models.h"
#include "gedcert/runner.h"
#include "gedcert/synthetic.h"

namespace gedcert {
namespace {

constexpr int kExitSchema = 2;
constexpr int kExitIncompatible = 3;

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

std::vector<int> ParseDims(const std::string& text) {
  std::vector<int> dims;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(part, &used);
      if (used != part.size() || v < 1) throw std::invalid_argument(part);
      dims.push_back(v);
    } catch (const std::exception&) {
      throw SchemaError("invalid layer width '" + part + "'");
    }
  }
  return dims;
}

// Holds the raw flag values of `certify` so that only flags the user passed
// override the config file.
struct CertifyFlags {
  std::string config_path;
  std::string method, dataset, weights, output, summary, epsilon, local, omega;
  std::string cx_add, cx_del, ca_add, ca_del;
  std::uint64_t seed = 0;
  std::int64_t samples = 0, cert_samples = 0;
  double alpha = 0, px_add = 0, px_del = 0, pa_add = 0, pa_del = 0;
  int threads = 0, max_iterations = 0;
  bool timings = false, halve = false, multiclass = false, symmetric = false;
};

void AddCertifyOptions(CLI::App* cmd, CertifyFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config; flags override it");
  cmd->add_option("--method", f.method, "ibp|polytope|graphcls|pippnp|smoothing");
  cmd->add_option("--dataset", f.dataset, "graph or {\"graphs\": [...]} JSON");
  cmd->add_option("--weights", f.weights, "model JSON");
  cmd->add_option("--output", f.output, "per-prediction CSV");
  cmd->add_option("--summary", f.summary, "summary CSV (default <output>.summary.csv)");
  cmd->add_option("--epsilon", f.epsilon, "budget grid start:stop:step");
  cmd->add_option("--local", f.local, "none|abs:v[,v..]|rel:f|deg:c:s");
  cmd->add_option("--cx-add", f.cx_add, "attribute insertion cost or inf");
  cmd->add_option("--cx-del", f.cx_del, "attribute deletion cost or inf");
  cmd->add_option("--ca-add", f.ca_add, "edge insertion cost or inf");
  cmd->add_option("--ca-del", f.ca_del, "edge deletion cost or inf");
  cmd->add_option("--seed", f.seed, "Monte-Carlo seed");
  cmd->add_option("--samples", f.samples, "prediction samples (smoothing)");
  cmd->add_option("--cert-samples", f.cert_samples, "certification samples (smoothing)");
  cmd->add_option("--alpha", f.alpha, "confidence level of the smoothing bounds");
  cmd->add_option("--px-add", f.px_add, "attribute 0->1 flip probability");
  cmd->add_option("--px-del", f.px_del, "attribute 1->0 flip probability");
  cmd->add_option("--pa-add", f.pa_add, "edge 0->1 flip probability");
  cmd->add_option("--pa-del", f.pa_del, "edge 1->0 flip probability");
  cmd->add_option("--threads", f.threads, "worker threads (env GEDCERT_THREADS)");
  cmd->add_option("--max-iterations", f.max_iterations, "policy iteration cap");
  cmd->add_option("--omega", f.omega, "polytope lower ReLU slope: chord|zero|one");
  cmd->add_flag("--timings", f.timings, "write wall times instead of 0");
  cmd->add_flag("--undirected-halve", f.halve, "halve edge costs on undirected graphs");
  cmd->add_flag("--multiclass", f.multiclass, "smoothing: bound the runner-up class");
  cmd->add_flag("--symmetric", f.symmetric, "graphcls: dualize adjacency symmetry");
}

RunConfig BuildConfig(const CLI::App* cmd, const CertifyFlags& f) {
  RunConfig config;
  if (const char* env = std::getenv("GEDCERT_THREADS")) {
    try {
      config.threads = std::stoi(env);
    } catch (const std::exception&) {
      throw SchemaError("GEDCERT_THREADS must be an integer");
    }
  }
  if (!f.config_path.empty()) config.MergeJson(ReadJsonFile(f.config_path));
  auto given = [&](const char* name) { return cmd->count(name) > 0; };
  if (given("--method")) config.method = ParseMethod(f.method);
  if (given("--dataset")) config.dataset_path = f.dataset;
  if (given("--weights")) config.weights_path = f.weights;
  if (given("--output")) config.output_path = f.output;
  if (given("--summary")) config.summary_path = f.summary;
  if (given("--epsilon")) config.epsilon_grid = f.epsilon;
  if (given("--local")) config.local_budget = f.local;
  if (given("--cx-add")) config.costs.cx_add = ParseCost(f.cx_add);
  if (given("--cx-del")) config.costs.cx_del = ParseCost(f.cx_del);
  if (given("--ca-add")) config.costs.ca_add = ParseCost(f.ca_add);
  if (given("--ca-del")) config.costs.ca_del = ParseCost(f.ca_del);
  if (given("--seed")) config.seed = f.seed;
  if (given("--samples")) config.prediction_samples = f.samples;
  if (given("--cert-samples")) config.certification_samples = f.cert_samples;
  if (given("--alpha")) config.alpha = f.alpha;
  if (given("--px-add")) config.noise.px_add = f.px_add;
  if (given("--px-del")) config.noise.px_del = f.px_del;
  if (given("--pa-add")) config.noise.pa_add = f.pa_add;
  if (given("--pa-del")) config.noise.pa_del = f.pa_del;
  if (given("--threads")) config.threads = f.threads;
  if (given("--max-iterations")) config.max_iterations = f.max_iterations;
  if (given("--omega")) config.MergeJson({{"omega", f.omega}});
  if (f.timings) config.timings = true;
  if (f.halve) config.halve_undirected = true;
  if (f.multiclass) config.multiclass = true;
  if (f.symmetric) config.symmetric_dual = true;
  if (config.output_path.empty()) throw SchemaError("no output path given");
  if (config.summary_path.empty()) config.summary_path = config.output_path + ".summary.csv";
  config.Validate();
  return config;
}

int RunCertifyCommand(const RunConfig& config) {
  const RunResult result = RunCertify(config);
  WriteText(config.output_path, RecordsCsv(result, config.timings));
  WriteText(config.summary_path, SummaryCsv(result));
  for (const CertificateRecord& r : result.records) {
    if (r.flagged) {
      std::cerr << "warning: epsilon " << r.epsilon << " id " << r.id
                << ": policy iteration hit the iteration cap; not certified\n";
    }
  }
  return 0;
}

Architecture ArchFromFlag(const std::string& text) {
  try {
    return ParseArchitecture(text);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
}

int Main(int argc, char** argv) {
  CLI::App app{"Edit-distance robustness certificates for graph models"};
  app.require_subcommand(1);

  CertifyFlags certify_flags;
  CLI::App* certify = app.add_subcommand("certify", "certify every prediction over a budget grid");
  AddCertifyOptions(certify, certify_flags);

  std::string weights_out, arch = "gcn", dims_text, adj_mode;
  int classes = 2;
  std::uint64_t weights_seed = 0;
  double teleport = 0.1;
  CLI::App* gen_weights = app.add_subcommand("gen-weights", "write seeded random weights");
  gen_weights->add_option("--output", weights_out, "weights JSON")->required();
  gen_weights->add_option("--arch", arch, "gcn|pippnp|graphcls");
  gen_weights->add_option("--dims", dims_text, "layer widths from the input, e.g. 16,32,2")
      ->required();
  gen_weights->add_option("--classes", classes, "graphcls readout width");
  gen_weights->add_option("--seed", weights_seed, "generator seed");
  gen_weights->add_option("--adj-mode", adj_mode, "override the propagation matrix");
  gen_weights->add_option("--alpha", teleport, "pippnp teleport probability");

  SyntheticParams synth;
  std::string synth_dataset, synth_weights;
  CLI::App* gen_synth =
      app.add_subcommand("gen-synthetic", "two-block SBM dataset with a fitted 2-layer GCN");
  gen_synth->add_option("--dataset", synth_dataset, "dataset JSON")->required();
  gen_synth->add_option("--weights", synth_weights, "weights JSON")->required();
  gen_synth->add_option("--seed", synth.seed, "generator seed");
  gen_synth->add_option("--nodes-per-block", synth.nodes_per_block, "block size");
  gen_synth->add_option("--p-in", synth.p_in, "edge probability inside a block");
  gen_synth->add_option("--p-out", synth.p_out, "edge probability across blocks");
  gen_synth->add_option("--features", synth.num_features, "feature dimension");
  gen_synth->add_option("--p-feature-match", synth.p_feature_match,
                        "probability of a class-owned feature");
  gen_synth->add_option("--p-feature-other", synth.p_feature_other,
                        "probability of any other feature");
  gen_synth->add_option("--hidden", synth.hidden, "hidden width");
  gen_synth->add_option("--ridge", synth.ridge, "ridge penalty of the readout fit");

  std::string ged_a, ged_b;
  std::string g_cx_add = "1", g_cx_del = "1", g_ca_add = "1", g_ca_del = "1";
  bool ged_halve = false;
  CLI::App* ged = app.add_subcommand("ged-oracle", "exact graph edit distance by brute force");
  ged->add_option("--first", ged_a, "graph JSON")->required();
  ged->add_option("--second", ged_b, "graph JSON")->required();
  ged->add_option("--cx-add", g_cx_add);
  ged->add_option("--cx-del", g_cx_del);
  ged->add_option("--ca-add", g_ca_add);
  ged->add_option("--ca-del", g_ca_del);
  ged->add_flag("--undirected-halve", ged_halve, "count undirected edits once");

  double check_scale = 0.2;
  CLI::App* selfcheck = app.add_subcommand("selfcheck", "run the oracle checks at reduced size");
  selfcheck->add_option("--scale", check_scale, "fraction of the full instance counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; malformed command lines are schema
    // errors.
    return app.exit(e) == 0 ? 0 : kExitSchema;
  }

  if (certify->parsed()) return RunCertifyCommand(BuildConfig(certify, certify_flags));

  if (gen_weights->parsed()) {
    GnnModel model;
    try {
      model = RandomModel(ArchFromFlag(arch), ParseDims(dims_text), classes, weights_seed);
      if (!adj_mode.empty()) model.adj_mode = ParseAdjacencyMode(adj_mode);
      model.alpha = teleport;
      model.Validate();
    } catch (const std::invalid_argument& e) {
      throw SchemaError(e.what());
    }
    WriteJsonFile(weights_out, ModelToJson(model));
    return 0;
  }

  if (gen_synth->parsed()) {
    SyntheticData data;
    try {
      data = GenerateSynthetic(synth);
    } catch (const std::invalid_argument& e) {
      throw SchemaError(e.what());
    }
    WriteJsonFile(synth_dataset, GraphToJson(data.graph));
    WriteJsonFile(synth_weights, ModelToJson(data.model));
    return 0;
  }

  if (ged->parsed()) {
    const std::vector<AttributedGraph> first = ReadDataset(ged_a);
    const std::vector<AttributedGraph> second = ReadDataset(ged_b);
    if (first.size() != 1 || second.size() != 1) {
      throw SchemaError("ged-oracle compares two single graphs");
    }
    CostModel cm;
    cm.cx_add = ParseCost(g_cx_add);
    cm.cx_del = ParseCost(g_cx_del);
    cm.ca_add = ParseCost(g_ca_add);
    cm.ca_del = ParseCost(g_ca_del);
    GedOptions options;
    options.halve_undirected_structure = ged_halve;
    GedResult r;
    try {
      r = GedBruteForce(first[0], second[0], cm, options);
    } catch (const std::invalid_argument& e) {
      throw SchemaError(e.what());
    }
    const nlohmann::json out = {
        {"distance", r.distance.is_infinite() ? nlohmann::json("inf")
                                              : nlohmann::json(r.distance.value())},
        {"permutation", r.minimizer.data()}};
    std::cout << out.dump() << '\n';
    return 0;
  }

  if (selfcheck->parsed()) {
    acceptance::SuiteOptions options;
    options.scale = check_scale;
    options.cli_path = std::filesystem::read_symlink("/proc/self/exe").string();
    bool all = true;
    for (const acceptance::CriterionResult& r : acceptance::RunAll(options)) {
      std::cout << acceptance::FormatLine(r) << '\n';
      all = all && r.pass;
    }
    return all ? 0 : 1;
  }
  return 0;
}

}  // namespace
}  // namespace gedcert

int main(int argc, char** argv) {
  try {
    return gedcert::Main(argc, argv);
  } catch (const gedcert::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return gedcert::kExitSchema;
  } catch (const gedcert::IncompatibleCostError& e) {
    std::cerr << "incompatible costs: " << e.what() << '\n';
    return gedcert::kExitIncompatible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
