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

#include "gedcert/runner.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "gedcert/cert_struct.h"
#include "gedcert/io.h"
#include "gedcert/parallel.h"
#include "gedcert/rng.h"
#include "gedcert/smoothing_cert.h"

namespace gedcert {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double ParseNumber(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw SchemaError("invalid " + what + " '" + text + "'");
  }
  return v;
}

std::vector<std::string> Split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) parts.push_back(part);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::string FormatNumber(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool IsGraphLevel(const GnnModel& model) {
  return model.arch == Architecture::kGraphClsMean;
}

void RequireArchitecture(const GnnModel& model, Architecture arch, Method method) {
  if (model.arch != arch) {
    throw SchemaError("method " + ToString(method) + " needs a " + ToString(arch) +
                      " model, got " + ToString(model.arch));
  }
}

int Truth(const AttributedGraph& g, int component) {
  if (g.labels.empty()) return -1;
  return g.labels.at(static_cast<std::size_t>(component));
}

// One certificate ladder (ascending budgets) per prediction.
struct Ladder {
  int id = 0;
  int truth = -1;
  std::vector<NodeCertificate> steps;
  std::vector<double> seconds;
};

CostModel GridCosts(const RunConfig& config, const AttributedGraph& g,
                    const LocalBudgetSpec& local, double epsilon) {
  CostModel cm = config.costs;
  if (config.halve_undirected && g.undirected) cm = HalveStructureCosts(cm);
  cm.epsilon = epsilon;
  cm.rho = local.Resolve(g, cm);
  return cm;
}

void CheckThreatModel(const RunConfig& config) {
  switch (config.method) {
    case Method::kIbp:
    case Method::kPolytope:
      RequireAttributeThreatModel(config.costs);
      break;
    case Method::kGraphCls:
    case Method::kPippnp:
      RequireStructureThreatModel(config.costs);
      break;
    case Method::kSmoothing:
      for (const Cost* c : {&config.costs.cx_add, &config.costs.cx_del,
                            &config.costs.ca_add, &config.costs.ca_del}) {
        if (c->is_zero()) {
          throw IncompatibleCostError("smoothing certificates need nonzero costs");
        }
      }
      break;
  }
}

std::vector<Ladder> DeterministicLadders(const RunConfig& config,
                                         const std::vector<AttributedGraph>& dataset,
                                         const GnnModel& model,
                                         const std::vector<double>& grid) {
  const LocalBudgetSpec local = LocalBudgetSpec::Parse(config.local_budget);
  std::vector<Ladder> ladders;
  int offset = 0;
  for (std::size_t gi = 0; gi < dataset.size(); ++gi) {
    const AttributedGraph& g = dataset[gi];
    const bool graph_level = config.method == Method::kGraphCls;
    const int items = graph_level ? 1 : g.num_nodes();
    const std::size_t first = ladders.size();
    for (int i = 0; i < items; ++i) {
      Ladder l;
      l.id = graph_level ? static_cast<int>(gi) : offset + i;
      l.truth = Truth(g, i);
      l.steps.resize(grid.size());
      l.seconds.assign(grid.size(), 0.0);
      ladders.push_back(std::move(l));
    }
    offset += items;

    Eigen::MatrixXd logits;
    if (config.method == Method::kPippnp) logits = MlpForward(model, ToReal(g.X));

    for (std::size_t e = 0; e < grid.size(); ++e) {
      const CostModel cm = GridCosts(config, g, local, grid[e]);
      const auto start = Clock::now();
      std::vector<NodeCertificate> certs;
      std::vector<double> seconds;
      switch (config.method) {
        case Method::kIbp:
          certs = IbpCertify(model, g, cm, config.threads);
          break;
        case Method::kPolytope: {
          PolytopeOptions opts;
          opts.omega = config.omega;
          opts.threads = config.threads;
          certs = PolytopeCertify(model, g, cm, opts);
          break;
        }
        case Method::kGraphCls: {
          const GraphCertificate c =
              config.symmetric_dual && g.undirected
                  ? GraphClsCertifySymmetric(model, g, cm, {}, static_cast<int>(gi))
                  : GraphClsCertify(model, g, cm, static_cast<int>(gi));
          certs = {c.summary};
          break;
        }
        case Method::kPippnp: {
          std::vector<double> rho(static_cast<std::size_t>(g.num_nodes()), grid[e]);
          for (std::size_t v = 0; v < cm.rho.size(); ++v) rho[v] = std::min(rho[v], cm.rho[v]);
          const FragileEdgeSet fragile =
              FragileEdgeSet::AllPairs(g, std::move(rho), cm.ca_add, cm.ca_del);
          PolicyIterationOptions opts;
          opts.max_iterations = config.max_iterations;
          certs.resize(static_cast<std::size_t>(g.num_nodes()));
          seconds.resize(certs.size());
          ParallelFor(certs.size(), config.threads, [&](std::size_t v) {
            const auto node_start = Clock::now();
            certs[v] = PippnpCertify(model, logits, g, fragile, static_cast<int>(v), opts);
            seconds[v] = Seconds(node_start);
          });
          break;
        }
        case Method::kSmoothing:
          throw std::logic_error("smoothing is not deterministic");
      }
      const double batch = Seconds(start) / static_cast<double>(std::max<std::size_t>(1, certs.size()));
      for (std::size_t i = 0; i < certs.size(); ++i) {
        Ladder& l = ladders[first + i];
        l.steps[e] = certs[i];
        l.seconds[e] = seconds.empty() ? batch : seconds[i];
      }
    }
  }
  return ladders;
}

std::vector<CertificateRecord> SmoothingRecords(const RunConfig& config,
                                                const std::vector<AttributedGraph>& dataset,
                                                const GnnModel& model,
                                                const std::vector<double>& grid) {
  if (LocalBudgetSpec::Parse(config.local_budget).kind != LocalBudgetSpec::Kind::kNone) {
    throw SchemaError("smoothing certificates do not take local budgets");
  }
  const int classes = model.num_classes();
  GraphLabeler base;
  switch (model.arch) {
    case Architecture::kGcn:
      base = [&](const AttributedGraph& s) { return ArgmaxRows(GcnForward(model, s)); };
      break;
    case Architecture::kPiPpnp:
      base = [&](const AttributedGraph& s) { return ArgmaxRows(PippnpForward(model, s)); };
      break;
    case Architecture::kGraphClsMean:
      base = [&](const AttributedGraph& s) {
        return std::vector<int>{Argmax(GraphClsForward(model, s))};
      };
      break;
  }
  const CertRule rule = config.multiclass ? CertRule::kMulticlass : CertRule::kBinary;

  // Indexed [epsilon][prediction] so the output is grouped by budget.
  std::vector<std::vector<CertificateRecord>> table(grid.size());
  int offset = 0;
  for (std::size_t gi = 0; gi < dataset.size(); ++gi) {
    const AttributedGraph& g = dataset[gi];
    CostModel cm = config.costs;
    if (config.halve_undirected && g.undirected) cm = HalveStructureCosts(cm);

    const auto start = Clock::now();
    MonteCarloOptions opts;
    opts.seed = SplitMix64(config.seed ^ SplitMix64(gi));
    opts.threads = config.threads;
    opts.samples = config.prediction_samples;
    opts.first_index = 0;
    const VoteCounts prediction = MajorityVote(base, g, config.noise, classes, opts);
    opts.samples = config.certification_samples;
    opts.first_index = static_cast<std::uint64_t>(config.prediction_samples);
    const VoteCounts certification = MajorityVote(base, g, config.noise, classes, opts);

    const int items = static_cast<int>(prediction.labels.size());
    std::vector<SmoothingCertificate> certs(static_cast<std::size_t>(items));
    ParallelFor(certs.size(), config.threads, [&](std::size_t i) {
      const auto row = certification.counts.row(static_cast<Eigen::Index>(i));
      const std::vector<std::int64_t> counts(row.begin(), row.end());
      certs[i] = CertifyGedSmoothing(counts, cm, config.noise, config.alpha, grid, rule,
                                     prediction.labels[i]);
    });
    const double seconds = Seconds(start) / static_cast<double>(std::max(1, items));

    for (int i = 0; i < items; ++i) {
      const SmoothingCertificate& c = certs[static_cast<std::size_t>(i)];
      for (std::size_t e = 0; e < grid.size(); ++e) {
        CertificateRecord r;
        r.epsilon = grid[e];
        r.id = IsGraphLevel(model) ? static_cast<int>(gi) : offset + i;
        r.label = c.label;
        r.truth = Truth(g, i);
        r.verdict = c.verdicts[e];
        r.bound = c.margins[e];
        r.seconds = seconds;
        table[e].push_back(r);
      }
    }
    offset += items;
  }
  std::vector<CertificateRecord> records;
  for (auto& row : table) records.insert(records.end(), row.begin(), row.end());
  return records;
}

std::vector<SummaryRow> Summarize(const std::vector<CertificateRecord>& records,
                                  const std::vector<double>& grid) {
  std::vector<SummaryRow> rows(grid.size());
  std::size_t e = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) rows[i].epsilon = grid[i];
  for (const CertificateRecord& r : records) {
    while (grid[e] != r.epsilon) ++e;
    ++rows[e].total;
    if (r.verdict == Verdict::kCertified && (r.truth < 0 || r.truth == r.label)) {
      ++rows[e].certified_count;
    }
  }
  for (SummaryRow& row : rows) {
    row.certified_accuracy =
        row.total == 0 ? 0.0 : static_cast<double>(row.certified_count) / row.total;
  }
  return rows;
}

}  // namespace

Method ParseMethod(const std::string& text) {
  if (text == "ibp") return Method::kIbp;
  if (text == "polytope") return Method::kPolytope;
  if (text == "graphcls") return Method::kGraphCls;
  if (text == "pippnp") return Method::kPippnp;
  if (text == "smoothing") return Method::kSmoothing;
  throw SchemaError("unknown method '" + text + "'");
}

std::string ToString(Method method) {
  switch (method) {
    case Method::kIbp: return "ibp";
    case Method::kPolytope: return "polytope";
    case Method::kGraphCls: return "graphcls";
    case Method::kPippnp: return "pippnp";
    case Method::kSmoothing: return "smoothing";
  }
  return "";
}

std::vector<double> ParseEpsilonGrid(const std::string& text) {
  const std::vector<std::string> parts = Split(text, ':');
  if (parts.size() != 3) throw SchemaError("epsilon grid must be start:stop:step");
  const double start = ParseNumber(parts[0], "grid start");
  const double stop = ParseNumber(parts[1], "grid stop");
  const double step = ParseNumber(parts[2], "grid step");
  if (start < 0.0 || stop < start || !(step > 0.0)) {
    throw SchemaError("epsilon grid needs 0 <= start <= stop and step > 0");
  }
  const double count = std::floor((stop - start) / step + 1e-9) + 1.0;
  if (count > 1e5) throw SchemaError("epsilon grid has too many points");
  std::vector<double> grid;
  for (int i = 0; i < static_cast<int>(count); ++i) grid.push_back(start + i * step);
  return grid;
}

LocalBudgetSpec LocalBudgetSpec::Parse(const std::string& text) {
  LocalBudgetSpec spec;
  if (text.empty() || text == "none") return spec;
  const std::vector<std::string> parts = Split(text, ':');
  auto nonnegative = [](double v, const std::string& what) {
    if (v < 0.0) throw SchemaError(what + " must be nonnegative");
    return v;
  };
  if (parts[0] == "abs" && parts.size() == 2) {
    spec.kind = Kind::kAbsolute;
    for (const std::string& v : Split(parts[1], ',')) {
      spec.values.push_back(nonnegative(ParseNumber(v, "local budget"), "local budget"));
    }
    if (spec.values.empty()) throw SchemaError("abs: needs at least one value");
  } else if (parts[0] == "rel" && parts.size() == 2) {
    spec.kind = Kind::kRelative;
    spec.fraction = nonnegative(ParseNumber(parts[1], "fraction"), "fraction");
  } else if (parts[0] == "deg" && parts.size() == 3) {
    spec.kind = Kind::kDegree;
    spec.offset = ParseNumber(parts[1], "degree offset");
    spec.strength = ParseNumber(parts[2], "degree strength");
  } else {
    throw SchemaError("invalid local budget '" + text + "'");
  }
  return spec;
}

std::vector<double> LocalBudgetSpec::Resolve(const AttributedGraph& g,
                                             const CostModel& cm) const {
  const auto n = static_cast<std::size_t>(g.num_nodes());
  switch (kind) {
    case Kind::kNone:
      return {};
    case Kind::kAbsolute:
      if (values.size() == 1) return std::vector<double>(n, values[0]);
      if (values.size() != n) {
        throw SchemaError("abs: lists " + std::to_string(values.size()) +
                          " budgets for " + std::to_string(n) + " nodes");
      }
      return values;
    case Kind::kRelative: {
      const double unit = std::min(cm.cx_add.value(), cm.cx_del.value());
      const double count = std::floor(fraction * g.num_features() + 1e-9);
      // No attribute edit is affordable when both attribute costs are infinite.
      return std::vector<double>(n, count == 0.0 || std::isinf(unit) ? 0.0 : count * unit);
    }
    case Kind::kDegree:
      return DegreeBudgets(g, offset, strength);
  }
  return {};
}

void RunConfig::Validate() const {
  ParseEpsilonGrid(epsilon_grid);
  LocalBudgetSpec::Parse(local_budget);
  if (prediction_samples < 1 || certification_samples < 1) {
    throw SchemaError("sample counts must be positive");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw SchemaError("alpha must lie in (0, 1)");
  if (threads < 1) throw SchemaError("threads must be positive");
  if (max_iterations < 1) throw SchemaError("max iterations must be positive");
  try {
    noise.Validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
}

void RunConfig::MergeJson(const json& j) {
  if (!j.is_object()) throw SchemaError("config must be a JSON object");
  auto text = [](const json& v, const std::string& key) {
    if (!v.is_string()) throw SchemaError(key + " must be a string");
    return v.get<std::string>();
  };
  auto number = [](const json& v, const std::string& key) {
    if (!v.is_number()) throw SchemaError(key + " must be a number");
    return v.get<double>();
  };
  auto integer = [](const json& v, const std::string& key) {
    if (!v.is_number_integer()) throw SchemaError(key + " must be an integer");
    return v.get<std::int64_t>();
  };
  auto boolean = [](const json& v, const std::string& key) {
    if (!v.is_boolean()) throw SchemaError(key + " must be a boolean");
    return v.get<bool>();
  };
  auto cost = [&](const json& v, const std::string& key) {
    if (v.is_string()) return ParseCost(v.get<std::string>());
    return ParseCost(FormatNumber(number(v, key)));
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "method") method = ParseMethod(text(v, key));
    else if (key == "dataset") dataset_path = text(v, key);
    else if (key == "weights") weights_path = text(v, key);
    else if (key == "output") output_path = text(v, key);
    else if (key == "summary") summary_path = text(v, key);
    else if (key == "cx_add") costs.cx_add = cost(v, key);
    else if (key == "cx_del") costs.cx_del = cost(v, key);
    else if (key == "ca_add") costs.ca_add = cost(v, key);
    else if (key == "ca_del") costs.ca_del = cost(v, key);
    else if (key == "epsilon") epsilon_grid = text(v, key);
    else if (key == "local") local_budget = text(v, key);
    else if (key == "seed") seed = static_cast<std::uint64_t>(integer(v, key));
    else if (key == "samples") prediction_samples = integer(v, key);
    else if (key == "cert_samples") certification_samples = integer(v, key);
    else if (key == "alpha") alpha = number(v, key);
    else if (key == "px_add") noise.px_add = number(v, key);
    else if (key == "px_del") noise.px_del = number(v, key);
    else if (key == "pa_add") noise.pa_add = number(v, key);
    else if (key == "pa_del") noise.pa_del = number(v, key);
    else if (key == "threads") threads = static_cast<int>(integer(v, key));
    else if (key == "timings") timings = boolean(v, key);
    else if (key == "undirected_halve") halve_undirected = boolean(v, key);
    else if (key == "multiclass") multiclass = boolean(v, key);
    else if (key == "symmetric") symmetric_dual = boolean(v, key);
    else if (key == "max_iterations") max_iterations = static_cast<int>(integer(v, key));
    else if (key == "omega") {
      const std::string o = text(v, key);
      if (o == "chord") omega = OmegaPolicy::kChord;
      else if (o == "zero") omega = OmegaPolicy::kZero;
      else if (o == "one") omega = OmegaPolicy::kOne;
      else throw SchemaError("omega must be chord, zero or one");
    } else {
      throw SchemaError("unknown config key '" + key + "'");
    }
  }
}

RunResult RunCertify(const RunConfig& config, const std::vector<AttributedGraph>& dataset,
                     const GnnModel& model) {
  config.Validate();
  const std::vector<double> grid = ParseEpsilonGrid(config.epsilon_grid);
  switch (config.method) {
    case Method::kIbp:
    case Method::kPolytope:
      RequireArchitecture(model, Architecture::kGcn, config.method);
      break;
    case Method::kGraphCls:
      RequireArchitecture(model, Architecture::kGraphClsMean, config.method);
      break;
    case Method::kPippnp:
      RequireArchitecture(model, Architecture::kPiPpnp, config.method);
      break;
    case Method::kSmoothing:
      break;
  }
  for (const AttributedGraph& g : dataset) {
    if (g.num_features() != model.input_dim()) {
      throw SchemaError("dataset features do not match the model input");
    }
    const std::size_t want = IsGraphLevel(model) ? 1 : static_cast<std::size_t>(g.num_nodes());
    if (!g.labels.empty() && g.labels.size() != want) {
      throw SchemaError("dataset labels do not match the prediction count");
    }
  }
  CheckThreatModel(config);

  RunResult result;
  if (config.method == Method::kSmoothing) {
    result.records = SmoothingRecords(config, dataset, model, grid);
  } else {
    std::vector<Ladder> ladders = DeterministicLadders(config, dataset, model, grid);
    for (Ladder& l : ladders) ApplyBudgetClosure(l.steps);
    for (std::size_t e = 0; e < grid.size(); ++e) {
      for (const Ladder& l : ladders) {
        const NodeCertificate& c = l.steps[e];
        CertificateRecord r;
        r.epsilon = grid[e];
        r.id = l.id;
        r.label = c.label;
        r.truth = l.truth;
        r.verdict = c.certified ? Verdict::kCertified : Verdict::kNotCertified;
        r.bound = c.bound;
        r.seconds = l.seconds[e];
        r.flagged = c.flagged;
        result.flagged += c.flagged ? 1 : 0;
        result.records.push_back(r);
      }
    }
  }
  result.summary = Summarize(result.records, grid);
  return result;
}

RunResult RunCertify(const RunConfig& config) {
  if (config.dataset_path.empty()) throw SchemaError("no dataset given");
  if (config.weights_path.empty()) throw SchemaError("no weights given");
  const std::vector<AttributedGraph> dataset = ReadDataset(config.dataset_path);
  const GnnModel model = [&] {
    try {
      return ModelFromJson(ReadJsonFile(config.weights_path));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(std::string("invalid weights: ") + e.what());
    } catch (const json::exception& e) {
      throw SchemaError(std::string("invalid weights: ") + e.what());
    }
  }();
  return RunCertify(config, dataset, model);
}

std::string RecordsCsv(const RunResult& result, bool timings) {
  std::string out = "epsilon,id,label,verdict,bound,seconds\n";
  for (const CertificateRecord& r : result.records) {
    out += FormatNumber(r.epsilon) + "," + std::to_string(r.id) + "," +
           std::to_string(r.label) + "," + ToString(r.verdict) + "," +
           FormatNumber(r.bound) + "," + (timings ? FormatNumber(r.seconds) : "0") + "\n";
  }
  return out;
}

std::string SummaryCsv(const RunResult& result) {
  std::string out = "epsilon,certified_count,total,certified_accuracy\n";
  for (const SummaryRow& row : result.summary) {
    char acc[32];
    std::snprintf(acc, sizeof(acc), "%.6f", row.certified_accuracy);
    out += FormatNumber(row.epsilon) + "," + std::to_string(row.certified_count) + "," +
           std::to_string(row.total) + "," + acc + "\n";
  }
  return out;
}

}  // namespace gedcert
