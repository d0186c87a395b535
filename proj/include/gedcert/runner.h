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

#ifndef GEDCERT_RUNNER_H_
#define GEDCERT_RUNNER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "gedcert/cert_attr.h"
#include "gedcert/certificate.h"
#include "gedcert/graph.h"
#include "gedcert/models.h"
#include "gedcert/smoothing.h"
#include "json.hpp"

namespace gedcert {

enum class Method { kIbp, kPolytope, kGraphCls, kPippnp, kSmoothing };

Method ParseMethod(const std::string& text);
std::string ToString(Method method);

// "start:stop:step" -> ascending budgets start, start + step, ... <= stop.
// Throws SchemaError.
std::vector<double> ParseEpsilonGrid(const std::string& text);

// Per-node budgets:
//   none          no local constraint
//   abs:v         v for every node
//   abs:v1,v2,..  one value per node
//   rel:f         floor(f * D) * min(cx_add, cx_del)
//   deg:c:s       max(0, degree - c + s), degree without the self-loop
struct LocalBudgetSpec {
  enum class Kind { kNone, kAbsolute, kRelative, kDegree };
  Kind kind = Kind::kNone;
  std::vector<double> values;
  double fraction = 0.0;
  double offset = 0.0;
  double strength = 0.0;

  static LocalBudgetSpec Parse(const std::string& text);
  // Empty for kNone.
  std::vector<double> Resolve(const AttributedGraph& g, const CostModel& cm) const;
};

struct RunConfig {
  Method method = Method::kPolytope;
  std::string dataset_path;
  std::string weights_path;
  std::string output_path;
  std::string summary_path;  // defaults to <output>.summary.csv
  CostModel costs;           // epsilon and rho are set per grid point
  std::string epsilon_grid = "0:0:1";
  std::string local_budget = "none";
  std::uint64_t seed = 0;
  std::int64_t prediction_samples = 1000;
  std::int64_t certification_samples = 10000;
  double alpha = 0.01;
  SparseMeasure noise{0.01, 0.6, 0.01, 0.6};
  int threads = 1;
  bool timings = false;
  bool halve_undirected = false;
  bool multiclass = false;
  bool symmetric_dual = false;
  int max_iterations = 100;
  OmegaPolicy omega = OmegaPolicy::kChord;

  // Schema checks only; method/cost compatibility is checked when running.
  void Validate() const;
  // Keys mirror the long flag names with '-' replaced by '_'; unknown keys
  // are rejected. Fields absent from `j` keep their current values.
  void MergeJson(const nlohmann::json& j);
};

struct CertificateRecord {
  double epsilon = 0.0;
  int id = 0;
  int label = 0;
  int truth = -1;  // -1 when the dataset carries no label
  Verdict verdict = Verdict::kNotCertified;
  double bound = 0.0;
  double seconds = 0.0;
  bool flagged = false;
};

struct SummaryRow {
  double epsilon = 0.0;
  int certified_count = 0;
  int total = 0;
  double certified_accuracy = 0.0;
};

struct RunResult {
  std::vector<CertificateRecord> records;  // grouped by epsilon, then id
  std::vector<SummaryRow> summary;
  int flagged = 0;
};

// Certifies every prediction at every grid budget. A certificate at a larger
// budget is carried down to smaller ones. Throws SchemaError or
// IncompatibleCostError.
RunResult RunCertify(const RunConfig& config, const std::vector<AttributedGraph>& dataset,
                     const GnnModel& model);
// Loads the dataset and weights named in `config`.
RunResult RunCertify(const RunConfig& config);

// "epsilon,id,label,verdict,bound,seconds"; seconds print as 0 unless
// `timings`.
std::string RecordsCsv(const RunResult& result, bool timings);
// "epsilon,certified_count,total,certified_accuracy". A record counts when it
// is certified and its label matches the ground truth (or no truth exists).
std::string SummaryCsv(const RunResult& result);

}  // namespace gedcert

#endif  // GEDCERT_RUNNER_H_
