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

#ifndef GEDCERT_CERTIFICATE_H_
#define GEDCERT_CERTIFICATE_H_

#include <string>
#include <vector>

namespace gedcert {

// Verdict slack: a margin bound certifies only if it exceeds this.
inline constexpr double kCertSlack = 1e-9;

enum class Verdict { kCertified, kNotCertified, kAbstain };

inline std::string ToString(Verdict v) {
  switch (v) {
    case Verdict::kCertified: return "certified";
    case Verdict::kNotCertified: return "not_certified";
    case Verdict::kAbstain: return "abstain";
  }
  return "";
}

struct NodeCertificate {
  int node = 0;  // node id, or graph id for graph-level certificates
  int label = 0;
  bool certified = false;
  // Lower bound on min_k (score_label - score_k) over the threat model.
  double bound = 0.0;
  // Set when an iterative certificate stopped without converging.
  bool flagged = false;
};

inline NodeCertificate MakeCertificate(int node, int label, double bound) {
  NodeCertificate c;
  c.node = node;
  c.label = label;
  c.bound = bound;
  c.certified = bound > kCertSlack;
  return c;
}

// `ladder[i]` certifies one node or graph at the i-th budget of an ascending
// grid. A certificate for a larger budget also holds for every smaller one,
// so each entry takes the best bound found at its budget or above.
inline void ApplyBudgetClosure(std::vector<NodeCertificate>& ladder) {
  for (std::size_t i = ladder.size(); i-- > 1;) {
    NodeCertificate& lower = ladder[i - 1];
    const NodeCertificate& upper = ladder[i];
    if (upper.bound > lower.bound && upper.label == lower.label) {
      lower.bound = upper.bound;
      lower.certified = lower.certified || upper.certified;
    }
  }
}

}  // namespace gedcert

#endif  // GEDCERT_CERTIFICATE_H_
