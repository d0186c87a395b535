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

#ifndef GEDCERT_SMOOTHING_H_
#define GEDCERT_SMOOTHING_H_

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gedcert/graph.h"

namespace gedcert {

// Independent bit flips: 0 -> 1 with probability *_add, 1 -> 0 with *_del.
struct SparseMeasure {
  double px_add = 0.0;
  double px_del = 0.0;
  double pa_add = 0.0;
  double pa_del = 0.0;

  void Validate() const;
};

struct GaussianMeasure {
  double sigma = 1.0;

  void Validate() const;
};

// Draws sample `index` of the measure around `g`. Every coin is keyed by
// (seed, index, entry), with nodes identified through `node_keys` (position
// -> key, identity when empty). Passing the inverse of a permutation makes
// the noise of a permuted graph the permuted noise. Undirected graphs flip
// both orientations of an edge together; the diagonal is left alone.
AttributedGraph SampleSparse(const AttributedGraph& g, const SparseMeasure& m,
                             std::uint64_t seed, std::uint64_t index,
                             const std::vector<int>& node_keys = {});

// Standard normal noise scaled by sigma, keyed by (seed, index, row, col).
Eigen::MatrixXd GaussianNoise(Eigen::Index rows, Eigen::Index cols,
                              const GaussianMeasure& m, std::uint64_t seed,
                              std::uint64_t index);

// Discrete base model: one label per output component (per node, or a single
// entry for graph-level tasks).
using GraphLabeler = std::function<std::vector<int>(const AttributedGraph&)>;

struct VoteCounts {
  // components x classes.
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
  std::vector<int> labels;  // argmax per component, ties to the lowest class
  std::int64_t samples = 0;
};

struct MonteCarloOptions {
  std::int64_t samples = 1000;
  std::uint64_t first_index = 0;  // sample indices start here
  std::uint64_t seed = 0;
  int threads = 1;
};

VoteCounts MajorityVote(const GraphLabeler& base, const AttributedGraph& g,
                        const SparseMeasure& m, int num_classes,
                        const MonteCarloOptions& options,
                        const std::vector<int>& node_keys = {});

enum class SchemeKind { kMajority, kExpected, kMedian, kCenter };

SchemeKind ParseSchemeKind(const std::string& text);

// Continuous base model on matrix-valued inputs and outputs.
using MatrixModel = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

// Outputs of `base` on x + noise_i for every sample. `noise_map` is applied to
// each noise draw first (identity when empty), which is how coupled samples
// for a transformed input are produced.
std::vector<Eigen::MatrixXd> SampleOutputs(
    const MatrixModel& base, const Eigen::MatrixXd& x, const GaussianMeasure& m,
    const MonteCarloOptions& options,
    const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& noise_map = {});

// Index of the sample with the smallest median Frobenius distance to the
// other samples (lowest index on ties).
std::size_t CenterIndex(const std::vector<Eigen::MatrixXd>& samples);

// Componentwise mean / median (midpoint for even counts) or the center.
Eigen::MatrixXd ApplyScheme(SchemeKind kind, const std::vector<Eigen::MatrixXd>& samples);

// Median of a copy of `values`; midpoint of the central pair for even sizes.
double Median(std::vector<double> values);

enum class BoundSide { kLower, kUpper };

// Exact one-sided binomial confidence bound at level 1 - alpha.
double ClopperPearson(std::int64_t successes, std::int64_t trials, double alpha,
                      BoundSide side);

// ---------------------------------------------------------------------------
// Equivariance harness with seed-coupled sampling.

// Maximum number of components whose smoothed label differs between
// vote(p . g) and p . vote(g), over `trials` random permutations, plus any
// count mismatch. Throws std::logic_error if `base` is not itself
// permutation equivariant on g.
double PermutationHarness(const GraphLabeler& base, bool graph_level,
                          const AttributedGraph& g, const SparseMeasure& m,
                          int num_classes, const MonteCarloOptions& options,
                          int trials);

// Rows of x are points in R^D; the action maps each row v to linear * v + shift
// (linear orthogonal).
struct IsometryAction {
  Eigen::MatrixXd linear;
  Eigen::VectorXd shift;

  Eigen::MatrixXd Apply(const Eigen::MatrixXd& points) const;
  Eigen::MatrixXd ApplyLinear(const Eigen::MatrixXd& points) const;
  Eigen::MatrixXd Invert(const Eigen::MatrixXd& points) const;
  static IsometryAction Identity(int dims);
};

// Largest max-abs deviation between g^{-1} f(g x) and f(x) over the actions,
// where f smooths `base` with `kind`. Throws std::logic_error if `base`
// deviates from equivariance by more than 1e-10 on x.
double IsometryHarness(const MatrixModel& base, SchemeKind kind,
                       const Eigen::MatrixXd& x, const GaussianMeasure& m,
                       const MonteCarloOptions& options,
                       const std::vector<IsometryAction>& actions);

}  // namespace gedcert

#endif  // GEDCERT_SMOOTHING_H_
