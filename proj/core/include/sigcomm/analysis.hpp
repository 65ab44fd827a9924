// Copyright 2026 The sigcomm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SIGCOMM_ANALYSIS_HPP_
#define SIGCOMM_ANALYSIS_HPP_

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sigcomm/error.hpp"
#include "sigcomm/task.hpp"

namespace sigcomm {

// Map from each concept (index = concept - 1) to the signal the sender emits.
struct SignalingSystem {
  int vocab_size = 0;
  std::vector<Signal> signals;
  std::string provenance;
};

inline constexpr double kZeroBasisThreshold = 1e-4;

struct ConstellationReport {
  // One entry per input signal; a zero-vector marks a signal whose residual
  // fell under the threshold.
  std::vector<std::vector<double>> bases;
  std::vector<bool> nonzero;
  std::vector<double> residual_norms;
  // coordinates[k][j] = <s_k, phi_j> over the nonzero bases, in order.
  std::vector<std::vector<double>> coordinates;
  int dimension = 0;
};

// Gram-Schmidt over the signals in order. Throws DegenerateInputError if the
// first signal's norm is under the threshold.
ConstellationReport gram_schmidt(std::span<const Signal> signals, double threshold = kZeroBasisThreshold);

class ConstellationDimensionError : public Error {
 public:
  explicit ConstellationDimensionError(int dimension);
  int dimension() const noexcept { return dimension_; }

 private:
  int dimension_;
};

struct Constellation2d {
  std::vector<std::pair<double, double>> points;
  int dimension = 0;
  bool truncated = false;  // dimension > 2 and only phi_1, phi_2 were kept
};

// Projection of each signal on phi_1 and phi_2 (y = 0 for one-dimensional
// systems). In strict mode a dimension above 2 throws
// ConstellationDimensionError; otherwise the extra axes are dropped and
// `truncated` is set.
Constellation2d constellation_2d(std::span<const Signal> signals, bool strict = true);
Constellation2d constellation_2d(const SignalingSystem& system, bool strict = true);

using Metric = double (*)(std::span<const double>, std::span<const double>);

double chebyshev(std::span<const double> a, std::span<const double> b);
double euclidean(std::span<const double> a, std::span<const double> b);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// OPTICS with an unbounded neighborhood radius. All vectors are indexed by
// point, except `ordering`, which lists point indices in visit order.
struct OpticsResult {
  std::vector<std::size_t> ordering;
  std::vector<double> reachability;
  std::vector<double> core_distances;
  std::vector<long> predecessor;  // -1 when undefined

  // Reachability in visit order.
  std::vector<double> reachability_plot() const;
};

// Core distance is the distance to the min_samples-th nearest point counting
// the point itself. Points are expanded in order of smallest current
// reachability, ties to the lowest index.
OpticsResult optics(const std::vector<std::vector<double>>& points, int min_samples = 4,
                    Metric metric = chebyshev);

struct XiClusters {
  std::vector<int> labels;  // per point, -1 for noise
  std::vector<std::pair<std::size_t, std::size_t>> clusters;  // [start, end] in ordering positions
};

// Steep-area cluster extraction. `reachability` and `predecessor` are indexed
// by point. min_cluster_size <= 0 means min_samples.
XiClusters extract_clusters_xi(std::span<const std::size_t> ordering, std::span<const double> reachability,
                               double xi = 0.1, int min_samples = 4, int min_cluster_size = 0,
                               bool predecessor_correction = false, std::span<const long> predecessor = {});

// Member minimizing the mean distance to the other members; ties to the
// lowest index. Throws PreconditionError on an empty cluster.
std::size_t medoid(const std::vector<std::vector<double>>& cluster, Metric metric = chebyshev);

// Label of the nearest reference; ties to the lowest reference index.
int nn_classify(std::span<const double> point, const std::vector<std::vector<double>>& references,
                std::span<const int> labels, Metric metric = chebyshev);

// Concatenation of the system's signals in concept order.
std::vector<double> system_vector(const SignalingSystem& system);

struct ClusteringParams {
  int min_samples = 4;
  double xi = 0.1;
  bool predecessor_correction = false;
};

struct ClusteringReport {
  OpticsResult optics;
  std::vector<int> labels;             // xi labels, -1 = noise
  std::vector<std::size_t> medoids;    // system index per cluster label
  std::vector<int> nn_labels;          // every system assigned to its nearest medoid
  std::vector<double> shares;          // fraction of systems per cluster after NN assignment
  std::vector<SignalingSystem> mean_systems;  // per-cluster per-concept mean waveform
};

// Clusters whole signaling systems. Throws PreconditionError when vocabulary
// sizes differ.
ClusteringReport cluster_systems(const std::vector<SignalingSystem>& systems, const ClusteringParams& params = {});

}  // namespace sigcomm

#endif  // SIGCOMM_ANALYSIS_HPP_
