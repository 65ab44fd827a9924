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

#include "sigcomm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sigcomm {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void subtract_projections(std::vector<double>& r, std::span<const double> source,
                          const std::vector<std::vector<double>>& bases, const std::vector<bool>& nonzero) {
  for (std::size_t j = 0; j < bases.size(); ++j) {
    if (!nonzero[j]) continue;
    const double c = dot(source, bases[j]);
    for (std::size_t t = 0; t < r.size(); ++t) r[t] -= c * bases[j][t];
  }
}

}  // namespace

ConstellationReport gram_schmidt(std::span<const Signal> signals, double threshold) {
  if (signals.empty()) throw PreconditionError("gram_schmidt needs at least one signal");
  const std::size_t dim = signals.front().size();
  for (const Signal& s : signals)
    if (s.size() != dim) throw PreconditionError("all signals must have the same length");
  if (norm(signals.front()) < threshold)
    throw DegenerateInputError("the first signal has (near) zero norm");

  ConstellationReport report;
  for (const Signal& s : signals) {
    std::vector<double> residual(s.begin(), s.end());
    subtract_projections(residual, s, report.bases, report.nonzero);
    const double r = norm(residual);
    report.residual_norms.push_back(r);
    if (r < threshold) {
      report.bases.emplace_back(dim, 0.0);
      report.nonzero.push_back(false);
      continue;
    }
    // Second pass restores orthogonality lost to cancellation.
    std::vector<double> again = residual;
    subtract_projections(again, residual, report.bases, report.nonzero);
    const double r2 = norm(again);
    for (double& v : again) v /= r2;
    report.bases.push_back(std::move(again));
    report.nonzero.push_back(true);
    ++report.dimension;
  }

  for (const Signal& s : signals) {
    std::vector<double> coords;
    for (std::size_t j = 0; j < report.bases.size(); ++j)
      if (report.nonzero[j]) coords.push_back(dot(s, report.bases[j]));
    report.coordinates.push_back(std::move(coords));
  }
  return report;
}

ConstellationDimensionError::ConstellationDimensionError(int dimension)
    : Error("constellation has dimension " + std::to_string(dimension) + " (> 2)"), dimension_(dimension) {}

Constellation2d constellation_2d(std::span<const Signal> signals, bool strict) {
  const ConstellationReport report = gram_schmidt(signals);
  if (strict && report.dimension > 2) throw ConstellationDimensionError(report.dimension);
  Constellation2d out;
  out.dimension = report.dimension;
  out.truncated = report.dimension > 2;
  for (const auto& c : report.coordinates)
    out.points.emplace_back(c.empty() ? 0.0 : c[0], c.size() > 1 ? c[1] : 0.0);
  return out;
}

Constellation2d constellation_2d(const SignalingSystem& system, bool strict) {
  return constellation_2d(system.signals, strict);
}

double chebyshev(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw PreconditionError("chebyshev: length mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw PreconditionError("euclidean: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::vector<double> OpticsResult::reachability_plot() const {
  std::vector<double> out;
  out.reserve(ordering.size());
  for (std::size_t p : ordering) out.push_back(reachability[p]);
  return out;
}

OpticsResult optics(const std::vector<std::vector<double>>& points, int min_samples, Metric metric) {
  if (min_samples < 1) throw PreconditionError("min_samples must be positive");
  const std::size_t n = points.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dist[i * n + j] = dist[j * n + i] = metric(points[i], points[j]);

  OpticsResult r;
  r.core_distances.assign(n, kInf);
  r.reachability.assign(n, kInf);
  r.predecessor.assign(n, -1);
  const auto k = static_cast<std::size_t>(min_samples);
  if (n >= k) {
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(dist.begin() + static_cast<std::ptrdiff_t>(i * n), n, row.begin());
      std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
      r.core_distances[i] = row[k - 1];
    }
  }

  std::vector<bool> processed(n, false);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t point = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (processed[i]) continue;
      if (point == n || r.reachability[i] < r.reachability[point]) point = i;
    }
    processed[point] = true;
    r.ordering.push_back(point);
    if (r.core_distances[point] == kInf) continue;
    for (std::size_t o = 0; o < n; ++o) {
      if (processed[o]) continue;
      const double reach = std::max(r.core_distances[point], dist[point * n + o]);
      if (reach < r.reachability[o]) {
        r.reachability[o] = reach;
        r.predecessor[o] = static_cast<long>(point);
      }
    }
  }
  return r;
}

namespace {

struct SteepDownArea {
  std::size_t start;
  std::size_t end;
  double mib;
};

std::size_t extend_region(const std::vector<bool>& steep, const std::vector<bool>& xward, std::size_t start,
                          int min_samples) {
  const std::size_t n = steep.size();
  int non_xward = 0;
  std::size_t end = start;
  for (std::size_t index = start; index < n; ++index) {
    if (steep[index]) {
      non_xward = 0;
      end = index;
    } else if (!xward[index]) {
      // Not steep but still going the same way.
      ++non_xward;
      if (non_xward > min_samples) break;
    } else {
      return end;
    }
  }
  return end;
}

void update_filter_sdas(std::vector<SteepDownArea>& sdas, double mib, double xi_complement,
                        const std::vector<double>& plot) {
  if (std::isinf(mib)) {
    sdas.clear();
    return;
  }
  std::erase_if(sdas, [&](const SteepDownArea& d) { return !(mib <= plot[d.start] * xi_complement); });
  for (auto& d : sdas) d.mib = std::max(d.mib, mib);
}

// Shrinks [s, e] from the right until e's predecessor lies inside it.
bool correct_predecessor(const std::vector<double>& plot, std::span<const long> predecessor_plot,
                         std::span<const std::size_t> ordering, std::size_t& s, std::size_t& e) {
  while (s < e) {
    if (plot[s] > plot[e]) return true;
    const long p_e = predecessor_plot[e];
    for (std::size_t i = s; i < e; ++i)
      if (p_e == static_cast<long>(ordering[i])) return true;
    --e;
  }
  return false;
}

}  // namespace

XiClusters extract_clusters_xi(std::span<const std::size_t> ordering, std::span<const double> reachability,
                               double xi, int min_samples, int min_cluster_size, bool predecessor_correction,
                               std::span<const long> predecessor) {
  const std::size_t n = ordering.size();
  if (reachability.size() != n) throw PreconditionError("ordering and reachability sizes differ");
  if (!(xi > 0.0 && xi < 1.0)) throw PreconditionError("xi must lie in (0, 1)");
  if (predecessor_correction && predecessor.size() != n)
    throw PreconditionError("predecessor correction needs the predecessor array");
  if (min_cluster_size <= 0) min_cluster_size = min_samples;

  XiClusters out;
  out.labels.assign(n, -1);
  if (n == 0) return out;

  // Reachability in visit order with a trailing infinity so a cluster can end
  // at the last point.
  std::vector<double> plot;
  std::vector<long> pred_plot;
  plot.reserve(n + 1);
  for (std::size_t p : ordering) {
    plot.push_back(reachability[p]);
    if (predecessor_correction) pred_plot.push_back(predecessor[p]);
  }
  plot.push_back(kInf);

  const double xi_complement = 1.0 - xi;
  std::vector<bool> steep_up(n), steep_down(n), down(n), up(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ratio = plot[i] / plot[i + 1];  // NaN compares false, as intended
    steep_up[i] = ratio <= xi_complement;
    steep_down[i] = ratio >= 1.0 / xi_complement;
    down[i] = ratio > 1.0;
    up[i] = ratio < 1.0;
  }

  std::vector<SteepDownArea> sdas;
  std::vector<std::pair<std::size_t, std::size_t>> clusters;
  std::size_t index = 0;
  double mib = 0.0;

  for (std::size_t steep_index = 0; steep_index < n; ++steep_index) {
    if (!(steep_up[steep_index] || steep_down[steep_index])) continue;
    if (steep_index < index) continue;

    mib = std::max(mib, *std::max_element(plot.begin() + static_cast<std::ptrdiff_t>(index),
                                          plot.begin() + static_cast<std::ptrdiff_t>(steep_index) + 1));

    if (steep_down[steep_index]) {
      update_filter_sdas(sdas, mib, xi_complement, plot);
      const std::size_t d_start = steep_index;
      const std::size_t d_end = extend_region(steep_down, up, d_start, min_samples);
      sdas.push_back({d_start, d_end, 0.0});
      index = d_end + 1;
      mib = plot[index];
      continue;
    }

    update_filter_sdas(sdas, mib, xi_complement, plot);
    const std::size_t u_start = steep_index;
    const std::size_t u_end = extend_region(steep_up, down, u_start, min_samples);
    index = u_end + 1;
    mib = plot[index];

    std::vector<std::pair<std::size_t, std::size_t>> u_clusters;
    for (const SteepDownArea& d : sdas) {
      std::size_t c_start = d.start;
      std::size_t c_end = u_end;

      if (plot[c_end + 1] * xi_complement < d.mib) continue;

      const double d_max = plot[d.start];
      if (d_max * xi_complement >= plot[c_end + 1]) {
        while (plot[c_start + 1] > plot[c_end + 1] && c_start < d.end) ++c_start;
      } else if (plot[c_end + 1] * xi_complement >= d_max) {
        while (c_end > u_start && plot[c_end - 1] > d_max) --c_end;
      }

      if (predecessor_correction && !correct_predecessor(plot, pred_plot, ordering, c_start, c_end)) continue;
      if (static_cast<long>(c_end) - static_cast<long>(c_start) + 1 < min_cluster_size) continue;
      if (c_start > d.end) continue;
      if (c_end < u_start) continue;
      u_clusters.emplace_back(c_start, c_end);
    }
    // Smaller (inner) clusters first.
    clusters.insert(clusters.end(), u_clusters.rbegin(), u_clusters.rend());
  }

  std::vector<int> ordered_labels(n, -1);
  int label = 0;
  for (const auto& [s, e] : clusters) {
    bool free = true;
    for (std::size_t i = s; i <= e; ++i) free = free && ordered_labels[i] == -1;
    if (!free) continue;
    for (std::size_t i = s; i <= e; ++i) ordered_labels[i] = label;
    ++label;
  }
  for (std::size_t i = 0; i < n; ++i) out.labels[ordering[i]] = ordered_labels[i];
  out.clusters = std::move(clusters);
  return out;
}

std::size_t medoid(const std::vector<std::vector<double>>& cluster, Metric metric) {
  if (cluster.empty()) throw PreconditionError("medoid of an empty cluster");
  std::size_t best = 0;
  double best_total = kInf;
  for (std::size_t i = 0; i < cluster.size(); ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < cluster.size(); ++j)
      if (j != i) total += metric(cluster[i], cluster[j]);
    if (total < best_total) {
      best = i;
      best_total = total;
    }
  }
  return best;
}

int nn_classify(std::span<const double> point, const std::vector<std::vector<double>>& references,
                std::span<const int> labels, Metric metric) {
  if (references.empty()) throw PreconditionError("nn_classify needs at least one reference");
  if (labels.size() != references.size()) throw PreconditionError("one label per reference is required");
  std::size_t best = 0;
  double best_d = metric(point, references[0]);
  for (std::size_t i = 1; i < references.size(); ++i) {
    const double d = metric(point, references[i]);
    if (d < best_d) {
      best = i;
      best_d = d;
    }
  }
  return labels[best];
}

std::vector<double> system_vector(const SignalingSystem& system) {
  std::vector<double> out;
  for (const Signal& s : system.signals) out.insert(out.end(), s.begin(), s.end());
  return out;
}

ClusteringReport cluster_systems(const std::vector<SignalingSystem>& systems, const ClusteringParams& params) {
  ClusteringReport report;
  if (systems.empty()) return report;
  for (const auto& s : systems)
    if (s.vocab_size != systems.front().vocab_size)
      throw PreconditionError("cannot cluster signaling systems with different vocabulary sizes");

  std::vector<std::vector<double>> points;
  for (const auto& s : systems) points.push_back(system_vector(s));

  report.optics = optics(points, params.min_samples, chebyshev);
  const XiClusters xi =
      extract_clusters_xi(report.optics.ordering, report.optics.reachability, params.xi, params.min_samples, 0,
                          params.predecessor_correction, report.optics.predecessor);
  report.labels = xi.labels;

  const int n_clusters = report.labels.empty() ? 0 : *std::max_element(report.labels.begin(), report.labels.end()) + 1;
  std::vector<std::vector<double>> references;
  std::vector<int> reference_labels;
  for (int c = 0; c < n_clusters; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < systems.size(); ++i)
      if (report.labels[i] == c) members.push_back(i);
    std::vector<std::vector<double>> cluster;
    for (std::size_t i : members) cluster.push_back(points[i]);
    const std::size_t m = members[medoid(cluster, chebyshev)];
    report.medoids.push_back(m);
    references.push_back(points[m]);
    reference_labels.push_back(c);

    SignalingSystem mean;
    mean.vocab_size = systems.front().vocab_size;
    mean.provenance = "cluster " + std::to_string(c) + " mean";
    for (std::size_t k = 0; k < systems.front().signals.size(); ++k) {
      Signal avg(systems[members[0]].signals[k].size(), 0.0);
      for (std::size_t i : members)
        for (std::size_t t = 0; t < avg.size(); ++t) avg[t] += systems[i].signals[k][t];
      for (double& v : avg) v /= static_cast<double>(members.size());
      mean.signals.push_back(std::move(avg));
    }
    report.mean_systems.push_back(std::move(mean));
  }

  report.shares.assign(static_cast<std::size_t>(n_clusters), 0.0);
  for (const auto& p : points) {
    const int label = n_clusters > 0 ? nn_classify(p, references, reference_labels, chebyshev) : -1;
    report.nn_labels.push_back(label);
    if (label >= 0) report.shares[static_cast<std::size_t>(label)] += 1.0 / static_cast<double>(points.size());
  }
  return report;
}

}  // namespace sigcomm
