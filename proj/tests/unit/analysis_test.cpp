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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace sigcomm {
namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void expect_close(double a, double b, double tol, const std::string& what) {
  if (std::isinf(a) || std::isinf(b)) {
    EXPECT_EQ(a, b) << what;
  } else {
    EXPECT_NEAR(a, b, tol * std::max(1.0, std::abs(b))) << what;
  }
}

// ---- Gram-Schmidt ----------------------------------------------------------------

TEST(GramSchmidt, OrthogonalPairAndDependentThird) {
  const std::vector<Signal> s{{3.0, 0.0, 0.0}, {1.0, 2.0, 0.0}, {2.0, 2.0, 0.0}};
  const auto r = gram_schmidt(s);
  EXPECT_EQ(r.dimension, 2);
  EXPECT_EQ(r.nonzero, (std::vector<bool>{true, true, false}));
  EXPECT_NEAR(r.bases[0][0], 1.0, 1e-15);
  EXPECT_NEAR(r.bases[1][1], 1.0, 1e-15);
  EXPECT_EQ(r.bases[2], (std::vector<double>{0.0, 0.0, 0.0}));
  EXPECT_NEAR(r.coordinates[2][0], 2.0, 1e-15);
  EXPECT_NEAR(r.coordinates[2][1], 2.0, 1e-15);
  EXPECT_NEAR(r.residual_norms[1], 2.0, 1e-15);
}

TEST(GramSchmidt, ZeroFirstSignalIsDegenerate) {
  const std::vector<Signal> s{{0.0, 0.0}, {1.0, 0.0}};
  EXPECT_THROW(gram_schmidt(s), DegenerateInputError);
  const std::vector<Signal> tiny{{1e-5, 0.0}, {1.0, 0.0}};
  EXPECT_THROW(gram_schmidt(tiny), DegenerateInputError);
}

TEST(GramSchmidt, ResidualUnderThresholdBecomesZeroBasis) {
  const std::vector<Signal> s{{1.0, 0.0}, {1.0, 5e-5}, {1.0, 2e-4}};
  const auto r = gram_schmidt(s);
  EXPECT_EQ(r.nonzero, (std::vector<bool>{true, false, true}));
  EXPECT_EQ(r.dimension, 2);
}

TEST(GramSchmidt, AgreesWithLeastSquaresOracle) {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 300; ++k) {
    const int rank = 1 + k % 4;
    const int count = 2 + k % 9;
    std::vector<std::vector<double>> gens(static_cast<std::size_t>(rank), std::vector<double>(10));
    for (auto& g : gens)
      for (double& v : g) v = n(gen);
    std::vector<Signal> signals;
    for (int i = 0; i < count; ++i) {
      Signal s(10, 0.0);
      for (const auto& g : gens) {
        const double c = n(gen);
        for (std::size_t t = 0; t < 10; ++t) s[t] += c * g[t];
      }
      signals.push_back(s);
    }
    const auto r = gram_schmidt(signals);

    std::vector<std::vector<double>> previous;
    int expected_dim = 0;
    for (std::size_t i = 0; i < signals.size(); ++i) {
      // Compared against the span of the signals kept so far.
      const bool independent = oracle::residual_to_span(previous, signals[i]) >= kZeroBasisThreshold;
      ASSERT_EQ(r.nonzero[i], independent) << "case " << k << " signal " << i;
      if (independent) {
        ++expected_dim;
        previous.push_back(signals[i]);
      }
    }
    ASSERT_EQ(r.dimension, expected_dim);
    EXPECT_LE(r.dimension, rank);

    std::vector<std::vector<double>> basis;
    for (std::size_t j = 0; j < r.bases.size(); ++j)
      if (r.nonzero[j]) basis.push_back(r.bases[j]);
    for (std::size_t a = 0; a < basis.size(); ++a)
      for (std::size_t b = 0; b < basis.size(); ++b)
        ASSERT_NEAR(dot(basis[a], basis[b]), a == b ? 1.0 : 0.0, 1e-10);
    // Coordinates rebuild every signal up to the dropped residuals.
    for (std::size_t i = 0; i < signals.size(); ++i) {
      std::vector<double> rebuilt(10, 0.0);
      for (std::size_t j = 0; j < basis.size(); ++j)
        for (std::size_t t = 0; t < 10; ++t) rebuilt[t] += r.coordinates[i][j] * basis[j][t];
      for (std::size_t t = 0; t < 10; ++t) ASSERT_NEAR(rebuilt[t], signals[i][t], 1e-8);
    }
  }
}

TEST(Constellation, OneDimensionalLiesOnTheAxis) {
  const std::vector<Signal> s{{1.0, 1.0}, {2.0, 2.0}, {-0.5, -0.5}};
  const auto c = constellation_2d(s);
  EXPECT_EQ(c.dimension, 1);
  EXPECT_FALSE(c.truncated);
  EXPECT_NEAR(c.points[1].first, 2.0 * std::sqrt(2.0), 1e-12);
  for (const auto& p : c.points) EXPECT_EQ(p.second, 0.0);
  EXPECT_NEAR(c.points[2].first, -0.5 * std::sqrt(2.0), 1e-12);
}

TEST(Constellation, SingleSignal) {
  const std::vector<Signal> s{{0.0, 3.0, 4.0}};
  const auto c = constellation_2d(s);
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_NEAR(c.points[0].first, 5.0, 1e-12);
}

TEST(Constellation, PreservesDistancesInTwoDimensions) {
  const std::vector<Signal> s{{1.0, 0.5, 0.0}, {0.0, 1.0, 1.0}, {1.0, 1.5, 1.0}, {2.0, 2.0, 1.0}};
  const auto c = constellation_2d(s);
  EXPECT_EQ(c.dimension, 2);
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t b = 0; b < s.size(); ++b) {
      const double dx = c.points[a].first - c.points[b].first;
      const double dy = c.points[a].second - c.points[b].second;
      EXPECT_NEAR(std::hypot(dx, dy), euclidean(s[a], s[b]), 1e-12);
    }
}

TEST(Constellation, ThreeDimensionsThrowInStrictMode) {
  const std::vector<Signal> s{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
  try {
    constellation_2d(s);
    FAIL() << "expected ConstellationDimensionError";
  } catch (const ConstellationDimensionError& e) {
    EXPECT_EQ(e.dimension(), 3);
  }
  const auto c = constellation_2d(s, false);
  EXPECT_TRUE(c.truncated);
  EXPECT_EQ(c.points[2], (std::pair<double, double>{0.0, 0.0}));
}

// ---- Distances --------------------------------------------------------------

TEST(Metric, ChebyshevAndEuclidean) {
  const std::vector<double> a{1.0, -2.0, 0.5}, b{0.0, 1.0, 0.0};
  EXPECT_EQ(chebyshev(a, b), 3.0);
  EXPECT_EQ(chebyshev(a, a), 0.0);
  EXPECT_NEAR(euclidean(a, b), std::sqrt(1.0 + 9.0 + 0.25), 1e-15);
  EXPECT_THROW(chebyshev(a, std::vector<double>{1.0}), PreconditionError);
}

// ---- OPTICS -----------------------------------------------------------------

TEST(Optics, MatchesBruteForceDefinitions) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 60; ++k) {
    std::vector<std::vector<double>> pts(static_cast<std::size_t>(5 + k % 30), std::vector<double>(3));
    for (auto& p : pts)
      for (double& v : p) v = n(gen) + (k % 2 == 0 && &p - pts.data() < 10 ? 6.0 : 0.0);
    const auto r = optics(pts, 4);
    const auto core = oracle::core_distances(pts, 4);
    ASSERT_EQ(r.ordering.size(), pts.size());
    std::vector<std::size_t> sorted = r.ordering;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) ASSERT_EQ(sorted[i], i);
    for (std::size_t i = 0; i < pts.size(); ++i) ASSERT_EQ(r.core_distances[i], core[i]);
    const auto reach = oracle::replay_reachability(pts, r.ordering, core);
    for (std::size_t i = 0; i < pts.size(); ++i) ASSERT_EQ(r.reachability[i], reach[i]) << "case " << k;
    // Each visit picks a point of minimal reachability among the unvisited.
    for (std::size_t pos = 1; pos < r.ordering.size(); ++pos) {
      const double chosen = oracle::replay_reachability(
          pts, std::vector<std::size_t>(r.ordering.begin(), r.ordering.begin() + static_cast<long>(pos + 1)),
          core)[r.ordering[pos]];
      const std::vector<std::size_t> prefix(r.ordering.begin(), r.ordering.begin() + static_cast<long>(pos));
      for (std::size_t q = pos + 1; q < r.ordering.size(); ++q) {
        auto with_q = prefix;
        with_q.push_back(r.ordering[q]);
        const double alt = oracle::replay_reachability(pts, with_q, core)[r.ordering[q]];
        if (chosen != kInf) {
          ASSERT_LE(chosen, alt);
        }
      }
    }
  }
}

TEST(Optics, TooFewPointsLeavesEverythingUnreachable) {
  const std::vector<std::vector<double>> pts{{0.0}, {1.0}, {2.0}};
  const auto r = optics(pts, 4);
  EXPECT_EQ(r.ordering, (std::vector<std::size_t>{0, 1, 2}));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.core_distances[i], kInf);
    EXPECT_EQ(r.reachability[i], kInf);
  }
  const auto xi = extract_clusters_xi(r.ordering, r.reachability, 0.1, 4);
  EXPECT_EQ(xi.labels, (std::vector<int>{-1, -1, -1}));
  EXPECT_THROW(optics(pts, 0), PreconditionError);
}

TEST(Optics, EmptyInput) {
  const auto r = optics({}, 4);
  EXPECT_TRUE(r.ordering.empty());
  const auto xi = extract_clusters_xi(r.ordering, r.reachability);
  EXPECT_TRUE(xi.labels.empty());
  EXPECT_TRUE(xi.clusters.empty());
}

TEST(Optics, MatchesFrozenReferenceFixtures) {
  const auto fixtures = oracle::load_xi_fixtures(std::string(SIGCOMM_TEST_DATA_DIR) + "/xi_fixtures.txt");
  ASSERT_GE(fixtures.size(), 10u);
  for (const auto& f : fixtures) {
    SCOPED_TRACE(f.name);
    const auto r = optics(f.points, 4);
    EXPECT_EQ(r.ordering, f.ordering);
    EXPECT_EQ(r.predecessor, f.predecessor);
    for (std::size_t i = 0; i < f.points.size(); ++i) {
      expect_close(r.reachability[i], f.reachability[i], 1e-12, "reachability " + std::to_string(i));
      expect_close(r.core_distances[i], f.core[i], 1e-12, "core " + std::to_string(i));
    }
    const auto xi = extract_clusters_xi(f.ordering, f.reachability, 0.1, 4, 0, false, f.predecessor);
    EXPECT_EQ(xi.labels, f.labels);
    const auto xi_pc = extract_clusters_xi(f.ordering, f.reachability, 0.1, 4, 0, true, f.predecessor);
    EXPECT_EQ(xi_pc.labels, f.labels_pc);
  }
}

TEST(Optics, TwoBlobsGiveTwoClusters) {
  const auto pts = oracle::two_blob_fixture();
  const auto r = optics(pts, 4);
  const auto xi = extract_clusters_xi(r.ordering, r.reachability, 0.1, 4, 0, false, r.predecessor);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(xi.labels[static_cast<std::size_t>(i)], xi.labels[0]);
  for (int i = 10; i < 20; ++i) EXPECT_EQ(xi.labels[static_cast<std::size_t>(i)], xi.labels[10]);
  EXPECT_NE(xi.labels[0], xi.labels[10]);
  EXPECT_GE(xi.labels[0], 0);
  EXPECT_GE(xi.labels[10], 0);
}

// ---- Medoid and nearest neighbour ---------------------------------------------

TEST(Medoid, MinimizesMeanDistance) {
  const std::vector<std::vector<double>> c{{0.0}, {1.0}, {2.0}, {10.0}};
  EXPECT_EQ(medoid(c), 1u);
  const std::vector<std::vector<double>> tie{{0.0}, {1.0}};
  EXPECT_EQ(medoid(tie), 0u);
  EXPECT_EQ(medoid({{4.0, 4.0}}), 0u);
  EXPECT_THROW(medoid({}), PreconditionError);
}

TEST(NearestNeighbour, TiesGoToLowerReference) {
  const std::vector<std::vector<double>> refs{{0.0, 0.0}, {2.0, 0.0}};
  const std::vector<int> labels{7, 3};
  EXPECT_EQ(nn_classify(std::vector<double>{0.4, 0.0}, refs, labels), 7);
  EXPECT_EQ(nn_classify(std::vector<double>{1.6, 0.0}, refs, labels), 3);
  EXPECT_EQ(nn_classify(std::vector<double>{1.0, 5.0}, refs, labels), 7);
}

TEST(SystemVector, ConcatenatesInConceptOrder) {
  const SignalingSystem s{2, {{1.0, 2.0}, {3.0, 4.0}}, "x"};
  EXPECT_EQ(system_vector(s), (std::vector<double>{1.0, 2.0, 3.0, 4.0}));
}

SignalingSystem make_system(double level, double jitter) {
  SignalingSystem s;
  s.vocab_size = 3;
  for (int i = 1; i <= 3; ++i) s.signals.push_back(Signal(4, level * i + jitter));
  return s;
}

TEST(ClusterSystems, TwoFamilies) {
  std::vector<SignalingSystem> systems;
  for (int i = 0; i < 8; ++i) systems.push_back(make_system(0.1, 0.001 * i));
  for (int i = 0; i < 8; ++i) systems.push_back(make_system(-0.3, 0.001 * i));
  const auto r = cluster_systems(systems);
  ASSERT_EQ(r.medoids.size(), 2u);
  ASSERT_EQ(r.mean_systems.size(), 2u);
  ASSERT_EQ(r.nn_labels.size(), 16u);
  for (int i = 1; i < 8; ++i) EXPECT_EQ(r.nn_labels[static_cast<std::size_t>(i)], r.nn_labels[0]);
  for (int i = 9; i < 16; ++i) EXPECT_EQ(r.nn_labels[static_cast<std::size_t>(i)], r.nn_labels[8]);
  EXPECT_NE(r.nn_labels[0], r.nn_labels[8]);
  EXPECT_NEAR(r.shares[0] + r.shares[1], 1.0, 1e-12);
  EXPECT_NEAR(r.shares[0], 0.5, 1e-12);
  const int a = r.nn_labels[0];
  EXPECT_NEAR(r.mean_systems[static_cast<std::size_t>(a)].signals[0][0], 0.1 + 0.0035, 1e-12);
}

TEST(ClusterSystems, MixedVocabularyThrows) {
  std::vector<SignalingSystem> systems{make_system(0.1, 0.0), SignalingSystem{2, {{1.0}, {2.0}}, ""}};
  EXPECT_THROW(cluster_systems(systems), PreconditionError);
  EXPECT_TRUE(cluster_systems({}).labels.empty());
}

}  // namespace
}  // namespace sigcomm
