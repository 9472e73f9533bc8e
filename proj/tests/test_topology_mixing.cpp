#include <doctest.h>

#include "adsim/mixing.hpp"
#include "adsim/rng.hpp"
#include "adsim/topology.hpp"
#include "adsim/types.hpp"
#include "oracles.hpp"

using namespace adsim;

TEST_CASE("grid topology: 9 agents, 12 edges, corner degree 2, center degree 4") {
  Topology t = build_topology(TopologyKind::Grid, 9);
  CHECK(t.edges().size() == 12);
  CHECK(t.degree(0) == 2);
  CHECK(t.degree(2) == 2);
  CHECK(t.degree(6) == 2);
  CHECK(t.degree(8) == 2);
  CHECK(t.degree(4) == 4);
  CHECK_THROWS_AS(build_topology(TopologyKind::Grid, 8), ConfigError);
}

TEST_CASE("ring and complete topologies") {
  Topology ring = build_topology(TopologyKind::Ring, 4);
  CHECK(ring.edges().size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(ring.degree(i) == 2);
  CHECK_THROWS_AS(build_topology(TopologyKind::Ring, 2), ConfigError);

  Topology complete = build_topology(TopologyKind::Complete, 5);
  CHECK(complete.edges().size() == 10);
}

TEST_CASE("custom topology rejects disconnected edge lists and self-loops") {
  CHECK_THROWS_AS(build_topology(TopologyKind::Custom, 4, {{0, 1}, {2, 3}}), ConfigError);
  CHECK_THROWS_AS(build_topology(TopologyKind::Custom, 3, {{0, 0}, {0, 1}, {1, 2}}),
                  ConfigError);
  Topology t = build_topology(TopologyKind::Custom, 4, {{0, 1}, {1, 2}, {2, 3}});
  CHECK(t.degree(1) == 2);
}

TEST_CASE("metropolis weights on tiny graphs") {
  Topology path2 = build_topology(TopologyKind::Complete, 2);
  MixingMatrix w2 = metropolis_weights(path2);
  CHECK(w2(0, 1) == doctest::Approx(0.5));
  CHECK(w2(0, 0) == doctest::Approx(0.5));

  Topology ring3 = build_topology(TopologyKind::Ring, 3);
  MixingMatrix w3 = metropolis_weights(ring3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(w3(i, j) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("metropolis grid weights: row sums, spectrum vs jacobi oracle") {
  Topology grid = build_topology(TopologyKind::Grid, 9);
  MixingMatrix w = metropolis_weights(grid);
  for (int i = 0; i < 9; ++i) {
    double row = 0.0;
    for (int j = 0; j < 9; ++j) {
      row += w(i, j);
      CHECK(w(i, j) == w(j, i));
      CHECK(w(i, j) >= 0.0);
      if (i != j && w(i, j) > 0.0) CHECK(grid.has_edge(i, j));
    }
    CHECK(std::abs(row - 1.0) <= 1e-15);
  }
  const auto ev = oracles::jacobi_eigenvalues(w.w);
  CHECK(w.lambda2 == doctest::Approx(ev[7]).epsilon(1e-10));
  CHECK(w.lambda_min == doctest::Approx(ev[0]).epsilon(1e-10));
  CHECK(w.lambda2 < 1.0);
  for (double v : ev) {
    CHECK(v >= -1.0 - 1e-12);
    CHECK(v <= 1.0 + 1e-12);
  }
}

TEST_CASE("spectral quantities on closed forms") {
  const int n = 6;
  Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  auto [l2u, lminu] = spectral_quantities(uniform);
  CHECK(l2u == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(lminu == doctest::Approx(0.0).epsilon(1e-12));

  auto [l2i, lmini] = spectral_quantities(Eigen::MatrixXd::Identity(4, 4));
  CHECK(l2i == doctest::Approx(1.0));  // no mixing at all
  CHECK(lmini == doctest::Approx(1.0));

  Eigen::MatrixXd half(2, 2);
  half << 0.5, 0.5, 0.5, 0.5;
  auto [l2h, lminh] = spectral_quantities(half);
  CHECK(l2h == doctest::Approx(0.0));
  CHECK(lminh == doctest::Approx(0.0));

  Eigen::MatrixXd asym(2, 2);
  asym << 0.5, 0.4, 0.5, 0.6;
  CHECK_THROWS(spectral_quantities(asym));
}

TEST_CASE("double-step transform: identity, plug-in, spectral map") {
  Topology grid = build_topology(TopologyKind::Grid, 9);
  MixingMatrix w = metropolis_weights(grid);

  MixingMatrix same = double_step_transform(w, 0.2, 0.2);
  CHECK((same.w - w.w).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd half(2, 2);
  half << 0.5, 0.5, 0.5, 0.5;
  MixingMatrix w2 = make_mixing_matrix(half);
  MixingMatrix tilted = double_step_transform(w2, 1.0, 0.5);
  CHECK(tilted(0, 0) == doctest::Approx(0.75));
  CHECK(tilted(0, 1) == doctest::Approx(0.25));

  const double ratio = 0.37;
  MixingMatrix wt = double_step_transform(w, 1.0, ratio);
  const auto ev = oracles::jacobi_eigenvalues(wt.w);
  CHECK(std::abs(wt.lambda2 - (1.0 - ratio * (1.0 - w.lambda2))) < 1e-10);
  CHECK(std::abs(ev[8 - 1] - (1.0 - ratio * (1.0 - w.lambda2))) < 1e-10);

  CHECK_THROWS_AS(double_step_transform(w, 0.1, 0.2), ConfigError);
}

TEST_CASE("double-step transform preserves symmetry/stochasticity for random ratios") {
  RngStream rng(99);
  Topology grid = build_topology(TopologyKind::Grid, 16);
  MixingMatrix w = metropolis_weights(grid);
  for (int trial = 0; trial < 20; ++trial) {
    const double alpha = 0.05 + rng.uniform01();
    const double beta = alpha * (0.05 + 0.95 * rng.uniform01());
    MixingMatrix wt = double_step_transform(w, alpha, beta);
    for (int i = 0; i < 16; ++i) {
      double row = 0.0;
      for (int j = 0; j < 16; ++j) {
        CHECK(wt(i, j) == wt(j, i));
        row += wt(i, j);
      }
      CHECK(std::abs(row - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("consensus contraction on mean-zero vectors") {
  RngStream rng(7);
  for (TopologyKind kind : {TopologyKind::Grid, TopologyKind::Ring}) {
    const int n = kind == TopologyKind::Grid ? 9 : 8;
    MixingMatrix w = metropolis_weights(build_topology(kind, n));
    if (w.lambda_min < -w.lambda2) continue;  // contraction needs |spectrum| <= lambda2
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd x(n);
      for (int i = 0; i < n; ++i) x(i) = rng.normal();
      x.array() -= x.mean();
      CHECK((w.w * x).norm() <= w.lambda2 * x.norm() + 1e-10);
    }
  }
}

TEST_CASE("random connected graphs keep all mixing invariants") {
  RngStream rng(1234);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_below(10));
    std::vector<std::pair<int, int>> edges;
    for (int v = 1; v < n; ++v)
      edges.push_back({static_cast<int>(rng.uniform_below(v)), v});  // random spanning tree
    for (int extra = 0; extra < n; ++extra) {
      const int a = static_cast<int>(rng.uniform_below(n));
      const int b = static_cast<int>(rng.uniform_below(n));
      if (a != b) edges.push_back({std::min(a, b), std::max(a, b)});
    }
    Topology t = build_topology(TopologyKind::Custom, n, edges);
    MixingMatrix w = metropolis_weights(t);
    CHECK(w.lambda2 < 1.0);
    const auto ev = oracles::jacobi_eigenvalues(w.w);
    CHECK(ev.back() == doctest::Approx(1.0));
    for (double v : ev) CHECK(std::abs(v) <= 1.0 + 1e-12);
  }
}
