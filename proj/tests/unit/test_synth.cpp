#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "mrscan/errors.hpp"
#include "mrscan/synth.hpp"

using namespace mrscan;

TEST(GenCoords, CircleIsEquallySpaced) {
  DgpSpec spec;
  spec.n_nodes = 4;
  Rng rng(1);
  auto truth = gen_coords(spec, rng);
  const double pi = std::numbers::pi;
  for (int i = 0; i < 4; ++i) {
    const auto x = truth.coord(i, 0);
    EXPECT_NEAR(std::hypot(x[0], x[1]), 1.0, 1e-15);
    EXPECT_NEAR(x[0], std::cos(i * pi / 2), 1e-15);
    EXPECT_NEAR(x[1], std::sin(i * pi / 2), 1e-15);
  }
  EXPECT_EQ(truth.alpha(0, 0), 5.0);
}

TEST(GenCoords, ZeroInnovationKeepsCoordinates) {
  DgpSpec spec = dgp_preset("multilayer-temporal");
  spec.sigma2_eps = 0.0;
  spec.n_nodes = 10;
  Rng rng(2);
  auto truth = gen_coords(spec, rng);
  for (int t = 1; t < 3; ++t)
    for (int i = 0; i < 10; ++i)
      for (int k = 0; k < 2; ++k) EXPECT_EQ(truth.coord(i, t)[k], truth.coord(i, 0)[k]);
}

TEST(GenCoords, RandomPriorIsCentred) {
  DgpSpec spec = dgp_preset("random-bernoulli");
  spec.n_nodes = 10000;
  Rng rng(3);
  auto truth = gen_coords(spec, rng);
  for (int k = 0; k < 2; ++k) {
    double m = 0.0;
    for (int i = 0; i < spec.n_nodes; ++i) m += truth.coord(i, 0)[k];
    EXPECT_LT(std::abs(m / spec.n_nodes), 3.0 / std::sqrt(10000.0));
  }
}

TEST(GenCoords, CircleNeedsTwoDimensions) {
  DgpSpec spec;
  spec.dim = 3;
  Rng rng(1);
  EXPECT_THROW(gen_coords(spec, rng), ConfigError);
}

TEST(SimulateWeights, CoincidentBernoulliNodesAlmostAlwaysLink) {
  // Two nodes at the same point: P(edge) = 1 / (1 + e^-5).
  DgpSpec spec = dgp_preset("random-bernoulli");
  spec.n_nodes = 2;
  LatentState truth(2, 2, 1, 1);
  truth.alpha(0, 0) = 5.0;
  Rng rng(4);
  const int n = 100000;
  int links = 0;
  for (int k = 0; k < n; ++k) links += simulate_weights(truth, spec, rng).n_edges();
  const double p = 1.0 / (1.0 + std::exp(-5.0));
  EXPECT_NEAR(p, 0.99331, 1e-5);
  EXPECT_NEAR(links / double(n), p, 4.0 * std::sqrt(p * (1 - p) / n));
}

TEST(SimulateWeights, VeryNegativeInterceptGivesEmptyNetwork) {
  DgpSpec spec = dgp_preset("random-bernoulli");
  spec.n_nodes = 50;
  spec.alpha = {-50.0};
  Rng rng(5);
  auto truth = gen_coords(spec, rng);
  EXPECT_EQ(simulate_weights(truth, spec, rng).n_edges(), 0u);
}

TEST(SimulateWeights, PoissonMeanAtCoincidentNodes) {
  DgpSpec spec;
  spec.n_nodes = 2;
  LatentState truth(2, 2, 1, 1);
  truth.alpha(0, 0) = 5.0;
  Rng rng(6);
  double sum = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) sum += simulate_weights(truth, spec, rng).weight(0, 1, 0, 0);
  EXPECT_NEAR(sum / n, std::exp(5.0), 0.01 * std::exp(5.0));
}

// Rotating the layout leaves the weight distribution unchanged, so the mean
// total weight agrees between the two layouts.
TEST(SimulateWeights, DependsOnlyOnDistances) {
  DgpSpec spec = dgp_preset("random-bernoulli");
  spec.n_nodes = 6;
  spec.alpha = {0.5};
  Rng rng(7);
  auto truth = gen_coords(spec, rng);
  LatentState rotated = truth;
  const double th = 0.9;
  for (int i = 0; i < 6; ++i) {
    const auto x = truth.coord(i, 0);
    rotated.coord(i, 0)[0] = std::cos(th) * x[0] - std::sin(th) * x[1];
    rotated.coord(i, 0)[1] = std::sin(th) * x[0] + std::cos(th) * x[1];
  }
  const int n = 10000;
  std::vector<double> a(15, 0.0), b(15, 0.0);
  for (int k = 0; k < n; ++k) {
    auto na = simulate_weights(truth, spec, rng);
    auto nb = simulate_weights(rotated, spec, rng);
    int p = 0;
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j, ++p) {
        a[p] += na.weight(i, j, 0, 0);
        b[p] += nb.weight(i, j, 0, 0);
      }
  }
  for (int p = 0; p < 15; ++p) EXPECT_NEAR(a[p] / n, b[p] / n, 4.0 * std::sqrt(0.25 * 2.0 / n));
}

TEST(Presets, ShapesAndValidity) {
  for (const auto& name : dgp_preset_names()) {
    DgpSpec spec = dgp_preset(name);
    spec.n_nodes = 20;
    auto data = generate(spec);
    EXPECT_EQ(data.network.n_nodes(), 20);
    EXPECT_NO_THROW(data.truth.check_compatible(data.network)) << name;
  }
  auto mt = dgp_preset("multilayer-temporal");
  EXPECT_EQ(mt.n_layers, 2);
  EXPECT_EQ(mt.n_times, 3);
  EXPECT_EQ(mt.alpha_at(0, 2), 6.0);
  EXPECT_EQ(mt.alpha_at(1, 0), 3.0);
  EXPECT_EQ(mt.family_at(1).kind, FamilyKind::BernoulliLogit);
  EXPECT_THROW(dgp_preset("nope"), ConfigError);
}

TEST(Generate, DeterministicGivenSeed) {
  DgpSpec spec;
  spec.n_nodes = 30;
  auto a = generate(spec), b = generate(spec);
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(a.network.n_edges(), b.network.n_edges());
  for (int i = 0; i < 30; ++i)
    for (int j = i + 1; j < 30; ++j) EXPECT_EQ(a.network.weight(i, j, 0, 0), b.network.weight(i, j, 0, 0));
}

TEST(Truth, RoundTrip) {
  DgpSpec spec = dgp_preset("multilayer-temporal");
  spec.n_nodes = 7;
  auto data = generate(spec);
  auto path = std::filesystem::temp_directory_path() / "mrscan_truth.csv";
  save_truth(data.truth, path);
  EXPECT_EQ(load_truth(path), data.truth);
}
