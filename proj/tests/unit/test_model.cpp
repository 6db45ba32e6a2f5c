#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mrscan/errors.hpp"
#include "mrscan/model.hpp"
#include "mrscan/network.hpp"
#include "oracle.hpp"

using namespace mrscan;
using oracle::oracle_log_joint;

namespace {

const WeightFamily kPoisson{FamilyKind::PoissonLog, {}};
const WeightFamily kBernoulli{FamilyKind::BernoulliLogit, {}};

struct Fixture {
  LatentState state;
  NetworkTensor net;
};

Fixture random_fixture(int n, int d, int times, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 0.7);
  LatentState s(d, n, times, 2);
  for (int t = 0; t < times; ++t)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < d; ++k) s.coord(i, t)[k] = z(rng);
  for (int t = 0; t < times; ++t) {
    s.alpha(0, t) = 1.0 + 0.3 * t;
    s.alpha(1, t) = -0.5 + 0.2 * t;
  }
  NetworkBuilder b(n, {times, times}, {kPoisson, kBernoulli});
  std::poisson_distribution<int> pois(1.2);
  std::bernoulli_distribution bern(0.4);
  for (int t = 0; t < times; ++t)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        b.add(i, j, 0, t, pois(rng));
        b.add(i, j, 1, t, bern(rng) ? 1.0 : 0.0);
      }
  return {std::move(s), std::move(b).build()};
}

}  // namespace

TEST(EtaOf, Examples) {
  const std::vector<double> o{0.0, 0.0}, e1{1.0, 0.0}, e11{1.0, 1.0};
  EXPECT_EQ(eta_of(5.0, o, o, Distance::SquaredEuclidean), 5.0);
  EXPECT_EQ(eta_of(5.0, o, e1, Distance::SquaredEuclidean), 4.0);
  EXPECT_NEAR(eta_of(5.0, o, e11, Distance::Euclidean), 5.0 - std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(eta_of(5.0, o, e11, Distance::Euclidean), 3.5858, 1e-4);
  const std::vector<double> three{1.0, 2.0, 3.0};
  EXPECT_THROW(eta_of(5.0, o, three, Distance::Euclidean), std::invalid_argument);
}

TEST(EdgeLoglik, Examples) {
  EXPECT_NEAR(edge_loglik(1.0, 0.0, kBernoulli), std::log(0.5), 1e-15);
  EXPECT_NEAR(edge_loglik(0.0, 0.0, kPoisson), -1.0, 1e-15);
  EXPECT_NEAR(edge_loglik(2.0, 1.0, kPoisson), 2.0 - std::exp(1.0) - std::log(2.0), 1e-14);
  EXPECT_NEAR(edge_loglik(2.0, 1.0, kPoisson), -1.411429, 1e-6);
}

TEST(EdgeLoglik, RejectsInadmissible) {
  EXPECT_THROW(edge_loglik(2.0, 0.0, kBernoulli), DataError);
  EXPECT_THROW(edge_loglik(0.5, 0.0, kPoisson), DataError);
}

TEST(EdgeLoglik, BernoulliProbabilitiesSumToOne) {
  for (double eta = -30.0; eta <= 30.0; eta += 0.37) {
    const double s = std::exp(edge_loglik(1.0, eta, kBernoulli)) +
                     std::exp(edge_loglik(0.0, eta, kBernoulli));
    EXPECT_NEAR(s, 1.0, 1e-12) << "eta=" << eta;
  }
}

TEST(EdgeLoglik, FiniteForLargeEta) {
  for (double eta : {-700.0, -350.0, 0.0, 350.0, 700.0}) {
    EXPECT_TRUE(std::isfinite(edge_loglik(1.0, eta, kBernoulli))) << eta;
    EXPECT_TRUE(std::isfinite(edge_loglik(0.0, eta, kBernoulli))) << eta;
    EXPECT_TRUE(std::isfinite(edge_loglik(3.0, eta, kPoisson))) << eta;
    EXPECT_TRUE(std::isfinite(softplus(eta))) << eta;
  }
  EXPECT_NEAR(softplus(700.0), 700.0, 1e-12);
}

TEST(NodeConditional, TwoNodeBernoulliExample) {
  NetworkBuilder b(2, {1}, {kBernoulli});
  b.add(0, 1, 0, 0, 1.0);
  auto net = std::move(b).build();
  LatentState s(2, 2, 1, 1);
  PriorSpec prior;
  const std::vector<double> zero{0.0, 0.0}, shifted{1.0, 0.0};
  const double at_zero = node_conditional_logpost(0, 0, zero, s, net, prior);
  const double at_shift = node_conditional_logpost(0, 0, shifted, s, net, prior);
  auto log_sigmoid = [](double x) { return -std::log1p(std::exp(-x)); };
  const double expected = (log_sigmoid(-1.0) - log_sigmoid(0.0)) - 0.5;
  EXPECT_NEAR(at_shift - at_zero, expected, 1e-12);
  EXPECT_NEAR(at_shift - at_zero, (-1.313262 + 0.693147) - 0.5, 1e-6);
}

TEST(NodeConditional, PairMatchesSingleEvaluations) {
  auto f = random_fixture(5, 2, 3, 11);
  PriorSpec prior;
  const std::vector<double> cand{0.3, -0.8};
  for (int t = 0; t < 3; ++t) {
    auto pair = node_conditional_logpost_pair(2, t, cand, f.state, f.net, prior);
    EXPECT_DOUBLE_EQ(pair.candidate, node_conditional_logpost(2, t, cand, f.state, f.net, prior));
    EXPECT_DOUBLE_EQ(pair.current,
                     node_conditional_logpost(2, t, f.state.coord(2, t), f.state, f.net, prior));
  }
}

// Differences of the conditional must equal differences of the full joint
// when only x_{it} moves.
TEST(NodeConditional, MatchesFullJointDifferences) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0.0, 0.5);
  for (auto distance : {Distance::SquaredEuclidean, Distance::Euclidean})
    for (int n : {3, 4, 5}) {
      auto f = random_fixture(n, 2, 3, 100 + n);
      PriorSpec prior;
      prior.distance = distance;
      prior.sigma2 = 1.3;
      prior.sigma2_eps = 0.2;
      for (int i = 0; i < n; ++i)
        for (int t = 0; t < 3; ++t) {
          std::vector<double> cand{f.state.coord(i, t)[0] + z(rng), f.state.coord(i, t)[1] + z(rng)};
          LatentState moved = f.state;
          std::copy(cand.begin(), cand.end(), moved.coord(i, t).begin());
          const double joint_diff =
              oracle_log_joint(moved, f.net, prior) - oracle_log_joint(f.state, f.net, prior);
          const auto pair = node_conditional_logpost_pair(i, t, cand, f.state, f.net, prior);
          EXPECT_NEAR(pair.candidate - pair.current, joint_diff, 1e-9)
              << "n=" << n << " i=" << i << " t=" << t;
        }
    }
}

// The middle of three slices is linked to both neighbours in time.
TEST(NodeConditional, MiddleSliceHasTwoIncrementTerms) {
  NetworkBuilder b(2, {3}, {kPoisson});
  auto net = std::move(b).build();
  PriorSpec prior;
  prior.sigma2_eps = 0.5;
  LatentState s(1, 2, 3, 1);
  s.alpha(0, 0) = s.alpha(0, 1) = s.alpha(0, 2) = -50.0;  // likelihood is flat
  s.coord(0, 0)[0] = 1.0;
  s.coord(0, 2)[0] = -2.0;
  const std::vector<double> x{0.5};
  const double got = node_conditional_logpost(0, 1, x, s, net, prior);
  const double rw = -0.5 * (0.5 - 1.0) * (0.5 - 1.0) / 0.5 - 0.5 * (-2.0 - 0.5) * (-2.0 - 0.5) / 0.5;
  // Candidates +0.5 and -0.5 sit at equal distance from node 2 (at 0), so the
  // likelihood cancels and only the two increment terms remain.
  const std::vector<double> xm{-0.5};
  const double got_m = node_conditional_logpost(0, 1, xm, s, net, prior);
  const double rw_m = -0.5 * (-0.5 - 1.0) * (-0.5 - 1.0) / 0.5 - 0.5 * (-2.0 + 0.5) * (-2.0 + 0.5) / 0.5;
  EXPECT_NEAR(got - got_m, rw - rw_m, 1e-12);
}

TEST(NodeConditional, RejectsBadIndex) {
  auto f = random_fixture(3, 2, 1, 1);
  PriorSpec prior;
  const std::vector<double> cand{0.0, 0.0};
  EXPECT_THROW(node_conditional_logpost(3, 0, cand, f.state, f.net, prior), std::out_of_range);
  EXPECT_THROW(node_conditional_logpost(0, 1, cand, f.state, f.net, prior), std::out_of_range);
}

TEST(AlphaConditional, SinglePairByHand) {
  NetworkBuilder b(2, {1}, {kPoisson});
  b.add(0, 1, 0, 0, 2.0);
  auto net = std::move(b).build();
  LatentState s(2, 2, 1, 1);
  s.coord(1, 0)[0] = 1.0;
  PriorSpec prior;
  const double a = 1.7;
  const double eta = a - 1.0;
  const double expected = 2.0 * eta - std::exp(eta) - 0.5 * a * a / 100.0;
  // Constants (log y!, Gaussian normaliser) may be dropped, so compare a difference.
  const double a2 = 0.4, eta2 = a2 - 1.0;
  const double expected2 = 2.0 * eta2 - std::exp(eta2) - 0.5 * a2 * a2 / 100.0;
  EXPECT_NEAR(alpha_conditional_logpost(0, 0, a, s, net, prior) -
                  alpha_conditional_logpost(0, 0, a2, s, net, prior),
              expected - expected2, 1e-12);
}

TEST(AlphaConditional, MatchesFullJointDifferences) {
  for (auto distance : {Distance::SquaredEuclidean, Distance::Euclidean}) {
    auto f = random_fixture(4, 2, 2, 42);
    PriorSpec prior;
    prior.distance = distance;
    for (int r = 0; r < 2; ++r)
      for (int t = 0; t < 2; ++t) {
        const double cand = f.state.alpha(r, t) + 0.37;
        LatentState moved = f.state;
        moved.alpha(r, t) = cand;
        const double joint_diff =
            oracle_log_joint(moved, f.net, prior) - oracle_log_joint(f.state, f.net, prior);
        auto pair = alpha_conditional_logpost_pair(r, t, cand, f.state, f.net, prior);
        EXPECT_NEAR(pair.candidate - pair.current, joint_diff, 1e-9);
        EXPECT_DOUBLE_EQ(pair.candidate, alpha_conditional_logpost(r, t, cand, f.state, f.net, prior));
      }
  }
}

TEST(AlphaConditional, EmptyBernoulliNetworkDecreasesAboveMean) {
  auto net = NetworkBuilder(5, {1}, {kBernoulli}).build();
  LatentState s(2, 5, 1, 1);
  PriorSpec prior;
  prior.alpha_prior_var = 1e6;
  double prev = alpha_conditional_logpost(0, 0, 0.01, s, net, prior);
  for (double a = 0.5; a < 10.0; a += 0.5) {
    const double cur = alpha_conditional_logpost(0, 0, a, s, net, prior);
    EXPECT_LT(cur, prev);
    prev = cur;
  }
}

TEST(Recenter, Examples) {
  LatentState s(2, 2, 1, 1);
  s.coord(1, 0)[0] = 2.0;
  recenter(s);
  EXPECT_EQ(s.coord(0, 0)[0], -1.0);
  EXPECT_EQ(s.coord(0, 0)[1], 0.0);
  EXPECT_EQ(s.coord(1, 0)[0], 1.0);
  const LatentState again = recentered(s);
  EXPECT_EQ(again, s);
}

TEST(Recenter, PreservesDistancesAndEta) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(0.0, 3.0);
  for (int rep = 0; rep < 20; ++rep) {
    LatentState s(3, 7, 2, 1);
    for (int t = 0; t < 2; ++t)
      for (int i = 0; i < 7; ++i)
        for (int k = 0; k < 3; ++k) s.coord(i, t)[k] = z(rng) + 5.0;
    s.alpha(0, 0) = 2.0;
    s.alpha(0, 1) = 1.0;
    const LatentState c = recentered(s);
    for (int t = 0; t < 2; ++t) {
      double mean0 = 0.0;
      for (int i = 0; i < 7; ++i) mean0 += c.coord(i, t)[0];
      EXPECT_NEAR(mean0 / 7.0, 0.0, 1e-12);
      EXPECT_EQ(c.alpha(0, t), s.alpha(0, t));
      for (int i = 0; i < 7; ++i)
        for (int j = i + 1; j < 7; ++j)
          for (auto dist : {Distance::Euclidean, Distance::SquaredEuclidean})
            EXPECT_NEAR(eta_of(s.alpha(0, t), s.coord(i, t), s.coord(j, t), dist),
                        eta_of(c.alpha(0, t), c.coord(i, t), c.coord(j, t), dist), 1e-12);
    }
  }
}

TEST(LatentState, CompatibilityAndFiniteness) {
  auto f = random_fixture(4, 2, 2, 3);
  EXPECT_NO_THROW(f.state.check_compatible(f.net));
  LatentState wrong(2, 5, 2, 2);
  EXPECT_THROW(wrong.check_compatible(f.net), DataError);
  EXPECT_TRUE(f.state.all_finite());
  f.state.coord(0, 0)[0] = std::nan("");
  EXPECT_FALSE(f.state.all_finite());
}

TEST(PriorSpec, Validation) {
  PriorSpec p;
  EXPECT_NO_THROW(p.validate());
  p.sigma2 = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = PriorSpec{};
  p.alpha_prior_var = -1.0;
  EXPECT_THROW(p.validate(), ConfigError);
}
