#include <gtest/gtest.h>

#include <cmath>

#include "mrscan/errors.hpp"
#include "mrscan/proposals.hpp"

using namespace mrscan;

namespace {

AmhSettings settings(AmhVariant v) {
  AmhSettings s;
  s.variant = v;
  return s;
}

}  // namespace

TEST(Propose, GlobalZeroScaleReturnsCurrent) {
  ProposalState ps(settings(AmhVariant::Global), 2);
  ps.set_scale(0.0);
  Rng rng(1);
  Eigen::VectorXd x(2);
  x << 0.3, -1.2;
  for (int k = 0; k < 10; ++k) EXPECT_EQ(ps.propose(x, rng), x);
}

TEST(Propose, HaarioStartsWithFixedComponent) {
  ProposalState ps(settings(AmhVariant::Haario), 2);
  ASSERT_EQ(ps.step_count(), 1);
  const Eigen::MatrixXd expected = Eigen::MatrixXd::Identity(2, 2) * (0.01 / 2.0);
  EXPECT_TRUE(ps.proposal_cov(false).isApprox(expected, 1e-15));
}

TEST(Propose, GlobalEmpiricalCovariance) {
  ProposalState ps(settings(AmhVariant::Global), 2);
  ps.set_scale(1.0);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
  cov(0, 0) = 1.0;
  cov(1, 1) = 4.0;
  ps.set_cov(cov);
  Rng rng(123);
  const Eigen::VectorXd center = Eigen::VectorXd::Constant(2, 2.0);
  const int n = 100000;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  Eigen::Matrix2d sq = Eigen::Matrix2d::Zero();
  for (int k = 0; k < n; ++k) {
    const Eigen::Vector2d d = ps.propose(center, rng) - center;
    sum += d;
    sq += d * d.transpose();
  }
  const Eigen::Vector2d mean = sum / n;
  const Eigen::Matrix2d emp = sq / n - mean * mean.transpose();
  EXPECT_NEAR(emp(0, 0), 1.0, 0.05);
  EXPECT_NEAR(emp(1, 1), 4.0, 0.2);
  EXPECT_NEAR(emp(0, 1), 0.0, 0.05);
}

TEST(Propose, IncrementalUsesLogScale) {
  ProposalState ps(settings(AmhVariant::Incremental), 3);
  ps.set_scale(std::log(0.5));
  EXPECT_TRUE(ps.proposal_cov(false).isApprox(Eigen::MatrixXd::Identity(3, 3) * 0.25, 1e-14));
}

TEST(Propose, FallsBackOnIndefiniteCovariance) {
  ProposalState ps(settings(AmhVariant::Global), 2);
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  ps.set_cov(bad);
  ps.set_step_count(50);
  Rng rng(4);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd y = ps.propose(x, rng);
  EXPECT_TRUE(y.allFinite());
  EXPECT_EQ(ps.fallback_count(), 1);
}

TEST(Adapt, GlobalScaleExample) {
  auto s = settings(AmhVariant::Global);
  s.psi = 0.5;
  ProposalState ps(s, 2);
  ps.set_scale(1.0);
  ps.set_step_count(100);  // gamma = 100^-0.5 = 0.1
  ASSERT_NEAR(ps.gamma(), 0.1, 1e-15);
  ps.adapt(1.0, Eigen::VectorXd::Zero(2));
  EXPECT_NEAR(ps.scale(), std::exp(0.1 * (1.0 - 0.234)), 1e-14);
  EXPECT_NEAR(ps.scale(), 1.07961, 1e-5);
  EXPECT_EQ(ps.step_count(), 101);
}

TEST(Adapt, GlobalMeanAndCovarianceRecursion) {
  ProposalState ps(settings(AmhVariant::Global), 2);
  ps.set_step_count(4);
  Eigen::VectorXd mu(2);
  mu << 1.0, -1.0;
  ps.set_mean(mu);
  Eigen::MatrixXd sigma(2, 2);
  sigma << 2.0, 0.5, 0.5, 1.0;
  ps.set_cov(sigma);
  Eigen::VectorXd theta(2);
  theta << 0.0, 1.0;
  const double g = std::pow(4.0, -0.6);
  const Eigen::VectorXd diff = theta - mu;
  const Eigen::VectorXd mu_new = mu + g * diff;
  const Eigen::MatrixXd sigma_new = sigma + g * (diff * diff.transpose() - sigma);
  ps.adapt(0.5, theta);
  EXPECT_TRUE(ps.mean().isApprox(mu_new, 1e-14));
  EXPECT_TRUE(ps.cov().isApprox(sigma_new, 1e-14));
}

TEST(Adapt, GlobalAtTargetKeepsScale) {
  ProposalState ps(settings(AmhVariant::Global), 2);
  const double start = ps.scale();
  Rng rng(2);
  for (int h = 0; h < 1000; ++h) {
    Eigen::VectorXd v(2);
    v << standard_normal(rng), standard_normal(rng);
    ps.adapt(0.234, v);
  }
  EXPECT_DOUBLE_EQ(ps.scale(), start);
}

TEST(Adapt, GlobalDiminishingAndSymmetric) {
  ProposalState ps(settings(AmhVariant::Global), 3);
  Rng rng(8);
  for (int h = 0; h < 5000; ++h) {
    const double before = std::log(ps.scale());
    const double g = ps.gamma();
    Eigen::VectorXd v(3);
    v << standard_normal(rng), 3.0 * standard_normal(rng), standard_normal(rng) - 1.0;
    ps.adapt(uniform01(rng), v);
    EXPECT_LE(std::abs(std::log(ps.scale()) - before), g + 1e-15);
    ASSERT_EQ(ps.cov(), ps.cov().transpose());
    EXPECT_TRUE((ps.cov().diagonal().array() >= 0.0).all());
  }
}

TEST(Adapt, IncrementalDecreasesAtBatchBoundary) {
  auto s = settings(AmhVariant::Incremental);
  s.v = 50;
  ProposalState ps(s, 2);
  ps.set_scale(0.0);
  ps.set_step_count(50);
  ps.adapt(0.1, Eigen::VectorXd::Zero(2));
  EXPECT_DOUBLE_EQ(ps.scale(), -1.0);
  // Off-boundary steps leave the scale alone.
  for (int k = 0; k < 49; ++k) ps.adapt(0.9, Eigen::VectorXd::Zero(2));
  EXPECT_DOUBLE_EQ(ps.scale(), -1.0);
  ps.adapt(0.9, Eigen::VectorXd::Zero(2));  // h = 100: second batch
  EXPECT_DOUBLE_EQ(ps.scale(), -0.5);
}

TEST(Adapt, HaarioTracksEmpiricalCovariance) {
  ProposalState ps(settings(AmhVariant::Haario), 2);
  Rng rng(31);
  std::vector<Eigen::Vector2d> seen;
  for (int k = 0; k < 400; ++k) {
    Eigen::Vector2d v;
    v << standard_normal(rng), 0.5 * standard_normal(rng) + v(0);
    seen.push_back(v);
    ps.adapt(0.3, v);
  }
  // Two-pass oracle.
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& v : seen) mean += v;
  mean /= static_cast<double>(seen.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& v : seen) cov += (v - mean) * (v - mean).transpose();
  cov /= static_cast<double>(seen.size() - 1);
  cov.diagonal().array() += 1e-6;
  EXPECT_TRUE(ps.cov().isApprox(cov, 1e-10));
  EXPECT_TRUE(ps.proposal_cov(false).isApprox((2.38 / 2.0) * cov, 1e-10));
  EXPECT_TRUE(ps.proposal_cov(true).isApprox(Eigen::Matrix2d::Identity() * 0.005, 1e-15));
}

TEST(AmhSettings, Validation) {
  AmhSettings s;
  EXPECT_NO_THROW(s.validate());
  s.psi = 1.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = AmhSettings{};
  s.beta = 1.5;
  EXPECT_THROW(s.validate(), ConfigError);
  s = AmhSettings{};
  s.v = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = AmhSettings{};
  s.delta0 = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_EQ(parse_amh_variant("haario"), AmhVariant::Haario);
  EXPECT_THROW(parse_amh_variant("nope"), ConfigError);
}
