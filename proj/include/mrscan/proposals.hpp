#pragma once

#include <Eigen/Dense>
#include <string>

#include "mrscan/random.hpp"

namespace mrscan {

enum class AmhVariant { Haario, Incremental, Global };

std::string to_string(AmhVariant variant);
AmhVariant parse_amh_variant(const std::string& name);

struct AmhSettings {
  AmhVariant variant = AmhVariant::Global;
  double psi = 0.6;      // step-size decay exponent, gamma_h = h^-psi
  double beta = 0.05;    // Haario: weight of the fixed component
  int v = 50;            // Incremental: adaptation period
  double delta0 = 0.1;   // initial scale
  double target = 0.234; // target acceptance rate

  // Throws ConfigError on out-of-range settings.
  void validate() const;
};

// Adaptive random-walk Metropolis proposal for one target (a node at one
// time, or one intercept). Meaning of `scale()` by variant:
//   Global      - multiplier delta of the adapted covariance, N(x, delta * Sigma)
//   Incremental - log standard deviation delta, N(x, exp(2 delta) I)
//   Haario      - unused; the proposal mixes N(x, 0.01/d I) and N(x, 2.38/d Sigma)
class ProposalState {
 public:
  ProposalState(const AmhSettings& settings, int dim);

  Eigen::VectorXd propose(const Eigen::VectorXd& current, Rng& rng);

  // Records one MH step: `accept_prob` is min(1, ratio) of that step and
  // `new_value` the state the chain moved to (the old value on rejection).
  void adapt(double accept_prob, const Eigen::VectorXd& new_value);

  AmhVariant variant() const { return settings_.variant; }
  int dim() const { return static_cast<int>(mean_.size()); }
  double scale() const { return scale_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  long step_count() const { return step_; }
  long fallback_count() const { return fallbacks_; }
  const AmhSettings& settings() const { return settings_; }

  // Overrides for tests and warm starts.
  void set_scale(double scale) { scale_ = scale; }
  void set_cov(const Eigen::MatrixXd& cov);
  void set_mean(const Eigen::VectorXd& mean) { mean_ = mean; }
  void set_step_count(long h) { step_ = h; }

  // Covariance the next call to propose() would use for the Gaussian it
  // draws from, given the (possibly random) Haario component choice.
  Eigen::MatrixXd proposal_cov(bool haario_fixed_component) const;

  // Gain of the current step: h^-psi.
  double gamma() const;

 private:
  Eigen::VectorXd draw_gaussian(const Eigen::VectorXd& center, const Eigen::MatrixXd& cov,
                                Rng& rng);
  Eigen::MatrixXd fixed_cov() const;

  AmhSettings settings_;
  double scale_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  long step_ = 1;
  long fallbacks_ = 0;

  // Haario: running moments of the visited values.
  long n_seen_ = 0;
  Eigen::VectorXd running_mean_;
  Eigen::MatrixXd running_m2_;
};

}  // namespace mrscan
