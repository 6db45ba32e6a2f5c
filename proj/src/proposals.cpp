#include "mrscan/proposals.hpp"

#include <cmath>

#include "mrscan/errors.hpp"
#include "mrscan/log.hpp"

namespace mrscan {

namespace {
constexpr double kHaarioJitter = 1e-6;
constexpr double kFixedSd = 0.1;
constexpr double kHaarioScale = 2.38;
}  // namespace

std::string to_string(AmhVariant variant) {
  switch (variant) {
    case AmhVariant::Haario: return "haario";
    case AmhVariant::Incremental: return "incremental";
    case AmhVariant::Global: return "global";
  }
  return "global";
}

AmhVariant parse_amh_variant(const std::string& name) {
  if (name == "haario") return AmhVariant::Haario;
  if (name == "incremental") return AmhVariant::Incremental;
  if (name == "global") return AmhVariant::Global;
  throw ConfigError("unknown amh.variant '" + name + "' (expected haario, incremental or global)");
}

void AmhSettings::validate() const {
  if (!(psi > 0.0 && psi < 1.0)) throw ConfigError("amh.psi must lie in (0, 1)");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("amh.beta must lie in [0, 1]");
  if (v < 1) throw ConfigError("amh.v must be a positive integer");
  if (!(target > 0.0 && target < 1.0)) throw ConfigError("amh.target must lie in (0, 1)");
  if (!std::isfinite(delta0)) throw ConfigError("amh.delta0 must be finite");
  if (variant == AmhVariant::Global && !(delta0 > 0.0))
    throw ConfigError("amh.delta0 must be positive for the global variant");
}

ProposalState::ProposalState(const AmhSettings& settings, int dim)
    : settings_(settings),
      scale_(settings.delta0),
      mean_(Eigen::VectorXd::Zero(dim)),
      cov_(Eigen::MatrixXd::Identity(dim, dim)),
      running_mean_(Eigen::VectorXd::Zero(dim)),
      running_m2_(Eigen::MatrixXd::Zero(dim, dim)) {}

void ProposalState::set_cov(const Eigen::MatrixXd& cov) {
  cov_ = 0.5 * (cov + cov.transpose());
}

double ProposalState::gamma() const {
  return std::pow(static_cast<double>(step_), -settings_.psi);
}

Eigen::MatrixXd ProposalState::fixed_cov() const {
  const int d = dim();
  return Eigen::MatrixXd::Identity(d, d) * (kFixedSd * kFixedSd / d);
}

Eigen::MatrixXd ProposalState::proposal_cov(bool haario_fixed_component) const {
  const int d = dim();
  switch (settings_.variant) {
    case AmhVariant::Global:
      return scale_ * cov_;
    case AmhVariant::Incremental:
      return Eigen::MatrixXd::Identity(d, d) * std::exp(2.0 * scale_);
    case AmhVariant::Haario:
      if (haario_fixed_component || step_ <= 2L * d) return fixed_cov();
      return (kHaarioScale / d) * cov_;
  }
  return fixed_cov();
}

Eigen::VectorXd ProposalState::draw_gaussian(const Eigen::VectorXd& center,
                                             const Eigen::MatrixXd& cov, Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  Eigen::MatrixXd factor;
  if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().allFinite()) {
    factor = llt.matrixL();
  } else {
    ++fallbacks_;
    // The global variant's first few updates are rank-deficient by
    // construction (gamma = 1 at step 1); only later failures are news.
    if (settings_.variant != AmhVariant::Global || step_ > dim())
      log_warning("amh-fallback",
                  "proposal covariance is not positive definite; using the fixed diagonal component");
    factor = fixed_cov().cwiseSqrt();
  }
  Eigen::VectorXd z(center.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = standard_normal(rng);
  return center + factor * z;
}

Eigen::VectorXd ProposalState::propose(const Eigen::VectorXd& current, Rng& rng) {
  if (current.size() != mean_.size())
    throw std::invalid_argument("proposal dimension mismatch");
  switch (settings_.variant) {
    case AmhVariant::Global:
      if (scale_ == 0.0) return current;
      return draw_gaussian(current, proposal_cov(false), rng);
    case AmhVariant::Incremental:
      return draw_gaussian(current, proposal_cov(false), rng);
    case AmhVariant::Haario: {
      bool fixed = step_ <= 2L * dim();
      if (!fixed) fixed = uniform01(rng) < settings_.beta;
      return draw_gaussian(current, proposal_cov(fixed), rng);
    }
  }
  return current;
}

void ProposalState::adapt(double accept_prob, const Eigen::VectorXd& new_value) {
  switch (settings_.variant) {
    case AmhVariant::Global: {
      const double g = gamma();
      scale_ = std::exp(std::log(scale_) + g * (accept_prob - settings_.target));
      const Eigen::VectorXd diff = new_value - mean_;
      mean_ += g * diff;
      cov_ += g * (diff * diff.transpose() - cov_);
      cov_ = 0.5 * (cov_ + cov_.transpose());
      break;
    }
    case AmhVariant::Incremental: {
      if (step_ % settings_.v == 0) {
        // Divisor is the number of completed adaptation batches.
        const double batches = static_cast<double>(step_ / settings_.v);
        scale_ += (accept_prob <= settings_.target ? -1.0 : 1.0) / batches;
      }
      break;
    }
    case AmhVariant::Haario: {
      ++n_seen_;
      const Eigen::VectorXd diff = new_value - running_mean_;
      running_mean_ += diff / static_cast<double>(n_seen_);
      running_m2_ += diff * (new_value - running_mean_).transpose();
      if (n_seen_ >= 2) {
        Eigen::MatrixXd c = running_m2_ / static_cast<double>(n_seen_ - 1);
        c = 0.5 * (c + c.transpose());
        c.diagonal().array() += kHaarioJitter;
        cov_ = c;
        mean_ = running_mean_;
      }
      break;
    }
  }
  ++step_;
}

}  // namespace mrscan
