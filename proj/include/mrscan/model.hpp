#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mrscan/network.hpp"

namespace mrscan {

enum class Distance { Euclidean, SquaredEuclidean };

struct PriorSpec {
  double sigma2 = 1.0;       // coordinate variance at the first time slice
  double sigma2_eps = 0.01;  // random-walk innovation variance
  double alpha_prior_mean = 0.0;
  double alpha_prior_var = 100.0;
  Distance distance = Distance::SquaredEuclidean;

  // Throws ConfigError unless every variance is positive.
  void validate() const;
};

// Latent coordinates x_{it} (shared across layers) and intercepts a_{rt}.
// Coordinates are stored slice-major: time, then node, then dimension.
class LatentState {
 public:
  LatentState() = default;
  LatentState(int dim, int n_nodes, int n_times, int n_layers);

  int dim() const { return dim_; }
  int n_nodes() const { return n_nodes_; }
  int n_times() const { return n_times_; }
  int n_layers() const { return n_layers_; }

  std::span<double> coord(int i, int t) {
    return {coords_.data() + offset(i, t), static_cast<std::size_t>(dim_)};
  }
  std::span<const double> coord(int i, int t) const {
    return {coords_.data() + offset(i, t), static_cast<std::size_t>(dim_)};
  }
  double& alpha(int r, int t) { return alpha_[static_cast<std::size_t>(r * n_times_ + t)]; }
  double alpha(int r, int t) const { return alpha_[static_cast<std::size_t>(r * n_times_ + t)]; }

  const std::vector<double>& coords() const { return coords_; }
  const std::vector<double>& alphas() const { return alpha_; }

  bool all_finite() const;

  // Throws DataError when the state does not fit `net`.
  void check_compatible(const NetworkTensor& net) const;

  bool operator==(const LatentState&) const = default;

 private:
  std::size_t offset(int i, int t) const {
    return (static_cast<std::size_t>(t) * n_nodes_ + i) * dim_;
  }

  int dim_ = 0;
  int n_nodes_ = 0;
  int n_times_ = 0;
  int n_layers_ = 0;
  std::vector<double> coords_;
  std::vector<double> alpha_;
};

double distance_between(std::span<const double> xi, std::span<const double> xj, Distance distance);

// Linear predictor: intercept minus the chosen distance between xi and xj.
double eta_of(double alpha, std::span<const double> xi, std::span<const double> xj,
              Distance distance);

// log(1 + exp(x)) without overflow.
double softplus(double x);
// Full log density/mass of weight y, including the -log(y!) Poisson term.
// Throws DataError when y is inadmissible for the family.
double edge_loglik(double y, double eta, const WeightFamily& family);

// Log-likelihood contribution with every term independent of eta dropped:
// y * eta - b(eta), where b is softplus (Bernoulli) or exp (Poisson).
inline double edge_loglik_kernel(double y, double eta, FamilyKind kind) {
  return y * eta - (kind == FamilyKind::BernoulliLogit ? softplus(eta) : std::exp(eta));
}

// Conditional log-posterior of x_{it} evaluated at `x_candidate`, up to an
// additive constant. Dropped: -log(y!) for Poisson weights and the Gaussian
// normalising constants. Both are free of x_{it}, so MH ratios are exact.
double node_conditional_logpost(int i, int t, std::span<const double> x_candidate,
                                const LatentState& state, const NetworkTensor& net,
                                const PriorSpec& prior);

struct LogpostPair {
  double candidate;
  double current;
};

// The two node log-posteriors an MH step compares, in a single pass over
// partners. Matches two calls of node_conditional_logpost.
LogpostPair node_conditional_logpost_pair(int i, int t, std::span<const double> x_candidate,
                                          const LatentState& state, const NetworkTensor& net,
                                          const PriorSpec& prior);

// Conditional log-posterior of a_{rt}, dropping the same constants.
double alpha_conditional_logpost(int r, int t, double alpha_candidate, const LatentState& state,
                                 const NetworkTensor& net, const PriorSpec& prior);

LogpostPair alpha_conditional_logpost_pair(int r, int t, double alpha_candidate,
                                           const LatentState& state, const NetworkTensor& net,
                                           const PriorSpec& prior);

// Subtracts the across-node mean from every time slice. Pairwise distances,
// and therefore every linear predictor, are unchanged.
void recenter(LatentState& state);
LatentState recentered(LatentState state);

}  // namespace mrscan
