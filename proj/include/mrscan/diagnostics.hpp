#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrscan/model.hpp"
#include "mrscan/sampler.hpp"

namespace mrscan {

// Effective sample size n / (1 + 2 * sum_{t=1..K} rho_t), where K is the
// last lag before the first |rho_t| < 0.05 (searched up to n/2). Clamped
// to (0, n]; a constant chain returns n.
double ess(std::span<const double> chain);

// Sample autocorrelation at lags 0..max_lag (biased, 1/n normalisation).
std::vector<double> autocorrelation(std::span<const double> chain, std::size_t max_lag);

// Mean of (draw - truth)^2.
double mse(std::span<const double> chain, double truth);

// Unbiased sample variance. Throws std::invalid_argument below 2 draws.
double chain_variance(std::span<const double> chain);

inline constexpr double kKsCoefficient01 = 1.628;  // c(0.01)

struct KsResult {
  double d;
  double critical;  // c(0.01) * sqrt((n + m) / (n m))
};

// Two-sample Kolmogorov-Smirnov statistic. Throws on an empty sample.
KsResult ks_statistic(std::span<const double> a, std::span<const double> b);

struct KsWindow {
  int window;  // 1-based index of the compared window
  double d;
  double critical;
  bool pass;
};

// Splits the chain into non-overlapping windows, thins each, and tests every
// window against the last one. Throws std::invalid_argument when the chain
// holds fewer than two windows.
std::vector<KsWindow> ks_convergence_sequence(std::span<const double> chain, int window = 500,
                                              int thin = 10);

struct DiagnosticsOptions {
  bool procrustes = false;  // rotate each draw onto the truth before MSE
  int ks_window = 500;
  int ks_thin = 10;
};

struct ParameterDiagnostics {
  std::string name;  // e.g. x[3,1,2] or alpha[1,2]; 1-based
  double ess = 0.0;
  double ess_fraction = 0.0;
  double variance = 0.0;
  std::optional<double> mse;
};

struct DiagnosticsReport {
  std::size_t n_draws = 0;
  std::vector<ParameterDiagnostics> coords;  // (time, node, dim) order
  std::vector<ParameterDiagnostics> alphas;  // (layer, time) order
  // Averages across nodes and times, one entry per latent dimension.
  std::vector<double> ess_fraction_by_dim;
  std::vector<double> mse_by_dim;
  std::vector<double> variance_by_dim;
  double ess_fraction_mean = 0.0;
  double median_coord_ess = 0.0;
  std::optional<double> mse_mean;
  double variance_mean = 0.0;
  // KS sequence per dimension, D averaged across nodes and times.
  std::vector<std::vector<KsWindow>> ks_by_dim;
  std::vector<double> alpha_acceptance_means;  // (layer, time) order
  std::vector<double> node_acceptance_means;   // (time, node) order; NaN if never updated
  double runtime_seconds = 0.0;
};

DiagnosticsReport diagnose(const ChainTrace& trace, const LatentState* truth,
                           const DiagnosticsOptions& options = {});

// Orthogonal Procrustes: rotates/reflects `coords` (N x d, row-major) about
// its centroid onto `target`, then translates onto the target centroid.
std::vector<double> procrustes_align(std::span<const double> coords,
                                     std::span<const double> target, int dim);

}  // namespace mrscan
