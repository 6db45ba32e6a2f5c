#include "mrscan/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unsupported/Eigen/FFT>

#include "mrscan/log.hpp"

namespace mrscan {

namespace {

constexpr double kEssCutoff = 0.05;
// Lags summed directly before switching to an FFT of the whole chain.
constexpr std::size_t kDirectLagLimit = 64;

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

std::vector<double> autocorrelation_direct(std::span<const double> x, double mean, double c0,
                                           std::size_t max_lag) {
  const std::size_t n = x.size();
  std::vector<double> rho(max_lag + 1, 0.0);
  rho[0] = 1.0;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (std::size_t k = 0; k + lag < n; ++k) s += (x[k] - mean) * (x[k + lag] - mean);
    rho[lag] = s / static_cast<double>(n) / c0;
  }
  return rho;
}

std::vector<double> autocorrelation_fft(std::span<const double> x, double mean, double c0,
                                        std::size_t max_lag) {
  const std::size_t n = x.size();
  std::size_t size = 1;
  while (size < 2 * n) size <<= 1;
  std::vector<double> padded(size, 0.0);
  for (std::size_t k = 0; k < n; ++k) padded[k] = x[k] - mean;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, padded);
  for (auto& z : spectrum) z = std::complex<double>(std::norm(z), 0.0);
  std::vector<double> acov;
  fft.inv(acov, spectrum);
  std::vector<double> rho(max_lag + 1);
  for (std::size_t lag = 0; lag <= max_lag; ++lag)
    rho[lag] = acov[lag] / static_cast<double>(n) / c0;
  rho[0] = 1.0;
  return rho;
}

double lag0_variance(std::span<const double> x, double mean) {
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  return c0 / static_cast<double>(x.size());
}

}  // namespace

std::vector<double> autocorrelation(std::span<const double> chain, std::size_t max_lag) {
  if (chain.empty()) throw std::invalid_argument("autocorrelation of an empty chain");
  max_lag = std::min(max_lag, chain.size() - 1);
  const double m = mean_of(chain);
  const double c0 = lag0_variance(chain, m);
  if (!(c0 > 0.0)) {
    std::vector<double> rho(max_lag + 1, 0.0);
    rho[0] = 1.0;
    return rho;
  }
  return max_lag <= kDirectLagLimit ? autocorrelation_direct(chain, m, c0, max_lag)
                                    : autocorrelation_fft(chain, m, c0, max_lag);
}

double ess(std::span<const double> chain) {
  const std::size_t n = chain.size();
  if (n < 2) return static_cast<double>(n);
  const double m = mean_of(chain);
  const double c0 = lag0_variance(chain, m);
  if (!(c0 > 0.0)) {
    log_warning("ess-constant", "constant chain; effective sample size set to its length");
    return static_cast<double>(n);
  }
  const std::size_t max_lag = n / 2;
  double sum = 0.0;
  const std::size_t direct = std::min(max_lag, kDirectLagLimit);
  auto rho = autocorrelation_direct(chain, m, c0, direct);
  bool cut = false;
  for (std::size_t lag = 1; lag <= direct && !cut; ++lag) {
    if (std::abs(rho[lag]) < kEssCutoff)
      cut = true;
    else
      sum += rho[lag];
  }
  if (!cut && max_lag > direct) {
    rho = autocorrelation_fft(chain, m, c0, max_lag);
    for (std::size_t lag = direct + 1; lag <= max_lag; ++lag) {
      if (std::abs(rho[lag]) < kEssCutoff) break;
      sum += rho[lag];
    }
  }
  const double denom = 1.0 + 2.0 * sum;
  const double value = static_cast<double>(n) / denom;
  if (!(denom > 0.0) || value > static_cast<double>(n)) return static_cast<double>(n);
  return value;
}

double mse(std::span<const double> chain, double truth) {
  if (chain.empty()) throw std::invalid_argument("mse of an empty chain");
  double s = 0.0;
  for (double v : chain) s += (v - truth) * (v - truth);
  return s / static_cast<double>(chain.size());
}

double chain_variance(std::span<const double> chain) {
  if (chain.size() < 2) throw std::invalid_argument("variance needs at least two draws");
  const double m = mean_of(chain);
  double s = 0.0;
  for (double v : chain) s += (v - m) * (v - m);
  return s / static_cast<double>(chain.size() - 1);
}

KsResult ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic needs non-empty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return {d, kKsCoefficient01 * std::sqrt((n + m) / (n * m))};
}

std::vector<KsWindow> ks_convergence_sequence(std::span<const double> chain, int window,
                                              int thin) {
  if (window < 1 || thin < 1) throw std::invalid_argument("window and thin must be positive");
  const std::size_t w = static_cast<std::size_t>(window);
  const std::size_t n_windows = chain.size() / w;
  if (n_windows < 2)
    throw std::invalid_argument("chain of " + std::to_string(chain.size()) +
                                " draws is shorter than two windows of " + std::to_string(window));
  auto thinned = [&](std::size_t k) {
    std::vector<double> out;
    for (std::size_t s = k * w; s < (k + 1) * w; s += static_cast<std::size_t>(thin))
      out.push_back(chain[s]);
    return out;
  };
  const auto last = thinned(n_windows - 1);
  std::vector<KsWindow> out;
  for (std::size_t k = 0; k + 1 < n_windows; ++k) {
    const auto r = ks_statistic(thinned(k), last);
    out.push_back({static_cast<int>(k + 1), r.d, r.critical, r.d <= r.critical});
  }
  return out;
}

std::vector<double> procrustes_align(std::span<const double> coords,
                                     std::span<const double> target, int dim) {
  const Eigen::Index n = static_cast<Eigen::Index>(coords.size()) / dim;
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMat x = Eigen::Map<const RowMat>(coords.data(), n, dim);
  const RowMat y = Eigen::Map<const RowMat>(target.data(), n, dim);
  const Eigen::RowVectorXd mx = x.colwise().mean();
  const Eigen::RowVectorXd my = y.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - mx;
  const Eigen::MatrixXd yc = y.rowwise() - my;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(xc.transpose() * yc, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd rot = svd.matrixU() * svd.matrixV().transpose();
  RowMat aligned = (xc * rot).rowwise() + my;
  return {aligned.data(), aligned.data() + aligned.size()};
}

DiagnosticsReport diagnose(const ChainTrace& trace, const LatentState* truth,
                           const DiagnosticsOptions& options) {
  DiagnosticsReport rep;
  rep.n_draws = trace.n_kept();
  rep.runtime_seconds = trace.wall_time_seconds;
  const int d = trace.dim, n = trace.n_nodes, T = trace.n_times, R = trace.n_layers;
  if (truth && (truth->dim() != d || truth->n_nodes() != n || truth->n_times() != T ||
                truth->n_layers() != R))
    throw std::invalid_argument("truth shape does not match the trace");

  // Optionally rotate every kept draw onto the truth before computing errors.
  const std::vector<double>* draws = &trace.coord_draws;
  std::vector<double> aligned;
  if (truth && options.procrustes && rep.n_draws > 0) {
    aligned = trace.coord_draws;
    const std::size_t slice = static_cast<std::size_t>(n) * d;
    const std::size_t per_draw = slice * T;
    for (std::size_t s = 0; s < rep.n_draws; ++s)
      for (int t = 0; t < T; ++t) {
        const std::size_t off = s * per_draw + t * slice;
        auto rotated = procrustes_align(
            std::span<const double>(aligned.data() + off, slice),
            std::span<const double>(truth->coords().data() + t * slice, slice), d);
        std::copy(rotated.begin(), rotated.end(), aligned.begin() + static_cast<long>(off));
      }
    draws = &aligned;
  }

  auto chain_of = [&](int i, int t, int k) {
    const std::size_t per_draw = static_cast<std::size_t>(d) * n * T;
    const std::size_t off = (static_cast<std::size_t>(t) * n + i) * d + k;
    std::vector<double> out(rep.n_draws);
    for (std::size_t s = 0; s < out.size(); ++s) out[s] = (*draws)[s * per_draw + off];
    return out;
  };

  auto describe = [&](std::string name, const std::vector<double>& chain,
                      std::optional<double> true_value) {
    ParameterDiagnostics p;
    p.name = std::move(name);
    if (chain.size() >= 2) {
      p.ess = ess(chain);
      p.ess_fraction = p.ess / static_cast<double>(chain.size());
      p.variance = chain_variance(chain);
    }
    if (true_value && !chain.empty()) p.mse = mse(chain, *true_value);
    return p;
  };

  rep.ess_fraction_by_dim.assign(static_cast<std::size_t>(d), 0.0);
  rep.variance_by_dim.assign(static_cast<std::size_t>(d), 0.0);
  if (truth) rep.mse_by_dim.assign(static_cast<std::size_t>(d), 0.0);
  rep.ks_by_dim.resize(static_cast<std::size_t>(d));
  const bool run_ks = rep.n_draws >= 2 * static_cast<std::size_t>(options.ks_window);
  std::vector<double> all_ess;

  for (int t = 0; t < T; ++t)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < d; ++k) {
        const auto chain = chain_of(i, t, k);
        std::optional<double> tv;
        if (truth) tv = truth->coord(i, t)[k];
        auto p = describe("x[" + std::to_string(i + 1) + "," + std::to_string(t + 1) + "," +
                              std::to_string(k + 1) + "]",
                          chain, tv);
        rep.ess_fraction_by_dim[k] += p.ess_fraction;
        rep.variance_by_dim[k] += p.variance;
        if (p.mse) rep.mse_by_dim[k] += *p.mse;
        all_ess.push_back(p.ess);
        if (run_ks) {
          auto seq = ks_convergence_sequence(chain, options.ks_window, options.ks_thin);
          auto& acc = rep.ks_by_dim[k];
          if (acc.empty()) {
            acc = seq;
            for (auto& w : acc) w.d = 0.0;
          }
          for (std::size_t w = 0; w < seq.size(); ++w) acc[w].d += seq[w].d;
        }
        rep.coords.push_back(std::move(p));
      }

  const double per_dim = static_cast<double>(n) * T;
  for (int k = 0; k < d; ++k) {
    rep.ess_fraction_by_dim[k] /= per_dim;
    rep.variance_by_dim[k] /= per_dim;
    if (truth) rep.mse_by_dim[k] /= per_dim;
    for (auto& w : rep.ks_by_dim[k]) {
      w.d /= per_dim;
      w.pass = w.d <= w.critical;
    }
  }
  auto avg = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  rep.ess_fraction_mean = avg(rep.ess_fraction_by_dim);
  rep.variance_mean = avg(rep.variance_by_dim);
  if (truth) rep.mse_mean = avg(rep.mse_by_dim);
  if (!all_ess.empty()) {
    std::sort(all_ess.begin(), all_ess.end());
    const std::size_t mid = all_ess.size() / 2;
    rep.median_coord_ess = all_ess.size() % 2 ? all_ess[mid] : 0.5 * (all_ess[mid - 1] + all_ess[mid]);
  }

  for (int r = 0; r < R; ++r)
    for (int t = 0; t < T; ++t) {
      std::optional<double> tv;
      if (truth) tv = truth->alpha(r, t);
      rep.alphas.push_back(describe(
          "alpha[" + std::to_string(r + 1) + "," + std::to_string(t + 1) + "]",
          trace.alpha_chain(r, t), tv));
    }

  std::vector<double> a_sum(static_cast<std::size_t>(R) * T, 0.0), a_cnt(a_sum.size(), 0.0);
  for (const auto& a : trace.alpha_accept) {
    a_sum[static_cast<std::size_t>(a.index) * T + a.time] += a.prob;
    a_cnt[static_cast<std::size_t>(a.index) * T + a.time] += 1.0;
  }
  std::vector<double> n_sum(static_cast<std::size_t>(n) * T, 0.0), n_cnt(n_sum.size(), 0.0);
  for (const auto& a : trace.node_accept) {
    n_sum[static_cast<std::size_t>(a.time) * n + a.index] += a.prob;
    n_cnt[static_cast<std::size_t>(a.time) * n + a.index] += 1.0;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < a_sum.size(); ++k)
    rep.alpha_acceptance_means.push_back(a_cnt[k] > 0 ? a_sum[k] / a_cnt[k] : nan);
  for (std::size_t k = 0; k < n_sum.size(); ++k)
    rep.node_acceptance_means.push_back(n_cnt[k] > 0 ? n_sum[k] / n_cnt[k] : nan);
  return rep;
}

}  // namespace mrscan
