#include "mrscan/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mrscan/errors.hpp"

namespace mrscan {

void PriorSpec::validate() const {
  if (!(sigma2 > 0.0)) throw ConfigError("prior.sigma2 must be positive");
  if (!(sigma2_eps > 0.0)) throw ConfigError("prior.sigma2_eps must be positive");
  if (!(alpha_prior_var > 0.0)) throw ConfigError("prior.alpha_var must be positive");
  if (!std::isfinite(alpha_prior_mean)) throw ConfigError("prior.alpha_mean must be finite");
}

LatentState::LatentState(int dim, int n_nodes, int n_times, int n_layers)
    : dim_(dim), n_nodes_(n_nodes), n_times_(n_times), n_layers_(n_layers) {
  if (dim < 1 || n_nodes < 1 || n_times < 1 || n_layers < 1)
    throw std::invalid_argument("latent state dimensions must be positive");
  coords_.assign(static_cast<std::size_t>(dim) * n_nodes * n_times, 0.0);
  alpha_.assign(static_cast<std::size_t>(n_layers) * n_times, 0.0);
}

bool LatentState::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(coords_.begin(), coords_.end(), finite) &&
         std::all_of(alpha_.begin(), alpha_.end(), finite);
}

void LatentState::check_compatible(const NetworkTensor& net) const {
  if (n_nodes_ != net.n_nodes() || n_layers_ != net.n_layers() || n_times_ != net.max_times())
    throw DataError("latent state shape (N=" + std::to_string(n_nodes_) +
                    ", R=" + std::to_string(n_layers_) + ", T=" + std::to_string(n_times_) +
                    ") does not match the network (N=" + std::to_string(net.n_nodes()) +
                    ", R=" + std::to_string(net.n_layers()) +
                    ", T=" + std::to_string(net.max_times()) + ")");
}

double distance_between(std::span<const double> xi, std::span<const double> xj,
                        Distance distance) {
  if (xi.size() != xj.size())
    throw std::invalid_argument("coordinate dimension mismatch: " + std::to_string(xi.size()) +
                                " vs " + std::to_string(xj.size()));
  double sq = 0.0;
  for (std::size_t k = 0; k < xi.size(); ++k) {
    const double diff = xi[k] - xj[k];
    sq += diff * diff;
  }
  return distance == Distance::SquaredEuclidean ? sq : std::sqrt(sq);
}

double eta_of(double alpha, std::span<const double> xi, std::span<const double> xj,
              Distance distance) {
  return alpha - distance_between(xi, xj, distance);
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double edge_loglik(double y, double eta, const WeightFamily& family) {
  if (!family.admits(y))
    throw DataError("weight " + std::to_string(y) + " inadmissible for " +
                    to_string(family.kind) + " family");
  double ll = edge_loglik_kernel(y, eta, family.kind);
  if (family.kind == FamilyKind::PoissonLog) ll -= std::lgamma(y + 1.0);
  return ll;
}

namespace {

void check_node_indices(int i, int t, const LatentState& state) {
  if (i < 0 || i >= state.n_nodes() || t < 0 || t >= state.n_times())
    throw std::out_of_range("node/time index out of range: i=" + std::to_string(i) +
                            ", t=" + std::to_string(t));
}

double sq_norm_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

// Gaussian prior on x_{it}: N(0, sigma2 I) at t = 0, random-walk links to
// both temporal neighbours otherwise.
double node_prior(int i, int t, std::span<const double> x, const LatentState& state,
                  const PriorSpec& prior) {
  double lp = 0.0;
  if (t == 0) {
    double sq = 0.0;
    for (double v : x) sq += v * v;
    lp -= 0.5 * sq / prior.sigma2;
  } else {
    lp -= 0.5 * sq_norm_diff(x, state.coord(i, t - 1)) / prior.sigma2_eps;
  }
  if (t + 1 < state.n_times()) lp -= 0.5 * sq_norm_diff(state.coord(i, t + 1), x) / prior.sigma2_eps;
  return lp;
}

}  // namespace

LogpostPair node_conditional_logpost_pair(int i, int t, std::span<const double> x_candidate,
                                          const LatentState& state, const NetworkTensor& net,
                                          const PriorSpec& prior) {
  check_node_indices(i, t, state);
  if (x_candidate.size() != static_cast<std::size_t>(state.dim()))
    throw std::invalid_argument("candidate dimension mismatch");
  const auto x_current = state.coord(i, t);
  const int n = state.n_nodes();

  // Layers observed at time t, with a cursor into each sorted neighbour row.
  struct LayerView {
    FamilyKind kind;
    double alpha;
    double exp_alpha;
    std::span<const Neighbor> row;
    std::size_t cursor;
  };
  LayerView views[16];
  std::vector<LayerView> overflow;
  LayerView* layers = views;
  int n_active = 0;
  if (net.n_layers() > 16) {
    overflow.resize(static_cast<std::size_t>(net.n_layers()));
    layers = overflow.data();
  }
  for (int r = 0; r < net.n_layers(); ++r) {
    if (!net.has_slice(r, t)) continue;
    const double a = state.alpha(r, t);
    layers[n_active++] = {net.family(r).kind, a, std::exp(a), net.neighbors(i, r, t), 0};
  }

  double lp_cand = 0.0;
  double lp_curr = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const auto xj = state.coord(j, t);
    const double d_cand = distance_between(x_candidate, xj, prior.distance);
    const double d_curr = distance_between(x_current, xj, prior.distance);
    double e_cand = -1.0;  // exp(-d), computed once if a Poisson layer needs it
    double e_curr = -1.0;
    for (int k = 0; k < n_active; ++k) {
      auto& L = layers[k];
      double y = 0.0;
      if (L.cursor < L.row.size() && L.row[L.cursor].node == j) y = L.row[L.cursor++].weight;
      const double eta_cand = L.alpha - d_cand;
      const double eta_curr = L.alpha - d_curr;
      if (L.kind == FamilyKind::PoissonLog) {
        if (e_cand < 0.0) {
          e_cand = std::exp(-d_cand);
          e_curr = std::exp(-d_curr);
        }
        lp_cand += y * eta_cand - L.exp_alpha * e_cand;
        lp_curr += y * eta_curr - L.exp_alpha * e_curr;
      } else {
        lp_cand += y * eta_cand - softplus(eta_cand);
        lp_curr += y * eta_curr - softplus(eta_curr);
      }
    }
  }
  lp_cand += node_prior(i, t, x_candidate, state, prior);
  lp_curr += node_prior(i, t, x_current, state, prior);
  return {lp_cand, lp_curr};
}

double node_conditional_logpost(int i, int t, std::span<const double> x_candidate,
                                const LatentState& state, const NetworkTensor& net,
                                const PriorSpec& prior) {
  return node_conditional_logpost_pair(i, t, x_candidate, state, net, prior).candidate;
}

LogpostPair alpha_conditional_logpost_pair(int r, int t, double alpha_candidate,
                                           const LatentState& state, const NetworkTensor& net,
                                           const PriorSpec& prior) {
  if (r < 0 || r >= state.n_layers() || t < 0 || t >= state.n_times() || !net.has_slice(r, t))
    throw std::out_of_range("layer/time index out of range: r=" + std::to_string(r) +
                            ", t=" + std::to_string(t));
  const double alpha_current = state.alpha(r, t);
  const FamilyKind kind = net.family(r).kind;
  const int n = state.n_nodes();

  // Weighted sums over the nonzero pairs: sum y * (a - d) = a * sum y - sum y d.
  double sum_y = 0.0;
  double sum_yd = 0.0;
  for (const auto& e : net.edges(r, t)) {
    sum_y += e.weight;
    sum_yd += e.weight * distance_between(state.coord(e.i, t), state.coord(e.j, t), prior.distance);
  }

  double b_cand = 0.0;
  double b_curr = 0.0;
  if (kind == FamilyKind::PoissonLog) {
    double sum_exp = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        sum_exp += std::exp(-distance_between(state.coord(i, t), state.coord(j, t), prior.distance));
    b_cand = std::exp(alpha_candidate) * sum_exp;
    b_curr = std::exp(alpha_current) * sum_exp;
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double d = distance_between(state.coord(i, t), state.coord(j, t), prior.distance);
        b_cand += softplus(alpha_candidate - d);
        b_curr += softplus(alpha_current - d);
      }
  }

  auto prior_term = [&](double a) {
    const double z = a - prior.alpha_prior_mean;
    return -0.5 * z * z / prior.alpha_prior_var;
  };
  return {alpha_candidate * sum_y - sum_yd - b_cand + prior_term(alpha_candidate),
          alpha_current * sum_y - sum_yd - b_curr + prior_term(alpha_current)};
}

double alpha_conditional_logpost(int r, int t, double alpha_candidate, const LatentState& state,
                                 const NetworkTensor& net, const PriorSpec& prior) {
  return alpha_conditional_logpost_pair(r, t, alpha_candidate, state, net, prior).candidate;
}

void recenter(LatentState& state) {
  const int d = state.dim();
  const int n = state.n_nodes();
  std::vector<double> mean(static_cast<std::size_t>(d));
  for (int t = 0; t < state.n_times(); ++t) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      auto x = state.coord(i, t);
      for (int k = 0; k < d; ++k) mean[k] += x[k];
    }
    for (auto& m : mean) m /= n;
    for (int i = 0; i < n; ++i) {
      auto x = state.coord(i, t);
      for (int k = 0; k < d; ++k) x[k] -= mean[k];
    }
  }
}

LatentState recentered(LatentState state) {
  recenter(state);
  return state;
}

}  // namespace mrscan
