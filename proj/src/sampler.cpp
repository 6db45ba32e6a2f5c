#include "mrscan/sampler.hpp"

#include <chrono>
#include <cmath>

#include "mrscan/errors.hpp"
#include "mrscan/log.hpp"

namespace mrscan {

std::string to_string(ScanStrategy strategy) {
  switch (strategy) {
    case ScanStrategy::Gs: return "gs";
    case ScanStrategy::Rsg: return "rsg";
    case ScanStrategy::Mrsg: return "mrsg";
    case ScanStrategy::Amrsg: return "amrsg";
    case ScanStrategy::BMrsg: return "b-mrsg";
    case ScanStrategy::BAmrsg: return "b-amrsg";
  }
  return "gs";
}

std::string to_string(StartMode mode) { return mode == StartMode::Pilot ? "pilot" : "prior"; }

StartMode parse_start_mode(const std::string& name) {
  if (name == "prior") return StartMode::Prior;
  if (name == "pilot") return StartMode::Pilot;
  throw ConfigError("unknown chain.start '" + name + "' (expected prior or pilot)");
}

ScanStrategy parse_strategy(const std::string& name) {
  if (name == "gs") return ScanStrategy::Gs;
  if (name == "rsg") return ScanStrategy::Rsg;
  if (name == "mrsg") return ScanStrategy::Mrsg;
  if (name == "amrsg") return ScanStrategy::Amrsg;
  if (name == "b-mrsg") return ScanStrategy::BMrsg;
  if (name == "b-amrsg") return ScanStrategy::BAmrsg;
  throw ConfigError("unknown scan.strategy '" + name +
                    "' (expected gs, rsg, mrsg, amrsg, b-mrsg or b-amrsg)");
}

bool is_adaptive(ScanStrategy s) { return s == ScanStrategy::Amrsg || s == ScanStrategy::BAmrsg; }
bool is_block(ScanStrategy s) { return s == ScanStrategy::BMrsg || s == ScanStrategy::BAmrsg; }

double ScanSettings::initial_q() const {
  if (q0) return *q0;
  switch (strategy) {
    case ScanStrategy::Mrsg: return 0.5;
    case ScanStrategy::BMrsg:
    case ScanStrategy::BAmrsg: return 1.0 / n_blocks;
    default: return 1.0;
  }
}

void ChainConfig::validate() const {
  if (dim < 1) throw ConfigError("model.dim must be at least 1");
  if (iterations < 1) throw ConfigError("chain.iterations must be positive");
  if (burn_in < 0 || burn_in > iterations)
    throw ConfigError("chain.burn_in must lie in 0..chain.iterations");
  if (thinning < 1) throw ConfigError("chain.thinning must be at least 1");
  if (recenter_every < 0) throw ConfigError("chain.recenter_every must be non-negative");
  if (scan.u < 1) throw ConfigError("scan.u must be at least 1");
  if (!(scan.epsilon > 0.0 && scan.epsilon <= 1.0))
    throw ConfigError("scan.epsilon must lie in (0, 1]");
  if (scan.q0 && !(*scan.q0 >= scan.epsilon && *scan.q0 <= 1.0))
    throw ConfigError("scan.q0 must lie in [scan.epsilon, 1]");
  if (!std::isfinite(scan.c)) throw ConfigError("scan.c must be finite");
  if (is_block(scan.strategy) && scan.partition_file.empty() && scan.n_blocks < 1)
    throw ConfigError("scan.K must be at least 1");
  if (scan.sub_iterations < 0) throw ConfigError("scan.V must be non-negative");
  if (start == StartMode::Pilot && pilot_iterations < 1)
    throw ConfigError("chain.pilot_iterations must be positive");
  amh.validate();
}

std::vector<double> ChainTrace::coord_chain(int node, int time, int k) const {
  const std::size_t per_draw = static_cast<std::size_t>(dim) * n_nodes * n_times;
  const std::size_t offset = (static_cast<std::size_t>(time) * n_nodes + node) * dim + k;
  std::vector<double> out(n_kept());
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = coord_draws[s * per_draw + offset];
  return out;
}

std::vector<double> ChainTrace::alpha_chain(int layer, int time) const {
  const std::size_t per_draw = static_cast<std::size_t>(n_layers) * n_times;
  const std::size_t offset = static_cast<std::size_t>(layer) * n_times + time;
  std::vector<double> out(n_kept());
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = alpha_draws[s * per_draw + offset];
  return out;
}

namespace {
bool same_records(const std::vector<AcceptRecord>& a, const std::vector<AcceptRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k].iteration != b[k].iteration || a[k].index != b[k].index || a[k].time != b[k].time ||
        a[k].prob != b[k].prob)
      return false;
  return true;
}
}  // namespace

bool ChainTrace::same_draws(const ChainTrace& o) const {
  if (dim != o.dim || n_nodes != o.n_nodes || n_times != o.n_times || n_layers != o.n_layers ||
      kept_iterations != o.kept_iterations || alpha_draws != o.alpha_draws ||
      coord_draws != o.coord_draws || rng_seed != o.rng_seed)
    return false;
  if (!same_records(alpha_accept, o.alpha_accept) || !same_records(node_accept, o.node_accept))
    return false;
  if (q_history.size() != o.q_history.size()) return false;
  for (std::size_t k = 0; k < q_history.size(); ++k)
    if (q_history[k].iteration != o.q_history[k].iteration || q_history[k].q != o.q_history[k].q)
      return false;
  return true;
}

MhResult mh_accept(double logpost_candidate, double logpost_current, double log_q_ratio,
                   Rng& rng) {
  const double log_ratio = logpost_candidate - logpost_current + log_q_ratio;
  if (std::isnan(log_ratio)) {
    log_warning("mh-nan", "NaN log acceptance ratio; rejecting the candidate");
    return {false, 0.0};
  }
  if (log_ratio >= 0.0) return {true, 1.0};
  const double prob = std::exp(log_ratio);
  return {uniform01(rng) < prob, prob};
}

ProposalBank::ProposalBank(const AmhSettings& settings, int dim, int n_nodes, int n_times,
                           int n_layers)
    : n_nodes_(n_nodes), n_times_(n_times) {
  alpha_.assign(static_cast<std::size_t>(n_layers) * n_times, ProposalState(settings, 1));
  nodes_.assign(static_cast<std::size_t>(n_nodes) * n_times, ProposalState(settings, dim));
}

long ProposalBank::fallback_count() const {
  long total = 0;
  for (const auto& p : alpha_) total += p.fallback_count();
  for (const auto& p : nodes_) total += p.fallback_count();
  return total;
}

std::vector<StepAcceptance> step_alpha(LatentState& state, const NetworkTensor& net,
                                       const PriorSpec& prior, ProposalBank& proposals,
                                       Rng& rng) {
  std::vector<StepAcceptance> out;
  Eigen::VectorXd current(1);
  for (int r = 0; r < net.n_layers(); ++r)
    for (int t = 0; t < net.n_times(r); ++t) {
      auto& ps = proposals.alpha(r, t);
      current[0] = state.alpha(r, t);
      const Eigen::VectorXd cand = ps.propose(current, rng);
      const auto lp = alpha_conditional_logpost_pair(r, t, cand[0], state, net, prior);
      const auto res = mh_accept(lp.candidate, lp.current, 0.0, rng);
      if (res.accepted) state.alpha(r, t) = cand[0];
      ps.adapt(res.accept_prob, res.accepted ? cand : current);
      out.push_back({r, t, res.accept_prob});
    }
  return out;
}

std::vector<StepAcceptance> step_nodes(LatentState& state, const NetworkTensor& net,
                                       const PriorSpec& prior, ProposalBank& proposals,
                                       std::span<const int> index_set, Rng& rng) {
  std::vector<StepAcceptance> out;
  out.reserve(index_set.size() * static_cast<std::size_t>(state.n_times()));
  const int d = state.dim();
  Eigen::VectorXd current(d);
  for (int i : index_set)
    for (int t = 0; t < state.n_times(); ++t) {
      auto& ps = proposals.node(i, t);
      auto x = state.coord(i, t);
      for (int k = 0; k < d; ++k) current[k] = x[k];
      const Eigen::VectorXd cand = ps.propose(current, rng);
      const auto lp = node_conditional_logpost_pair(
          i, t, std::span<const double>(cand.data(), static_cast<std::size_t>(d)), state, net,
          prior);
      const auto res = mh_accept(lp.candidate, lp.current, 0.0, rng);
      if (res.accepted)
        for (int k = 0; k < d; ++k) x[k] = cand[k];
      ps.adapt(res.accept_prob, res.accepted ? cand : current);
      out.push_back({i, t, res.accept_prob});
    }
  return out;
}

LatentState initial_state(const NetworkTensor& net, const PriorSpec& prior, int dim, Rng& rng) {
  LatentState state(dim, net.n_nodes(), net.max_times(), net.n_layers());
  const double sd0 = std::sqrt(prior.sigma2);
  const double sd_eps = std::sqrt(prior.sigma2_eps);
  for (int i = 0; i < state.n_nodes(); ++i)
    for (int k = 0; k < dim; ++k) state.coord(i, 0)[k] = sd0 * standard_normal(rng);
  for (int t = 1; t < state.n_times(); ++t)
    for (int i = 0; i < state.n_nodes(); ++i)
      for (int k = 0; k < dim; ++k)
        state.coord(i, t)[k] = state.coord(i, t - 1)[k] + sd_eps * standard_normal(rng);
  for (int r = 0; r < state.n_layers(); ++r)
    for (int t = 0; t < state.n_times(); ++t) state.alpha(r, t) = prior.alpha_prior_mean;
  return state;
}

LatentState pilot_state(const NetworkTensor& net, const PriorSpec& prior, const ChainConfig& cfg,
                        Rng& rng) {
  NetworkBuilder builder(net.n_nodes(), std::vector<int>(net.n_layers(), 1), net.families());
  for (int r = 0; r < net.n_layers(); ++r)
    for (const auto& e : net.edges(r, 0)) builder.add(e.i, e.j, r, 0, e.weight);
  const NetworkTensor first = std::move(builder).build();

  ChainConfig pilot = cfg;
  pilot.start = StartMode::Prior;
  pilot.iterations = cfg.pilot_iterations;
  pilot.burn_in = cfg.pilot_iterations - 1;
  pilot.thinning = 1;
  pilot.record_acceptance = false;
  pilot.scan = ScanSettings{};
  pilot.seed = rng();
  const ChainTrace tr = run_chain(first, prior, pilot);

  LatentState state(cfg.dim, net.n_nodes(), net.max_times(), net.n_layers());
  for (int t = 0; t < state.n_times(); ++t)
    for (int i = 0; i < state.n_nodes(); ++i)
      for (int k = 0; k < cfg.dim; ++k)
        state.coord(i, t)[k] = tr.coord_draws[static_cast<std::size_t>(i) * cfg.dim + k];
  for (int r = 0; r < state.n_layers(); ++r)
    for (int t = 0; t < state.n_times(); ++t) state.alpha(r, t) = tr.alpha_draws[r];
  return state;
}

namespace {

// Produces the node set updated in one iteration and routes acceptance
// rates to the selection-probability adapter.
class ScanScheduler {
 public:
  ScanScheduler(const ScanSettings& scan, const AmhSettings& amh, const NetworkTensor& net)
      : scan_(scan), n_nodes_(net.n_nodes()) {
    if (is_block(scan.strategy)) {
      partition_.emplace(scan.partition_file.empty()
                             ? build_partition_heuristic(net, scan.n_blocks)
                             : load_partition(scan.partition_file, n_nodes_));
    }
    const int n_targets = partition_ ? partition_->n_blocks() : n_nodes_;
    std::vector<double> q0(static_cast<std::size_t>(n_targets), scan.initial_q());
    SelectionAdapter::Settings s;
    s.target = amh.target;
    s.c = scan.c;
    s.epsilon = scan.epsilon;
    s.damping = scan.damping;
    adapter_.emplace(std::move(q0), s);
    all_nodes_.resize(static_cast<std::size_t>(n_nodes_));
    for (int i = 0; i < n_nodes_; ++i) all_nodes_[i] = i;
  }

  bool adaptive() const { return is_adaptive(scan_.strategy); }
  const std::vector<double>& q() const { return adapter_->q(); }

  // Node updates of one iteration, in execution order. RSG may repeat nodes.
  std::vector<int> nodes_for_iteration(Rng& rng) {
    switch (scan_.strategy) {
      case ScanStrategy::Gs:
        return all_nodes_;
      case ScanStrategy::Rsg: {
        const int v = scan_.sub_iterations > 0 ? scan_.sub_iterations : n_nodes_;
        std::uniform_int_distribution<int> pick(0, n_nodes_ - 1);
        std::vector<int> out(static_cast<std::size_t>(v));
        for (auto& i : out) i = pick(rng);
        return out;
      }
      case ScanStrategy::Mrsg:
      case ScanStrategy::Amrsg:
        return draw_index_set(adapter_->q(), rng);
      case ScanStrategy::BMrsg:
      case ScanStrategy::BAmrsg: {
        auto probs = normalize_block_probs(adapter_->q());
        for (auto& p : probs) p = std::clamp(p, scan_.epsilon, 1.0);
        selected_blocks_ = draw_index_set(probs, rng);
        std::vector<int> out;
        for (int k : selected_blocks_)
          out.insert(out.end(), partition_->members(k).begin(), partition_->members(k).end());
        return out;
      }
    }
    return all_nodes_;
  }

  // Feeds one iteration's node acceptance probabilities to the adapter:
  // per node (averaged over time slices) or per selected block.
  void record(const std::vector<StepAcceptance>& acc, int n_times) {
    if (!adaptive() || acc.empty()) return;
    if (!partition_) {
      for (std::size_t k = 0; k < acc.size(); k += static_cast<std::size_t>(n_times)) {
        double sum = 0.0;
        for (int t = 0; t < n_times; ++t) sum += acc[k + t].prob;
        adapter_->record(acc[k].index, sum / n_times);
      }
      return;
    }
    std::size_t pos = 0;
    for (int block : selected_blocks_) {
      const std::size_t count = partition_->members(block).size() * static_cast<std::size_t>(n_times);
      double sum = 0.0;
      for (std::size_t k = 0; k < count; ++k) sum += acc[pos + k].prob;
      pos += count;
      adapter_->record(block, sum / static_cast<double>(count));
    }
  }

  void adapt() { adapter_->adapt(); }

 private:
  ScanSettings scan_;
  int n_nodes_;
  std::optional<BlockPartition> partition_;
  std::optional<SelectionAdapter> adapter_;
  std::vector<int> all_nodes_;
  std::vector<int> selected_blocks_;
};

}  // namespace

ChainTrace run_chain(const NetworkTensor& net, const PriorSpec& prior, const ChainConfig& cfg,
                     std::optional<LatentState> start) {
  cfg.validate();
  prior.validate();
  if (is_block(cfg.scan.strategy) && cfg.scan.partition_file.empty() &&
      cfg.scan.n_blocks > net.n_nodes())
    throw ConfigError("scan.K exceeds the number of nodes");

  const auto t_start = std::chrono::steady_clock::now();
  Rng rng(cfg.seed);
  LatentState state = start ? std::move(*start)
                    : cfg.start == StartMode::Pilot ? pilot_state(net, prior, cfg, rng)
                                                    : initial_state(net, prior, cfg.dim, rng);
  state.check_compatible(net);
  if (state.dim() != cfg.dim) throw ConfigError("initial state dimension differs from model.dim");

  ProposalBank proposals(cfg.amh, cfg.dim, state.n_nodes(), state.n_times(), state.n_layers());
  ScanScheduler scheduler(cfg.scan, cfg.amh, net);

  ChainTrace trace;
  trace.dim = state.dim();
  trace.n_nodes = state.n_nodes();
  trace.n_times = state.n_times();
  trace.n_layers = state.n_layers();
  trace.rng_seed = cfg.seed;
  const std::size_t n_keep = static_cast<std::size_t>((cfg.iterations - cfg.burn_in) / cfg.thinning);
  trace.kept_iterations.reserve(n_keep);
  trace.alpha_draws.reserve(n_keep * state.alphas().size());
  trace.coord_draws.reserve(n_keep * state.coords().size());
  if (scheduler.adaptive()) trace.q_history.push_back({0, scheduler.q()});

  for (int h = 1; h <= cfg.iterations; ++h) {
    const auto alpha_acc = step_alpha(state, net, prior, proposals, rng);
    const auto nodes = scheduler.nodes_for_iteration(rng);
    const auto node_acc = step_nodes(state, net, prior, proposals, nodes, rng);
    scheduler.record(node_acc, state.n_times());

    if (cfg.record_acceptance) {
      for (const auto& a : alpha_acc) trace.alpha_accept.push_back({h, a.index, a.time, a.prob});
      for (const auto& a : node_acc) trace.node_accept.push_back({h, a.index, a.time, a.prob});
    }
    if (cfg.recenter_every > 0 && h % cfg.recenter_every == 0) recenter(state);
    if (scheduler.adaptive() && h % cfg.scan.u == 0) {
      scheduler.adapt();
      trace.q_history.push_back({h, scheduler.q()});
    }
    if (h > cfg.burn_in && (h - cfg.burn_in) % cfg.thinning == 0) {
      trace.kept_iterations.push_back(h);
      trace.alpha_draws.insert(trace.alpha_draws.end(), state.alphas().begin(),
                               state.alphas().end());
      trace.coord_draws.insert(trace.coord_draws.end(), state.coords().begin(),
                               state.coords().end());
    }
  }

  trace.amh_fallbacks = proposals.fallback_count();
  trace.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return trace;
}

}  // namespace mrscan
