#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrscan/model.hpp"
#include "mrscan/network.hpp"
#include "mrscan/proposals.hpp"
#include "mrscan/random.hpp"
#include "mrscan/scan.hpp"

namespace mrscan {

enum class ScanStrategy { Gs, Rsg, Mrsg, Amrsg, BMrsg, BAmrsg };

std::string to_string(ScanStrategy strategy);
ScanStrategy parse_strategy(const std::string& name);
bool is_adaptive(ScanStrategy strategy);
bool is_block(ScanStrategy strategy);

struct ScanSettings {
  ScanStrategy strategy = ScanStrategy::Gs;
  // Initial selection probability. Unset: 0.5 for mrsg, 1.0 for amrsg (the
  // first window is a full sweep) and equal weights for block strategies.
  std::optional<double> q0;
  int u = 100;       // iterations between selection-probability updates
  double c = 0.0;    // shift of the flipped logistic
  double epsilon = kDefaultEpsilon;
  int n_blocks = 2;  // K, block strategies only
  std::string partition_file;  // optional node,block CSV; overrides K
  Damping damping = Damping::OneOverH;
  int sub_iterations = 0;  // RSG sub-iterations V; 0 means N

  double initial_q() const;
};

// Prior: coordinates drawn from the prior. Pilot: a short systematic-scan
// run on the first time slice, copied to every slice, so all slices start
// with one orientation.
enum class StartMode { Prior, Pilot };

std::string to_string(StartMode mode);
StartMode parse_start_mode(const std::string& name);

struct ChainConfig {
  int dim = 2;
  int iterations = 5000;
  int burn_in = 0;
  int thinning = 1;
  std::uint64_t seed = 1;
  int recenter_every = 10;  // 0 disables recentering
  bool record_acceptance = true;
  StartMode start = StartMode::Prior;
  int pilot_iterations = 1000;
  ScanSettings scan;
  AmhSettings amh;

  // Throws ConfigError on inconsistent settings.
  void validate() const;
};

struct AcceptRecord {
  int iteration;  // 1-based
  int index;      // layer (alpha) or node
  int time;
  double prob;
};

struct QSnapshot {
  int iteration;  // 0 for the initial probabilities
  std::vector<double> q;
};

struct ChainTrace {
  int dim = 0;
  int n_nodes = 0;
  int n_times = 0;
  int n_layers = 0;
  std::vector<int> kept_iterations;
  // Per kept draw: intercepts in (layer, time) order.
  std::vector<double> alpha_draws;
  // Per kept draw: coordinates in (time, node, dim) order.
  std::vector<double> coord_draws;
  std::vector<AcceptRecord> alpha_accept;
  std::vector<AcceptRecord> node_accept;
  // Raw selection probabilities (per node, or per block) at each adaptation.
  std::vector<QSnapshot> q_history;
  double wall_time_seconds = 0.0;
  std::uint64_t rng_seed = 0;
  long amh_fallbacks = 0;

  std::size_t n_kept() const { return kept_iterations.size(); }
  std::vector<double> coord_chain(int node, int time, int k) const;
  std::vector<double> alpha_chain(int layer, int time) const;

  // Equality of everything except the wall-clock time.
  bool same_draws(const ChainTrace& other) const;
};

struct MhResult {
  bool accepted;
  double accept_prob;
};

// Metropolis-Hastings decision on log scale. A NaN ratio is rejected with
// a warning.
MhResult mh_accept(double logpost_candidate, double logpost_current, double log_q_ratio, Rng& rng);

// One adaptive proposal state per intercept (layer, time) and per node
// coordinate (node, time).
class ProposalBank {
 public:
  ProposalBank(const AmhSettings& settings, int dim, int n_nodes, int n_times, int n_layers);

  ProposalState& alpha(int r, int t) { return alpha_[static_cast<std::size_t>(r * n_times_ + t)]; }
  ProposalState& node(int i, int t) {
    return nodes_[static_cast<std::size_t>(t) * n_nodes_ + static_cast<std::size_t>(i)];
  }
  long fallback_count() const;

 private:
  int n_nodes_;
  int n_times_;
  std::vector<ProposalState> alpha_;
  std::vector<ProposalState> nodes_;
};

struct StepAcceptance {
  int index;  // layer or node
  int time;
  double prob;
};

// One adaptive MH update of every observed intercept, layers then times.
std::vector<StepAcceptance> step_alpha(LatentState& state, const NetworkTensor& net,
                                       const PriorSpec& prior, ProposalBank& proposals, Rng& rng);

// One adaptive MH update of x_{it} for every node in `index_set` (ascending)
// and every time slice (ascending). Other nodes are untouched.
std::vector<StepAcceptance> step_nodes(LatentState& state, const NetworkTensor& net,
                                       const PriorSpec& prior, ProposalBank& proposals,
                                       std::span<const int> index_set, Rng& rng);

// Coordinates from the prior (random walk across time), intercepts at the
// prior mean.
LatentState initial_state(const NetworkTensor& net, const PriorSpec& prior, int dim, Rng& rng);

// Final state of a pilot chain on slice t = 0 of every layer, with its
// coordinates and intercepts repeated across time.
LatentState pilot_state(const NetworkTensor& net, const PriorSpec& prior, const ChainConfig& cfg,
                        Rng& rng);

// Runs one chain. When `start` is given it replaces the prior draw.
ChainTrace run_chain(const NetworkTensor& net, const PriorSpec& prior, const ChainConfig& cfg,
                     std::optional<LatentState> start = std::nullopt);

}  // namespace mrscan
