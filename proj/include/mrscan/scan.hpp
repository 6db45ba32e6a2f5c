#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mrscan/network.hpp"
#include "mrscan/random.hpp"

namespace mrscan {

inline constexpr double kDefaultEpsilon = 0.01;

// Independent Bernoulli(q_i) inclusion, the whole vector redrawn until at
// least one index is selected. Returns the selected indices in ascending
// order. Entries with q_i >= 1 are included without consuming randomness.
std::vector<int> draw_index_set(std::span<const double> q, Rng& rng);

// Flipped-logistic selection probability 1 / (1 + exp(abar - target + c)),
// clamped to [epsilon, 1].
double update_selection_prob(double abar, double target, double c,
                             double epsilon = kDefaultEpsilon);

// (1 - b) * q_prev + b * q_star, clamped to [epsilon, 1].
double damped_update(double q_prev, double q_star, double b, double epsilon = kDefaultEpsilon);

// l1 normalisation. Throws std::invalid_argument if any entry is negative
// or non-finite, or if every entry is zero.
std::vector<double> normalize_block_probs(std::span<const double> q);

// Node-to-block assignment; blocks are non-empty and cover every node.
class BlockPartition {
 public:
  // `assignment[i]` is the 0-based block of node i. Throws
  // std::invalid_argument on empty blocks or out-of-range labels.
  BlockPartition(std::vector<int> assignment, int n_blocks);

  int n_blocks() const { return static_cast<int>(members_.size()); }
  int n_nodes() const { return static_cast<int>(assignment_.size()); }
  int block_of(int node) const { return assignment_[node]; }
  // Nodes of block k in ascending order.
  const std::vector<int>& members(int k) const { return members_[k]; }
  const std::vector<int>& assignment() const { return assignment_; }

 private:
  std::vector<int> assignment_;
  std::vector<std::vector<int>> members_;
};

// Sorts nodes by total strength (descending, ties by index) and cuts the
// ranking into K contiguous groups of near-equal size, so block 0 holds the
// core. Throws std::invalid_argument unless 1 <= K <= N.
BlockPartition build_partition_heuristic(const NetworkTensor& net, int n_blocks);

// Reads a `node,block` CSV (1-based, with header). Throws DataError.
BlockPartition load_partition(const std::filesystem::path& path, int n_nodes);

enum class Damping { None, OneOverH };

std::string to_string(Damping damping);
Damping parse_damping(const std::string& name);

// Per-target adaptation of selection probabilities from windowed
// acceptance rates.
class SelectionAdapter {
 public:
  struct Settings {
    double target = 0.234;
    double c = 0.0;
    double epsilon = kDefaultEpsilon;
    Damping damping = Damping::OneOverH;
    double damping_numerator = 10.0;  // b_k = min(1, numerator / k)
  };

  SelectionAdapter(std::vector<double> q0, Settings settings);

  // Records the acceptance rate of a target selected in this iteration.
  void record(int target, double accept_rate);

  // Closes the window: targets with at least one recorded rate get a new
  // probability; the others keep theirs. Clears the window.
  void adapt();

  const std::vector<double>& q() const { return q_; }
  // Number of completed adaptation steps.
  long steps() const { return steps_; }
  // Damping weight b_k used by adaptation step k (1-based).
  double damping_weight(long k) const;
  // Window mean acceptance of a target, or a negative value if unselected.
  double window_mean(int target) const;

 private:
  std::vector<double> q_;
  Settings settings_;
  std::vector<double> window_sum_;
  std::vector<long> window_count_;
  long steps_ = 0;
};

}  // namespace mrscan
