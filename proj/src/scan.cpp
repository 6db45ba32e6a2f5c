#include "mrscan/scan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mrscan/errors.hpp"

namespace mrscan {

std::vector<int> draw_index_set(std::span<const double> q, Rng& rng) {
  if (q.empty()) throw std::invalid_argument("draw_index_set: empty probability vector");
  if (std::none_of(q.begin(), q.end(), [](double p) { return p > 0.0; }))
    throw std::invalid_argument("draw_index_set: every selection probability is zero");
  std::vector<int> selected;
  selected.reserve(q.size());
  while (selected.empty()) {
    for (std::size_t i = 0; i < q.size(); ++i)
      if (q[i] >= 1.0 || uniform01(rng) < q[i]) selected.push_back(static_cast<int>(i));
  }
  return selected;
}

double update_selection_prob(double abar, double target, double c, double epsilon) {
  const double q = 1.0 / (1.0 + std::exp(abar - target + c));
  return std::clamp(q, epsilon, 1.0);
}

double damped_update(double q_prev, double q_star, double b, double epsilon) {
  return std::clamp((1.0 - b) * q_prev + b * q_star, epsilon, 1.0);
}

std::vector<double> normalize_block_probs(std::span<const double> q) {
  double total = 0.0;
  for (double v : q) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("block probabilities must be finite and non-negative");
    total += v;
  }
  if (!(total > 0.0)) throw std::invalid_argument("cannot normalise an all-zero vector");
  std::vector<double> out(q.begin(), q.end());
  for (auto& v : out) v /= total;
  return out;
}

BlockPartition::BlockPartition(std::vector<int> assignment, int n_blocks)
    : assignment_(std::move(assignment)) {
  if (n_blocks < 1) throw std::invalid_argument("partition needs at least one block");
  members_.resize(static_cast<std::size_t>(n_blocks));
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    const int k = assignment_[i];
    if (k < 0 || k >= n_blocks)
      throw std::invalid_argument("node " + std::to_string(i + 1) + " assigned to block " +
                                  std::to_string(k + 1) + " outside 1.." +
                                  std::to_string(n_blocks));
    members_[k].push_back(static_cast<int>(i));
  }
  for (int k = 0; k < n_blocks; ++k)
    if (members_[k].empty())
      throw std::invalid_argument("block " + std::to_string(k + 1) + " is empty");
}

BlockPartition build_partition_heuristic(const NetworkTensor& net, int n_blocks) {
  const int n = net.n_nodes();
  if (n_blocks < 1 || n_blocks > n)
    throw std::invalid_argument("block count K=" + std::to_string(n_blocks) +
                                " must lie in 1..N=" + std::to_string(n));
  const auto strength = degree_stats(net);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return strength[a] > strength[b]; });
  std::vector<int> assignment(static_cast<std::size_t>(n));
  // Block k takes ranks [k*N/K, (k+1)*N/K).
  for (int rank = 0; rank < n; ++rank)
    assignment[order[rank]] = static_cast<int>((static_cast<long>(rank) * n_blocks) / n);
  return BlockPartition(std::move(assignment), n_blocks);
}

BlockPartition load_partition(const std::filesystem::path& path, int n_nodes) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open partition file " + path.string());
  std::vector<int> assignment(static_cast<std::size_t>(n_nodes), -1);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  int max_block = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!header) {
      header = true;
      if (line.rfind("node", 0) == 0) continue;
    }
    std::istringstream ss(line);
    int node = 0, block = 0;
    char comma = 0;
    if (!(ss >> node >> comma >> block) || comma != ',')
      throw DataError("partition line " + std::to_string(line_no) + ": expected 'node,block'");
    if (node < 1 || node > n_nodes)
      throw DataError("partition line " + std::to_string(line_no) + ": node out of range");
    if (block < 1) throw DataError("partition line " + std::to_string(line_no) + ": block < 1");
    if (assignment[node - 1] != -1)
      throw DataError("partition line " + std::to_string(line_no) + ": node listed twice");
    assignment[node - 1] = block - 1;
    max_block = std::max(max_block, block);
  }
  for (int i = 0; i < n_nodes; ++i)
    if (assignment[i] < 0) throw DataError("partition file omits node " + std::to_string(i + 1));
  try {
    return BlockPartition(std::move(assignment), max_block);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid partition: ") + e.what());
  }
}

std::string to_string(Damping damping) {
  return damping == Damping::None ? "none" : "one_over_h";
}

Damping parse_damping(const std::string& name) {
  if (name == "none") return Damping::None;
  if (name == "one_over_h") return Damping::OneOverH;
  throw ConfigError("unknown scan.damping '" + name + "' (expected none or one_over_h)");
}

SelectionAdapter::SelectionAdapter(std::vector<double> q0, Settings settings)
    : q_(std::move(q0)),
      settings_(settings),
      window_sum_(q_.size(), 0.0),
      window_count_(q_.size(), 0) {
  for (auto& q : q_) q = std::clamp(q, settings_.epsilon, 1.0);
}

void SelectionAdapter::record(int target, double accept_rate) {
  window_sum_[target] += accept_rate;
  ++window_count_[target];
}

double SelectionAdapter::damping_weight(long k) const {
  if (settings_.damping == Damping::None) return 1.0;
  return std::min(1.0, settings_.damping_numerator / static_cast<double>(k));
}

double SelectionAdapter::window_mean(int target) const {
  return window_count_[target] > 0 ? window_sum_[target] / window_count_[target] : -1.0;
}

void SelectionAdapter::adapt() {
  ++steps_;
  const double b = damping_weight(steps_);
  for (std::size_t i = 0; i < q_.size(); ++i) {
    if (window_count_[i] == 0) continue;
    const double abar = window_sum_[i] / static_cast<double>(window_count_[i]);
    const double q_star = update_selection_prob(abar, settings_.target, settings_.c,
                                                settings_.epsilon);
    q_[i] = settings_.damping == Damping::None
                ? q_star
                : damped_update(q_[i], q_star, b, settings_.epsilon);
  }
  std::fill(window_sum_.begin(), window_sum_.end(), 0.0);
  std::fill(window_count_.begin(), window_count_.end(), 0);
}

}  // namespace mrscan
