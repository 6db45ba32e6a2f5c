#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mrscan {

enum class FamilyKind { BernoulliLogit, PoissonLog };

struct WeightFamily {
  FamilyKind kind = FamilyKind::PoissonLog;
  // Reserved for an overdispersion parameter; neither in-scope family reads it.
  std::optional<double> dispersion;

  bool admits(double y) const;
};

std::string to_string(FamilyKind kind);
FamilyKind parse_family(const std::string& name);

struct Neighbor {
  int node;
  double weight;
};

// One nonzero weight of an undirected pair, 0-based, i < j.
struct EdgeRecord {
  int i;
  int j;
  int layer;
  int time;
  double weight;
};

// Observed weights of a node-aligned, undirected, multi-layer temporal
// network. Absent pairs have weight 0. Immutable once built.
class NetworkTensor {
 public:
  int n_nodes() const { return n_nodes_; }
  int n_layers() const { return static_cast<int>(times_per_layer_.size()); }
  int n_times(int layer) const { return times_per_layer_.at(layer); }
  // Largest T_r across layers; the latent state carries this many slices.
  int max_times() const { return max_times_; }
  bool has_slice(int layer, int time) const {
    return time >= 0 && time < times_per_layer_[layer];
  }
  const WeightFamily& family(int layer) const { return families_.at(layer); }
  const std::vector<WeightFamily>& families() const { return families_; }

  double weight(int i, int j, int layer, int time) const;

  // Nonzero neighbours of node i in slice (layer, time), ascending by node.
  std::span<const Neighbor> neighbors(int i, int layer, int time) const {
    return slices_[slice_index(layer, time)].adjacency[i];
  }

  // Nonzero pairs (i < j) of one slice, in (i, j) order.
  std::span<const EdgeRecord> edges(int layer, int time) const {
    return slices_[slice_index(layer, time)].edges;
  }

  std::size_t n_edges() const;

 private:
  friend class NetworkBuilder;

  struct Slice {
    std::vector<std::vector<Neighbor>> adjacency;
    std::vector<EdgeRecord> edges;
  };

  std::size_t slice_index(int layer, int time) const {
    return layer_offsets_[layer] + static_cast<std::size_t>(time);
  }

  int n_nodes_ = 0;
  int max_times_ = 0;
  std::vector<int> times_per_layer_;
  std::vector<std::size_t> layer_offsets_;
  std::vector<WeightFamily> families_;
  std::vector<Slice> slices_;
};

// Collects weights and validates them against the declared shape.
// Every method takes 0-based indices.
class NetworkBuilder {
 public:
  NetworkBuilder(int n_nodes, std::vector<int> times_per_layer,
                 std::vector<WeightFamily> families);

  // Throws DataError on self-loops, out-of-range indices, inadmissible
  // weights and repeated (pair, layer, time) entries. Zero weights are
  // accepted and stored as absent.
  NetworkBuilder& add(int i, int j, int layer, int time, double weight);

  NetworkTensor build() &&;

 private:
  int n_nodes_;
  std::vector<int> times_per_layer_;
  std::vector<WeightFamily> families_;
  std::vector<EdgeRecord> edges_;
};

enum class NetworkFormat { EdgeListCsv, DenseCsv };

NetworkFormat parse_network_format(const std::string& name);

struct LoadOptions {
  // Families per layer; a single entry is broadcast to every layer.
  std::vector<WeightFamily> families;
  // Node count. Inferred from the largest index (edge list) or the matrix
  // size (dense) when absent.
  std::optional<int> n_nodes;
};

NetworkTensor load_network(const std::filesystem::path& path, NetworkFormat format,
                           const LoadOptions& options);

void save_network(const NetworkTensor& net, const std::filesystem::path& path,
                  NetworkFormat format);

// Total strength of each node, summed over partners, layers and times.
std::vector<double> degree_stats(const NetworkTensor& net);

}  // namespace mrscan
