#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mrscan/model.hpp"
#include "mrscan/network.hpp"
#include "mrscan/random.hpp"

namespace mrscan {

enum class Layout { Circle, RandomPrior };

struct DgpSpec {
  Layout layout = Layout::Circle;
  int n_nodes = 120;
  int dim = 2;
  int n_layers = 1;
  int n_times = 1;
  // Intercepts in (layer, time) order; a single value is broadcast.
  std::vector<double> alpha{5.0};
  // One family per layer; a single entry is broadcast.
  std::vector<WeightFamily> families{WeightFamily{FamilyKind::PoissonLog, {}}};
  double sigma2_eps = 0.01;
  double radius = 1.0;
  std::uint64_t seed = 1;

  // Throws ConfigError on inconsistent settings.
  void validate() const;
  double alpha_at(int layer, int time) const;
  WeightFamily family_at(int layer) const;
};

// Named settings: circular-poisson, random-bernoulli, multilayer-temporal.
DgpSpec dgp_preset(const std::string& name);
std::vector<std::string> dgp_preset_names();

// True coordinates (and intercepts) of the DGP. Circle places nodes at
// equally spaced angles 2*pi*i/N; RandomPrior draws x_i ~ N(0, I_d). Later
// time slices follow a random walk with N(0, sigma2_eps I_d) increments.
LatentState gen_coords(const DgpSpec& spec, Rng& rng);

// Independent weights for every pair, layer and time, with squared
// Euclidean distance in the linear predictor.
NetworkTensor simulate_weights(const LatentState& truth, const DgpSpec& spec, Rng& rng);

struct SyntheticData {
  LatentState truth;
  NetworkTensor network;
};

// gen_coords and simulate_weights from a single stream seeded by spec.seed.
SyntheticData generate(const DgpSpec& spec);

// truth.csv: `param,index,time,dim,value`, 1-based; param is x or alpha
// (dim is 0 for alpha rows).
void save_truth(const LatentState& truth, const std::filesystem::path& path);
LatentState load_truth(const std::filesystem::path& path);

}  // namespace mrscan
