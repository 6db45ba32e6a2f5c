#pragma once

#include <cstdint>
#include <random>

namespace mrscan {

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// A fresh distribution per call keeps draws independent of any cached
// second variate, so the stream position depends only on the call count.
inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

// Stream for replication `index` of a batch seeded with `master_seed`.
inline std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t index) {
  return master_seed + index;
}

}  // namespace mrscan
