#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrscan/config.hpp"
#include "mrscan/network.hpp"
#include "mrscan/sampler.hpp"
#include "mrscan/synth.hpp"

namespace mrscan {

struct AlgorithmSpec {
  std::string label;
  ScanSettings scan;
};

// Accepts gs, rsg, amrsg, mrsg-<q>, b-mrsg-<K>, b-amrsg-<K> (case-insensitive,
// '_' and '-' interchangeable). Remaining scan settings come from `base`.
AlgorithmSpec parse_algorithm(const std::string& name, const ScanSettings& base = {});

// GS, MRSG 0.25, MRSG 0.5, AMRSG, B-MRSG 2/4, B-AMRSG 2/4.
std::vector<AlgorithmSpec> default_roster(const ScanSettings& base = {});

struct BenchSpec {
  std::vector<AlgorithmSpec> algorithms = default_roster();
  int replications = 20;
  DgpSpec dgp;
  // When set, the network is read from file instead of simulated; MSE needs
  // `truth_file`.
  std::optional<std::filesystem::path> network_file;
  NetworkFormat network_format = NetworkFormat::EdgeListCsv;
  LoadOptions load_options;
  std::optional<std::filesystem::path> truth_file;
  bool regenerate_network = false;  // dgp seed + replication index per replication
  RunConfig run;                    // chain settings; chain.seed is ignored
  std::uint64_t master_seed = 1;
  int concurrency = 0;  // 0: hardware concurrency
  // Solo timing runs per algorithm when concurrency > 1. With concurrency 1
  // every replication is already a solo run and its time is used directly.
  int timing_runs = 1;
  bool compute_diagnostics = true;
  std::optional<std::filesystem::path> out_dir;
  bool write_traces = false;

  void validate() const;
  int effective_concurrency() const;
};

struct ReplicationResult {
  std::string algorithm;
  int replication = 0;  // 0-based
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double ess_fraction = 0.0;
  double median_coord_ess = 0.0;
  std::optional<double> mse;
  double variance = 0.0;
  double wall_time = 0.0;  // as measured for this replication
};

struct Summary {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

// Linear-interpolation quantiles. Throws std::invalid_argument when empty.
Summary summarize(std::vector<double> values);

struct AggregateRow {
  std::string algorithm;
  int n_ok = 0;
  int n_failed = 0;
  Summary ess_fraction;
  Summary median_coord_ess;
  std::optional<Summary> mse;
  Summary variance;
  Summary wall_time;  // solo timing
  std::optional<Summary> mse_time;
  Summary precision_time;
};

struct BenchResult {
  std::vector<ReplicationResult> replications;  // algorithm-major
  std::vector<AggregateRow> aggregate;          // roster order
  bool any_failed = false;
};

BenchResult run_bench(const BenchSpec& spec);

// aggregate.csv, per_rep.csv and report.json.
void write_bench_outputs(const BenchResult& result, const BenchSpec& spec,
                         const std::filesystem::path& dir);

// Columns whose values depend on the machine; excluded from determinism checks.
const std::vector<std::string>& environment_dependent_columns();

// Reads bench.* and dgp.* on top of the run configuration keys.
BenchSpec build_bench_spec(const ConfigMap& config);
const std::set<std::string>& bench_config_keys();

struct ScalingRow {
  int n_nodes = 0;
  std::string algorithm;
  Summary wall_time;
  double ratio_to_first = 0.0;  // median time over the first algorithm's
  int n_failed = 0;
};

// Runs `base` once per node count (sorted ascending) with diagnostics off.
std::vector<ScalingRow> scaling_curve(const BenchSpec& base, const std::vector<int>& node_grid);
void write_scaling_csv(const std::vector<ScalingRow>& rows, const std::filesystem::path& path);

}  // namespace mrscan
