#include "mrscan/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "mrscan/diagnostics.hpp"
#include "mrscan/errors.hpp"
#include "mrscan/random.hpp"
#include "mrscan/trace_io.hpp"

namespace mrscan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string lower_dashed(std::string s) {
  for (auto& ch : s) {
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (ch == '_') ch = '-';
  }
  return s;
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <class T>
T parse_suffix(const std::string& name, const std::string& suffix) {
  T v{};
  auto [ptr, ec] = std::from_chars(suffix.data(), suffix.data() + suffix.size(), v);
  if (ec != std::errc() || ptr != suffix.data() + suffix.size())
    throw ConfigError("cannot parse algorithm '" + name + "'");
  return v;
}

}  // namespace

AlgorithmSpec parse_algorithm(const std::string& name, const ScanSettings& base) {
  const std::string key = lower_dashed(name);
  AlgorithmSpec a{"", base};
  a.scan.q0.reset();
  auto starts = [&](const char* p) { return key.rfind(p, 0) == 0; };
  if (key == "gs" || key == "rsg" || key == "amrsg") {
    a.scan.strategy = parse_strategy(key);
    for (auto& ch : a.label = key) ch = static_cast<char>(std::toupper(ch));
  } else if (starts("mrsg-")) {
    const double q = parse_suffix<double>(name, key.substr(5));
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("mrsg probability must lie in (0, 1]");
    a.scan.strategy = ScanStrategy::Mrsg;
    a.scan.q0 = q;
    a.label = "MRSG_" + fmt(q);
  } else if (starts("b-mrsg-") || starts("b-amrsg-")) {
    const bool adaptive = starts("b-amrsg-");
    const int k = parse_suffix<int>(name, key.substr(adaptive ? 8 : 7));
    if (k < 1) throw ConfigError("block count must be positive");
    a.scan.strategy = adaptive ? ScanStrategy::BAmrsg : ScanStrategy::BMrsg;
    a.scan.n_blocks = k;
    a.label = std::string(adaptive ? "B-AMRSG_" : "B-MRSG_") + std::to_string(k);
  } else {
    throw ConfigError("unknown algorithm '" + name + "'");
  }
  return a;
}

std::vector<AlgorithmSpec> default_roster(const ScanSettings& base) {
  std::vector<AlgorithmSpec> out;
  for (const char* n : {"gs", "mrsg-0.25", "mrsg-0.5", "amrsg", "b-mrsg-2", "b-mrsg-4",
                        "b-amrsg-2", "b-amrsg-4"})
    out.push_back(parse_algorithm(n, base));
  return out;
}

void BenchSpec::validate() const {
  if (replications < 1) throw ConfigError("bench.replications must be at least 1");
  if (algorithms.empty()) throw ConfigError("bench needs at least one algorithm");
  if (concurrency < 0) throw ConfigError("bench.concurrency must be non-negative");
  if (timing_runs < 1) throw ConfigError("bench.timing_runs must be at least 1");
  if (!network_file) dgp.validate();
  if (network_file && regenerate_network)
    throw ConfigError("bench.regenerate_network needs a simulated network");
  run.chain.validate();
  run.prior.validate();
}

int BenchSpec::effective_concurrency() const {
  if (concurrency > 0) return concurrency;
  return std::max(1u, std::thread::hardware_concurrency());
}

Summary summarize(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("summarize: no values");
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return {q(0.5), q(0.25), q(0.75)};
}

namespace {

struct Dataset {
  NetworkTensor network;
  std::optional<LatentState> truth;
};

Dataset make_dataset(const BenchSpec& spec, int replication) {
  if (spec.network_file) {
    Dataset d{load_network(*spec.network_file, spec.network_format, spec.load_options), {}};
    if (spec.truth_file) d.truth = load_truth(*spec.truth_file);
    return d;
  }
  DgpSpec dgp = spec.dgp;
  if (spec.regenerate_network) dgp.seed = spec.dgp.seed + static_cast<std::uint64_t>(replication);
  auto data = generate(dgp);
  return {std::move(data.network), std::move(data.truth)};
}

ChainConfig chain_for(const BenchSpec& spec, const AlgorithmSpec& algo, int replication) {
  ChainConfig cfg = spec.run.chain;
  cfg.scan = algo.scan;
  cfg.seed = replication_seed(spec.master_seed, static_cast<std::uint64_t>(replication));
  return cfg;
}

// Runs fn(task) for task in [0, n) on up to `workers` threads.
template <class Fn>
void parallel_for(int n, int workers, Fn fn) {
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

BenchResult run_bench(const BenchSpec& spec) {
  spec.validate();
  const int n_algo = static_cast<int>(spec.algorithms.size());
  const int n_rep = spec.replications;

  // Datasets are shared across algorithms so every algorithm sees the same
  // network in replication r.
  std::vector<std::optional<Dataset>> datasets(
      spec.regenerate_network ? static_cast<std::size_t>(n_rep) : 1);
  for (std::size_t k = 0; k < datasets.size(); ++k)
    datasets[k] = make_dataset(spec, static_cast<int>(k));
  auto dataset_for = [&](int rep) -> const Dataset& {
    return *datasets[spec.regenerate_network ? static_cast<std::size_t>(rep) : 0];
  };

  BenchResult result;
  result.replications.resize(static_cast<std::size_t>(n_algo) * n_rep);
  const int workers = spec.effective_concurrency();

  parallel_for(n_algo * n_rep, workers, [&](int task) {
    const int a = task / n_rep, rep = task % n_rep;
    const auto& algo = spec.algorithms[static_cast<std::size_t>(a)];
    auto& out = result.replications[static_cast<std::size_t>(task)];
    out.algorithm = algo.label;
    out.replication = rep;
    const ChainConfig cfg = chain_for(spec, algo, rep);
    out.seed = cfg.seed;
    try {
      const auto& data = dataset_for(rep);
      ChainTrace trace = run_chain(data.network, spec.run.prior, cfg);
      out.wall_time = trace.wall_time_seconds;
      if (spec.compute_diagnostics) {
        const auto report = diagnose(trace, data.truth ? &*data.truth : nullptr);
        out.ess_fraction = report.ess_fraction_mean;
        out.median_coord_ess = report.median_coord_ess;
        out.mse = report.mse_mean;
        out.variance = report.variance_mean;
      }
      if (spec.write_traces && spec.out_dir)
        write_trace(trace, *spec.out_dir / "traces" / algo.label / ("rep_" + std::to_string(rep + 1)),
                    to_json(RunConfig{cfg, spec.run.prior}));
      out.ok = true;
    } catch (const std::exception& e) {
      out.ok = false;
      out.error = e.what();
    }
  });

  // Solo timing: with one worker each replication already ran alone.
  std::vector<std::vector<double>> solo(static_cast<std::size_t>(n_algo));
  if (workers <= 1) {
    for (const auto& r : result.replications)
      if (r.ok)
        solo[static_cast<std::size_t>(&r - result.replications.data()) / n_rep].push_back(r.wall_time);
  } else {
    for (int a = 0; a < n_algo; ++a)
      for (int k = 0; k < spec.timing_runs; ++k) {
        const int rep = k % n_rep;
        try {
          auto trace = run_chain(dataset_for(rep).network, spec.run.prior,
                                 chain_for(spec, spec.algorithms[static_cast<std::size_t>(a)], rep));
          solo[static_cast<std::size_t>(a)].push_back(trace.wall_time_seconds);
        } catch (const std::exception&) {
          // already reflected in the statistical pass
        }
      }
  }

  for (int a = 0; a < n_algo; ++a) {
    AggregateRow row;
    row.algorithm = spec.algorithms[static_cast<std::size_t>(a)].label;
    std::vector<double> ess_f, ess_med, mse_v, var_v;
    for (int rep = 0; rep < n_rep; ++rep) {
      const auto& r = result.replications[static_cast<std::size_t>(a) * n_rep + rep];
      if (!r.ok) {
        ++row.n_failed;
        continue;
      }
      ++row.n_ok;
      ess_f.push_back(r.ess_fraction);
      ess_med.push_back(r.median_coord_ess);
      var_v.push_back(r.variance);
      if (r.mse) mse_v.push_back(*r.mse);
    }
    result.any_failed = result.any_failed || row.n_failed > 0;
    if (row.n_ok > 0 && !solo[static_cast<std::size_t>(a)].empty()) {
      row.ess_fraction = summarize(ess_f);
      row.median_coord_ess = summarize(ess_med);
      row.variance = summarize(var_v);
      row.wall_time = summarize(solo[static_cast<std::size_t>(a)]);
      const double t = row.wall_time.median;
      std::vector<double> mt, pt;
      for (double m : mse_v) mt.push_back(m * t);
      for (double v : var_v) pt.push_back(v > 0.0 ? 1.0 / v / t : 0.0);
      if (!mse_v.empty()) {
        row.mse = summarize(mse_v);
        row.mse_time = summarize(mt);
      }
      row.precision_time = summarize(pt);
    }
    result.aggregate.push_back(row);
  }
  if (spec.out_dir) write_bench_outputs(result, spec, *spec.out_dir);
  return result;
}

const std::vector<std::string>& environment_dependent_columns() {
  static const std::vector<std::string> cols = {
      "wall_time_median", "wall_time_q25", "wall_time_q75", "mse_time_median", "mse_time_q25",
      "mse_time_q75", "precision_time_median", "precision_time_q25", "precision_time_q75",
      "wall_time"};
  return cols;
}

namespace {

void put_summary(std::ostream& out, const std::optional<Summary>& s) {
  if (s)
    out << ',' << fmt(s->median) << ',' << fmt(s->q25) << ',' << fmt(s->q75);
  else
    out << ",,,";
}

json summary_json(const std::optional<Summary>& s) {
  if (!s) return nullptr;
  return {{"median", s->median}, {"q25", s->q25}, {"q75", s->q75}};
}

}  // namespace

void write_bench_outputs(const BenchResult& result, const BenchSpec& spec, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string());
  {
    std::ofstream out(dir / "aggregate.csv");
    if (!out) throw DataError("cannot write aggregate.csv");
    out << "algorithm,n_ok,n_failed";
    for (const char* m : {"ess_fraction", "median_coord_ess", "mse", "variance", "wall_time",
                          "mse_time", "precision_time"})
      out << ',' << m << "_median," << m << "_q25," << m << "_q75";
    out << '\n';
    for (const auto& row : result.aggregate) {
      out << row.algorithm << ',' << row.n_ok << ',' << row.n_failed;
      const bool any = row.n_ok > 0;
      auto opt = [&](const Summary& s) { return any ? std::optional<Summary>(s) : std::nullopt; };
      put_summary(out, opt(row.ess_fraction));
      put_summary(out, opt(row.median_coord_ess));
      put_summary(out, row.mse);
      put_summary(out, opt(row.variance));
      put_summary(out, opt(row.wall_time));
      put_summary(out, row.mse_time);
      put_summary(out, opt(row.precision_time));
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "per_rep.csv");
    if (!out) throw DataError("cannot write per_rep.csv");
    out << "algorithm,replication,seed,ok,ess_fraction,median_coord_ess,mse,variance,wall_time,error\n";
    for (const auto& r : result.replications) {
      out << r.algorithm << ',' << r.replication + 1 << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ',';
      if (r.ok) {
        out << fmt(r.ess_fraction) << ',' << fmt(r.median_coord_ess) << ','
            << (r.mse ? fmt(*r.mse) : "") << ',' << fmt(r.variance) << ',' << fmt(r.wall_time);
      } else {
        out << ",,,,";
      }
      std::string err = r.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      out << ',' << err << '\n';
    }
  }
  json rows = json::array();
  for (const auto& row : result.aggregate) {
    const bool any = row.n_ok > 0;
    auto opt = [&](const Summary& s) { return any ? std::optional<Summary>(s) : std::nullopt; };
    rows.push_back({{"algorithm", row.algorithm},
                    {"n_ok", row.n_ok},
                    {"n_failed", row.n_failed},
                    {"ess_fraction", summary_json(opt(row.ess_fraction))},
                    {"median_coord_ess", summary_json(opt(row.median_coord_ess))},
                    {"mse", summary_json(row.mse)},
                    {"variance", summary_json(opt(row.variance))},
                    {"wall_time", summary_json(opt(row.wall_time))},
                    {"mse_time", summary_json(row.mse_time)},
                    {"precision_time", summary_json(opt(row.precision_time))}});
  }
  json algos = json::array();
  for (const auto& a : spec.algorithms) algos.push_back(a.label);
  json report = {{"replications", spec.replications},
                 {"master_seed", spec.master_seed},
                 {"concurrency", spec.effective_concurrency()},
                 {"algorithms", algos},
                 {"run", to_json(spec.run)},
                 {"dgp", spec.network_file ? json(nullptr) : to_json(spec.dgp)},
                 {"network_file", spec.network_file ? json(spec.network_file->string()) : json(nullptr)},
                 {"environment_dependent_columns", environment_dependent_columns()},
                 {"any_failed", result.any_failed},
                 {"aggregate", rows}};
  std::ofstream out(dir / "report.json");
  if (!out) throw DataError("cannot write report.json");
  out << report.dump(2) << '\n';
}

const std::set<std::string>& bench_config_keys() {
  static const std::set<std::string> keys = {
      "bench.algorithms",  "bench.replications", "bench.master_seed", "bench.concurrency",
      "bench.timing_runs", "bench.regenerate_network", "bench.network", "bench.network_format",
      "bench.families",    "bench.nodes",        "bench.truth",       "bench.write_traces",
      "bench.node_grid"};
  return keys;
}

BenchSpec build_bench_spec(const ConfigMap& cfg) {
  std::set<std::string> known = run_config_keys();
  known.insert(dgp_config_keys().begin(), dgp_config_keys().end());
  known.insert(bench_config_keys().begin(), bench_config_keys().end());
  cfg.check_known(known);

  BenchSpec spec;
  spec.run = build_run_config(cfg);
  spec.dgp = build_dgp_spec(cfg);
  if (cfg.contains("bench.algorithms")) {
    const auto& list = cfg.at("bench.algorithms");
    if (!list.is_array()) throw ConfigError("bench.algorithms must be an array of names");
    spec.algorithms.clear();
    for (const auto& n : list) {
      if (!n.is_string()) throw ConfigError("bench.algorithms entries must be strings");
      spec.algorithms.push_back(parse_algorithm(n.get<std::string>(), spec.run.chain.scan));
    }
  } else {
    spec.algorithms = default_roster(spec.run.chain.scan);
  }
  spec.replications = cfg.get_int("bench.replications", spec.replications);
  if (cfg.contains("bench.master_seed")) {
    const auto& s = cfg.at("bench.master_seed");
    if (!s.is_number_integer() || s.get<long long>() < 0)
      throw ConfigError("bench.master_seed must be a non-negative integer");
    spec.master_seed = s.get<std::uint64_t>();
  }
  spec.concurrency = cfg.get_int("bench.concurrency", spec.concurrency);
  spec.timing_runs = cfg.get_int("bench.timing_runs", spec.timing_runs);
  spec.regenerate_network = cfg.get_bool("bench.regenerate_network", spec.regenerate_network);
  spec.write_traces = cfg.get_bool("bench.write_traces", spec.write_traces);
  if (cfg.contains("bench.network")) {
    spec.network_file = cfg.get_string("bench.network", "");
    spec.network_format = parse_network_format(cfg.get_string("bench.network_format", "edgelist"));
    if (cfg.contains("bench.families")) {
      const auto& f = cfg.at("bench.families");
      std::vector<std::string> names;
      if (f.is_string()) names.push_back(f.get<std::string>());
      else if (f.is_array())
        for (const auto& x : f) names.push_back(x.get<std::string>());
      else throw ConfigError("bench.families must be a string or an array");
      spec.load_options.families.clear();
      for (const auto& n : names) spec.load_options.families.push_back(WeightFamily{parse_family(n), {}});
    }
    if (cfg.contains("bench.nodes")) spec.load_options.n_nodes = cfg.get_int("bench.nodes", 0);
    if (cfg.contains("bench.truth")) spec.truth_file = cfg.get_string("bench.truth", "");
  }
  spec.validate();
  return spec;
}

std::vector<ScalingRow> scaling_curve(const BenchSpec& base, const std::vector<int>& node_grid) {
  if (node_grid.empty()) throw ConfigError("scaling needs a non-empty node grid");
  if (!std::is_sorted(node_grid.begin(), node_grid.end()))
    throw ConfigError("scaling node grid must be sorted ascending");
  if (base.network_file) throw ConfigError("scaling requires a simulated network");
  std::vector<ScalingRow> rows;
  for (int n : node_grid) {
    BenchSpec spec = base;
    spec.dgp.n_nodes = n;
    spec.compute_diagnostics = false;
    spec.out_dir.reset();
    spec.write_traces = false;
    const auto result = run_bench(spec);
    const double first = result.aggregate.front().n_ok > 0 ? result.aggregate.front().wall_time.median
                                                            : std::nan("");
    for (const auto& agg : result.aggregate) {
      ScalingRow row{n, agg.algorithm, agg.wall_time, std::nan(""), agg.n_failed};
      if (agg.n_ok > 0) row.ratio_to_first = agg.wall_time.median / first;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_scaling_csv(const std::vector<ScalingRow>& rows, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "nodes,algorithm,wall_time_median,wall_time_q25,wall_time_q75,ratio_to_first,n_failed\n";
  for (const auto& r : rows)
    out << r.n_nodes << ',' << r.algorithm << ',' << fmt(r.wall_time.median) << ','
        << fmt(r.wall_time.q25) << ',' << fmt(r.wall_time.q75) << ',' << fmt(r.ratio_to_first)
        << ',' << r.n_failed << '\n';
}

}  // namespace mrscan
