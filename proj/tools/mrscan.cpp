// mrscan: simulate latent-space networks, fit them with adaptive random-scan
// samplers, and benchmark scan strategies.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrscan/bench.hpp"
#include "mrscan/config.hpp"
#include "mrscan/diagnostics.hpp"
#include "mrscan/errors.hpp"
#include "mrscan/network.hpp"
#include "mrscan/sampler.hpp"
#include "mrscan/synth.hpp"
#include "mrscan/trace_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mrscan;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

struct CommonOpts {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool out_required = true) {
  cmd->add_option("--config", o.config_file, "JSON config file (nested or dotted keys)");
  cmd->add_option("--set", o.overrides, "Override a config key, e.g. --set scan.u=50");
  auto* out = cmd->add_option("--out", o.out, "Output directory");
  if (out_required) out->required();
}

ConfigMap load_config(const CommonOpts& o) {
  ConfigMap cfg = o.config_file.empty() ? ConfigMap{} : ConfigMap::from_file(o.config_file);
  for (const auto& s : o.overrides) cfg.apply_override(s);
  return cfg;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

std::string num(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

void write_diagnostics(const DiagnosticsReport& rep, const fs::path& dir) {
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "params.csv");
    out << "param,ess,ess_fraction,variance,mse\n";
    for (const auto* group : {&rep.coords, &rep.alphas})
      for (const auto& p : *group)
        out << '"' << p.name << "\"," << num(p.ess) << ',' << num(p.ess_fraction) << ','
            << num(p.variance) << ',' << (p.mse ? num(*p.mse) : "") << '\n';
  }
  {
    auto out = open_out(dir / "by_dim.csv");
    out << "dim,ess_fraction,variance,mse\n";
    for (std::size_t k = 0; k < rep.ess_fraction_by_dim.size(); ++k)
      out << k + 1 << ',' << num(rep.ess_fraction_by_dim[k]) << ',' << num(rep.variance_by_dim[k])
          << ',' << (k < rep.mse_by_dim.size() ? num(rep.mse_by_dim[k]) : "") << '\n';
  }
  {
    auto out = open_out(dir / "ks.csv");
    out << "dim,window,d,critical,pass\n";
    for (std::size_t k = 0; k < rep.ks_by_dim.size(); ++k)
      for (const auto& w : rep.ks_by_dim[k])
        out << k + 1 << ',' << w.window << ',' << num(w.d) << ',' << num(w.critical) << ','
            << (w.pass ? 1 : 0) << '\n';
  }
  json ks = json::array();
  for (const auto& seq : rep.ks_by_dim) {
    json s = json::array();
    for (const auto& w : seq)
      s.push_back({{"window", w.window}, {"d", w.d}, {"critical", w.critical}, {"pass", w.pass}});
    ks.push_back(s);
  }
  auto nan_null = [](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(std::isfinite(x) ? json(x) : json(nullptr));
    return a;
  };
  json report = {{"n_draws", rep.n_draws},
                 {"ess_fraction_mean", rep.ess_fraction_mean},
                 {"median_coord_ess", rep.median_coord_ess},
                 {"mse_mean", rep.mse_mean ? json(*rep.mse_mean) : json(nullptr)},
                 {"variance_mean", rep.variance_mean},
                 {"ess_fraction_by_dim", rep.ess_fraction_by_dim},
                 {"mse_by_dim", rep.mse_by_dim},
                 {"variance_by_dim", rep.variance_by_dim},
                 {"ks_by_dim", ks},
                 {"alpha_acceptance_means", nan_null(rep.alpha_acceptance_means)},
                 {"node_acceptance_means", nan_null(rep.node_acceptance_means)},
                 {"runtime_seconds", rep.runtime_seconds}};
  open_out(dir / "report.json") << report.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive random-scan samplers for latent-space network models"};
  app.require_subcommand(1);

  // generate
  CommonOpts gen_opts;
  std::string gen_preset;
  std::optional<int> gen_nodes;
  std::optional<std::uint64_t> gen_seed;
  auto* gen = app.add_subcommand("generate", "Simulate a network with known latent truth");
  add_common(gen, gen_opts);
  gen->add_option("--preset", gen_preset, "circular-poisson | random-bernoulli | multilayer-temporal");
  gen->add_option("--nodes", gen_nodes, "Number of nodes");
  gen->add_option("--seed", gen_seed, "DGP seed");

  // fit
  CommonOpts fit_opts;
  std::string fit_network, fit_format = "edgelist";
  std::vector<std::string> fit_families{"poisson"};
  std::optional<int> fit_nodes;
  std::optional<std::uint64_t> fit_seed;
  std::string fit_strategy;
  std::optional<int> fit_iterations;
  auto* fit = app.add_subcommand("fit", "Run one chain on a network file and write its trace");
  add_common(fit, fit_opts);
  fit->add_option("--network", fit_network, "Network file")->required();
  fit->add_option("--format", fit_format, "edgelist | dense");
  fit->add_option("--family", fit_families, "Family per layer (poisson | bernoulli); one value is broadcast");
  fit->add_option("--nodes", fit_nodes, "Node count when isolated nodes are missing from the file");
  fit->add_option("--seed", fit_seed, "Chain seed (chain.seed)");
  fit->add_option("--strategy", fit_strategy, "Scan strategy (scan.strategy)");
  fit->add_option("--iterations", fit_iterations, "Iterations (chain.iterations)");

  // diagnose
  std::string diag_trace, diag_truth, diag_out;
  DiagnosticsOptions diag_opts;
  auto* diag = app.add_subcommand("diagnose", "Compute ESS, MSE, variance and KS sequences for a trace");
  diag->add_option("--trace", diag_trace, "Trace directory written by fit")->required();
  diag->add_option("--truth", diag_truth, "truth.csv for MSE");
  diag->add_flag("--procrustes", diag_opts.procrustes, "Align draws to the truth before MSE");
  diag->add_option("--ks-window", diag_opts.ks_window, "KS window length");
  diag->add_option("--ks-thin", diag_opts.ks_thin, "KS thinning");
  diag->add_option("--out", diag_out, "Output directory")->required();

  // bench
  CommonOpts bench_opts;
  std::optional<int> bench_reps, bench_conc;
  auto* bench = app.add_subcommand("bench", "Replicated comparison of scan strategies");
  add_common(bench, bench_opts);
  bench->add_option("--replications", bench_reps, "Replications (bench.replications)");
  bench->add_option("--concurrency", bench_conc, "Worker threads (bench.concurrency)");

  // scaling
  CommonOpts scal_opts;
  std::vector<int> scal_grid;
  auto* scal = app.add_subcommand("scaling", "Median wall time per algorithm over a node grid");
  add_common(scal, scal_opts);
  scal->add_option("--node-grid", scal_grid, "Node counts, ascending (bench.node_grid)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      ConfigMap cfg = load_config(gen_opts);
      cfg.check_known(dgp_config_keys());
      if (!gen_preset.empty()) cfg.set("dgp.preset", gen_preset);
      if (gen_nodes) cfg.set("dgp.nodes", *gen_nodes);
      if (gen_seed) cfg.set("dgp.seed", *gen_seed);
      const DgpSpec spec = build_dgp_spec(cfg);
      const auto data = generate(spec);
      const fs::path dir = gen_opts.out;
      fs::create_directories(dir);
      save_network(data.network, dir / "network.csv", NetworkFormat::EdgeListCsv);
      save_truth(data.truth, dir / "truth.csv");
      open_out(dir / "dgp.json") << to_json(spec).dump(2) << '\n';
      std::cout << "wrote " << data.network.n_edges() << " edges for " << spec.n_nodes
                << " nodes to " << dir.string() << '\n';
      return 0;
    }
    if (*fit) {
      ConfigMap cfg = load_config(fit_opts);
      cfg.check_known(run_config_keys());
      if (fit_seed) cfg.set("chain.seed", *fit_seed);
      if (!fit_strategy.empty()) cfg.set("scan.strategy", fit_strategy);
      if (fit_iterations) cfg.set("chain.iterations", *fit_iterations);
      const RunConfig rc = build_run_config(cfg);
      LoadOptions lo;
      lo.families.clear();
      for (const auto& f : fit_families) lo.families.push_back(WeightFamily{parse_family(f), {}});
      lo.n_nodes = fit_nodes;
      const auto net = load_network(fit_network, parse_network_format(fit_format), lo);
      const ChainTrace trace = run_chain(net, rc.prior, rc.chain);
      write_trace(trace, fit_opts.out, to_json(rc));
      std::cout << "kept " << trace.n_kept() << " draws in " << trace.wall_time_seconds << " s\n";
      return 0;
    }
    if (*diag) {
      const ChainTrace trace = read_trace(diag_trace);
      std::optional<LatentState> truth;
      if (!diag_truth.empty()) truth = load_truth(diag_truth);
      const auto rep = diagnose(trace, truth ? &*truth : nullptr, diag_opts);
      write_diagnostics(rep, diag_out);
      std::cout << "ESS fraction " << rep.ess_fraction_mean << ", median ESS "
                << rep.median_coord_ess << '\n';
      return 0;
    }
    if (*bench || *scal) {
      const CommonOpts& o = *bench ? bench_opts : scal_opts;
      ConfigMap cfg = load_config(o);
      if (bench_reps) cfg.set("bench.replications", *bench_reps);
      if (bench_conc) cfg.set("bench.concurrency", *bench_conc);
      if (!scal_grid.empty()) cfg.set("bench.node_grid", scal_grid);
      BenchSpec spec = build_bench_spec(cfg);
      if (*bench) {
        spec.out_dir = fs::path(o.out);
        const auto result = run_bench(spec);
        for (const auto& row : result.aggregate)
          std::cout << row.algorithm << ": ok " << row.n_ok << ", failed " << row.n_failed
                    << ", median time " << row.wall_time.median << " s\n";
        return result.any_failed ? kExitRuntime : 0;
      }
      std::vector<int> grid{30, 60, 120};
      if (cfg.contains("bench.node_grid")) grid = cfg.at("bench.node_grid").get<std::vector<int>>();
      const auto rows = scaling_curve(spec, grid);
      write_scaling_csv(rows, fs::path(o.out) / "scaling.csv");
      bool failed = false;
      for (const auto& r : rows) failed = failed || r.n_failed > 0;
      return failed ? kExitRuntime : 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
