#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mrscan/bench.hpp"
#include "mrscan/config.hpp"
#include "mrscan/diagnostics.hpp"
#include "mrscan/errors.hpp"
#include "mrscan/trace_io.hpp"

using namespace mrscan;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("mrscan_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MRSCAN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

// Drops machine-dependent columns so two runs can be compared.
std::vector<std::vector<std::string>> stable_columns(const std::vector<std::vector<std::string>>& rows) {
  const auto& drop = environment_dependent_columns();
  std::vector<bool> keep;
  for (const auto& h : rows.at(0)) {
    bool env = false;
    for (const auto& d : drop) env |= h.rfind(d, 0) == 0;
    keep.push_back(!env);
  }
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rows) {
    std::vector<std::string> kept;
    for (std::size_t c = 0; c < r.size(); ++c)
      if (c < keep.size() && keep[c]) kept.push_back(r[c]);
    out.push_back(kept);
  }
  return out;
}

BenchSpec small_bench() {
  BenchSpec spec;
  spec.dgp.n_nodes = 8;
  spec.run.chain.iterations = 400;
  spec.replications = 2;
  spec.concurrency = 1;
  return spec;
}

}  // namespace

TEST(Config, FlattensAndOverrides) {
  ConfigMap cfg(nlohmann::json::parse(R"({"scan": {"u": 25, "strategy": "amrsg"}, "chain.iterations": 300})"));
  EXPECT_EQ(cfg.get_int("scan.u", 0), 25);
  EXPECT_EQ(cfg.get_int("chain.iterations", 0), 300);
  cfg.apply_override("scan.u=40");
  cfg.apply_override("amh.variant=haario");
  cfg.apply_override("chain.start=pilot");
  EXPECT_EQ(cfg.get_int("scan.u", 0), 40);
  EXPECT_EQ(cfg.get_string("amh.variant", ""), "haario");
  EXPECT_THROW(cfg.apply_override("no-equals-sign"), ConfigError);

  auto run = build_run_config(cfg);
  EXPECT_EQ(run.chain.scan.strategy, ScanStrategy::Amrsg);
  EXPECT_EQ(run.chain.scan.u, 40);
  EXPECT_EQ(run.chain.amh.variant, AmhVariant::Haario);
  EXPECT_EQ(run.chain.iterations, 300);
  EXPECT_EQ(run.chain.start, StartMode::Pilot);
}

TEST(Config, RejectsUnknownAndInvalid) {
  ConfigMap typo;
  typo.apply_override("scan.uu=3");
  EXPECT_THROW(build_run_config(typo), ConfigError);
  ConfigMap bad;
  bad.apply_override("scan.u=0");
  EXPECT_THROW(build_run_config(bad), ConfigError);
  ConfigMap wrong_type;
  wrong_type.apply_override("chain.iterations=\"many\"");
  EXPECT_THROW(build_run_config(wrong_type), ConfigError);
}

TEST(ParseAlgorithm, Names) {
  EXPECT_EQ(parse_algorithm("gs").label, "GS");
  auto m = parse_algorithm("MRSG_0.25");
  EXPECT_EQ(m.label, "MRSG_0.25");
  EXPECT_EQ(m.scan.strategy, ScanStrategy::Mrsg);
  ASSERT_TRUE(m.scan.q0.has_value());
  EXPECT_DOUBLE_EQ(*m.scan.q0, 0.25);
  auto b = parse_algorithm("b-amrsg-4");
  EXPECT_EQ(b.scan.strategy, ScanStrategy::BAmrsg);
  EXPECT_EQ(b.scan.n_blocks, 4);
  EXPECT_THROW(parse_algorithm("mrsg-1.5"), ConfigError);
  EXPECT_THROW(parse_algorithm("quick"), ConfigError);
  EXPECT_EQ(default_roster().size(), 8u);
}

TEST(Summarize, Quantiles) {
  auto s = summarize({4.0, 1.0, 3.0, 2.0});
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.q25, 1.75);
  EXPECT_DOUBLE_EQ(s.q75, 3.25);
  EXPECT_THROW(summarize({}), std::invalid_argument);
}

TEST(TraceIo, RoundTrip) {
  DgpSpec spec = dgp_preset("multilayer-temporal");
  spec.n_nodes = 5;
  auto data = generate(spec);
  ChainConfig cfg;
  cfg.iterations = 60;
  cfg.thinning = 2;
  cfg.scan.strategy = ScanStrategy::Amrsg;
  cfg.scan.u = 10;
  auto tr = run_chain(data.network, PriorSpec{}, cfg);
  auto dir = scratch("trace");
  write_trace(tr, dir);
  auto back = read_trace(dir);
  EXPECT_TRUE(back.same_draws(tr));
  fs::remove(dir / "coords.csv");
  EXPECT_THROW(read_trace(dir), DataError);
}

TEST(Bench, SingleReplicationMatchesDirectRun) {
  BenchSpec spec = small_bench();
  spec.replications = 1;
  spec.algorithms = {parse_algorithm("gs")};
  auto res = run_bench(spec);
  ASSERT_EQ(res.replications.size(), 1u);
  ASSERT_TRUE(res.replications[0].ok);

  auto data = generate(spec.dgp);
  ChainConfig cfg = spec.run.chain;
  cfg.seed = spec.master_seed;
  auto rep = diagnose(run_chain(data.network, spec.run.prior, cfg), &data.truth);
  EXPECT_DOUBLE_EQ(res.aggregate[0].ess_fraction.median, rep.ess_fraction_mean);
  EXPECT_DOUBLE_EQ(res.aggregate[0].mse->median, *rep.mse_mean);
  EXPECT_DOUBLE_EQ(res.aggregate[0].variance.median, rep.variance_mean);
}

TEST(Bench, DuplicateAlgorithmGivesIdenticalRows) {
  BenchSpec spec = small_bench();
  spec.algorithms = {parse_algorithm("amrsg"), parse_algorithm("amrsg")};
  auto res = run_bench(spec);
  ASSERT_EQ(res.aggregate.size(), 2u);
  EXPECT_EQ(res.aggregate[0].ess_fraction.median, res.aggregate[1].ess_fraction.median);
  EXPECT_EQ(res.aggregate[0].mse->median, res.aggregate[1].mse->median);
  EXPECT_EQ(res.aggregate[0].variance.q75, res.aggregate[1].variance.q75);
}

TEST(Cli, GenerateFitDiagnosePipeline) {
  auto dir = scratch("pipeline");
  const std::string d = dir.string();
  ASSERT_EQ(run_cli("generate --preset circular-poisson --nodes 10 --seed 3 --out " + d + "/data"), 0);
  EXPECT_TRUE(fs::exists(dir / "data/network.csv"));
  EXPECT_TRUE(fs::exists(dir / "data/truth.csv"));
  ASSERT_EQ(run_cli("fit --network " + d + "/data/network.csv --family poisson --strategy amrsg "
                    "--iterations 1000 --seed 5 --out " + d + "/trace"),
            0);
  auto tr = read_trace(dir / "trace");
  EXPECT_EQ(tr.n_kept(), 1000u);
  EXPECT_EQ(tr.n_nodes, 10);
  ASSERT_EQ(run_cli("diagnose --trace " + d + "/trace --truth " + d + "/data/truth.csv --out " + d + "/diag"),
            0);
  for (const char* f : {"params.csv", "by_dim.csv", "ks.csv", "report.json"})
    EXPECT_TRUE(fs::exists(dir / "diag" / f)) << f;
  std::ifstream in(dir / "diag/report.json");
  auto report = nlohmann::json::parse(in);
  EXPECT_TRUE(report.contains("mse_mean"));
}

TEST(Cli, ExitCodes) {
  auto dir = scratch("exit");
  const std::string d = dir.string();
  EXPECT_EQ(run_cli("generate --nodes 6 --set dgp.nodez=3 --out " + d + "/g"), 1);
  EXPECT_EQ(run_cli("bench --set scan.u=-2 --out " + d + "/b"), 1);
  EXPECT_EQ(run_cli("no-such-command"), 1);
  std::ofstream(dir / "bad.csv") << "i,j,r,t,w\n1,1,1,1,3\n";
  EXPECT_EQ(run_cli("fit --network " + d + "/bad.csv --iterations 10 --out " + d + "/t"), 2);
  EXPECT_EQ(run_cli("fit --network " + d + "/missing.csv --out " + d + "/t"), 2);
}

TEST(Cli, BenchIsDeterministic) {
  auto dir = scratch("bench");
  const std::string d = dir.string();
  const std::string args = "bench --set dgp.nodes=8 --set chain.iterations=400 "
                           "--set 'bench.algorithms=[\"gs\",\"mrsg-0.5\",\"amrsg\"]' --replications 2 ";
  ASSERT_EQ(run_cli(args + "--concurrency 1 --out " + d + "/a"), 0);
  ASSERT_EQ(run_cli(args + "--concurrency 2 --out " + d + "/b"), 0);
  auto a = read_csv(dir / "a/aggregate.csv");
  auto b = read_csv(dir / "b/aggregate.csv");
  ASSERT_EQ(a.size(), 4u);
  EXPECT_EQ(stable_columns(a), stable_columns(b));
  EXPECT_EQ(stable_columns(read_csv(dir / "a/per_rep.csv")), stable_columns(read_csv(dir / "b/per_rep.csv")));
}

TEST(Cli, ScalingWritesOneRowPerPair) {
  auto dir = scratch("scaling");
  ASSERT_EQ(run_cli("scaling --node-grid 6,12 --set chain.iterations=100 "
                    "--set 'bench.algorithms=[\"gs\",\"amrsg\"]' --set bench.replications=1 --out " +
                    dir.string()),
            0);
  auto rows = read_csv(dir / "scaling.csv");
  EXPECT_EQ(rows.size(), 5u);
}
