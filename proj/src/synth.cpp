#include "mrscan/synth.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mrscan/errors.hpp"

namespace mrscan {

void DgpSpec::validate() const {
  if (n_nodes < 2) throw ConfigError("dgp needs at least 2 nodes");
  if (dim < 1) throw ConfigError("dgp dimension must be at least 1");
  if (n_layers < 1 || n_times < 1) throw ConfigError("dgp needs at least one layer and time");
  if (!(radius > 0.0)) throw ConfigError("dgp radius must be positive");
  if (!(sigma2_eps >= 0.0)) throw ConfigError("dgp sigma2_eps must be non-negative");
  if (layout == Layout::Circle && dim != 2) throw ConfigError("circle layout requires d = 2");
  if (alpha.size() != 1 && alpha.size() != static_cast<std::size_t>(n_layers) * n_times)
    throw ConfigError("dgp alpha needs 1 or R*T values");
  if (families.size() != 1 && families.size() != static_cast<std::size_t>(n_layers))
    throw ConfigError("dgp families needs 1 or R entries");
}

double DgpSpec::alpha_at(int layer, int time) const {
  return alpha.size() == 1 ? alpha.front() : alpha[static_cast<std::size_t>(layer) * n_times + time];
}

WeightFamily DgpSpec::family_at(int layer) const {
  return families.size() == 1 ? families.front() : families[static_cast<std::size_t>(layer)];
}

DgpSpec dgp_preset(const std::string& name) {
  DgpSpec spec;
  if (name == "circular-poisson") return spec;
  if (name == "random-bernoulli") {
    spec.layout = Layout::RandomPrior;
    spec.families = {WeightFamily{FamilyKind::BernoulliLogit, {}}};
    return spec;
  }
  if (name == "multilayer-temporal") {
    // Layer 1 (Poisson) has intercept 6 at every time, layer 2 (Bernoulli) 3.
    spec.n_layers = 2;
    spec.n_times = 3;
    spec.alpha = {6.0, 6.0, 6.0, 3.0, 3.0, 3.0};
    spec.families = {WeightFamily{FamilyKind::PoissonLog, {}},
                     WeightFamily{FamilyKind::BernoulliLogit, {}}};
    spec.sigma2_eps = 0.01;
    return spec;
  }
  throw ConfigError("unknown dgp preset '" + name + "'");
}

std::vector<std::string> dgp_preset_names() {
  return {"circular-poisson", "random-bernoulli", "multilayer-temporal"};
}

LatentState gen_coords(const DgpSpec& spec, Rng& rng) {
  spec.validate();
  LatentState truth(spec.dim, spec.n_nodes, spec.n_times, spec.n_layers);
  for (int i = 0; i < spec.n_nodes; ++i) {
    auto x = truth.coord(i, 0);
    if (spec.layout == Layout::Circle) {
      const double angle = 2.0 * std::numbers::pi * i / spec.n_nodes;
      x[0] = spec.radius * std::cos(angle);
      x[1] = spec.radius * std::sin(angle);
    } else {
      for (auto& v : x) v = standard_normal(rng);
    }
  }
  const double sd = std::sqrt(spec.sigma2_eps);
  for (int t = 1; t < spec.n_times; ++t)
    for (int i = 0; i < spec.n_nodes; ++i)
      for (int k = 0; k < spec.dim; ++k)
        truth.coord(i, t)[k] = truth.coord(i, t - 1)[k] + sd * standard_normal(rng);
  for (int r = 0; r < spec.n_layers; ++r)
    for (int t = 0; t < spec.n_times; ++t) truth.alpha(r, t) = spec.alpha_at(r, t);
  return truth;
}

NetworkTensor simulate_weights(const LatentState& truth, const DgpSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<WeightFamily> families;
  for (int r = 0; r < spec.n_layers; ++r) families.push_back(spec.family_at(r));
  NetworkBuilder builder(spec.n_nodes, std::vector<int>(static_cast<std::size_t>(spec.n_layers), spec.n_times),
                         families);
  for (int r = 0; r < spec.n_layers; ++r)
    for (int t = 0; t < spec.n_times; ++t) {
      const double a = truth.alpha(r, t);
      for (int i = 0; i < spec.n_nodes; ++i)
        for (int j = i + 1; j < spec.n_nodes; ++j) {
          const double eta =
              eta_of(a, truth.coord(i, t), truth.coord(j, t), Distance::SquaredEuclidean);
          double y = 0.0;
          if (families[r].kind == FamilyKind::PoissonLog) {
            y = static_cast<double>(std::poisson_distribution<long>(std::exp(eta))(rng));
          } else {
            y = uniform01(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
          }
          if (y != 0.0) builder.add(i, j, r, t, y);
        }
    }
  return std::move(builder).build();
}

SyntheticData generate(const DgpSpec& spec) {
  Rng rng(spec.seed);
  LatentState truth = gen_coords(spec, rng);
  NetworkTensor net = simulate_weights(truth, spec, rng);
  return {std::move(truth), std::move(net)};
}

namespace {
std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}
}  // namespace

void save_truth(const LatentState& truth, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write truth file " + path.string());
  out << "param,index,time,dim,value\n";
  for (int t = 0; t < truth.n_times(); ++t)
    for (int i = 0; i < truth.n_nodes(); ++i)
      for (int k = 0; k < truth.dim(); ++k)
        out << "x," << i + 1 << ',' << t + 1 << ',' << k + 1 << ','
            << format_real(truth.coord(i, t)[k]) << '\n';
  for (int r = 0; r < truth.n_layers(); ++r)
    for (int t = 0; t < truth.n_times(); ++t)
      out << "alpha," << r + 1 << ',' << t + 1 << ",0," << format_real(truth.alpha(r, t)) << '\n';
}

LatentState load_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open truth file " + path.string());
  struct Row {
    bool is_x;
    int index, time, dim;
    double value;
  };
  std::vector<Row> rows;
  std::string line;
  std::getline(in, line);
  if (line.rfind("param,index,time,dim,value", 0) != 0)
    throw DataError("truth file: expected header 'param,index,time,dim,value'");
  int n = 0, d = 0, t_max = 0, r_max = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string param, f1, f2, f3, f4;
    if (!std::getline(ss, param, ',') || !std::getline(ss, f1, ',') ||
        !std::getline(ss, f2, ',') || !std::getline(ss, f3, ',') || !std::getline(ss, f4))
      throw DataError("truth file line " + std::to_string(line_no) + ": expected 5 fields");
    Row row{};
    try {
      row = {param == "x", std::stoi(f1), std::stoi(f2), std::stoi(f3), std::stod(f4)};
    } catch (const std::exception&) {
      throw DataError("truth file line " + std::to_string(line_no) + ": malformed number");
    }
    if (param != "x" && param != "alpha")
      throw DataError("truth file line " + std::to_string(line_no) + ": unknown param " + param);
    if (row.index < 1 || row.time < 1 || (row.is_x && row.dim < 1))
      throw DataError("truth file line " + std::to_string(line_no) + ": indices are 1-based");
    t_max = std::max(t_max, row.time);
    if (row.is_x) {
      n = std::max(n, row.index);
      d = std::max(d, row.dim);
    } else {
      r_max = std::max(r_max, row.index);
    }
    rows.push_back(row);
  }
  if (n == 0 || d == 0 || r_max == 0) throw DataError("truth file lacks coordinates or intercepts");
  LatentState truth(d, n, t_max, r_max);
  for (const auto& row : rows) {
    if (row.is_x)
      truth.coord(row.index - 1, row.time - 1)[row.dim - 1] = row.value;
    else
      truth.alpha(row.index - 1, row.time - 1) = row.value;
  }
  return truth;
}

}  // namespace mrscan
