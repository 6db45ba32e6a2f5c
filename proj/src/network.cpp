#include "mrscan/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "mrscan/errors.hpp"

namespace mrscan {

bool WeightFamily::admits(double y) const {
  if (!std::isfinite(y)) return false;
  switch (kind) {
    case FamilyKind::BernoulliLogit:
      return y == 0.0 || y == 1.0;
    case FamilyKind::PoissonLog:
      return y >= 0.0 && y == std::floor(y);
  }
  return false;
}

std::string to_string(FamilyKind kind) {
  return kind == FamilyKind::BernoulliLogit ? "bernoulli" : "poisson";
}

FamilyKind parse_family(const std::string& name) {
  if (name == "bernoulli" || name == "BernoulliLogit") return FamilyKind::BernoulliLogit;
  if (name == "poisson" || name == "PoissonLog") return FamilyKind::PoissonLog;
  throw ConfigError("unknown weight family '" + name + "' (expected bernoulli or poisson)");
}

NetworkFormat parse_network_format(const std::string& name) {
  if (name == "edgelist" || name == "EdgeListCsv") return NetworkFormat::EdgeListCsv;
  if (name == "dense" || name == "DenseCsv") return NetworkFormat::DenseCsv;
  throw ConfigError("unknown network format '" + name + "' (expected edgelist or dense)");
}

double NetworkTensor::weight(int i, int j, int layer, int time) const {
  if (i == j) return 0.0;
  auto row = neighbors(i, layer, time);
  auto it = std::lower_bound(row.begin(), row.end(), j,
                             [](const Neighbor& n, int node) { return n.node < node; });
  return (it != row.end() && it->node == j) ? it->weight : 0.0;
}

std::size_t NetworkTensor::n_edges() const {
  std::size_t total = 0;
  for (const auto& s : slices_) total += s.edges.size();
  return total;
}

NetworkBuilder::NetworkBuilder(int n_nodes, std::vector<int> times_per_layer,
                               std::vector<WeightFamily> families)
    : n_nodes_(n_nodes),
      times_per_layer_(std::move(times_per_layer)),
      families_(std::move(families)) {
  if (n_nodes_ < 1) throw DataError("network needs at least one node");
  if (times_per_layer_.empty()) throw DataError("network needs at least one layer");
  for (int t : times_per_layer_)
    if (t < 1) throw DataError("every layer needs at least one time slice");
  if (families_.size() == 1 && times_per_layer_.size() > 1)
    families_.assign(times_per_layer_.size(), families_.front());
  if (families_.size() != times_per_layer_.size())
    throw DataError("one weight family per layer is required");
}

NetworkBuilder& NetworkBuilder::add(int i, int j, int layer, int time, double weight) {
  auto where = [&] {
    std::ostringstream os;
    os << " at (i=" << i + 1 << ", j=" << j + 1 << ", layer=" << layer + 1
       << ", time=" << time + 1 << ")";
    return os.str();
  };
  if (i == j) throw DataError("self-loop" + where());
  if (i < 0 || j < 0 || i >= n_nodes_ || j >= n_nodes_)
    throw DataError("node index out of range" + where());
  if (layer < 0 || layer >= static_cast<int>(times_per_layer_.size()))
    throw DataError("layer out of range" + where());
  if (time < 0 || time >= times_per_layer_[layer]) throw DataError("time out of range" + where());
  if (!families_[layer].admits(weight)) {
    std::ostringstream os;
    os << "weight " << weight << " inadmissible for " << to_string(families_[layer].kind)
       << " family" << where();
    throw DataError(os.str());
  }
  if (i > j) std::swap(i, j);
  edges_.push_back({i, j, layer, time, weight});
  return *this;
}

NetworkTensor NetworkBuilder::build() && {
  auto key = [](const EdgeRecord& e) { return std::tie(e.layer, e.time, e.i, e.j); };
  std::sort(edges_.begin(), edges_.end(),
            [&](const EdgeRecord& a, const EdgeRecord& b) { return key(a) < key(b); });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (key(edges_[k]) == key(edges_[k - 1])) {
      const auto& e = edges_[k];
      std::ostringstream os;
      os << "duplicate entry for (i=" << e.i + 1 << ", j=" << e.j + 1 << ", layer=" << e.layer + 1
         << ", time=" << e.time + 1 << ")";
      throw DataError(os.str());
    }
  }

  NetworkTensor net;
  net.n_nodes_ = n_nodes_;
  net.times_per_layer_ = times_per_layer_;
  net.families_ = families_;
  net.max_times_ = *std::max_element(times_per_layer_.begin(), times_per_layer_.end());
  std::size_t offset = 0;
  for (int t : times_per_layer_) {
    net.layer_offsets_.push_back(offset);
    offset += static_cast<std::size_t>(t);
  }
  net.slices_.resize(offset);
  for (auto& s : net.slices_) s.adjacency.resize(static_cast<std::size_t>(n_nodes_));

  for (const auto& e : edges_) {
    if (e.weight == 0.0) continue;
    auto& s = net.slices_[net.slice_index(e.layer, e.time)];
    s.edges.push_back(e);
    s.adjacency[e.i].push_back({e.j, e.weight});
    s.adjacency[e.j].push_back({e.i, e.weight});
  }
  for (auto& s : net.slices_)
    for (auto& row : s.adjacency)
      std::sort(row.begin(), row.end(),
                [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
  return net;
}

std::vector<double> degree_stats(const NetworkTensor& net) {
  std::vector<double> strength(static_cast<std::size_t>(net.n_nodes()), 0.0);
  for (int r = 0; r < net.n_layers(); ++r)
    for (int t = 0; t < net.n_times(r); ++t)
      for (const auto& e : net.edges(r, t)) {
        strength[e.i] += e.weight;
        strength[e.j] += e.weight;
      }
  return strength;
}

// ---------------------------------------------------------------------------
// CSV I/O

namespace {

std::string trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw DataError("line " + std::to_string(line_no) + ": cannot parse '" + s + "' as a number");
  return v;
}

int parse_int(const std::string& s, std::size_t line_no) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw DataError("line " + std::to_string(line_no) + ": cannot parse '" + s +
                    "' as an integer");
  return v;
}

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<WeightFamily> families_for(const LoadOptions& options, int n_layers) {
  if (options.families.empty()) throw DataError("a weight family must be declared per layer");
  if (options.families.size() == 1)
    return std::vector<WeightFamily>(static_cast<std::size_t>(n_layers), options.families.front());
  if (static_cast<int>(options.families.size()) != n_layers)
    throw DataError("declared " + std::to_string(options.families.size()) +
                    " layer families but the file has " + std::to_string(n_layers) + " layers");
  return options.families;
}

struct RawEntry {
  int i, j, layer, time;
  double weight;
  std::size_t line;
};

NetworkTensor assemble(const std::vector<RawEntry>& rows, std::map<int, int> times_per_layer,
                       int n_nodes, const LoadOptions& options) {
  int n_layers = std::max<int>(1, options.families.size() > 1
                                      ? static_cast<int>(options.families.size())
                                      : 1);
  if (!times_per_layer.empty()) n_layers = std::max(n_layers, times_per_layer.rbegin()->first);
  std::vector<int> times(static_cast<std::size_t>(n_layers), 1);
  for (auto [layer, t] : times_per_layer) times[layer - 1] = std::max(1, t);

  NetworkBuilder builder(n_nodes, times, families_for(options, n_layers));
  for (const auto& row : rows) {
    try {
      builder.add(row.i - 1, row.j - 1, row.layer - 1, row.time - 1, row.weight);
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(row.line) + ": " + e.what());
    }
  }
  return std::move(builder).build();
}

NetworkTensor load_edge_list(std::istream& in, const LoadOptions& options) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<RawEntry> rows;
  std::map<int, int> times;
  int max_node = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim(line);
    if (text.empty()) continue;
    auto fields = split_fields(text);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"i", "j", "layer", "time", "weight"})
        throw DataError("line " + std::to_string(line_no) +
                        ": expected header 'i,j,layer,time,weight'");
      header_seen = true;
      continue;
    }
    if (fields.size() != 5)
      throw DataError("line " + std::to_string(line_no) + ": expected 5 fields, found " +
                      std::to_string(fields.size()));
    RawEntry e{parse_int(fields[0], line_no), parse_int(fields[1], line_no),
               parse_int(fields[2], line_no), parse_int(fields[3], line_no),
               parse_real(fields[4], line_no), line_no};
    if (e.i < 1 || e.j < 1 || e.layer < 1 || e.time < 1)
      throw DataError("line " + std::to_string(line_no) + ": indices are 1-based");
    max_node = std::max({max_node, e.i, e.j});
    auto& t = times[e.layer];
    t = std::max(t, e.time);
    rows.push_back(e);
  }
  if (!header_seen) throw DataError("empty edge list: missing header");
  int n_nodes = options.n_nodes.value_or(std::max(max_node, 1));
  if (max_node > n_nodes)
    throw DataError("node index " + std::to_string(max_node) + " out of range for N=" +
                    std::to_string(n_nodes));
  return assemble(rows, std::move(times), n_nodes, options);
}

NetworkTensor load_dense(std::istream& in, const LoadOptions& options) {
  std::string line;
  std::size_t line_no = 0;
  int layer = 1, time = 1;
  bool explicit_block = false;
  std::vector<std::vector<double>> matrix;
  std::vector<std::size_t> matrix_lines;
  std::vector<RawEntry> rows;
  std::map<int, int> times;
  std::map<std::pair<int, int>, bool> seen_blocks;
  int n_nodes = options.n_nodes.value_or(0);

  auto flush = [&]() {
    if (matrix.empty()) {
      if (explicit_block)
        throw DataError("block layer=" + std::to_string(layer) + " time=" +
                        std::to_string(time) + " has no rows");
      return;
    }
    int n = static_cast<int>(matrix.size());
    if (n_nodes == 0) n_nodes = n;
    if (n != n_nodes)
      throw DataError("block layer=" + std::to_string(layer) + " time=" + std::to_string(time) +
                      " has " + std::to_string(n) + " rows, expected " + std::to_string(n_nodes));
    if (seen_blocks[{layer, time}])
      throw DataError("duplicate block layer=" + std::to_string(layer) + " time=" +
                      std::to_string(time));
    seen_blocks[{layer, time}] = true;
    auto& tmax = times[layer];
    tmax = std::max(tmax, time);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(matrix[i].size()) != n)
        throw DataError("line " + std::to_string(matrix_lines[i]) + ": expected " +
                        std::to_string(n) + " columns");
      if (matrix[i][i] != 0.0)
        throw DataError("line " + std::to_string(matrix_lines[i]) + ": self-loop on node " +
                        std::to_string(i + 1));
      for (int j = 0; j < i; ++j)
        if (matrix[i][j] != matrix[j][i])
          throw DataError("line " + std::to_string(matrix_lines[i]) +
                          ": matrix is not symmetric at (" + std::to_string(i + 1) + "," +
                          std::to_string(j + 1) + ")");
      for (int j = i + 1; j < n; ++j)
        if (matrix[i][j] != 0.0)
          rows.push_back({i + 1, j + 1, layer, time, matrix[i][j], matrix_lines[i]});
    }
    matrix.clear();
    matrix_lines.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      flush();
      int l = 0, t = 0;
      if (std::sscanf(text.c_str(), "# layer=%d time=%d", &l, &t) != 2 || l < 1 || t < 1)
        throw DataError("line " + std::to_string(line_no) +
                        ": expected block separator '# layer=<r> time=<t>'");
      layer = l;
      time = t;
      explicit_block = true;
      continue;
    }
    auto fields = split_fields(text);
    std::vector<double> values;
    values.reserve(fields.size());
    for (const auto& f : fields) values.push_back(parse_real(f, line_no));
    matrix.push_back(std::move(values));
    matrix_lines.push_back(line_no);
  }
  flush();
  if (n_nodes == 0) throw DataError("dense file contains no matrix");
  return assemble(rows, std::move(times), n_nodes, options);
}

}  // namespace

NetworkTensor load_network(const std::filesystem::path& path, NetworkFormat format,
                           const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open network file " + path.string());
  return format == NetworkFormat::EdgeListCsv ? load_edge_list(in, options)
                                              : load_dense(in, options);
}

void save_network(const NetworkTensor& net, const std::filesystem::path& path,
                  NetworkFormat format) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write network file " + path.string());
  if (format == NetworkFormat::EdgeListCsv) {
    out << "i,j,layer,time,weight\n";
    for (int r = 0; r < net.n_layers(); ++r)
      for (int t = 0; t < net.n_times(r); ++t)
        for (const auto& e : net.edges(r, t))
          out << e.i + 1 << ',' << e.j + 1 << ',' << r + 1 << ',' << t + 1 << ','
              << format_real(e.weight) << '\n';
    return;
  }
  const int n = net.n_nodes();
  for (int r = 0; r < net.n_layers(); ++r)
    for (int t = 0; t < net.n_times(r); ++t) {
      out << "# layer=" << r + 1 << " time=" << t + 1 << '\n';
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (j) out << ',';
          out << format_real(net.weight(i, j, r, t));
        }
        out << '\n';
      }
    }
}

}  // namespace mrscan
