#include "mrscan/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <string_view>

#include "mrscan/errors.hpp"

namespace mrscan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void put_real(std::ostream& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, ptr - buf);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

// Minimal CSV reader for the numeric files written above.
class CsvReader {
 public:
  CsvReader(const fs::path& path, std::string_view header) : path_(path), in_(path) {
    if (!in_) throw DataError("cannot open " + path.string());
    std::string line;
    std::getline(in_, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header)
      throw DataError(path.string() + ": expected header '" + std::string(header) + "'");
  }

  // Splits the next non-empty line into fields; false at end of file.
  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (!line_.empty() && line_.back() == '\r') line_.pop_back();
      if (line_.empty()) continue;
      fields.clear();
      std::size_t start = 0;
      for (;;) {
        auto comma = line_.find(',', start);
        fields.emplace_back(std::string_view(line_).substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      return true;
    }
    return false;
  }

  template <class T>
  T parse(std::string_view s) const {
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("malformed number '" + std::string(s) + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw DataError(path_.string() + " line " + std::to_string(line_no_ + 1) + ": " + msg);
  }

 private:
  fs::path path_;
  std::ifstream in_;
  std::string line_;
  std::size_t line_no_ = 0;
};

}  // namespace

void write_trace(const ChainTrace& trace, const fs::path& dir, const json& extra) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create trace directory " + dir.string() + ": " + ec.message());

  const std::size_t n_alpha = static_cast<std::size_t>(trace.n_layers) * trace.n_times;
  const std::size_t n_coord =
      static_cast<std::size_t>(trace.n_times) * trace.n_nodes * trace.dim;

  {
    auto out = open_out(dir / "alpha.csv");
    out << "iter,r,t,value\n";
    for (std::size_t s = 0; s < trace.n_kept(); ++s)
      for (int r = 0; r < trace.n_layers; ++r)
        for (int t = 0; t < trace.n_times; ++t) {
          out << trace.kept_iterations[s] << ',' << r + 1 << ',' << t + 1 << ',';
          put_real(out, trace.alpha_draws[s * n_alpha + static_cast<std::size_t>(r) * trace.n_times + t]);
          out << '\n';
        }
  }
  {
    auto out = open_out(dir / "coords.csv");
    out << "iter,node,t,dim,value\n";
    for (std::size_t s = 0; s < trace.n_kept(); ++s) {
      const double* draw = trace.coord_draws.data() + s * n_coord;
      for (int t = 0; t < trace.n_times; ++t)
        for (int i = 0; i < trace.n_nodes; ++i)
          for (int k = 0; k < trace.dim; ++k) {
            out << trace.kept_iterations[s] << ',' << i + 1 << ',' << t + 1 << ',' << k + 1 << ',';
            put_real(out, *draw++);
            out << '\n';
          }
    }
  }
  {
    auto out = open_out(dir / "accept.csv");
    out << "iter,kind,index,t,prob\n";
    auto dump = [&](const std::vector<AcceptRecord>& recs, const char* kind) {
      for (const auto& a : recs) {
        out << a.iteration << ',' << kind << ',' << a.index + 1 << ',' << a.time + 1 << ',';
        put_real(out, a.prob);
        out << '\n';
      }
    };
    dump(trace.alpha_accept, "alpha");
    dump(trace.node_accept, "node");
  }
  {
    auto out = open_out(dir / "qprobs.csv");
    out << "iter,target,q\n";
    for (const auto& snap : trace.q_history)
      for (std::size_t j = 0; j < snap.q.size(); ++j) {
        out << snap.iteration << ',' << j + 1 << ',';
        put_real(out, snap.q[j]);
        out << '\n';
      }
  }
  json meta = {{"dim", trace.dim},
               {"nodes", trace.n_nodes},
               {"times", trace.n_times},
               {"layers", trace.n_layers},
               {"kept_draws", trace.n_kept()},
               {"seed", trace.rng_seed},
               {"wall_time_seconds", trace.wall_time_seconds},
               {"amh_fallbacks", trace.amh_fallbacks},
               {"config", extra}};
  auto out = open_out(dir / "meta.json");
  out << meta.dump(2) << '\n';
}

ChainTrace read_trace(const fs::path& dir) {
  ChainTrace trace;
  {
    std::ifstream in(dir / "meta.json");
    if (!in) throw DataError("cannot open " + (dir / "meta.json").string());
    json meta = json::parse(in, nullptr, false);
    if (meta.is_discarded() || !meta.is_object()) throw DataError("meta.json is not valid JSON");
    try {
      trace.dim = meta.at("dim").get<int>();
      trace.n_nodes = meta.at("nodes").get<int>();
      trace.n_times = meta.at("times").get<int>();
      trace.n_layers = meta.at("layers").get<int>();
      trace.rng_seed = meta.at("seed").get<std::uint64_t>();
      trace.wall_time_seconds = meta.at("wall_time_seconds").get<double>();
      trace.amh_fallbacks = meta.value("amh_fallbacks", 0L);
    } catch (const json::exception& e) {
      throw DataError(std::string("meta.json: ") + e.what());
    }
    if (trace.dim < 1 || trace.n_nodes < 1 || trace.n_times < 1 || trace.n_layers < 1)
      throw DataError("meta.json: dimensions must be positive");
  }
  const std::size_t n_alpha = static_cast<std::size_t>(trace.n_layers) * trace.n_times;
  const std::size_t n_coord =
      static_cast<std::size_t>(trace.n_times) * trace.n_nodes * trace.dim;
  std::vector<std::string_view> f;

  {
    CsvReader csv(dir / "alpha.csv", "iter,r,t,value");
    std::size_t row = 0;
    while (csv.next(f)) {
      if (f.size() != 4) csv.fail("expected 4 fields");
      const int iter = csv.parse<int>(f[0]);
      const int r = csv.parse<int>(f[1]), t = csv.parse<int>(f[2]);
      const std::size_t slot = row % n_alpha;
      if (static_cast<std::size_t>(r - 1) * trace.n_times + (t - 1) != slot || r < 1 || t < 1)
        csv.fail("rows out of (layer, time) order");
      if (slot == 0) trace.kept_iterations.push_back(iter);
      else if (trace.kept_iterations.back() != iter) csv.fail("iteration changed inside a draw");
      trace.alpha_draws.push_back(csv.parse<double>(f[3]));
      ++row;
    }
    if (row % n_alpha != 0) throw DataError("alpha.csv: incomplete final draw");
  }
  {
    CsvReader csv(dir / "coords.csv", "iter,node,t,dim,value");
    std::size_t row = 0;
    trace.coord_draws.reserve(trace.n_kept() * n_coord);
    while (csv.next(f)) {
      if (f.size() != 5) csv.fail("expected 5 fields");
      const std::size_t s = row / n_coord, slot = row % n_coord;
      if (s >= trace.n_kept()) csv.fail("more draws than alpha.csv");
      if (csv.parse<int>(f[0]) != trace.kept_iterations[s]) csv.fail("iteration mismatch with alpha.csv");
      const int i = csv.parse<int>(f[1]) - 1, t = csv.parse<int>(f[2]) - 1,
                k = csv.parse<int>(f[3]) - 1;
      if (i < 0 || t < 0 || k < 0 ||
          (static_cast<std::size_t>(t) * trace.n_nodes + i) * trace.dim + k != slot)
        csv.fail("rows out of (time, node, dim) order");
      trace.coord_draws.push_back(csv.parse<double>(f[4]));
      ++row;
    }
    if (row != trace.n_kept() * n_coord) throw DataError("coords.csv: draw count mismatch");
  }
  {
    CsvReader csv(dir / "accept.csv", "iter,kind,index,t,prob");
    while (csv.next(f)) {
      if (f.size() != 5) csv.fail("expected 5 fields");
      AcceptRecord rec{csv.parse<int>(f[0]), csv.parse<int>(f[2]) - 1, csv.parse<int>(f[3]) - 1,
                       csv.parse<double>(f[4])};
      if (f[1] == "alpha") trace.alpha_accept.push_back(rec);
      else if (f[1] == "node") trace.node_accept.push_back(rec);
      else csv.fail("kind must be alpha or node");
    }
  }
  {
    CsvReader csv(dir / "qprobs.csv", "iter,target,q");
    while (csv.next(f)) {
      if (f.size() != 3) csv.fail("expected 3 fields");
      const int iter = csv.parse<int>(f[0]);
      const int target = csv.parse<int>(f[1]);
      if (target == 1) trace.q_history.push_back({iter, {}});
      else if (trace.q_history.empty() || trace.q_history.back().iteration != iter ||
               static_cast<int>(trace.q_history.back().q.size()) != target - 1)
        csv.fail("targets out of order");
      trace.q_history.back().q.push_back(csv.parse<double>(f[2]));
    }
  }
  return trace;
}

}  // namespace mrscan
