#include "mrscan/log.hpp"

#include <iostream>
#include <map>
#include <mutex>
#include <string>

namespace mrscan {
namespace {

struct WarningRegistry {
  std::mutex mutex;
  std::map<std::string, std::size_t, std::less<>> counts;
  bool quiet = false;
};

WarningRegistry& registry() {
  static WarningRegistry r;
  return r;
}

}  // namespace

void log_warning(std::string_view key, std::string_view message) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  auto it = r.counts.find(key);
  if (it == r.counts.end()) it = r.counts.emplace(std::string(key), 0).first;
  ++it->second;
  if (!r.quiet && it->second <= kWarningRepeatLimit) {
    std::cerr << "warning [" << key << "]: " << message;
    if (it->second == kWarningRepeatLimit) std::cerr << " (further warnings suppressed)";
    std::cerr << '\n';
  }
}

std::size_t warning_count(std::string_view key) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  auto it = r.counts.find(key);
  return it == r.counts.end() ? 0 : it->second;
}

void set_warnings_quiet(bool quiet) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  r.quiet = quiet;
}

}  // namespace mrscan
