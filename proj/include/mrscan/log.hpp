#pragma once

#include <cstddef>
#include <string_view>

namespace mrscan {

// Writes a warning to stderr. Each distinct `key` is printed at most
// `kWarningRepeatLimit` times per process; later calls are only counted.
inline constexpr std::size_t kWarningRepeatLimit = 3;

void log_warning(std::string_view key, std::string_view message);

// Total number of warnings raised under `key`, including suppressed ones.
std::size_t warning_count(std::string_view key);

void set_warnings_quiet(bool quiet);

}  // namespace mrscan
