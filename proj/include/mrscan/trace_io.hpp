#pragma once

#include <filesystem>

#include <json.hpp>

#include "mrscan/sampler.hpp"

namespace mrscan {

// Writes alpha.csv (iter,r,t,value), coords.csv (iter,node,t,dim,value),
// accept.csv (iter,kind,index,t,prob), qprobs.csv (iter,target,q) and
// meta.json into `dir`, creating it if needed. Indices are 1-based. `extra`
// is stored under meta.json's "config" key.
void write_trace(const ChainTrace& trace, const std::filesystem::path& dir,
                 const nlohmann::json& extra = nlohmann::json::object());

// Inverse of write_trace. Throws DataError on missing or malformed files.
ChainTrace read_trace(const std::filesystem::path& dir);

}  // namespace mrscan
