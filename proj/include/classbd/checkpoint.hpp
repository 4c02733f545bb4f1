#pragma once

#include <string>

#include <json.hpp>

#include "classbd/param_store.hpp"

namespace classbd::io {

/// Single-file checkpoint: a little-endian uint64 header length, a JSON
/// header listing (name, shape, offset) per tensor, then contiguous 64-bit
/// float payloads. Optimizer velocities ride along as "<name>#velocity"
/// entries so training can resume bit-for-bit.
void save_checkpoint(const std::string& path, const ad::ParameterStore& store,
                     const nlohmann::json& meta, bool include_velocity = true);

/// Loads values (and velocities when present) into an already-built store
/// with matching names and shapes. Returns the meta block.
nlohmann::json load_checkpoint(const std::string& path, ad::ParameterStore& store);

/// Reads only the meta block.
nlohmann::json peek_checkpoint_meta(const std::string& path);

} // namespace classbd::io
