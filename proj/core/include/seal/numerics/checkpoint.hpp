// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "seal/numerics/parameters.hpp"

namespace seal {

struct CheckpointManifest {
  std::string config_hash;
  std::uint64_t step = 0;
  /// Serialized run configuration the parameters were trained with.
  std::string config_json;
};

// params.bin layout (all integers and floats little-endian):
//   "SEALPRM1" u32:count
//   count x { u32:name_len name u32:rank u64[rank]:dims f64[numel]:values }
void write_parameters(std::ostream& out, const ParameterStore& store);
/// Loads values into an existing store; the name and shape sets must match.
void read_parameters(std::istream& in, ParameterStore& store);

/// Writes `dir/params.bin` and `dir/manifest.json`.
void save_checkpoint(const std::filesystem::path& dir, const ParameterStore& store,
                     const CheckpointManifest& manifest);
CheckpointManifest read_manifest(const std::filesystem::path& dir);
CheckpointManifest load_checkpoint(const std::filesystem::path& dir, ParameterStore& store);

}  // namespace seal
