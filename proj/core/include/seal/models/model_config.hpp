// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace seal::models {

enum class ModelKind { Trunc, CA, EA, SEAL };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// Architecture and input/output geometry. Length relations:
/// l_input = l_snpt * n_snpt and l_dec = l_seg * n_seg.
struct ModelConfig {
  ModelKind kind = ModelKind::SEAL;
  std::size_t d_model = 64;
  std::size_t d_ff = 128;
  std::size_t heads = 4;
  std::size_t encoder_layers = 2;
  std::size_t scorer_layers = 1;
  std::size_t decoder_layers = 2;
  std::size_t l_input = 256;
  std::size_t l_snpt = 16;
  std::size_t n_snpt = 16;
  std::size_t l_ext = 64;
  std::size_t l_dec = 32;
  std::size_t l_seg = 8;
  std::size_t n_seg = 4;
  /// CA: learnable vectors per snippet group.
  std::size_t compressed_size = 4;
  /// CA: snippets per group for single-document inputs.
  std::size_t group_size = 4;
  std::size_t vocab_size = 0;
  std::size_t max_docs = 80;
  std::uint64_t seed = 1;
  /// Permits SEAL with l_seg == l_dec (the EA reduction).
  bool allow_reduction = false;

  /// Throws ConfigError naming the violated relation.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Start index of the decode segment holding step `tau`: floor(tau / s) * s.
std::size_t seg_start(std::size_t tau, std::size_t s);

}  // namespace seal::models
