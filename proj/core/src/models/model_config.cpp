// SPDX-License-Identifier: Apache-2.0
#include "seal/models/model_config.hpp"

#include "seal/numerics/error.hpp"

namespace seal::models {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Trunc:
      return "trunc";
    case ModelKind::CA:
      return "ca";
    case ModelKind::EA:
      return "ea";
    case ModelKind::SEAL:
      return "seal";
  }
  return "seal";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "trunc" || name == "Trunc") return ModelKind::Trunc;
  if (name == "ca" || name == "CA") return ModelKind::CA;
  if (name == "ea" || name == "EA") return ModelKind::EA;
  if (name == "seal" || name == "SEAL") return ModelKind::SEAL;
  throw ConfigError("unknown model kind '" + name + "' (expected trunc, ca, ea or seal)");
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string("model.") + name + " must be positive");
  };
  positive(d_model, "d_model");
  positive(d_ff, "d_ff");
  positive(heads, "heads");
  positive(encoder_layers, "encoder_layers");
  positive(decoder_layers, "decoder_layers");
  positive(l_input, "l_input");
  positive(l_snpt, "l_snpt");
  positive(n_snpt, "n_snpt");
  positive(l_ext, "l_ext");
  positive(l_dec, "l_dec");
  positive(l_seg, "l_seg");
  positive(n_seg, "n_seg");
  positive(compressed_size, "compressed_size");
  positive(group_size, "group_size");
  positive(max_docs, "max_docs");
  if (kind == ModelKind::EA || kind == ModelKind::SEAL) positive(scorer_layers, "scorer_layers");
  if (d_model % heads != 0) {
    throw ConfigError("model.heads (" + std::to_string(heads) + ") must divide model.d_model (" +
                      std::to_string(d_model) + ")");
  }
  if (l_input != l_snpt * n_snpt) {
    throw ConfigError("L_input = L_snpt x N_snpt violated: " + std::to_string(l_input) + " != " +
                      std::to_string(l_snpt) + " x " + std::to_string(n_snpt));
  }
  if (l_dec != l_seg * n_seg) {
    throw ConfigError("L_dec = L_seg x N_seg violated: " + std::to_string(l_dec) + " != " + std::to_string(l_seg) +
                      " x " + std::to_string(n_seg));
  }
  if (kind == ModelKind::SEAL && l_seg >= l_dec && !allow_reduction) {
    throw ConfigError("SEAL requires L_seg < L_dec (set allow_reduction for the EA reduction)");
  }
  if (vocab_size != 0 && vocab_size < 5) throw ConfigError("model.vocab_size is too small");
}

std::size_t seg_start(std::size_t tau, std::size_t s) {
  if (s == 0) throw ConfigError("segment length must be >= 1");
  return (tau / s) * s;
}

}  // namespace seal::models
