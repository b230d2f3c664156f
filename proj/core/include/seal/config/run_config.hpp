// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "seal/models/model_config.hpp"
#include "seal/text/snippets.hpp"
#include "seal/training/trainer.hpp"

namespace seal::config {

struct DataConfig {
  std::size_t max_vocab = 2000;
  std::size_t clone_ngram = 6;
  double clone_threshold = 0.2;

  friend bool operator==(const DataConfig&, const DataConfig&) = default;
};

struct PathsConfig {
  std::string corpus;
  std::string eval_corpus;
  std::string work_dir = "run";

  friend bool operator==(const PathsConfig&, const PathsConfig&) = default;
};

/// Everything one run needs. The "labels" JSON section is train.labels.
struct RunConfig {
  std::string preset;
  models::ModelConfig model;
  training::TrainConfig train;
  DataConfig data;
  PathsConfig paths;

  /// Model and training invariants; vocab_size 0 means "taken from the vocabulary".
  void validate() const;
  text::SnippetConfig snippet_config() const { return {model.l_snpt, model.n_snpt, model.l_dec}; }
};

bool operator==(const RunConfig& a, const RunConfig& b);

enum class FieldKind { Integer, Real, Boolean, String, Choice };

/// One configurable field, addressed as "<section>.<key>".
struct FieldSpec {
  std::string section;
  std::string key;
  FieldKind kind;
  std::string help;
  std::vector<std::string> choices;

  std::string path() const { return section + "." + key; }
};

/// Every field of RunConfig except the preset name, in serialization order.
const std::vector<FieldSpec>& config_schema();

std::vector<std::string> preset_names();
/// Defaults overlaid with the named preset. Unknown names throw ConfigError.
RunConfig preset(const std::string& name);

/// Canonical JSON with every field present.
std::string to_json(const RunConfig& config);
/// Starts from the "preset" named in the document (or defaults), overlays the
/// remaining sections, rejects unknown sections or fields and validates.
RunConfig from_json(std::string_view json);
/// `source` is a preset name or a JSON file path.
RunConfig load_config(const std::string& source);
void save_config(const RunConfig& config, const std::string& path);

/// Sets one field from its textual value (CLI overrides). Does not validate.
void set_field(RunConfig& config, const std::string& path, const std::string& value);

/// Hex FNV-1a of the canonical JSON.
std::string config_hash(const RunConfig& config);

}  // namespace seal::config
