// SPDX-License-Identifier: Apache-2.0
#include "seal/config/run_config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"
#include "seal/numerics/error.hpp"
#include "seal/numerics/parameters.hpp"

namespace seal::config {

namespace detail {
extern const std::string_view kPresetsJson;
}

using json = nlohmann::ordered_json;

namespace {

struct Binding {
  FieldSpec spec;
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

[[noreturn]] void type_error(const FieldSpec& spec, const char* expected) {
  throw ConfigError("config field " + spec.path() + " must be " + expected);
}

template <typename Access>
Binding integer(std::string section, std::string key, std::string help, Access access) {
  Binding b{{std::move(section), std::move(key), FieldKind::Integer, std::move(help), {}}, {}, {}};
  b.get = [access](const RunConfig& c) { return json(access(const_cast<RunConfig&>(c))); };
  b.set = [access, spec = b.spec](RunConfig& c, const json& v) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      type_error(spec, "a non-negative integer");
    }
    access(c) = v.get<std::remove_reference_t<decltype(access(c))>>();
  };
  return b;
}

template <typename Access>
Binding real(std::string section, std::string key, std::string help, Access access) {
  Binding b{{std::move(section), std::move(key), FieldKind::Real, std::move(help), {}}, {}, {}};
  b.get = [access](const RunConfig& c) { return json(access(const_cast<RunConfig&>(c))); };
  b.set = [access, spec = b.spec](RunConfig& c, const json& v) {
    if (!v.is_number()) type_error(spec, "a number");
    access(c) = v.get<double>();
  };
  return b;
}

template <typename Access>
Binding boolean(std::string section, std::string key, std::string help, Access access) {
  Binding b{{std::move(section), std::move(key), FieldKind::Boolean, std::move(help), {}}, {}, {}};
  b.get = [access](const RunConfig& c) { return json(access(const_cast<RunConfig&>(c))); };
  b.set = [access, spec = b.spec](RunConfig& c, const json& v) {
    if (!v.is_boolean()) type_error(spec, "true or false");
    access(c) = v.get<bool>();
  };
  return b;
}

template <typename Access>
Binding string(std::string section, std::string key, std::string help, Access access) {
  Binding b{{std::move(section), std::move(key), FieldKind::String, std::move(help), {}}, {}, {}};
  b.get = [access](const RunConfig& c) { return json(access(const_cast<RunConfig&>(c))); };
  b.set = [access, spec = b.spec](RunConfig& c, const json& v) {
    if (!v.is_string()) type_error(spec, "a string");
    access(c) = v.get<std::string>();
  };
  return b;
}

Binding choice(std::string section, std::string key, std::string help, std::vector<std::string> choices,
               std::function<std::string(const RunConfig&)> get, std::function<void(RunConfig&, const std::string&)> set) {
  Binding b{{std::move(section), std::move(key), FieldKind::Choice, std::move(help), std::move(choices)}, {}, {}};
  b.get = [get](const RunConfig& c) { return json(get(c)); };
  b.set = [set, spec = b.spec](RunConfig& c, const json& v) {
    if (!v.is_string()) type_error(spec, "a string");
    const auto s = v.get<std::string>();
    if (std::find(spec.choices.begin(), spec.choices.end(), s) == spec.choices.end()) {
      std::string all;
      for (const auto& ch : spec.choices) all += (all.empty() ? "" : ", ") + ch;
      throw ConfigError("config field " + spec.path() + ": '" + s + "' is not one of " + all);
    }
    set(c, s);
  };
  return b;
}

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> table = [] {
    std::vector<Binding> t;
    t.push_back(choice(
        "model", "kind", "model family", {"trunc", "ca", "ea", "seal"},
        [](const RunConfig& c) { return models::to_string(c.model.kind); },
        [](RunConfig& c, const std::string& s) { c.model.kind = models::parse_model_kind(s); }));
    t.push_back(integer("model", "d_model", "hidden size", [](RunConfig& c) -> auto& { return c.model.d_model; }));
    t.push_back(integer("model", "d_ff", "feed-forward size", [](RunConfig& c) -> auto& { return c.model.d_ff; }));
    t.push_back(integer("model", "heads", "attention heads", [](RunConfig& c) -> auto& { return c.model.heads; }));
    t.push_back(integer("model", "encoder_layers", "encoder layers",
                        [](RunConfig& c) -> auto& { return c.model.encoder_layers; }));
    t.push_back(integer("model", "scorer_layers", "scorer layers (EA, SEAL)",
                        [](RunConfig& c) -> auto& { return c.model.scorer_layers; }));
    t.push_back(integer("model", "decoder_layers", "decoder layers",
                        [](RunConfig& c) -> auto& { return c.model.decoder_layers; }));
    t.push_back(integer("model", "l_input", "maximum input length, = l_snpt * n_snpt",
                        [](RunConfig& c) -> auto& { return c.model.l_input; }));
    t.push_back(integer("model", "l_snpt", "snippet length", [](RunConfig& c) -> auto& { return c.model.l_snpt; }));
    t.push_back(integer("model", "n_snpt", "maximum number of snippets",
                        [](RunConfig& c) -> auto& { return c.model.n_snpt; }));
    t.push_back(integer("model", "l_ext", "maximum extractive length",
                        [](RunConfig& c) -> auto& { return c.model.l_ext; }));
    t.push_back(integer("model", "l_dec", "maximum decode length, = l_seg * n_seg",
                        [](RunConfig& c) -> auto& { return c.model.l_dec; }));
    t.push_back(integer("model", "l_seg", "decode segment length", [](RunConfig& c) -> auto& { return c.model.l_seg; }));
    t.push_back(integer("model", "n_seg", "number of decode segments",
                        [](RunConfig& c) -> auto& { return c.model.n_seg; }));
    t.push_back(integer("model", "compressed_size", "CA vectors per snippet group",
                        [](RunConfig& c) -> auto& { return c.model.compressed_size; }));
    t.push_back(integer("model", "group_size", "CA snippets per group (single-document inputs)",
                        [](RunConfig& c) -> auto& { return c.model.group_size; }));
    t.push_back(integer("model", "vocab_size", "output vocabulary size, 0 = from the vocabulary file",
                        [](RunConfig& c) -> auto& { return c.model.vocab_size; }));
    t.push_back(integer("model", "max_docs", "document embedding table size",
                        [](RunConfig& c) -> auto& { return c.model.max_docs; }));
    t.push_back(integer("model", "seed", "parameter initialization seed",
                        [](RunConfig& c) -> auto& { return c.model.seed; }));
    t.push_back(boolean("model", "allow_reduction", "allow SEAL with l_seg = l_dec",
                        [](RunConfig& c) -> auto& { return c.model.allow_reduction; }));

    t.push_back(integer("train", "batch_size", "examples per update",
                        [](RunConfig& c) -> auto& { return c.train.batch_size; }));
    t.push_back(real("train", "learning_rate", "base learning rate",
                     [](RunConfig& c) -> auto& { return c.train.schedule.base; }));
    t.push_back(choice(
        "train", "schedule", "learning-rate schedule", {"constant", "rsqrt"},
        [](const RunConfig& c) { return training::to_string(c.train.schedule.kind); },
        [](RunConfig& c, const std::string& s) { c.train.schedule.kind = training::parse_schedule_kind(s); }));
    t.push_back(integer("train", "warmup_steps", "linear warmup steps (rsqrt schedule)",
                        [](RunConfig& c) -> auto& { return c.train.schedule.warmup_steps; }));
    t.push_back(real("train", "dropout", "dropout rate", [](RunConfig& c) -> auto& { return c.train.dropout; }));
    t.push_back(integer("train", "max_steps", "optimizer steps", [](RunConfig& c) -> auto& { return c.train.max_steps; }));
    t.push_back(integer("train", "seed", "batch order and dropout seed",
                        [](RunConfig& c) -> auto& { return c.train.seed; }));
    t.push_back(real("train", "abstractive_weight", "weight of l_a",
                     [](RunConfig& c) -> auto& { return c.train.abstractive_weight; }));
    t.push_back(real("train", "extractive_weight", "weight of l_e",
                     [](RunConfig& c) -> auto& { return c.train.extractive_weight; }));
    t.push_back(real("train", "clip_norm", "global gradient-norm clip, 0 = off",
                     [](RunConfig& c) -> auto& { return c.train.clip_norm; }));
    t.push_back(real("train", "early_stop_loss", "stop once l_a falls below, 0 = off",
                     [](RunConfig& c) -> auto& { return c.train.early_stop_loss; }));

    t.push_back(boolean("labels", "sequential", "greedy sequential labels",
                        [](RunConfig& c) -> auto& { return c.train.labels.sequential; }));
    t.push_back(integer("labels", "ngram", "ROUGE-N order (1 or 2)",
                        [](RunConfig& c) -> auto& { return c.train.labels.ngram; }));
    t.push_back(choice(
        "labels", "score_type", "ROUGE component", {"precision", "recall", "f1"},
        [](const RunConfig& c) { return labels::to_string(c.train.labels.score_type); },
        [](RunConfig& c, const std::string& s) { c.train.labels.score_type = labels::parse_score_type(s); }));
    t.push_back(boolean("labels", "binary_sequential", "sequential labels as 0/1",
                        [](RunConfig& c) -> auto& { return c.train.labels.binary_sequential; }));

    t.push_back(integer("data", "max_vocab", "vocabulary size cap, reserved tokens included",
                        [](RunConfig& c) -> auto& { return c.data.max_vocab; }));
    t.push_back(integer("data", "clone_ngram", "n-gram order of the near-clone filter",
                        [](RunConfig& c) -> auto& { return c.data.clone_ngram; }));
    t.push_back(real("data", "clone_threshold", "near-clone threshold (strict >)",
                     [](RunConfig& c) -> auto& { return c.data.clone_threshold; }));

    t.push_back(string("paths", "corpus", "training corpus (JSON-lines)",
                       [](RunConfig& c) -> auto& { return c.paths.corpus; }));
    t.push_back(string("paths", "eval_corpus", "evaluation corpus (JSON-lines)",
                       [](RunConfig& c) -> auto& { return c.paths.eval_corpus; }));
    t.push_back(string("paths", "work_dir", "pipeline output directory",
                       [](RunConfig& c) -> auto& { return c.paths.work_dir; }));
    return t;
  }();
  return table;
}

const Binding* find_binding(const std::string& section, const std::string& key) {
  for (const auto& b : bindings()) {
    if (b.spec.section == section && b.spec.key == key) return &b;
  }
  return nullptr;
}

void overlay(RunConfig& config, const json& doc, const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [section, body] : doc.items()) {
    if (section == "preset") continue;
    const bool known = std::any_of(bindings().begin(), bindings().end(),
                                   [&](const Binding& b) { return b.spec.section == section; });
    if (!known) throw ConfigError(where + ": unknown config section '" + section + "'");
    if (!body.is_object()) throw ConfigError(where + ": section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      const Binding* b = find_binding(section, key);
      if (!b) throw ConfigError(where + ": unknown config field '" + section + "." + key + "'");
      b->set(config, value);
    }
  }
}

const json& presets_doc() {
  static const json doc = json::parse(detail::kPresetsJson);
  return doc;
}

json parse_or_throw(std::string_view text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(where + ": malformed JSON (" + e.what() + ")");
  }
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  train.validate();
  if (data.max_vocab < text::kReservedTokens + 1) throw ConfigError("data.max_vocab is too small");
  if (data.clone_ngram == 0) throw ConfigError("data.clone_ngram must be positive");
  if (!(data.clone_threshold >= 0.0 && data.clone_threshold <= 1.0)) {
    throw ConfigError("data.clone_threshold must be in [0, 1]");
  }
}

bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

const std::vector<FieldSpec>& config_schema() {
  static const std::vector<FieldSpec> schema = [] {
    std::vector<FieldSpec> s;
    for (const auto& b : bindings()) s.push_back(b.spec);
    return s;
  }();
  return schema;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, body] : presets_doc().items()) names.push_back(name);
  return names;
}

RunConfig preset(const std::string& name) {
  const auto& doc = presets_doc();
  if (!doc.contains(name)) {
    std::string all;
    for (const auto& n : preset_names()) all += (all.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (available: " + all + ")");
  }
  RunConfig config;
  overlay(config, doc.at(name), "preset " + name);
  config.preset = name;
  return config;
}

std::string to_json(const RunConfig& config) {
  json doc;
  doc["preset"] = config.preset;
  for (const auto& b : bindings()) doc[b.spec.section][b.spec.key] = b.get(config);
  return doc.dump(2);
}

RunConfig from_json(std::string_view text) {
  const json doc = parse_or_throw(text, "config");
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  RunConfig config;
  if (doc.contains("preset")) {
    if (!doc["preset"].is_string()) throw ConfigError("config field preset must be a string");
    const auto name = doc["preset"].get<std::string>();
    if (!name.empty()) config = preset(name);
  }
  overlay(config, doc, "config");
  config.validate();
  return config;
}

RunConfig load_config(const std::string& source) {
  if (presets_doc().contains(source)) {
    RunConfig config = preset(source);
    config.validate();
    return config;
  }
  std::ifstream in(source);
  if (!in) throw ConfigError("'" + source + "' is neither a preset nor a readable config file");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return from_json(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

void save_config(const RunConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write config " + path);
  out << to_json(config) << '\n';
}

void set_field(RunConfig& config, const std::string& path, const std::string& value) {
  const auto dot = path.find('.');
  const Binding* b = dot == std::string::npos ? nullptr : find_binding(path.substr(0, dot), path.substr(dot + 1));
  if (!b) throw ConfigError("unknown config field '" + path + "'");
  json v;
  switch (b->spec.kind) {
    case FieldKind::Integer: {
      std::size_t used = 0;
      unsigned long long n = 0;
      try {
        if (!value.empty() && value[0] == '-') throw std::invalid_argument("negative");
        n = std::stoull(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != value.size()) type_error(b->spec, "a non-negative integer");
      v = n;
      break;
    }
    case FieldKind::Real: {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != value.size()) type_error(b->spec, "a number");
      v = x;
      break;
    }
    case FieldKind::Boolean:
      if (value == "true" || value == "1") {
        v = true;
      } else if (value == "false" || value == "0") {
        v = false;
      } else {
        type_error(b->spec, "true or false");
      }
      break;
    case FieldKind::String:
    case FieldKind::Choice:
      v = value;
      break;
  }
  b->set(config, v);
}

std::string config_hash(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(config))));
  return buf;
}

}  // namespace seal::config
