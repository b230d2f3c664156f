// SPDX-License-Identifier: Apache-2.0
#include "seal/config/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "seal/labels/proxy_labels.hpp"
#include "seal/numerics/checkpoint.hpp"
#include "seal/numerics/error.hpp"

namespace seal::config {

using json = nlohmann::json;

text::Vocab build_vocab(std::span<const text::RawExample> corpus, std::size_t max_size) {
  std::vector<std::string> texts;
  for (const auto& ex : corpus) {
    texts.insert(texts.end(), ex.documents.begin(), ex.documents.end());
    texts.push_back(ex.summary);
  }
  return text::Vocab::build(texts, max_size);
}

std::size_t preprocess_corpus(const fs::path& input, const text::Vocab& vocab, const text::SnippetConfig& cfg,
                              const fs::path& output) {
  const auto examples = text::load_examples(input, vocab, cfg);
  text::write_examples(output, examples);
  return examples.size();
}

CloneFilterStats clone_filter(const fs::path& input, const fs::path& output, std::size_t n, double threshold) {
  const auto corpus = text::read_corpus(input);
  // An uncapped vocabulary keeps distinct words distinct (no <unk> collisions).
  const text::Vocab vocab = build_vocab(corpus, std::numeric_limits<std::size_t>::max());
  CloneFilterStats stats;
  std::vector<text::RawExample> kept;
  for (const auto& ex : corpus) {
    ++stats.examples;
    const text::Article article = text::make_article(ex.summary, vocab);
    text::RawExample filtered{{}, ex.summary};
    for (const auto& doc : ex.documents) {
      if (text::is_near_clone(text::flatten(text::make_document(0, doc, vocab)), article, n, threshold)) {
        ++stats.documents_removed;
      } else {
        filtered.documents.push_back(doc);
      }
    }
    if (filtered.documents.empty()) {
      ++stats.examples_dropped;
    } else {
      kept.push_back(std::move(filtered));
    }
  }
  text::write_corpus(output, kept);
  return stats;
}

void write_labels(const fs::path& path, std::span<const Tensor> labels) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write labels " + path.string());
  for (const auto& t : labels) {
    json j;
    j["shape"] = t.shape();
    j["values"] = t.storage();
    out << j.dump() << '\n';
  }
}

std::vector<Tensor> read_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open labels " + path.string());
  std::vector<Tensor> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      out.emplace_back(j.at("shape").get<Shape>(), j.at("values").get<std::vector<double>>());
    } catch (const json::exception& e) {
      throw InputError(path.string() + " line " + std::to_string(line_no) + ": malformed labels (" + e.what() + ")");
    } catch (const ShapeError& e) {
      throw InputError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Tensor> label_examples(std::span<const text::SnippetizedExample> examples,
                                   const models::ModelConfig& model, const labels::LabelConfig& cfg) {
  std::vector<Tensor> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    out.push_back(model.kind == models::ModelKind::SEAL
                      ? labels::segment_labels(ex.snippets, ex.target, model.l_seg, model.n_seg, cfg)
                      : labels::proxy_labels(ex.snippets, ex.target, cfg));
  }
  return out;
}

void save_model(const fs::path& dir, const RunConfig& config, const text::Vocab& vocab,
                const models::Summarizer& model, std::uint64_t step) {
  fs::create_directories(dir);
  // Paths say where a run happened, not what it produced; dropping them keeps
  // checkpoints of identical runs byte-identical wherever they live.
  RunConfig stored = config;
  stored.paths = PathsConfig{};
  save_checkpoint(dir, model.parameters(), CheckpointManifest{config_hash(stored), step, to_json(stored)});
  save_config(stored, (dir / "config.json").string());
  vocab.save(dir / "vocab.txt");
}

LoadedModel load_model(const fs::path& dir) {
  LoadedModel out;
  const CheckpointManifest manifest = read_manifest(dir);
  out.config = from_json(manifest.config_json);
  if (config_hash(out.config) != manifest.config_hash) {
    throw InputError("checkpoint " + dir.string() + ": config hash does not match its manifest");
  }
  // The readable config.json copy must agree with the manifest it sits beside.
  if (fs::exists(dir / "config.json")) {
    std::ifstream in(dir / "config.json");
    std::stringstream stored;
    stored << in.rdbuf();
    if (config_hash(from_json(stored.str())) != manifest.config_hash) {
      throw InputError("checkpoint " + dir.string() + ": config.json does not match its manifest");
    }
  }
  out.vocab = text::Vocab::load(dir / "vocab.txt");
  if (out.vocab.size() != out.config.model.vocab_size) {
    throw InputError("checkpoint " + dir.string() + ": vocabulary size differs from model.vocab_size");
  }
  out.model = std::make_unique<models::Summarizer>(out.config.model);
  out.step = load_checkpoint(dir, out.model->parameters()).step;
  return out;
}

TrainOutcome train_model(RunConfig config, std::span<const text::SnippetizedExample> examples,
                         std::span<const Tensor> labels, const text::Vocab& vocab, const fs::path& checkpoint_dir,
                         const fs::path& metrics_path) {
  if (config.model.vocab_size == 0) config.model.vocab_size = vocab.size();
  if (config.model.vocab_size != vocab.size()) {
    throw ConfigError("model.vocab_size " + std::to_string(config.model.vocab_size) + " differs from the vocabulary (" +
                      std::to_string(vocab.size()) + " tokens)");
  }
  config.validate();
  if (examples.empty()) throw InputError("no training examples");
  if (!labels.empty() && labels.size() != examples.size()) {
    throw InputError("labels cover " + std::to_string(labels.size()) + " examples, data has " +
                     std::to_string(examples.size()));
  }
  const auto kind = config.model.kind;
  std::vector<training::TrainingExample> data;
  data.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (labels.empty() || kind == models::ModelKind::Trunc || kind == models::ModelKind::CA) {
      data.push_back(training::attach_labels(examples[i], config.model, config.train.labels));
      continue;
    }
    const std::size_t n = examples[i].snippets.size();
    const Shape expected = kind == models::ModelKind::SEAL ? Shape{n, config.model.n_seg} : Shape{n};
    if (labels[i].shape() != expected) {
      throw InputError("labels of example " + std::to_string(i) + " have shape " + to_string(labels[i].shape()) +
                       ", the model needs " + to_string(expected));
    }
    data.push_back(training::TrainingExample{examples[i], labels[i]});
  }

  models::Summarizer model(config.model);
  training::Trainer trainer(model, config.train);
  TrainOutcome outcome;
  std::ofstream metrics;
  if (!metrics_path.empty()) {
    metrics.open(metrics_path, std::ios::trunc);
    if (!metrics) throw Error("cannot write metrics log " + metrics_path.string());
  }
  outcome.history = trainer.fit(data, metrics_path.empty() ? nullptr : &metrics);
  save_model(checkpoint_dir, config, vocab, model, trainer.step());
  return outcome;
}

const std::vector<std::string>& pipeline_stages() {
  static const std::vector<std::string> stages = {"preprocess", "label", "train", "eval", "inspect"};
  return stages;
}

namespace {

struct StagePlan {
  std::string name;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("missing input " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// The config fields a stage reads. Paths are left out: inputs are hashed by
// content, and eval/inspect read their config from the checkpoint.
std::string stage_config(const std::string& name, const RunConfig& config) {
  const json full = json::parse(to_json(config));
  json used = json::object();
  if (name == "preprocess") {
    for (const char* key : {"l_snpt", "n_snpt", "l_dec"}) used["model"][key] = full["model"][key];
    used["data"] = full["data"];
  } else if (name == "label") {
    used["model"] = full["model"];
    used["labels"] = full["labels"];
  } else if (name == "train") {
    used = full;
    used.erase("paths");
    used.erase("preset");
  }
  return used.dump();
}

std::string stage_hash(const StagePlan& plan, const RunConfig& config) {
  std::uint64_t h = fnv1a(plan.name);
  h = fnv1a(stage_config(plan.name, config), h);
  for (const auto& input : plan.inputs) {
    h = fnv1a(input.filename().string(), h);
    h = fnv1a(read_file(input), h);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void run_stage(const std::string& name, const RunConfig& config, const fs::path& work, std::ostream& log) {
  const fs::path vocab_path = work / "vocab.txt";
  const fs::path train_path = work / "train.jsonl";
  const fs::path eval_path = work / "eval.jsonl";
  const fs::path ckpt = work / "ckpt";
  if (name == "preprocess") {
    if (config.paths.corpus.empty()) throw ConfigError("paths.corpus is not set");
    const auto corpus = text::read_corpus(config.paths.corpus);
    const text::Vocab vocab = build_vocab(corpus, config.data.max_vocab);
    vocab.save(vocab_path);
    const auto n = preprocess_corpus(config.paths.corpus, vocab, config.snippet_config(), train_path);
    const std::string eval_src = config.paths.eval_corpus.empty() ? config.paths.corpus : config.paths.eval_corpus;
    const auto m = preprocess_corpus(eval_src, vocab, config.snippet_config(), eval_path);
    log << "  " << n << " training and " << m << " evaluation examples, vocabulary " << vocab.size() << '\n';
  } else if (name == "label") {
    const auto examples = text::read_examples(train_path);
    write_labels(work / "labels.jsonl", label_examples(examples, config.model, config.train.labels));
    log << "  labeled " << examples.size() << " examples\n";
  } else if (name == "train") {
    const auto examples = text::read_examples(train_path);
    const auto labels = read_labels(work / "labels.jsonl");
    const text::Vocab vocab = text::Vocab::load(vocab_path);
    const auto outcome = train_model(config, examples, labels, vocab, ckpt, work / "metrics.jsonl");
    log << "  " << outcome.history.size() << " steps, final " << training::metrics_json_line(outcome.history.back())
        << '\n';
  } else if (name == "eval") {
    const LoadedModel loaded = load_model(ckpt);
    const auto examples = text::read_examples(eval_path);
    const auto report = training::evaluate(*loaded.model, examples, loaded.vocab);
    std::ofstream(work / "eval.json") << report.to_json() << '\n';
    log << "  " << report.to_text() << '\n';
  } else if (name == "inspect") {
    const LoadedModel loaded = load_model(ckpt);
    const auto examples = text::read_examples(eval_path);
    if (examples.empty()) throw InputError("no evaluation examples to inspect");
    training::DecodeTrace trace;
    const auto kind = loaded.config.model.kind;
    if (kind == models::ModelKind::SEAL || kind == models::ModelKind::EA) {
      trace = training::greedy_decode_segmentwise(*loaded.model, examples[0], loaded.config.model.l_dec).trace;
    } else {
      // Trunc and CA attend to everything; the trace has no selection.
      training::SegmentTrace seg;
      seg.tokens = training::greedy_decode(*loaded.model, examples[0], loaded.config.model.l_dec);
      trace.segments.push_back(std::move(seg));
    }
    trace.example_id = "0";
    training::export_trace(trace, examples[0], loaded.vocab, training::TraceFormat::Json, work / "trace.json");
    training::export_trace(trace, examples[0], loaded.vocab, training::TraceFormat::Html, work / "trace.html");
    log << "  wrote trace.json and trace.html\n";
  } else {
    throw ConfigError("unknown pipeline stage '" + name + "'");
  }
}

StagePlan plan_for(const std::string& name, const RunConfig& config, const fs::path& work) {
  const fs::path ckpt = work / "ckpt";
  if (name == "preprocess") {
    StagePlan p{name, {}, {work / "vocab.txt", work / "train.jsonl", work / "eval.jsonl"}};
    if (!config.paths.corpus.empty()) p.inputs.push_back(config.paths.corpus);
    if (!config.paths.eval_corpus.empty()) p.inputs.push_back(config.paths.eval_corpus);
    return p;
  }
  if (name == "label") return {name, {work / "train.jsonl"}, {work / "labels.jsonl"}};
  if (name == "train") {
    return {name,
            {work / "train.jsonl", work / "labels.jsonl", work / "vocab.txt"},
            {ckpt / "params.bin", ckpt / "manifest.json", work / "metrics.jsonl"}};
  }
  if (name == "eval") return {name, {ckpt / "params.bin", ckpt / "manifest.json", work / "eval.jsonl"}, {work / "eval.json"}};
  if (name == "inspect") {
    return {name,
            {ckpt / "params.bin", ckpt / "manifest.json", work / "eval.jsonl"},
            {work / "trace.json", work / "trace.html"}};
  }
  throw ConfigError("unknown pipeline stage '" + name + "'");
}

}  // namespace

PipelineResult run_pipeline(std::span<const std::string> stages, const RunConfig& config, std::ostream& log) {
  PipelineResult result;
  for (const auto& s : stages) {
    if (std::find(pipeline_stages().begin(), pipeline_stages().end(), s) == pipeline_stages().end()) {
      result.exit_code = 1;
      result.failed_stage = s;
      result.message = "unknown pipeline stage '" + s + "'";
      log << result.message << '\n';
      return result;
    }
  }
  const fs::path work = config.paths.work_dir;
  for (const auto& name : pipeline_stages()) {
    if (std::find(stages.begin(), stages.end(), name) == stages.end()) continue;
    try {
      fs::create_directories(work / ".cache");
      const StagePlan plan = plan_for(name, config, work);
      const std::string hash = stage_hash(plan, config);
      const fs::path stamp = work / ".cache" / (name + ".hash");
      const bool outputs_exist =
          std::all_of(plan.outputs.begin(), plan.outputs.end(), [](const fs::path& p) { return fs::exists(p); });
      if (outputs_exist && fs::exists(stamp) && read_file(stamp) == hash) {
        log << "[" << name << "] cached\n";
        result.stages.push_back({name, true});
        continue;
      }
      log << "[" << name << "] running\n";
      fs::remove(stamp);
      run_stage(name, config, work, log);
      std::ofstream(stamp, std::ios::trunc) << hash;
      result.stages.push_back({name, false});
    } catch (const std::exception& e) {
      const bool user = dynamic_cast<const InputError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
                        dynamic_cast<const SelectionError*>(&e);
      result.exit_code = user ? 1 : 2;
      result.failed_stage = name;
      result.message = "pipeline halted at stage '" + name + "': " + e.what();
      log << result.message << '\n';
      return result;
    }
  }
  return result;
}

}  // namespace seal::config
