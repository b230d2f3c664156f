// SPDX-License-Identifier: Apache-2.0
// seal: command-line front end for preprocessing, labeling, training,
// evaluation, decoding and trace inspection.
//
// Exit codes: 0 success, 1 user error (bad flags, inputs or config),
// 2 internal error.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seal/config/pipeline.hpp"
#include "seal/config/run_config.hpp"
#include "seal/numerics/error.hpp"
#include "seal/text/synthetic.hpp"
#include "seal/training/decode.hpp"
#include "seal/training/evaluate.hpp"

namespace fs = std::filesystem;
using namespace seal;

namespace {

std::string describe(const config::FieldSpec& spec) {
  std::string kind;
  switch (spec.kind) {
    case config::FieldKind::Integer:
      kind = "INT";
      break;
    case config::FieldKind::Real:
      kind = "REAL";
      break;
    case config::FieldKind::Boolean:
      kind = "true|false";
      break;
    case config::FieldKind::String:
      kind = "TEXT";
      break;
    case config::FieldKind::Choice:
      for (const auto& c : spec.choices) kind += (kind.empty() ? "" : "|") + c;
      break;
  }
  return spec.help + " [" + kind + "]";
}

/// Config source plus per-field overrides. Each generated flag "--<section>.<key>"
/// maps to exactly one schema field.
class ConfigFlags {
 public:
  ConfigFlags(CLI::App* app, std::string default_source) : source_(std::move(default_source)) {
    app->add_option("--config", source_, "preset name or JSON config file")->capture_default_str();
    for (const auto& spec : config::config_schema()) {
      auto* opt = app->add_option("--" + spec.path(), values_[spec.path()], describe(spec));
      opt->group("Config fields");
      options_.emplace_back(spec.path(), opt);
    }
  }

  /// Alias for one field, e.g. --l-snpt for model.l_snpt.
  void alias(CLI::App* app, const std::string& flag, const std::string& field, const std::string& help) {
    auto* opt = app->add_option(flag, values_[field + "#alias"], help + " (sets " + field + ")");
    options_.emplace_back(field, opt);
    aliases_.emplace_back(field, opt);
  }

  /// Boolean alias that sets `field` to true when present.
  void flag(CLI::App* app, const std::string& flag, const std::string& field, const std::string& help) {
    auto* opt = app->add_flag(flag);
    opt->description(help + " (sets " + field + "=true)");
    flags_.emplace_back(field, opt);
  }

  /// Preprocessing only reads snippet and data fields, so it may skip the
  /// model relations (e.g. --l-snpt alone would break L_input = L_snpt x N_snpt).
  config::RunConfig resolve(bool validate = true) const {
    config::RunConfig cfg = config::load_config(source_);
    for (const auto& [field, opt] : options_) {
      if (opt->count() == 0) continue;
      const bool is_alias =
          std::any_of(aliases_.begin(), aliases_.end(), [&](const auto& a) { return a.second == opt; });
      config::set_field(cfg, field, values_.at(is_alias ? field + "#alias" : field));
    }
    for (const auto& [field, opt] : flags_) {
      if (opt->count() > 0) config::set_field(cfg, field, "true");
    }
    if (validate) cfg.validate();
    return cfg;
  }

 private:
  std::string source_;
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, CLI::Option*>> options_;
  std::vector<std::pair<std::string, CLI::Option*>> aliases_;
  std::vector<std::pair<std::string, CLI::Option*>> flags_;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << contents;
}

int run(int argc, char** argv) {
  CLI::App app{"seal: long-input abstractive summarization with learned content selection"};
  app.require_subcommand(1);

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "tokenize and snippetize a raw JSON-lines corpus");
  std::string pre_input, pre_vocab, pre_out;
  pre->add_option("--input", pre_input, "raw corpus (documents, summary)")->required();
  pre->add_option("--vocab", pre_vocab, "vocabulary file; built from the input when it does not exist")->required();
  pre->add_option("--out", pre_out, "preprocessed JSON-lines output")->required();
  ConfigFlags pre_cfg(pre, "arxiv-paper");
  pre_cfg.alias(pre, "--l-snpt", "model.l_snpt", "snippet length");
  pre_cfg.alias(pre, "--n-snpt", "model.n_snpt", "maximum number of snippets");
  pre_cfg.alias(pre, "--l-dec", "model.l_dec", "maximum decode length");
  pre_cfg.alias(pre, "--max-vocab", "data.max_vocab", "vocabulary size cap");

  // clone-filter
  auto* clone = app.add_subcommand("clone-filter", "drop source documents that are near-clones of the summary");
  std::string clone_input, clone_out;
  clone->add_option("--input", clone_input, "raw corpus")->required();
  clone->add_option("--out", clone_out, "filtered corpus")->required();
  ConfigFlags clone_cfg(clone, "desk-seal");
  clone_cfg.alias(clone, "--ngram", "data.clone_ngram", "n-gram order");
  clone_cfg.alias(clone, "--threshold", "data.clone_threshold", "clone threshold (strict >)");

  // label
  auto* lab = app.add_subcommand("label", "compute proxy labels for preprocessed examples");
  std::string lab_data, lab_out;
  lab->add_option("--data", lab_data, "preprocessed examples")->required();
  lab->add_option("--out", lab_out, "labels JSON-lines output")->required();
  ConfigFlags lab_cfg(lab, "desk-seal");
  lab_cfg.flag(lab, "--sequential", "labels.sequential", "greedy sequential labels");
  lab_cfg.alias(lab, "--ngram", "labels.ngram", "ROUGE-N order");
  lab_cfg.alias(lab, "--type", "labels.score_type", "precision, recall or f1");

  // train
  auto* tr = app.add_subcommand("train", "train a model and write a checkpoint");
  std::string tr_data, tr_labels, tr_vocab, tr_out, tr_metrics;
  tr->add_option("--data", tr_data, "preprocessed examples")->required();
  tr->add_option("--labels", tr_labels, "labels from `seal label` (computed on the fly when omitted)");
  tr->add_option("--vocab", tr_vocab, "vocabulary file (default: vocab.txt next to --data)");
  tr->add_option("--out", tr_out, "checkpoint directory")->required();
  tr->add_option("--metrics", tr_metrics, "metrics log (default: <out>/metrics.jsonl)");
  ConfigFlags tr_cfg(tr, "desk-seal");

  // eval
  auto* ev = app.add_subcommand("eval", "greedy-decode a dataset and report ROUGE F1");
  std::string ev_ckpt, ev_data, ev_json;
  ev->add_option("--ckpt", ev_ckpt, "checkpoint directory")->required();
  ev->add_option("--data", ev_data, "preprocessed examples")->required();
  ev->add_option("--json", ev_json, "also write the report as JSON");

  // decode
  auto* dec = app.add_subcommand("decode", "greedy-decode examples, optionally exporting a selection trace");
  std::string dec_ckpt, dec_data, dec_out, dec_trace;
  std::size_t dec_example = 0;
  std::size_t dec_max_len = 0;
  dec->add_option("--ckpt", dec_ckpt, "checkpoint directory")->required();
  dec->add_option("--data", dec_data, "preprocessed examples")->required();
  dec->add_option("--out", dec_out, "predictions JSON-lines (default: stdout)");
  dec->add_option("--trace", dec_trace, "write the selection trace of --example as JSON");
  dec->add_option("--example", dec_example, "example index for --trace")->capture_default_str();
  dec->add_option("--max-len", dec_max_len, "decode length cap (default: model L_dec)");

  // inspect
  auto* insp = app.add_subcommand("inspect", "render a JSON trace as color-coded HTML");
  std::string insp_trace, insp_html;
  insp->add_option("--trace", insp_trace, "trace JSON from `seal decode --trace`")->required();
  insp->add_option("--html", insp_html, "HTML output")->required();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "run preprocess, label, train, eval and inspect with caching");
  std::vector<std::string> pipe_stages = config::pipeline_stages();
  pipe->add_option("--stages", pipe_stages, "stages to run")->delimiter(',')->capture_default_str();
  ConfigFlags pipe_cfg(pipe, "desk-seal");

  // config
  auto* show = app.add_subcommand("config", "print the resolved configuration as JSON");
  std::string show_out;
  bool show_presets = false;
  show->add_option("--out", show_out, "write to a file instead of stdout");
  show->add_flag("--list-presets", show_presets, "list preset names");
  ConfigFlags show_cfg(show, "desk-seal");

  // synth
  auto* syn = app.add_subcommand("synth", "write a synthetic raw corpus");
  std::string syn_task = "salience", syn_out;
  std::size_t syn_count = 200, syn_sentences = 32, syn_slots = 4;
  std::uint64_t syn_seed = 1;
  syn->add_option("--task", syn_task, "salience or segment")
      ->check(CLI::IsMember({"salience", "segment"}))
      ->capture_default_str();
  syn->add_option("--count", syn_count, "number of examples")->capture_default_str();
  syn->add_option("--seed", syn_seed, "generator seed")->capture_default_str();
  syn->add_option("--sentences", syn_sentences, "sentences per input")->capture_default_str();
  syn->add_option("--slots", syn_slots, "salient sentences per input")->capture_default_str();
  syn->add_option("--out", syn_out, "output corpus")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (pre->parsed()) {
    const auto cfg = pre_cfg.resolve(false);
    if (cfg.model.l_snpt == 0 || cfg.model.n_snpt == 0 || cfg.model.l_dec == 0) {
      throw ConfigError("--l-snpt, --n-snpt and --l-dec must be positive");
    }
    text::Vocab vocab;
    if (fs::exists(pre_vocab)) {
      vocab = text::Vocab::load(pre_vocab);
    } else {
      vocab = config::build_vocab(text::read_corpus(pre_input), cfg.data.max_vocab);
      vocab.save(pre_vocab);
      std::cerr << "built vocabulary of " << vocab.size() << " tokens -> " << pre_vocab << '\n';
    }
    const auto n = config::preprocess_corpus(pre_input, vocab, cfg.snippet_config(), pre_out);
    std::cerr << "preprocessed " << n << " examples -> " << pre_out << '\n';
  } else if (clone->parsed()) {
    const auto cfg = clone_cfg.resolve(false);
    const auto stats = config::clone_filter(clone_input, clone_out, cfg.data.clone_ngram, cfg.data.clone_threshold);
    std::cout << "examples " << stats.examples << ", documents removed " << stats.documents_removed
              << ", examples dropped " << stats.examples_dropped << '\n';
  } else if (lab->parsed()) {
    const auto cfg = lab_cfg.resolve();
    const auto examples = text::read_examples(lab_data);
    config::write_labels(lab_out, config::label_examples(examples, cfg.model, cfg.train.labels));
    std::cerr << "labeled " << examples.size() << " examples -> " << lab_out << '\n';
  } else if (tr->parsed()) {
    const auto cfg = tr_cfg.resolve();
    const auto examples = text::read_examples(tr_data);
    const fs::path vocab_path = tr_vocab.empty() ? fs::path(tr_data).parent_path() / "vocab.txt" : fs::path(tr_vocab);
    const text::Vocab vocab = text::Vocab::load(vocab_path);
    const std::vector<Tensor> labels = tr_labels.empty() ? std::vector<Tensor>{} : config::read_labels(tr_labels);
    fs::create_directories(tr_out);
    const fs::path metrics = tr_metrics.empty() ? fs::path(tr_out) / "metrics.jsonl" : fs::path(tr_metrics);
    const auto outcome = config::train_model(cfg, examples, labels, vocab, tr_out, metrics);
    std::cerr << "trained " << outcome.history.size() << " steps; last "
              << training::metrics_json_line(outcome.history.back()) << '\n';
  } else if (ev->parsed()) {
    const auto loaded = config::load_model(ev_ckpt);
    const auto examples = text::read_examples(ev_data);
    const auto report = training::evaluate(*loaded.model, examples, loaded.vocab);
    std::cout << report.to_text() << '\n';
    if (!ev_json.empty()) write_text(ev_json, report.to_json() + "\n");
  } else if (dec->parsed()) {
    const auto loaded = config::load_model(dec_ckpt);
    const auto examples = text::read_examples(dec_data);
    const std::size_t max_len = dec_max_len == 0 ? loaded.config.model.l_dec : dec_max_len;
    std::ofstream file;
    if (!dec_out.empty()) {
      file.open(dec_out, std::ios::trunc);
      if (!file) throw InputError("cannot write " + dec_out);
    }
    std::ostream& out = dec_out.empty() ? std::cout : file;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      const auto tokens = training::greedy_decode(*loaded.model, examples[i], max_len);
      out << "{\"example\": " << i << ", \"summary\": \"";
      for (char c : loaded.vocab.decode(tokens)) {
        if (c == '"' || c == '\\') out << '\\';
        out << c;
      }
      out << "\"}\n";
    }
    if (!dec_trace.empty()) {
      if (dec_example >= examples.size()) throw InputError("--example is out of range");
      auto result = training::greedy_decode_segmentwise(*loaded.model, examples[dec_example], max_len);
      result.trace.example_id = std::to_string(dec_example);
      training::export_trace(result.trace, examples[dec_example], loaded.vocab, training::TraceFormat::Json,
                             dec_trace);
      std::cerr << "trace -> " << dec_trace << '\n';
    }
  } else if (insp->parsed()) {
    write_text(insp_html, training::trace_json_to_html(slurp(insp_trace)));
    std::cerr << "html -> " << insp_html << '\n';
  } else if (pipe->parsed()) {
    const auto cfg = pipe_cfg.resolve();
    const auto result = config::run_pipeline(pipe_stages, cfg, std::cout);
    return result.exit_code;
  } else if (show->parsed()) {
    if (show_presets) {
      for (const auto& name : config::preset_names()) std::cout << name << '\n';
      return 0;
    }
    const auto cfg = show_cfg.resolve();
    if (show_out.empty()) {
      std::cout << config::to_json(cfg) << '\n';
    } else {
      config::save_config(cfg, show_out);
    }
  } else if (syn->parsed()) {
    std::vector<text::RawExample> corpus;
    if (syn_task == "salience") {
      text::SalienceTask task;
      task.sentences = syn_sentences;
      task.slots = syn_slots;
      corpus = text::salience_corpus(task, syn_count, syn_seed);
    } else {
      text::SegmentTask task;
      task.sentences = syn_sentences;
      task.slots = syn_slots;
      corpus = text::segment_corpus(task, syn_count, syn_seed);
    }
    text::write_corpus(syn_out, corpus);
    std::cerr << "wrote " << corpus.size() << " examples -> " << syn_out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const SelectionError& e) {
    std::cerr << "selection error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
}
