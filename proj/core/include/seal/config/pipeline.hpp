// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "seal/config/run_config.hpp"
#include "seal/models/summarizer.hpp"
#include "seal/training/decode.hpp"
#include "seal/training/evaluate.hpp"

namespace seal::config {

namespace fs = std::filesystem;

/// Vocabulary over every document and summary of a raw corpus.
text::Vocab build_vocab(std::span<const text::RawExample> corpus, std::size_t max_size);

/// Raw corpus -> preprocessed JSON-lines. Returns the example count.
std::size_t preprocess_corpus(const fs::path& input, const text::Vocab& vocab, const text::SnippetConfig& cfg,
                              const fs::path& output);

struct CloneFilterStats {
  std::size_t examples = 0;
  std::size_t documents_removed = 0;
  std::size_t examples_dropped = 0;  // no document left
};

/// Drops source documents that are near-clones of the example's summary
/// article (sections are double-newline blocks).
CloneFilterStats clone_filter(const fs::path& input, const fs::path& output, std::size_t n, double threshold);

/// Labels JSON-lines: {"shape": [...], "values": [...]} aligned with examples.
void write_labels(const fs::path& path, std::span<const Tensor> labels);
std::vector<Tensor> read_labels(const fs::path& path);
std::vector<Tensor> label_examples(std::span<const text::SnippetizedExample> examples,
                                   const models::ModelConfig& model, const labels::LabelConfig& cfg);

/// A model restored from a checkpoint directory with its config and vocabulary.
struct LoadedModel {
  RunConfig config;
  text::Vocab vocab;
  std::unique_ptr<models::Summarizer> model;
  std::uint64_t step = 0;
};

/// Checkpoint directory: params.bin, manifest.json, config.json, vocab.txt.
void save_model(const fs::path& dir, const RunConfig& config, const text::Vocab& vocab,
                const models::Summarizer& model, std::uint64_t step);
LoadedModel load_model(const fs::path& dir);

struct TrainOutcome {
  std::vector<training::StepLosses> history;
};

/// Trains from preprocessed examples. `labels` may be empty, in which case
/// they are computed from the config. Writes the checkpoint and, when
/// `metrics_path` is non-empty, the JSON-lines metrics log.
TrainOutcome train_model(RunConfig config, std::span<const text::SnippetizedExample> examples,
                         std::span<const Tensor> labels, const text::Vocab& vocab, const fs::path& checkpoint_dir,
                         const fs::path& metrics_path);

struct StageStatus {
  std::string name;
  bool cached = false;
};

struct PipelineResult {
  int exit_code = 0;
  std::vector<StageStatus> stages;
  std::string failed_stage;
  std::string message;
};

/// Stage names accepted by run_pipeline, in execution order.
const std::vector<std::string>& pipeline_stages();

/// Runs the requested stages in canonical order inside config.paths.work_dir.
/// A stage is skipped when the content hash of its inputs (files and config)
/// matches the previous run and its outputs exist. The first failing stage
/// halts the run; exit_code is 1 for input/config errors and 2 otherwise.
PipelineResult run_pipeline(std::span<const std::string> stages, const RunConfig& config, std::ostream& log);

}  // namespace seal::config
