// SPDX-License-Identifier: Apache-2.0
#include "seal/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "seal/numerics/error.hpp"
#include "seal/training/losses.hpp"

namespace seal::training {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("train.batch_size must be positive");
  if (max_steps == 0) throw ConfigError("train.max_steps must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("train.dropout must be in [0, 1)");
  if (!(abstractive_weight > 0.0)) throw ConfigError("train.abstractive_weight must be positive");
  if (!(extractive_weight > 0.0)) throw ConfigError("train.extractive_weight must be positive");
  if (clip_norm < 0.0) throw ConfigError("train.clip_norm must be >= 0");
  if (early_stop_loss < 0.0) throw ConfigError("train.early_stop_loss must be >= 0");
  schedule.validate();
  labels.validate();
}

TrainingExample attach_labels(text::SnippetizedExample example, const models::ModelConfig& model,
                              const labels::LabelConfig& cfg) {
  TrainingExample out;
  switch (model.kind) {
    case models::ModelKind::EA:
      out.labels = labels::proxy_labels(example.snippets, example.target, cfg);
      break;
    case models::ModelKind::SEAL:
      out.labels = labels::segment_labels(example.snippets, example.target, model.l_seg, model.n_seg, cfg);
      break;
    default:
      break;
  }
  out.example = std::move(example);
  return out;
}

std::vector<TrainingExample> attach_labels(std::span<const text::SnippetizedExample> examples,
                                           const models::ModelConfig& model, const labels::LabelConfig& cfg) {
  std::vector<TrainingExample> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(attach_labels(e, model, cfg));
  return out;
}

ExampleLosses example_losses(const models::Summarizer& model, Tape& tape, const TrainingExample& example,
                             const nn::ForwardContext& ctx, double abstractive_weight, double extractive_weight) {
  const auto& target = example.example.target;
  const TokenSeq inputs = models::Summarizer::teacher_inputs(target);
  ExampleLosses out;
  out.forward = model.forward(tape, example.example, inputs, models::ForwardOptions{ctx, nullptr});
  out.l_a = abstractive_loss(out.forward.logits, target);
  switch (model.config().kind) {
    case models::ModelKind::EA:
      out.l_e = extractive_loss_ea(out.forward.scores.at(0).scores, example.labels);
      break;
    case models::ModelKind::SEAL: {
      std::vector<Var> scores;
      for (const auto& s : out.forward.scores) scores.push_back(s.scores);
      out.l_e = extractive_loss_seal(scores, example.labels);
      break;
    }
    default:
      break;
  }
  out.total = ops::scale(out.l_a, abstractive_weight);
  if (out.l_e) out.total = ops::add(out.total, ops::scale(*out.l_e, extractive_weight));
  return out;
}

std::string metrics_json_line(const StepLosses& losses) {
  nlohmann::ordered_json j;
  j["step"] = losses.step;
  j["l_a"] = losses.l_a;
  j["l_e"] = losses.l_e ? nlohmann::ordered_json(*losses.l_e) : nlohmann::ordered_json(nullptr);
  j["total"] = losses.total;
  return j.dump();
}

Trainer::Trainer(models::Summarizer& model, TrainConfig config)
    : model_(model),
      config_(std::move(config)),
      optimizer_(AdamConfig{0.9, 0.999, 1e-8, config_.clip_norm}),
      rng_(config_.seed) {
  config_.validate();
}

StepLosses Trainer::train_step(std::span<const TrainingExample> batch) {
  if (batch.empty()) throw InputError("train_step: empty batch");
  const std::size_t step = optimizer_.steps_taken() + 1;
  auto& store = model_.parameters();
  store.zero_grad();
  const nn::ForwardContext ctx{true, config_.dropout, &rng_};
  const double inv = 1.0 / static_cast<double>(batch.size());
  StepLosses out;
  out.step = step;
  double l_e = 0.0;
  bool has_l_e = false;
  try {
    for (const auto& example : batch) {
      Tape tape;
      const ExampleLosses losses =
          example_losses(model_, tape, example, ctx, config_.abstractive_weight, config_.extractive_weight);
      tape.backward(ops::scale(losses.total, inv));
      out.l_a += losses.l_a.value().item() * inv;
      out.total += losses.total.value().item() * inv;
      if (losses.l_e) {
        has_l_e = true;
        l_e += losses.l_e->value().item() * inv;
      }
    }
    if (has_l_e) out.l_e = l_e;
    optimizer_.step(store, config_.schedule.at(step));
  } catch (const NumericError& e) {
    throw NumericError("training step " + std::to_string(step) + ": " + e.what());
  }
  return out;
}

std::vector<StepLosses> Trainer::fit(std::span<const TrainingExample> data, std::ostream* metrics) {
  if (data.empty()) throw InputError("no training examples");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();
  std::vector<StepLosses> history;
  std::vector<TrainingExample> batch;
  while (optimizer_.steps_taken() < config_.max_steps) {
    batch.clear();
    for (std::size_t b = 0; b < std::min(config_.batch_size, data.size()); ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng_);
        cursor = 0;
      }
      batch.push_back(data[order[cursor++]]);
    }
    history.push_back(train_step(batch));
    if (metrics) *metrics << metrics_json_line(history.back()) << '\n';
    if (config_.early_stop_loss > 0.0 && history.back().l_a < config_.early_stop_loss) break;
  }
  return history;
}

}  // namespace seal::training
