// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seal/labels/proxy_labels.hpp"
#include "seal/models/summarizer.hpp"
#include "seal/numerics/ops.hpp"
#include "seal/training/optimizer.hpp"

namespace seal::training {

struct TrainConfig {
  std::size_t batch_size = 4;
  LrSchedule schedule{ScheduleKind::Constant, 1e-3, 0};
  double dropout = 0.1;
  std::size_t max_steps = 200;
  std::uint64_t seed = 1;
  labels::LabelConfig labels;
  double abstractive_weight = 1.0;
  double extractive_weight = 1.0;
  double clip_norm = 1.0;
  /// Stop once a step's l_a falls below this value; 0 disables.
  double early_stop_loss = 0.0;

  void validate() const;
};

/// An example with the scorer regression targets of its model kind:
/// [n] for EA, [n, N_seg] for SEAL, empty for Trunc and CA.
struct TrainingExample {
  text::SnippetizedExample example;
  Tensor labels;
};

TrainingExample attach_labels(text::SnippetizedExample example, const models::ModelConfig& model,
                              const labels::LabelConfig& cfg);
std::vector<TrainingExample> attach_labels(std::span<const text::SnippetizedExample> examples,
                                           const models::ModelConfig& model, const labels::LabelConfig& cfg);

struct ExampleLosses {
  Var l_a;
  std::optional<Var> l_e;  // absent for Trunc and CA
  Var total;
  models::ForwardResult forward;
};

/// Teacher-forced losses of one example; total = w_a l_a + w_e l_e.
ExampleLosses example_losses(const models::Summarizer& model, Tape& tape, const TrainingExample& example,
                             const nn::ForwardContext& ctx, double abstractive_weight = 1.0,
                             double extractive_weight = 1.0);

struct StepLosses {
  std::size_t step = 0;
  double l_a = 0.0;
  std::optional<double> l_e;
  double total = 0.0;
};

/// {"step":..,"l_a":..,"l_e":..|null,"total":..}
std::string metrics_json_line(const StepLosses& losses);

class Trainer {
 public:
  Trainer(models::Summarizer& model, TrainConfig config);

  /// Averages the batch losses, backpropagates and applies one Adam update.
  /// A non-finite loss or gradient throws NumericError naming the step.
  StepLosses train_step(std::span<const TrainingExample> batch);

  /// Runs until max_steps (or the early-stop loss), drawing batches from a
  /// seeded per-epoch shuffle. Writes one metrics line per step when `metrics`
  /// is given.
  std::vector<StepLosses> fit(std::span<const TrainingExample> data, std::ostream* metrics = nullptr);

  std::size_t step() const { return optimizer_.steps_taken(); }
  const TrainConfig& config() const { return config_; }

 private:
  models::Summarizer& model_;
  TrainConfig config_;
  Adam optimizer_;
  ops::Rng rng_;
};

}  // namespace seal::training
