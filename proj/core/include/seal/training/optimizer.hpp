// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

#include "seal/numerics/parameters.hpp"

namespace seal::training {

enum class ScheduleKind { Constant, RsqrtDecay };

std::string to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(const std::string& name);

/// Constant: base. RsqrtDecay: linear warmup to `base` over `warmup_steps`, then
/// base * sqrt(warmup_steps / step); with no warmup, base / sqrt(step).
struct LrSchedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double base = 1e-3;
  std::size_t warmup_steps = 0;

  /// `step` counts from 1.
  double at(std::size_t step) const;
  void validate() const;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Global gradient-norm clip; 0 disables clipping.
  double clip_norm = 1.0;
};

/// Adam over every parameter of a store, using the moment slots stored on
/// each Parameter so checkpoints capture the full optimizer state.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  /// Applies one update from the accumulated Parameter::grad values and
  /// returns the gradient norm before clipping.
  double step(ParameterStore& store, double lr);

  std::size_t steps_taken() const { return t_; }
  void set_steps_taken(std::size_t t) { t_ = t; }

 private:
  AdamConfig config_;
  std::size_t t_ = 0;
};

}  // namespace seal::training
