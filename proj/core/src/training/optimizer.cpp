// SPDX-License-Identifier: Apache-2.0
#include "seal/training/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "seal/numerics/error.hpp"

namespace seal::training {

std::string to_string(ScheduleKind kind) { return kind == ScheduleKind::Constant ? "constant" : "rsqrt"; }

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "constant") return ScheduleKind::Constant;
  if (name == "rsqrt") return ScheduleKind::RsqrtDecay;
  throw ConfigError("unknown learning-rate schedule '" + name + "' (expected constant or rsqrt)");
}

double LrSchedule::at(std::size_t step) const {
  const double t = static_cast<double>(std::max<std::size_t>(step, 1));
  if (kind == ScheduleKind::Constant) return base;
  if (warmup_steps == 0) return base / std::sqrt(t);
  const double w = static_cast<double>(warmup_steps);
  return t < w ? base * t / w : base * std::sqrt(w / t);
}

void LrSchedule::validate() const {
  if (!(base > 0.0) || !std::isfinite(base)) throw ConfigError("train.learning_rate must be positive");
}

double Adam::step(ParameterStore& store, double lr) {
  const double norm = store.grad_norm();
  if (!std::isfinite(norm)) throw NumericError("non-finite gradient norm at optimizer step " + std::to_string(t_ + 1));
  const double clip = config_.clip_norm > 0.0 && norm > config_.clip_norm ? config_.clip_norm / norm : 1.0;
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (Parameter* p : store.all()) {
    auto& w = p->value.storage();
    const auto& g = p->grad.storage();
    auto& m = p->adam_m.storage();
    auto& v = p->adam_v.storage();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i] * clip;
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * gi;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * gi * gi;
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
    }
  }
  return norm;
}

}  // namespace seal::training
