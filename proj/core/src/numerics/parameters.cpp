// SPDX-License-Identifier: Apache-2.0
#include "seal/numerics/parameters.hpp"

#include <cmath>
#include <random>

#include "seal/numerics/error.hpp"

namespace seal {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Parameter& ParameterStore::create(const std::string& name, Shape shape, Init init, std::uint64_t seed) {
  if (index_.contains(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = Tensor(shape);
  p->grad = Tensor(shape);
  p->adam_m = Tensor(shape);
  p->adam_v = Tensor(shape);

  std::mt19937_64 rng(fnv1a(name, seed ^ 0x9e3779b97f4a7c15ULL));
  auto& data = p->value.storage();
  switch (init) {
    case Init::Zeros:
      break;
    case Init::Ones:
      std::fill(data.begin(), data.end(), 1.0);
      break;
    case Init::GlorotUniform: {
      const double fan_in = shape.size() >= 2 ? static_cast<double>(shape[shape.size() - 2]) : 1.0;
      const double fan_out = static_cast<double>(shape.back());
      const double limit = std::sqrt(6.0 / (fan_in + fan_out));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (double& v : data) v = dist(rng);
      break;
    }
    case Init::SmallUniform: {
      std::uniform_real_distribution<double> dist(-0.1, 0.1);
      for (double& v : data) v = dist(rng);
      break;
    }
  }
  index_.emplace(name, params_.size());
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return *params_[it->second];
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return *params_[it->second];
}

bool ParameterStore::contains(const std::string& name) const { return index_.contains(name); }

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) std::fill(p->grad.storage().begin(), p->grad.storage().end(), 0.0);
}

double ParameterStore::grad_norm() const {
  double sq = 0.0;
  for (const auto& p : params_) {
    for (double g : p->grad.data()) sq += g * g;
  }
  return std::sqrt(sq);
}

void ParameterStore::copy_values_from(const ParameterStore& other) {
  if (other.size() != size()) throw ConfigError("parameter stores differ in size");
  for (auto& p : params_) {
    const Parameter& src = other.get(p->name);
    if (src.value.shape() != p->value.shape()) {
      throw ShapeError("shape mismatch for parameter '" + p->name + "'");
    }
    p->value = src.value;
  }
}

}  // namespace seal
