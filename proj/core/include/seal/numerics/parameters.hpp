// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "seal/numerics/tensor.hpp"

namespace seal {

enum class Init { Zeros, Ones, GlorotUniform, SmallUniform };

/// A named trainable tensor with its persistent gradient and Adam slots.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;
};

/// Owns every trainable tensor of a model. Names are unique and shapes are
/// fixed at creation; Parameter addresses are stable for the store lifetime.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  /// Values are drawn from a generator seeded by (seed, name), so a parameter
  /// gets the same initial value regardless of which other parameters exist.
  Parameter& create(const std::string& name, Shape shape, Init init, std::uint64_t seed);

  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  // Insertion order.
  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;

  void zero_grad();
  double grad_norm() const;

  /// Overwrites values from `other`; names and shapes must match exactly.
  void copy_values_from(const ParameterStore& other);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t> index_;
};

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 1469598103934665603ULL);

}  // namespace seal
