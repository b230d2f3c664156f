// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "seal/numerics/tensor.hpp"

namespace seal::models {

/// Outcome of one gating event.
struct GateSelection {
  /// Every snippet index, by descending score (ties: lower index first).
  std::vector<std::size_t> order;
  /// Selected prefix of `order`.
  std::vector<std::size_t> selected;
  /// One-hot sorting mask [selected, n]: mask(p, i) = 1 iff position p holds snippet i.
  Tensor mask;
  std::size_t selected_count = 0;
  std::size_t total_length = 0;
};

/// Sorts by score and keeps the longest prefix whose total length fits in
/// `l_ext`, stopping at the first snippet that would overflow. Throws
/// SelectionError when not even the top snippet fits.
GateSelection gate_select(std::span<const double> scores, std::span<const std::size_t> lengths, std::size_t l_ext);

}  // namespace seal::models
