// SPDX-License-Identifier: Apache-2.0
#include "seal/models/gate.hpp"

#include <algorithm>
#include <numeric>

#include "seal/numerics/error.hpp"

namespace seal::models {

GateSelection gate_select(std::span<const double> scores, std::span<const std::size_t> lengths, std::size_t l_ext) {
  if (scores.size() != lengths.size()) throw ShapeError("gate_select: scores and lengths differ in size");
  if (scores.empty()) throw SelectionError("gate_select: no snippets to select from");
  for (auto len : lengths) {
    if (len == 0) throw SelectionError("gate_select: snippet lengths must be positive");
  }
  GateSelection sel;
  sel.order.resize(scores.size());
  std::iota(sel.order.begin(), sel.order.end(), std::size_t{0});
  std::stable_sort(sel.order.begin(), sel.order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  for (std::size_t idx : sel.order) {
    if (sel.total_length + lengths[idx] > l_ext) break;
    sel.total_length += lengths[idx];
    sel.selected.push_back(idx);
  }
  if (sel.selected.empty()) {
    throw SelectionError("empty selection: top snippet length " + std::to_string(lengths[sel.order[0]]) +
                         " exceeds L_ext " + std::to_string(l_ext));
  }
  sel.selected_count = sel.selected.size();
  sel.mask = Tensor(Shape{sel.selected_count, scores.size()});
  for (std::size_t p = 0; p < sel.selected_count; ++p) sel.mask.at(p, sel.selected[p]) = 1.0;
  return sel;
}

}  // namespace seal::models
