// SPDX-License-Identifier: Apache-2.0
#include "seal/training/losses.hpp"

#include <vector>

#include "seal/numerics/error.hpp"
#include "seal/numerics/ops.hpp"

namespace seal::training {

Var abstractive_loss(const Var& logits, std::span<const TokenId> targets, std::span<const double> pad_mask) {
  if (logits.shape().size() != 2 || logits.shape()[0] != targets.size()) {
    throw ShapeError("abstractive_loss: logits " + to_string(logits.shape()) + " do not match " +
                     std::to_string(targets.size()) + " targets");
  }
  if (pad_mask.size() != targets.size()) throw ShapeError("abstractive_loss: pad mask length differs from targets");
  return ops::cross_entropy(logits, targets, pad_mask);
}

Var abstractive_loss(const Var& logits, std::span<const TokenId> targets) {
  std::vector<double> mask(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) mask[t] = targets[t] == text::kPad ? 0.0 : 1.0;
  return abstractive_loss(logits, targets, mask);
}

Var extractive_loss_ea(const Var& scores, const Tensor& labels) {
  if (labels.size() == 0) throw ShapeError("extractive loss over zero snippets");
  if (scores.shape() != labels.shape()) {
    throw ShapeError("extractive_loss_ea: scores " + to_string(scores.shape()) + " vs labels " +
                     to_string(labels.shape()));
  }
  return ops::mse(scores, scores.tape().constant(labels));
}

Var extractive_loss_seal(std::span<const Var> scores, const Tensor& labels) {
  if (scores.empty() || labels.size() == 0) throw ShapeError("extractive loss over an empty matrix");
  const std::size_t n = scores.front().value().size();
  if (labels.shape() != Shape{n, scores.size()}) {
    throw ShapeError("extractive_loss_seal: labels " + to_string(labels.shape()) + " expected [" +
                     std::to_string(n) + ", " + std::to_string(scores.size()) + "]");
  }
  std::vector<Var> columns;
  columns.reserve(scores.size());
  for (const Var& s : scores) {
    if (s.value().size() != n) throw ShapeError("extractive_loss_seal: segment score vectors differ in length");
    columns.push_back(ops::reshape(s, Shape{n, 1}));
  }
  const Var matrix = columns.size() == 1 ? columns[0] : ops::concat_cols(columns);
  return ops::mse(matrix, matrix.tape().constant(labels));
}

}  // namespace seal::training
