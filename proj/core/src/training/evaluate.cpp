// SPDX-License-Identifier: Apache-2.0
#include "seal/training/evaluate.hpp"

#include <cstdio>

#include "json.hpp"
#include "seal/labels/rouge.hpp"
#include "seal/numerics/error.hpp"
#include "seal/training/decode.hpp"

namespace seal::training {

namespace {

TokenSeq strip_special(std::span<const TokenId> tokens) {
  TokenSeq out;
  for (TokenId t : tokens) {
    if (t == text::kEos) break;
    if (t != text::kPad && t != text::kBos) out.push_back(t);
  }
  return out;
}

}  // namespace

std::string EvalReport::to_text() const {
  char buf[160];
  std::snprintf(buf, sizeof buf, "R1 %.2f  R2 %.2f  RL %.2f  RLsum %.2f  (n=%zu)", rouge1 * 100, rouge2 * 100,
                rouge_l * 100, rouge_lsum * 100, count);
  return buf;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["rouge1"] = rouge1;
  j["rouge2"] = rouge2;
  j["rougeL"] = rouge_l;
  j["rougeLsum"] = rouge_lsum;
  j["count"] = count;
  return j.dump();
}

EvalReport score_predictions(std::span<const TokenSeq> predictions, std::span<const TokenSeq> references,
                             const text::Vocab& vocab) {
  if (predictions.size() != references.size()) throw ShapeError("predictions and references differ in count");
  EvalReport report;
  report.count = predictions.size();
  if (report.count == 0) return report;
  const auto is_end = [&vocab](TokenId t) { return vocab.is_sentence_end(t); };
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const TokenSeq pred = strip_special(predictions[i]);
    const TokenSeq ref = strip_special(references[i]);
    report.rouge1 += labels::rouge_n(pred, ref, 1).f1;
    report.rouge2 += labels::rouge_n(pred, ref, 2).f1;
    report.rouge_l += labels::rouge_l(pred, ref).f1;
    const auto ps = labels::split_by(pred, is_end);
    const auto rs = labels::split_by(ref, is_end);
    report.rouge_lsum += labels::rouge_l_summary(ps, rs).f1;
  }
  const double n = static_cast<double>(report.count);
  report.rouge1 /= n;
  report.rouge2 /= n;
  report.rouge_l /= n;
  report.rouge_lsum /= n;
  return report;
}

EvalReport evaluate(const models::Summarizer& model, std::span<const text::SnippetizedExample> dataset,
                    const text::Vocab& vocab, std::vector<TokenSeq>* predictions) {
  std::vector<TokenSeq> preds;
  std::vector<TokenSeq> refs;
  for (const auto& example : dataset) {
    preds.push_back(greedy_decode(model, example, model.config().l_dec));
    refs.push_back(example.target);
  }
  if (predictions) *predictions = preds;
  return score_predictions(preds, refs, vocab);
}

}  // namespace seal::training
