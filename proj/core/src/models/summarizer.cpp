// SPDX-License-Identifier: Apache-2.0
#include "seal/models/summarizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "seal/labels/proxy_labels.hpp"
#include "seal/numerics/error.hpp"

namespace seal::models {

std::vector<double> ScorerOutput::values() const {
  const auto& d = scores.value().storage();
  return {d.begin(), d.end()};
}

std::vector<MemorySlot> CrossAttentionView::visible_from(std::size_t tau) const {
  if (mask.size() == 0) return slots;
  if (tau >= mask.rows()) throw ShapeError("visible_from: position outside the decoded range");
  std::vector<MemorySlot> out;
  for (std::size_t r = 0; r < slots.size(); ++r) {
    if (mask.at(tau, r) != 0.0) out.push_back(slots[r]);
  }
  return out;
}

Summarizer::ScorerLayer::ScorerLayer(ParameterStore& store, const std::string& prefix, std::size_t dim,
                                     std::size_t hidden, std::size_t heads, std::uint64_t seed)
    : norm_self_(store, prefix + ".norm_self", dim, seed),
      norm_cross_(store, prefix + ".norm_cross", dim, seed),
      norm_ff_(store, prefix + ".norm_ff", dim, seed),
      self_attn_(store, prefix + ".self_attn", dim, heads, seed),
      cross_attn_(store, prefix + ".cross_attn", dim, heads, seed),
      ff_(store, prefix + ".ff", dim, hidden, seed) {}

Var Summarizer::ScorerLayer::operator()(Tape& tape, const Var& x, const std::optional<Var>& segments,
                                        const nn::ForwardContext& ctx) const {
  const Var h = norm_self_(tape, x);
  Var y = ops::add(x, nn::apply_dropout(self_attn_(tape, h, h, nullptr, false, ctx), ctx));
  // No previous segments: the cross-attention sublayer is the identity.
  if (segments) {
    y = ops::add(y, nn::apply_dropout(cross_attn_(tape, norm_cross_(tape, y), *segments, nullptr, false, ctx), ctx));
  }
  return ops::add(y, nn::apply_dropout(ff_(tape, norm_ff_(tape, y), ctx), ctx));
}

Summarizer::Summarizer(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  if (config_.vocab_size == 0) throw ConfigError("model.vocab_size must be set before building a model");
  const auto d = config_.d_model;
  const auto seed = config_.seed;
  embedding_ = &params_.create("embedding.tokens", Shape{config_.vocab_size, d}, Init::GlorotUniform, seed);
  for (std::size_t i = 0; i < config_.encoder_layers; ++i) {
    encoder_.emplace_back(params_, "encoder.layer" + std::to_string(i), d, config_.d_ff, config_.heads, seed);
  }
  encoder_norm_ = nn::LayerNorm(params_, "encoder.norm", d, seed);
  if (config_.kind == ModelKind::CA) {
    compression_ = &params_.create("compressor.vectors", Shape{config_.compressed_size, d}, Init::GlorotUniform, seed);
  }
  if (config_.kind == ModelKind::EA || config_.kind == ModelKind::SEAL) {
    pooling_ = nn::AttentionPooling(params_, "scorer.pool", d, seed);
    doc_embedding_ = &params_.create("scorer.doc_embedding", Shape{config_.max_docs, d}, Init::SmallUniform, seed);
    for (std::size_t i = 0; i < config_.scorer_layers; ++i) {
      scorer_.emplace_back(params_, "scorer.layer" + std::to_string(i), d, config_.d_ff, config_.heads, seed);
    }
    scorer_norm_ = nn::LayerNorm(params_, "scorer.norm", d, seed);
    score_head_ = nn::Linear(params_, "scorer.head", d, 1, seed);
  }
  for (std::size_t i = 0; i < config_.decoder_layers; ++i) {
    decoder_.emplace_back(params_, "decoder.layer" + std::to_string(i), d, config_.d_ff, config_.heads, seed);
  }
  decoder_norm_ = nn::LayerNorm(params_, "decoder.norm", d, seed);
  output_ = nn::Linear(params_, "decoder.output", d, config_.vocab_size, seed);
}

TokenSeq Summarizer::teacher_inputs(std::span<const TokenId> target) {
  if (target.empty()) throw InputError("empty target sequence");
  TokenSeq out;
  out.reserve(target.size());
  out.push_back(text::kBos);
  out.insert(out.end(), target.begin(), target.end() - 1);
  return out;
}

void Summarizer::check_example(const SnippetizedExample& example) const {
  if (example.snippets.empty()) throw InputError("example has no input snippets");
  if (example.snippets.size() > config_.n_snpt) {
    throw InputError("example has " + std::to_string(example.snippets.size()) + " snippets, N_snpt is " +
                     std::to_string(config_.n_snpt));
  }
  for (const auto& s : example.snippets) {
    if (s.tokens.empty()) throw InputError("empty snippet " + std::to_string(s.index));
    if (s.tokens.size() > config_.l_snpt) {
      throw InputError("snippet " + std::to_string(s.index) + " has length " + std::to_string(s.tokens.size()) +
                       " > L_snpt " + std::to_string(config_.l_snpt));
    }
  }
}

Var Summarizer::embed(Tape& tape, std::span<const TokenId> tokens, std::size_t position_offset,
                      const nn::ForwardContext& ctx) const {
  const auto d = config_.d_model;
  Var x = ops::scale(ops::embedding_lookup(tape.param(*embedding_), tokens), std::sqrt(static_cast<double>(d)));
  x = ops::add(x, tape.constant(nn::sinusoidal_positions(tokens.size(), d, position_offset)));
  return nn::apply_dropout(x, ctx);
}

Var Summarizer::run_encoder(Tape& tape, Var x, const nn::ForwardContext& ctx) const {
  for (const auto& layer : encoder_) x = layer(tape, x, nullptr, ctx);
  return encoder_norm_(tape, x);
}

Var Summarizer::encode_tokens(Tape& tape, std::span<const TokenId> tokens, const nn::ForwardContext& ctx) const {
  if (tokens.empty()) throw InputError("cannot encode an empty sequence");
  return run_encoder(tape, embed(tape, tokens, 0, ctx), ctx);
}

EncodedSnippets Summarizer::encode_snippets(Tape& tape, const SnippetizedExample& example,
                                            const nn::ForwardContext& ctx) const {
  check_example(example);
  EncodedSnippets out;
  for (const auto& s : example.snippets) {
    out.reps.push_back(encode_tokens(tape, s.tokens, ctx));
    out.lengths.push_back(s.tokens.size());
    out.doc_ids.push_back(s.doc_id);
  }
  return out;
}

Var Summarizer::decode(Tape& tape, std::span<const TokenId> inputs, const Var& memory, const Tensor* cross_mask,
                       const nn::ForwardContext& ctx) const {
  if (inputs.empty()) throw InputError("decoder needs at least one input token");
  if (inputs.size() > config_.l_dec) {
    throw InputError("decoder input length " + std::to_string(inputs.size()) + " exceeds L_dec " +
                     std::to_string(config_.l_dec));
  }
  Var x = embed(tape, inputs, 0, ctx);
  for (const auto& layer : decoder_) x = layer(tape, x, memory, cross_mask, ctx);
  return output_(tape, decoder_norm_(tape, x));
}

ForwardResult Summarizer::forward(Tape& tape, const SnippetizedExample& example,
                                  std::span<const TokenId> decoder_inputs, const ForwardOptions& options) const {
  switch (config_.kind) {
    case ModelKind::Trunc:
      return forward_trunc(tape, example, decoder_inputs, options);
    case ModelKind::CA:
      return forward_ca(tape, example, decoder_inputs, options);
    case ModelKind::EA:
      return forward_ea(tape, example, decoder_inputs, options);
    case ModelKind::SEAL:
      return forward_seal_training(tape, example, decoder_inputs, options);
  }
  throw ConfigError("unknown model kind");
}

EncodedMemory Summarizer::build_memory(Tape& tape, const SnippetizedExample& example,
                                      const ForwardOptions& options) const {
  switch (config_.kind) {
    case ModelKind::Trunc:
      return memory_trunc(tape, example, options);
    case ModelKind::CA:
      return memory_ca(tape, example, options);
    case ModelKind::EA:
      return memory_ea(tape, example, options);
    case ModelKind::SEAL:
      break;
  }
  throw ConfigError("build_memory: SEAL memory is selected per decode segment");
}

ForwardResult Summarizer::decode_memory(Tape& tape, EncodedMemory memory, std::span<const TokenId> decoder_inputs,
                                        const ForwardOptions& options) const {
  ForwardResult result;
  result.logits = decode(tape, decoder_inputs, memory.rows, nullptr, options.ctx);
  result.scores = std::move(memory.scores);
  result.selections = std::move(memory.selections);
  result.cross = std::move(memory.cross);
  return result;
}

ForwardResult Summarizer::forward_trunc(Tape& tape, const SnippetizedExample& example,
                                        std::span<const TokenId> decoder_inputs, const ForwardOptions& options) const {
  return decode_memory(tape, memory_trunc(tape, example, options), decoder_inputs, options);
}

ForwardResult Summarizer::forward_ca(Tape& tape, const SnippetizedExample& example,
                                     std::span<const TokenId> decoder_inputs, const ForwardOptions& options) const {
  return decode_memory(tape, memory_ca(tape, example, options), decoder_inputs, options);
}

ForwardResult Summarizer::forward_ea(Tape& tape, const SnippetizedExample& example,
                                     std::span<const TokenId> decoder_inputs, const ForwardOptions& options) const {
  return decode_memory(tape, memory_ea(tape, example, options), decoder_inputs, options);
}

EncodedMemory Summarizer::memory_trunc(Tape& tape, const SnippetizedExample& example,
                                       const ForwardOptions& options) const {
  TokenSeq tokens;
  EncodedMemory result;
  for (std::size_t i = 0; i < example.snippets.size() && tokens.size() < config_.l_input; ++i) {
    const auto& s = example.snippets[i].tokens;
    for (std::size_t p = 0; p < s.size() && tokens.size() < config_.l_input; ++p) {
      tokens.push_back(s[p]);
      result.cross.slots.push_back({i, p});
    }
  }
  if (tokens.empty()) throw InputError("Trunc model received an empty input");
  result.rows = run_encoder(tape, embed(tape, tokens, 0, options.ctx), options.ctx);
  return result;
}

std::vector<std::vector<std::size_t>> Summarizer::snippet_groups(const SnippetizedExample& example) const {
  std::vector<std::vector<std::size_t>> groups;
  std::map<int, std::size_t> doc_group;
  bool multi_doc = false;
  for (const auto& s : example.snippets) multi_doc = multi_doc || s.doc_id != example.snippets.front().doc_id;
  for (std::size_t i = 0; i < example.snippets.size(); ++i) {
    if (multi_doc) {
      auto [it, inserted] = doc_group.emplace(example.snippets[i].doc_id, groups.size());
      if (inserted) groups.emplace_back();
      groups[it->second].push_back(i);
    } else {
      if (i % config_.group_size == 0) groups.emplace_back();
      groups.back().push_back(i);
    }
  }
  return groups;
}

Var Summarizer::compress_group(Tape& tape, std::span<const text::Snippet> group, const nn::ForwardContext& ctx) const {
  if (group.empty()) throw InputError("compress_group: empty snippet group");
  if (!compression_) throw ConfigError("compress_group requires a CA model");
  TokenSeq tokens;
  for (const auto& s : group) tokens.insert(tokens.end(), s.tokens.begin(), s.tokens.end());
  const Var vectors = tape.param(*compression_);
  const std::array<Var, 2> parts = {vectors, embed(tape, tokens, 0, ctx)};
  const Var encoded = run_encoder(tape, ops::concat_rows(parts), ctx);
  return ops::slice_rows(encoded, 0, config_.compressed_size);
}

EncodedMemory Summarizer::memory_ca(Tape& tape, const SnippetizedExample& example,
                                    const ForwardOptions& options) const {
  check_example(example);
  EncodedMemory result;
  std::vector<Var> memories;
  const auto groups = snippet_groups(example);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<text::Snippet> group;
    for (std::size_t idx : groups[g]) group.push_back(example.snippets[idx]);
    memories.push_back(compress_group(tape, group, options.ctx));
    for (std::size_t c = 0; c < config_.compressed_size; ++c) result.cross.slots.push_back({g, c});
  }
  result.rows = memories.size() == 1 ? memories[0] : ops::concat_rows(memories);
  return result;
}

Var Summarizer::pool_snippets(Tape& tape, const EncodedSnippets& encoded) const {
  std::vector<Var> pooled;
  pooled.reserve(encoded.count());
  std::vector<std::int64_t> docs;
  for (std::size_t i = 0; i < encoded.count(); ++i) {
    pooled.push_back(pooling_(tape, encoded.reps[i]));
    if (encoded.doc_ids[i] < 0 || static_cast<std::size_t>(encoded.doc_ids[i]) >= config_.max_docs) {
      throw InputError("document id " + std::to_string(encoded.doc_ids[i]) + " exceeds max_docs " +
                       std::to_string(config_.max_docs));
    }
    docs.push_back(encoded.doc_ids[i]);
  }
  const Var stacked = pooled.size() == 1 ? pooled[0] : ops::concat_rows(pooled);
  return ops::add(stacked, ops::gather_rows(tape.param(*doc_embedding_), docs));
}

Var Summarizer::pool_segments(Tape& tape, std::span<const TokenSeq> segments, const nn::ForwardContext& ctx) const {
  std::vector<Var> pooled;
  for (const auto& seg : segments) {
    if (seg.empty()) continue;
    pooled.push_back(pooling_(tape, encode_tokens(tape, seg, ctx)));
  }
  if (pooled.empty()) throw InputError("pool_segments: no non-empty segments");
  return pooled.size() == 1 ? pooled[0] : ops::concat_rows(pooled);
}

ScorerOutput Summarizer::run_scorer(Tape& tape, const Var& pooled, const std::optional<Var>& segment_memory,
                                    const nn::ForwardContext& ctx) const {
  if (scorer_.empty()) throw ConfigError("scorer requires an EA or SEAL model");
  Var x = pooled;
  for (const auto& layer : scorer_) x = layer(tape, x, segment_memory, ctx);
  const Var s = score_head_(tape, scorer_norm_(tape, x));
  return ScorerOutput{ops::reshape(s, Shape{pooled.value().rows()}), pooled};
}

ScorerOutput Summarizer::score_snippets(Tape& tape, const EncodedSnippets& encoded,
                                        const nn::ForwardContext& ctx) const {
  if (encoded.count() == 0) throw InputError("score_snippets: no snippets");
  return run_scorer(tape, pool_snippets(tape, encoded), std::nullopt, ctx);
}

ScorerOutput Summarizer::score_segmentwise(Tape& tape, const EncodedSnippets& encoded,
                                           std::span<const TokenSeq> prev_segments,
                                           const nn::ForwardContext& ctx) const {
  const bool any = std::any_of(prev_segments.begin(), prev_segments.end(), [](const auto& s) { return !s.empty(); });
  if (!any) return score_snippets(tape, encoded, ctx);
  const Var pooled = pool_snippets(tape, encoded);
  return run_scorer(tape, pooled, pool_segments(tape, prev_segments, ctx), ctx);
}

Var Summarizer::stack_snippets(Tape& tape, const EncodedSnippets& encoded) const {
  (void)tape;
  std::vector<Var> padded;
  padded.reserve(encoded.count());
  for (const Var& rep : encoded.reps) padded.push_back(ops::pad_rows(rep, config_.l_snpt));
  const Var stacked = padded.size() == 1 ? padded[0] : ops::concat_rows(padded);
  return ops::reshape(stacked, Shape{encoded.count(), config_.l_snpt * config_.d_model});
}

Var Summarizer::apply_selection(Tape& tape, const Var& stacked, const EncodedSnippets& encoded,
                                const GateSelection& selection) const {
  if (selection.mask.cols() != encoded.count()) throw ShapeError("apply_selection: mask does not match snippets");
  const Var sorted = ops::matmul(tape.constant(selection.mask), stacked);
  const Var rows = ops::reshape(sorted, Shape{selection.selected_count * config_.l_snpt, config_.d_model});
  std::vector<std::int64_t> keep;
  keep.reserve(selection.total_length);
  for (std::size_t p = 0; p < selection.selected_count; ++p) {
    for (std::size_t r = 0; r < encoded.lengths[selection.selected[p]]; ++r) {
      keep.push_back(static_cast<std::int64_t>(p * config_.l_snpt + r));
    }
  }
  return ops::gather_rows(rows, keep);
}

Var Summarizer::apply_selection(Tape& tape, const EncodedSnippets& encoded, const GateSelection& selection) const {
  return apply_selection(tape, stack_snippets(tape, encoded), encoded, selection);
}

std::vector<MemorySlot> Summarizer::selection_slots(const EncodedSnippets& encoded,
                                                    const GateSelection& selection) const {
  std::vector<MemorySlot> slots;
  for (std::size_t idx : selection.selected) {
    for (std::size_t p = 0; p < encoded.lengths[idx]; ++p) slots.push_back({idx, p});
  }
  return slots;
}

EncodedMemory Summarizer::memory_ea(Tape& tape, const SnippetizedExample& example,
                                    const ForwardOptions& options) const {
  const EncodedSnippets encoded = encode_snippets(tape, example, options.ctx);
  EncodedMemory result;
  result.scores.push_back(score_snippets(tape, encoded, options.ctx));
  const std::vector<double> values = options.injected_scores ? *options.injected_scores : result.scores[0].values();
  result.selections.push_back(gate_select(values, encoded.lengths, config_.l_ext));
  result.rows = apply_selection(tape, encoded, result.selections[0]);
  result.cross.slots = selection_slots(encoded, result.selections[0]);
  return result;
}

ForwardResult Summarizer::forward_seal_training(Tape& tape, const SnippetizedExample& example,
                                                std::span<const TokenId> decoder_inputs,
                                                const ForwardOptions& options) const {
  const auto& ctx = options.ctx;
  const std::size_t T = decoder_inputs.size();
  if (T == 0) throw InputError("decoder needs at least one input token");
  if (T > config_.l_dec) throw InputError("decoder input longer than L_dec");
  const EncodedSnippets encoded = encode_snippets(tape, example, ctx);
  const Var pooled = pool_snippets(tape, encoded);

  // Gold segments of the target drive the scorer (teacher forcing).
  const auto gold = labels::split_segments(example.target, config_.l_seg, config_.n_seg);
  std::size_t gold_count = 0;
  while (gold_count < gold.size() && !gold[gold_count].empty()) ++gold_count;
  std::optional<Var> gold_pooled;
  if (config_.n_seg > 1 && gold_count > 0) {
    gold_pooled = pool_segments(tape, std::span<const TokenSeq>(gold.data(), std::min(gold_count, config_.n_seg - 1)),
                                ctx);
  }

  ForwardResult result;
  for (std::size_t j = 0; j < config_.n_seg; ++j) {
    const std::size_t k = std::min(j, gold_count);
    std::optional<Var> memory;
    if (k > 0) memory = k == gold_pooled->value().rows() ? *gold_pooled : ops::slice_rows(*gold_pooled, 0, k);
    result.scores.push_back(run_scorer(tape, pooled, memory, ctx));
  }

  const std::size_t decode_segments = (T + config_.l_seg - 1) / config_.l_seg;
  const Var stacked = stack_snippets(tape, encoded);
  std::vector<Var> memories;
  std::vector<std::size_t> block_begin;
  for (std::size_t j = 0; j < config_.n_seg; ++j) {
    const std::vector<double> values = options.injected_scores ? *options.injected_scores : result.scores[j].values();
    result.selections.push_back(gate_select(values, encoded.lengths, config_.l_ext));
    if (j >= decode_segments) continue;
    block_begin.push_back(result.cross.slots.size());
    memories.push_back(apply_selection(tape, stacked, encoded, result.selections[j]));
    for (const auto& slot : selection_slots(encoded, result.selections[j])) result.cross.slots.push_back(slot);
  }
  block_begin.push_back(result.cross.slots.size());

  if (decode_segments == 1) {
    result.logits = decode(tape, decoder_inputs, memories[0], nullptr, ctx);
    return result;
  }
  Tensor mask(Shape{T, result.cross.slots.size()});
  for (std::size_t tau = 0; tau < T; ++tau) {
    const std::size_t j = seg_start(tau, config_.l_seg) / config_.l_seg;
    for (std::size_t r = block_begin[j]; r < block_begin[j + 1]; ++r) mask.at(tau, r) = 1.0;
  }
  result.cross.mask = mask;
  const Var memory = ops::concat_rows(memories);
  result.logits = decode(tape, decoder_inputs, memory, &result.cross.mask, ctx);
  return result;
}

}  // namespace seal::models
