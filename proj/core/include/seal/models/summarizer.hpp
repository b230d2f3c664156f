// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "seal/models/gate.hpp"
#include "seal/models/model_config.hpp"
#include "seal/numerics/layers.hpp"
#include "seal/numerics/parameters.hpp"
#include "seal/numerics/tape.hpp"
#include "seal/text/snippets.hpp"

namespace seal::models {

using text::SnippetizedExample;
using text::TokenId;
using text::TokenSeq;

/// Each snippet encoded on its own: reps[i] is [lengths[i], d].
struct EncodedSnippets {
  std::vector<Var> reps;
  std::vector<std::size_t> lengths;
  std::vector<int> doc_ids;

  std::size_t count() const { return reps.size(); }
};

struct ScorerOutput {
  Var scores;  // [n]
  Var pooled;  // [n, d] scorer input (pooled snippets + document embeddings)

  std::vector<double> values() const;
};

/// Where a cross-attention memory row comes from. For compressed memories
/// `snippet` is the group index and `position` the compressed slot.
struct MemorySlot {
  std::size_t snippet = 0;
  std::size_t position = 0;
  friend auto operator<=>(const MemorySlot&, const MemorySlot&) = default;
};

/// Decoder cross-attention layout: memory rows and the [T, M] visibility mask
/// (empty mask = every row visible to every decoder position).
struct CrossAttentionView {
  std::vector<MemorySlot> slots;
  Tensor mask;

  std::vector<MemorySlot> visible_from(std::size_t tau) const;
};

struct ForwardResult {
  Var logits;  // [T, vocab]
  /// EA: one entry. SEAL: one per segment (n_seg entries).
  std::vector<ScorerOutput> scores;
  std::vector<GateSelection> selections;
  CrossAttentionView cross;
};

/// Encoder-side memory of Trunc, CA and EA; fixed for a whole decode.
struct EncodedMemory {
  Var rows;  // [M, d]
  CrossAttentionView cross;
  std::vector<ScorerOutput> scores;
  std::vector<GateSelection> selections;
};

struct ForwardOptions {
  nn::ForwardContext ctx;
  /// Gate on these scores instead of the scorer output (one per snippet;
  /// SEAL uses them for every segment).
  const std::vector<double>* injected_scores = nullptr;
};

/// The Trunc / CA / EA / SEAL family sharing one encoder, scorer and decoder.
/// Parameters live in the owned store; names are independent of the kind, so
/// models built with the same seed share identical values for shared parts.
class Summarizer {
 public:
  explicit Summarizer(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  ParameterStore& parameters() { return params_; }
  const ParameterStore& parameters() const { return params_; }

  /// Decoder inputs for teacher forcing: BOS followed by target[0..T-2].
  static TokenSeq teacher_inputs(std::span<const TokenId> target);

  ForwardResult forward(Tape& tape, const SnippetizedExample& example, std::span<const TokenId> decoder_inputs,
                        const ForwardOptions& options = {}) const;

  ForwardResult forward_trunc(Tape& tape, const SnippetizedExample& example, std::span<const TokenId> decoder_inputs,
                              const ForwardOptions& options = {}) const;
  ForwardResult forward_ca(Tape& tape, const SnippetizedExample& example, std::span<const TokenId> decoder_inputs,
                           const ForwardOptions& options = {}) const;
  ForwardResult forward_ea(Tape& tape, const SnippetizedExample& example, std::span<const TokenId> decoder_inputs,
                           const ForwardOptions& options = {}) const;
  /// Teacher-forced SEAL: segment j is scored with the gold segments before it,
  /// gated on its own, and decoded with cross-attention restricted to its memory.
  ForwardResult forward_seal_training(Tape& tape, const SnippetizedExample& example,
                                      std::span<const TokenId> decoder_inputs,
                                      const ForwardOptions& options = {}) const;

  /// Memory for Trunc, CA or EA. SEAL memories depend on the segment, so SEAL
  /// models throw ConfigError here.
  EncodedMemory build_memory(Tape& tape, const SnippetizedExample& example, const ForwardOptions& options = {}) const;

  // Building blocks.
  EncodedSnippets encode_snippets(Tape& tape, const SnippetizedExample& example,
                                  const nn::ForwardContext& ctx) const;
  /// Encodes one token sequence on its own with local positions from 0.
  Var encode_tokens(Tape& tape, std::span<const TokenId> tokens, const nn::ForwardContext& ctx) const;
  /// Compresses a group of snippets into [compressed_size, d].
  Var compress_group(Tape& tape, std::span<const text::Snippet> group, const nn::ForwardContext& ctx) const;
  /// Groups used by CA: one per document when the example has several documents,
  /// otherwise blocks of group_size consecutive snippets.
  std::vector<std::vector<std::size_t>> snippet_groups(const SnippetizedExample& example) const;

  ScorerOutput score_snippets(Tape& tape, const EncodedSnippets& encoded, const nn::ForwardContext& ctx) const;
  /// Segment-aware scorer; with no previous segments it is score_snippets.
  ScorerOutput score_segmentwise(Tape& tape, const EncodedSnippets& encoded, std::span<const TokenSeq> prev_segments,
                                 const nn::ForwardContext& ctx) const;
  /// Sorting-mask product: selected snippet representations, concatenated in
  /// sorted order, [total_length, d].
  Var apply_selection(Tape& tape, const EncodedSnippets& encoded, const GateSelection& selection) const;
  Var stack_snippets(Tape& tape, const EncodedSnippets& encoded) const;
  Var apply_selection(Tape& tape, const Var& stacked, const EncodedSnippets& encoded,
                      const GateSelection& selection) const;

  /// Decoder over `inputs` ([T] ids) with cross-attention to `memory`.
  Var decode(Tape& tape, std::span<const TokenId> inputs, const Var& memory, const Tensor* cross_mask,
             const nn::ForwardContext& ctx) const;

  // Scorer internals shared with segment-wise decoding.
  Var pool_snippets(Tape& tape, const EncodedSnippets& encoded) const;
  /// Encodes and pools previous decode segments into [k, d].
  Var pool_segments(Tape& tape, std::span<const TokenSeq> segments, const nn::ForwardContext& ctx) const;
  ScorerOutput run_scorer(Tape& tape, const Var& pooled, const std::optional<Var>& segment_memory,
                          const nn::ForwardContext& ctx) const;

  std::vector<MemorySlot> selection_slots(const EncodedSnippets& encoded, const GateSelection& selection) const;

 private:
  class ScorerLayer {
   public:
    ScorerLayer() = default;
    ScorerLayer(ParameterStore& store, const std::string& prefix, std::size_t dim, std::size_t hidden,
                std::size_t heads, std::uint64_t seed);
    Var operator()(Tape& tape, const Var& x, const std::optional<Var>& segments, const nn::ForwardContext& ctx) const;

   private:
    nn::LayerNorm norm_self_, norm_cross_, norm_ff_;
    nn::MultiHeadAttention self_attn_, cross_attn_;
    nn::FeedForward ff_;
  };

  Var embed(Tape& tape, std::span<const TokenId> tokens, std::size_t position_offset,
            const nn::ForwardContext& ctx) const;
  EncodedMemory memory_trunc(Tape& tape, const SnippetizedExample& example, const ForwardOptions& options) const;
  EncodedMemory memory_ca(Tape& tape, const SnippetizedExample& example, const ForwardOptions& options) const;
  EncodedMemory memory_ea(Tape& tape, const SnippetizedExample& example, const ForwardOptions& options) const;
  ForwardResult decode_memory(Tape& tape, EncodedMemory memory, std::span<const TokenId> decoder_inputs,
                              const ForwardOptions& options) const;
  Var run_encoder(Tape& tape, Var x, const nn::ForwardContext& ctx) const;
  void check_example(const SnippetizedExample& example) const;

  ModelConfig config_;
  ParameterStore params_;
  Parameter* embedding_ = nullptr;
  std::vector<nn::EncoderLayer> encoder_;
  nn::LayerNorm encoder_norm_;
  Parameter* compression_ = nullptr;
  nn::AttentionPooling pooling_;
  Parameter* doc_embedding_ = nullptr;
  std::vector<ScorerLayer> scorer_;
  nn::LayerNorm scorer_norm_;
  nn::Linear score_head_;
  std::vector<nn::DecoderLayer> decoder_;
  nn::LayerNorm decoder_norm_;
  nn::Linear output_;
};

}  // namespace seal::models
