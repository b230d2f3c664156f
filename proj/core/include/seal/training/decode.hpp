// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "seal/models/summarizer.hpp"
#include "seal/text/vocab.hpp"

namespace seal::training {

using text::TokenId;
using text::TokenSeq;

/// One selection event of a segment-wise decode.
struct SegmentTrace {
  std::size_t segment = 0;
  /// First decoder position of the segment.
  std::size_t start = 0;
  std::vector<double> scores;
  /// Selected snippet indices in sorted (descending score) order.
  std::vector<std::size_t> selected;
  /// Tokens emitted in this segment, EOS excluded.
  TokenSeq tokens;

  friend bool operator==(const SegmentTrace&, const SegmentTrace&) = default;
};

struct DecodeTrace {
  std::string example_id;
  std::vector<SegmentTrace> segments;

  /// Concatenation of every segment's tokens.
  TokenSeq emitted() const;
  friend bool operator==(const DecodeTrace&, const DecodeTrace&) = default;
};

struct DecodeResult {
  TokenSeq tokens;  // EOS excluded
  DecodeTrace trace;
};

/// Greedy argmax decoding from BOS until EOS or `max_len` tokens, capped at
/// L_dec. Trunc, CA and EA keep one memory for the whole decode; SEAL models
/// are decoded segment-wise.
TokenSeq greedy_decode(const models::Summarizer& model, const text::SnippetizedExample& example,
                       std::size_t max_len);

/// SEAL decode: at every segment start the scorer is re-run with the segments
/// generated so far, the gate re-selects and the new memory is visible to the
/// positions of that segment only. Stops at the first EOS, even mid-segment.
/// EA models produce a trace with a single selection event.
DecodeResult greedy_decode_segmentwise(const models::Summarizer& model, const text::SnippetizedExample& example,
                                       std::size_t max_len);

std::string trace_to_json(const DecodeTrace& trace, const text::SnippetizedExample& example,
                          const text::Vocab& vocab);
DecodeTrace trace_from_json(const std::string& json);

/// HTML view: every summary segment prefixed with its id and colored, and each
/// input snippet highlighted in the color of the first segment that selected it.
std::string trace_to_html(const DecodeTrace& trace, const text::SnippetizedExample& example,
                          const text::Vocab& vocab);

/// HTML from an exported JSON trace, which carries the decoded texts.
std::string trace_json_to_html(const std::string& json);

enum class TraceFormat { Json, Html };

void export_trace(const DecodeTrace& trace, const text::SnippetizedExample& example, const text::Vocab& vocab,
                  TraceFormat format, const std::filesystem::path& path);

}  // namespace seal::training
