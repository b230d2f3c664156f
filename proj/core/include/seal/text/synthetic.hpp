// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seal/text/snippets.hpp"

namespace seal::text {

/// Salient sentences scattered through filler text. Slot k owns a word class
/// ("a", "b", ...); its salient sentence is "key <class word> <filler>... ."
/// and the summary lists "key <word>" for every slot in slot order, then ".".
struct SalienceTask {
  std::size_t sentences = 16;
  std::size_t sentence_length = 8;  // tokens including the final "."
  std::size_t slots = 4;
  std::size_t words_per_class = 8;
  std::size_t filler_words = 12;
};

std::vector<RawExample> salience_corpus(const SalienceTask& task, std::size_t count, std::uint64_t seed);

/// One short sentence per snippet. Salient sentence j is "m<j> x<j>_w z<j>_w ."
/// and the summary is the salient sentences in slot order, so summary segment
/// j (of length 4) copies exactly one input sentence.
struct SegmentTask {
  std::size_t sentences = 8;
  std::size_t slots = 4;
  std::size_t words_per_class = 6;
  std::size_t filler_words = 8;
};

std::vector<RawExample> segment_corpus(const SegmentTask& task, std::size_t count, std::uint64_t seed);

/// Every corpus word of the two tasks, for building a vocabulary that does not
/// depend on which examples were sampled.
std::vector<std::string> salience_words(const SalienceTask& task);
std::vector<std::string> segment_words(const SegmentTask& task);

}  // namespace seal::text
