// SPDX-License-Identifier: Apache-2.0
#include "seal/text/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "seal/numerics/error.hpp"

namespace seal::text {

namespace {

std::string class_word(std::size_t slot, std::size_t w) {
  return std::string(1, static_cast<char>('a' + slot)) + std::to_string(w);
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::size_t draw(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

// Distinct sorted positions for the salient sentences.
std::vector<std::size_t> salient_positions(std::mt19937_64& rng, std::size_t sentences, std::size_t slots) {
  std::vector<std::size_t> all(sentences);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t i = 0; i < slots; ++i) std::swap(all[i], all[i + draw(rng, sentences - i)]);
  return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(slots)};
}

}  // namespace

std::vector<RawExample> salience_corpus(const SalienceTask& task, std::size_t count, std::uint64_t seed) {
  if (task.slots == 0 || task.slots > 26 || task.slots > task.sentences) {
    throw ConfigError("salience task needs 1 <= slots <= min(26, sentences)");
  }
  if (task.sentence_length < 3 || task.words_per_class == 0 || task.filler_words == 0) {
    throw ConfigError("salience task sentences need at least 3 tokens and non-empty word pools");
  }
  std::mt19937_64 rng(seed);
  std::vector<RawExample> out;
  for (std::size_t e = 0; e < count; ++e) {
    const auto positions = salient_positions(rng, task.sentences, task.slots);
    std::vector<std::size_t> slot_at(task.sentences, task.slots);
    // Slots are assigned to the chosen positions in random order.
    std::vector<std::size_t> slots(task.slots);
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    for (std::size_t i = task.slots; i > 1; --i) std::swap(slots[i - 1], slots[draw(rng, i)]);
    for (std::size_t k = 0; k < task.slots; ++k) slot_at[positions[k]] = slots[k];

    std::vector<std::string> picked(task.slots);
    std::string document;
    for (std::size_t s = 0; s < task.sentences; ++s) {
      std::vector<std::string> words;
      std::size_t fill = task.sentence_length - 1;
      if (slot_at[s] < task.slots) {
        picked[slot_at[s]] = class_word(slot_at[s], draw(rng, task.words_per_class));
        words = {"key", picked[slot_at[s]]};
        fill -= 2;
      }
      for (std::size_t f = 0; f < fill; ++f) words.push_back("f" + std::to_string(draw(rng, task.filler_words)));
      words.push_back(".");
      if (!document.empty()) document += ' ';
      document += join(words);
    }
    std::vector<std::string> summary;
    for (std::size_t k = 0; k < task.slots; ++k) {
      summary.push_back("key");
      summary.push_back(picked[k]);
    }
    summary.push_back(".");
    out.push_back(RawExample{{document}, join(summary)});
  }
  return out;
}

std::vector<RawExample> segment_corpus(const SegmentTask& task, std::size_t count, std::uint64_t seed) {
  if (task.slots == 0 || task.slots > task.sentences) throw ConfigError("segment task needs 1 <= slots <= sentences");
  if (task.words_per_class == 0 || task.filler_words == 0) throw ConfigError("segment task word pools are empty");
  std::mt19937_64 rng(seed);
  std::vector<RawExample> out;
  for (std::size_t e = 0; e < count; ++e) {
    const auto positions = salient_positions(rng, task.sentences, task.slots);
    std::vector<std::size_t> slot_at(task.sentences, task.slots);
    std::vector<std::size_t> slots(task.slots);
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    for (std::size_t i = task.slots; i > 1; --i) std::swap(slots[i - 1], slots[draw(rng, i)]);
    for (std::size_t k = 0; k < task.slots; ++k) slot_at[positions[k]] = slots[k];

    std::vector<std::string> salient(task.slots);
    std::string document;
    for (std::size_t s = 0; s < task.sentences; ++s) {
      std::string sentence;
      if (slot_at[s] < task.slots) {
        const std::size_t j = slot_at[s] + 1;
        sentence = "m" + std::to_string(j) + " x" + std::to_string(j) + "_" +
                   std::to_string(draw(rng, task.words_per_class)) + " z" + std::to_string(j) + "_" +
                   std::to_string(draw(rng, task.words_per_class)) + " .";
        salient[slot_at[s]] = sentence;
      } else {
        for (int f = 0; f < 3; ++f) sentence += "f" + std::to_string(draw(rng, task.filler_words)) + " ";
        sentence += ".";
      }
      if (!document.empty()) document += ' ';
      document += sentence;
    }
    out.push_back(RawExample{{document}, join(salient)});
  }
  return out;
}

std::vector<std::string> salience_words(const SalienceTask& task) {
  std::vector<std::string> words{"key", "."};
  for (std::size_t k = 0; k < task.slots; ++k) {
    for (std::size_t w = 0; w < task.words_per_class; ++w) words.push_back(class_word(k, w));
  }
  for (std::size_t f = 0; f < task.filler_words; ++f) words.push_back("f" + std::to_string(f));
  return words;
}

std::vector<std::string> segment_words(const SegmentTask& task) {
  std::vector<std::string> words{"."};
  for (std::size_t j = 1; j <= task.slots; ++j) {
    words.push_back("m" + std::to_string(j));
    for (std::size_t w = 0; w < task.words_per_class; ++w) {
      words.push_back("x" + std::to_string(j) + "_" + std::to_string(w));
      words.push_back("z" + std::to_string(j) + "_" + std::to_string(w));
    }
  }
  for (std::size_t f = 0; f < task.filler_words; ++f) words.push_back("f" + std::to_string(f));
  return words;
}

}  // namespace seal::text
