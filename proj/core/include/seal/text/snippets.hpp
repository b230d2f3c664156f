// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seal/text/vocab.hpp"

namespace seal::text {

struct Document {
  int doc_id = 0;
  std::vector<TokenSeq> sentences;
};

struct Snippet {
  TokenSeq tokens;
  int doc_id = 0;
  /// Position in the global snippet order of its example.
  std::size_t index = 0;

  std::size_t length() const { return tokens.size(); }
};

struct SnippetizedExample {
  std::vector<Snippet> snippets;
  /// Summary tokens followed by EOS; BOS is implied as the first decoder input.
  TokenSeq target;
  std::size_t num_documents = 0;
};

struct SnippetConfig {
  std::size_t l_snpt = 128;
  std::size_t n_snpt = 224;
  std::size_t l_dec = 768;
};

/// Splits on newlines and after '.', '!' or '?' followed by whitespace.
std::vector<std::string> split_sentences(std::string_view text);

Document make_document(int doc_id, std::string_view text, const Vocab& vocab);

/// Greedy sentence packing: consecutive sentences share a snippet while they
/// fit in `l_snpt`, an over-long sentence is truncated, snippets never cross
/// documents, and the list stops at `n_snpt` entries.
std::vector<Snippet> snippetize(std::span<const Document> docs, std::size_t l_snpt, std::size_t n_snpt);

/// Reference article split into sections (double-newline blocks).
struct Article {
  std::vector<TokenSeq> sections;
};

Article make_article(std::string_view text, const Vocab& vocab);
TokenSeq flatten(const Document& doc);

/// Max over sections of |ngrams(d) & ngrams(s)| / |ngrams(s)| with unique
/// n-gram sets; sections shorter than n are skipped (0 if all are).
double clone_score(const TokenSeq& document, const Article& article, std::size_t n);
bool is_near_clone(const TokenSeq& document, const Article& article, std::size_t n = 6, double threshold = 0.2);

struct RawExample {
  std::vector<std::string> documents;
  std::string summary;
};

/// Parses one corpus line; `line_no` is used in error messages.
RawExample parse_raw_example(std::string_view line, std::size_t line_no);
std::vector<RawExample> read_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, std::span<const RawExample> examples);

SnippetizedExample prepare_example(const RawExample& raw, const Vocab& vocab, const SnippetConfig& cfg);
std::vector<SnippetizedExample> load_examples(const std::filesystem::path& path, const Vocab& vocab,
                                              const SnippetConfig& cfg);

// Preprocessed JSON-lines: {"num_documents", "snippets": [{"doc_id","index","tokens"}], "target"}
std::string to_json_line(const SnippetizedExample& example);
SnippetizedExample from_json_line(std::string_view line, std::size_t line_no);
void write_examples(const std::filesystem::path& path, std::span<const SnippetizedExample> examples);
std::vector<SnippetizedExample> read_examples(const std::filesystem::path& path);

}  // namespace seal::text
