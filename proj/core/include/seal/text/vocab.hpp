// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace seal::text {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr std::size_t kReservedTokens = 4;

/// Lowercased whitespace tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Token <-> id bijection with PAD/BOS/EOS/UNK fixed at ids 0..3.
class Vocab {
 public:
  Vocab();

  /// Keeps the `max_size - 4` most frequent tokens; ties broken lexicographically.
  static Vocab build(std::span<const std::string> corpus, std::size_t max_size);
  static Vocab load(const std::filesystem::path& path);
  static Vocab parse(std::string_view contents);

  /// One token per line; line n (1-based) holds id n - 1.
  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return tokens_.size(); }
  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;

  TokenSeq encode(std::string_view text) const;
  /// Joins tokens with spaces; reserved tokens are dropped when `skip_special`.
  std::string decode(std::span<const TokenId> ids, bool skip_special = true) const;

  /// Tokens that close a sentence ("." or anything ending in . ! ?).
  bool is_sentence_end(TokenId id) const;

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

}  // namespace seal::text
