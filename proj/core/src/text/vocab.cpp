// SPDX-License-Identifier: Apache-2.0
#include "seal/text/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "seal/numerics/error.hpp"

namespace seal::text {
namespace {
constexpr std::string_view kReservedNames[kReservedTokens] = {"<pad>", "<s>", "</s>", "<unk>"};
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Vocab::Vocab() {
  for (auto name : kReservedNames) add(std::string(name));
}

void Vocab::add(std::string token) {
  const auto id = static_cast<TokenId>(tokens_.size());
  if (!ids_.emplace(token, id).second) throw InputError("duplicate vocabulary entry '" + token + "'");
  tokens_.push_back(std::move(token));
}

Vocab Vocab::build(std::span<const std::string> corpus, std::size_t max_size) {
  if (max_size < kReservedTokens) throw ConfigError("vocabulary size must be at least 4");
  std::map<std::string, std::size_t> counts;
  for (const auto& text : corpus) {
    for (auto& tok : tokenize(text)) ++counts[tok];
  }
  if (counts.empty()) throw InputError("cannot build a vocabulary from an empty corpus");
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  // std::map iteration is already lexicographic, so a stable sort on count keeps the tie order.
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab vocab;
  for (auto& [tok, count] : ranked) {
    if (vocab.size() >= max_size) break;
    if (vocab.ids_.contains(tok)) continue;
    vocab.add(tok);
  }
  return vocab;
}

Vocab Vocab::parse(std::string_view contents) {
  Vocab vocab;
  std::istringstream in{std::string(contents)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no <= kReservedTokens) {
      if (line != kReservedNames[line_no - 1]) {
        throw InputError("vocab line " + std::to_string(line_no) + ": expected reserved token '" +
                         std::string(kReservedNames[line_no - 1]) + "'");
      }
      continue;
    }
    if (line.empty()) throw InputError("vocab line " + std::to_string(line_no) + ": empty token");
    vocab.add(line);
  }
  if (line_no < kReservedTokens) throw InputError("vocab file is missing reserved tokens");
  return vocab;
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open vocab file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string Vocab::serialize() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write vocab file " + path.string());
  out << serialize();
}

TokenId Vocab::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw InputError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

TokenSeq Vocab::encode(std::string_view text) const {
  TokenSeq out;
  for (const auto& tok : tokenize(text)) out.push_back(id(tok));
  return out;
}

std::string Vocab::decode(std::span<const TokenId> ids, bool skip_special) const {
  std::string out;
  for (TokenId id : ids) {
    if (skip_special && id >= 0 && static_cast<std::size_t>(id) < kReservedTokens && id != kUnk) continue;
    if (!out.empty()) out += ' ';
    out += token(id);
  }
  return out;
}

bool Vocab::is_sentence_end(TokenId id) const {
  if (id < static_cast<TokenId>(kReservedTokens) || static_cast<std::size_t>(id) >= tokens_.size()) return false;
  const std::string& t = tokens_[static_cast<std::size_t>(id)];
  const char last = t.back();
  return last == '.' || last == '!' || last == '?';
}

}  // namespace seal::text
