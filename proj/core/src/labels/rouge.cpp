// SPDX-License-Identifier: Apache-2.0
#include "seal/labels/rouge.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "seal/numerics/error.hpp"

namespace seal::labels {
namespace {

std::map<std::vector<TokenId>, std::size_t> ngram_counts(std::span<const TokenId> seq, std::size_t n) {
  std::map<std::vector<TokenId>, std::size_t> out;
  if (seq.size() < n) return out;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) ++out[std::vector<TokenId>(seq.begin() + i, seq.begin() + i + n)];
  return out;
}

// Full DP table, (a.size()+1) x (b.size()+1).
std::vector<std::size_t> lcs_table(std::span<const TokenId> a, std::span<const TokenId> b) {
  const std::size_t w = b.size() + 1;
  std::vector<std::size_t> t((a.size() + 1) * w, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      t[i * w + j] = a[i - 1] == b[j - 1] ? t[(i - 1) * w + j - 1] + 1 : std::max(t[(i - 1) * w + j], t[i * w + j - 1]);
    }
  }
  return t;
}

// Indices into `ref` that take part in one LCS with `cand`.
std::vector<std::size_t> lcs_ref_positions(std::span<const TokenId> ref, std::span<const TokenId> cand) {
  const auto t = lcs_table(ref, cand);
  const std::size_t w = cand.size() + 1;
  std::vector<std::size_t> out;
  std::size_t i = ref.size(), j = cand.size();
  while (i > 0 && j > 0) {
    if (ref[i - 1] == cand[j - 1]) {
      out.push_back(i - 1);
      --i;
      --j;
    } else if (t[(i - 1) * w + j] >= t[i * w + j - 1]) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

RougeScore make_score(double overlap, double candidate_total, double reference_total) {
  RougeScore s;
  s.precision = candidate_total > 0.0 ? overlap / candidate_total : 0.0;
  s.recall = reference_total > 0.0 ? overlap / reference_total : 0.0;
  s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

RougeScore rouge_n(std::span<const TokenId> candidate, std::span<const TokenId> reference, std::size_t n) {
  if (n == 0) throw ConfigError("rouge_n: n must be >= 1");
  const auto cand = ngram_counts(candidate, n);
  const auto ref = ngram_counts(reference, n);
  double overlap = 0.0;
  for (const auto& [gram, count] : cand) {
    if (auto it = ref.find(gram); it != ref.end()) overlap += static_cast<double>(std::min(count, it->second));
  }
  const double cand_total = candidate.size() >= n ? static_cast<double>(candidate.size() - n + 1) : 0.0;
  const double ref_total = reference.size() >= n ? static_cast<double>(reference.size() - n + 1) : 0.0;
  return make_score(overlap, cand_total, ref_total);
}

std::size_t lcs_length(std::span<const TokenId> a, std::span<const TokenId> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l(std::span<const TokenId> candidate, std::span<const TokenId> reference) {
  return make_score(static_cast<double>(lcs_length(candidate, reference)), static_cast<double>(candidate.size()),
                    static_cast<double>(reference.size()));
}

RougeScore rouge_l_summary(std::span<const TokenSeq> candidate_sentences,
                           std::span<const TokenSeq> reference_sentences) {
  std::unordered_map<TokenId, std::size_t> cand_left, ref_left;
  double cand_total = 0.0, ref_total = 0.0;
  for (const auto& s : candidate_sentences) {
    for (TokenId t : s) ++cand_left[t];
    cand_total += static_cast<double>(s.size());
  }
  for (const auto& s : reference_sentences) {
    for (TokenId t : s) ++ref_left[t];
    ref_total += static_cast<double>(s.size());
  }
  double hits = 0.0;
  for (const auto& ref : reference_sentences) {
    std::vector<char> in_union(ref.size(), 0);
    for (const auto& cand : candidate_sentences) {
      for (std::size_t pos : lcs_ref_positions(ref, cand)) in_union[pos] = 1;
    }
    for (std::size_t pos = 0; pos < ref.size(); ++pos) {
      if (!in_union[pos]) continue;
      const TokenId t = ref[pos];
      auto c = cand_left.find(t);
      auto r = ref_left.find(t);
      if (c != cand_left.end() && r != ref_left.end() && c->second > 0 && r->second > 0) {
        hits += 1.0;
        --c->second;
        --r->second;
      }
    }
  }
  return make_score(hits, cand_total, ref_total);
}

std::vector<TokenSeq> split_by(std::span<const TokenId> tokens, const std::function<bool(TokenId)>& is_end) {
  std::vector<TokenSeq> out;
  TokenSeq cur;
  for (TokenId t : tokens) {
    cur.push_back(t);
    if (is_end(t)) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace seal::labels
