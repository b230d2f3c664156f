// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "seal/labels/proxy_labels.hpp"
#include "seal/labels/rouge.hpp"
#include "seal/numerics/error.hpp"
#include "support/support.hpp"

namespace seal::labels {
namespace {

using seal::testing::brute_rouge_l;
using seal::testing::brute_rouge_n;

// Single letters map to small ids: "a" -> 10, "b" -> 11, ".", -> 9.
TokenSeq seq(const std::string& s) {
  TokenSeq out;
  for (char c : s) {
    if (c == ' ') continue;
    out.push_back(c == '.' ? 9 : 10 + (c - 'a'));
  }
  return out;
}

void expect_score(const RougeScore& s, double p, double r, double f) {
  EXPECT_DOUBLE_EQ(s.precision, p);
  EXPECT_DOUBLE_EQ(s.recall, r);
  EXPECT_DOUBLE_EQ(s.f1, f);
}

std::vector<text::Snippet> snippets_of(std::vector<std::string> texts) {
  std::vector<text::Snippet> out;
  for (std::size_t i = 0; i < texts.size(); ++i) out.push_back({seq(texts[i]), 0, i});
  return out;
}

TEST(RougeN, HandCases) {
  expect_score(rouge_n(seq("ab"), seq("ac"), 1), 0.5, 0.5, 0.5);
  expect_score(rouge_n(seq("abc"), seq("abc"), 2), 1, 1, 1);
  expect_score(rouge_n(seq("abc"), seq("a"), 2), 0, 0, 0);
  // Clipped counts: "a a a" vs "a" overlaps once.
  expect_score(rouge_n(seq("aaa"), seq("a"), 1), 1.0 / 3.0, 1.0, 0.5);
  EXPECT_THROW(rouge_n(seq("a"), seq("a"), 0), ConfigError);
}

TEST(RougeL, HandCases) {
  expect_score(rouge_l(seq("ac"), seq("abc")), 1.0, 2.0 / 3.0, 0.8);
  expect_score(rouge_l(seq("abc"), seq("abc")), 1, 1, 1);
  expect_score(rouge_l(seq("ab"), seq("cd")), 0, 0, 0);
  EXPECT_EQ(lcs_length(seq("abcbdab"), seq("bdcaba")), 4u);
}

TEST(RougeL, SummaryLevelUnionOfHits) {
  const std::vector<TokenSeq> cand = {seq("ab"), seq("cd")};
  const std::vector<TokenSeq> ref = {seq("ac")};
  expect_score(rouge_l_summary(cand, ref), 0.5, 1.0, 2.0 / 3.0);
  // A reference token is counted at most as often as the candidate holds it.
  const std::vector<TokenSeq> dup_cand = {seq("a")};
  const std::vector<TokenSeq> dup_ref = {seq("aa")};
  const auto s = rouge_l_summary(dup_cand, dup_ref);
  EXPECT_LE(s.precision, 1.0);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
}

TEST(Rouge, RandomPairsMatchBruteForce) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> len(0, 9), tok(10, 14);
  for (int trial = 0; trial < 300; ++trial) {
    TokenSeq a(len(rng)), b(len(rng));
    for (auto& t : a) t = tok(rng);
    for (auto& t : b) t = tok(rng);
    for (std::size_t n = 1; n <= 3; ++n) {
      const auto got = rouge_n(a, b, n), want = brute_rouge_n(a, b, n);
      EXPECT_EQ(got.precision, want.precision);
      EXPECT_EQ(got.recall, want.recall);
      EXPECT_EQ(got.f1, want.f1);
    }
    const auto got = rouge_l(a, b), want = brute_rouge_l(a, b);
    EXPECT_EQ(got.precision, want.precision);
    EXPECT_EQ(got.recall, want.recall);
    EXPECT_EQ(got.f1, want.f1);
  }
}

TEST(Segments, SplitArithmetic) {
  TokenSeq target(100);
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = static_cast<TokenId>(10 + i);
  const auto segs = split_segments(target, 64, 3);
  ASSERT_EQ(segs.size(), 3u);
  EXPECT_EQ(segs[0].size(), 64u);
  EXPECT_EQ(segs[1].size(), 36u);
  EXPECT_TRUE(segs[2].empty());
  EXPECT_EQ(segs[1].front(), 74);
}

TEST(ProxyLabels, DefaultIsNonSequentialRouge2F) {
  const LabelConfig cfg;
  EXPECT_FALSE(cfg.sequential);
  EXPECT_EQ(cfg.ngram, 2u);
  EXPECT_EQ(cfg.score_type, ScoreType::F1);
  EXPECT_EQ(all_label_configs().size(), 12u);
}

TEST(ProxyLabels, HandCases) {
  TokenSeq summary = seq("abc.def");
  summary.push_back(text::kEos);
  const auto same = proxy_labels(snippets_of({"abc.def"}), summary, {});
  EXPECT_DOUBLE_EQ(same[0], 1.0);

  // Each half covers 3 of the 6 summary bigrams.
  const LabelConfig recall{false, 2, ScoreType::Recall, false};
  const auto halves = proxy_labels(snippets_of({"abc.", ".def"}), summary, recall);
  EXPECT_DOUBLE_EQ(halves[0], 0.5);
  EXPECT_DOUBLE_EQ(halves[1], 0.5);
}

TEST(ProxyLabels, SequentialDuplicateGetsNoGain) {
  const TokenSeq summary = seq("abcd");
  for (const bool binary : {false, true}) {
    const LabelConfig cfg{true, 2, ScoreType::F1, binary};
    const auto l = proxy_labels(snippets_of({"ab", "ab", "cd"}), summary, cfg);
    EXPECT_GT(l[0], 0.0);
    EXPECT_EQ(l[1], 0.0);
    EXPECT_GT(l[2], 0.0);
    if (binary) EXPECT_EQ(l[0], 1.0);
  }
}

TEST(ProxyLabels, VectorModeMatchesOracleOnEveryGridCell) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> tok(10, 15), len(1, 6);
  for (const auto& cfg : all_label_configs()) {
    if (cfg.sequential) continue;
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<text::Snippet> snippets(4);
      for (std::size_t i = 0; i < snippets.size(); ++i) {
        snippets[i].index = i;
        snippets[i].tokens.resize(len(rng));
        for (auto& t : snippets[i].tokens) t = tok(rng);
      }
      TokenSeq summary(len(rng) + 2);
      for (auto& t : summary) t = tok(rng);
      const auto l = proxy_labels(snippets, summary, cfg);
      for (std::size_t i = 0; i < snippets.size(); ++i) {
        const auto s = brute_rouge_n(snippets[i].tokens, summary, cfg.ngram);
        const double want = cfg.score_type == ScoreType::F1       ? s.f1
                            : cfg.score_type == ScoreType::Recall ? s.recall
                                                                  : s.precision;
        EXPECT_EQ(l[i], want);
      }
    }
  }
}

TEST(SegmentLabels, MatrixMatchesPairwiseOracle) {
  const auto snippets = snippets_of({"abc", "def", "abd"});
  TokenSeq summary = seq("abcdef");
  summary.push_back(text::kEos);
  const Tensor m = segment_labels(snippets, summary, 3, 2, {});
  ASSERT_EQ(m.shape(), (Shape{3, 2}));
  const auto segs = split_segments(seq("abcdef"), 3, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(m.at(i, j), brute_rouge_n(snippets[i].tokens, segs[j], 2).f1);
  }
  EXPECT_DOUBLE_EQ(m.at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(m.at(1, 1), 1.0);
}

}  // namespace
}  // namespace seal::labels
