// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>

#include "seal/numerics/error.hpp"
#include "seal/text/snippets.hpp"
#include "seal/text/synthetic.hpp"
#include "seal/text/vocab.hpp"
#include "support/support.hpp"

namespace seal::text {
namespace {

TokenSeq run(TokenId first, std::size_t length) {
  TokenSeq s(length);
  for (std::size_t i = 0; i < length; ++i) s[i] = first + static_cast<TokenId>(i);
  return s;
}

Document doc_of(int id, std::vector<std::size_t> sentence_lengths) {
  Document d;
  d.doc_id = id;
  TokenId next = 10;
  for (auto len : sentence_lengths) {
    d.sentences.push_back(run(next, len));
    next += static_cast<TokenId>(len);
  }
  return d;
}

std::vector<std::size_t> lengths(const std::vector<Snippet>& snippets) {
  std::vector<std::size_t> out;
  for (const auto& s : snippets) out.push_back(s.length());
  return out;
}

TEST(Vocab, FrequencyOrderAndReservedIds) {
  const std::vector<std::string> corpus = {"a a b"};
  const Vocab v = Vocab::build(corpus, 6);
  EXPECT_EQ(v.size(), 6u);
  EXPECT_EQ(v.id("a"), 4);
  EXPECT_EQ(v.id("b"), 5);
  EXPECT_EQ(v.id("zzz"), kUnk);
  EXPECT_EQ(v.decode(v.encode("A b")), "a b");
}

TEST(Vocab, CapacityFourMapsEverythingToUnk) {
  const std::vector<std::string> corpus = {"a a b"};
  const Vocab v = Vocab::build(corpus, 4);
  EXPECT_EQ(v.size(), kReservedTokens);
  for (TokenId id : v.encode("a b")) EXPECT_EQ(id, kUnk);
}

TEST(Vocab, SerializationIsDeterministicAndRoundTrips) {
  const std::vector<std::string> corpus = {"the cat sat . the dog ran !", "a cat"};
  const Vocab a = Vocab::build(corpus, 50);
  const Vocab b = Vocab::build(corpus, 50);
  EXPECT_EQ(a.serialize(), b.serialize());
  const Vocab c = Vocab::parse(a.serialize());
  EXPECT_EQ(c.serialize(), a.serialize());
  EXPECT_EQ(c.id("cat"), a.id("cat"));
  EXPECT_TRUE(a.is_sentence_end(a.id(".")));
  EXPECT_TRUE(a.is_sentence_end(a.id("!")));
  EXPECT_FALSE(a.is_sentence_end(a.id("cat")));
}

TEST(Snippetize, PacksSentencesGreedily) {
  const std::vector<Document> docs = {doc_of(0, {50, 60, 30})};
  EXPECT_EQ(lengths(snippetize(docs, 128, 10)), (std::vector<std::size_t>{110, 30}));
}

TEST(Snippetize, TruncatesOverlongSentence) {
  const std::vector<Document> docs = {doc_of(0, {200})};
  const auto out = snippetize(docs, 128, 10);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].length(), 128u);
  EXPECT_EQ(out[0].tokens.front(), 10);
}

TEST(Snippetize, NeverCrossesDocuments) {
  const std::vector<Document> docs = {doc_of(0, {100}), doc_of(1, {20})};
  const auto out = snippetize(docs, 128, 10);
  EXPECT_EQ(lengths(out), (std::vector<std::size_t>{100, 20}));
  EXPECT_EQ(out[0].doc_id, 0);
  EXPECT_EQ(out[1].doc_id, 1);
}

TEST(Snippetize, StopsAtSnippetCountAndIndexesInOrder) {
  std::vector<Document> docs;
  for (int d = 0; d < 75; ++d) docs.push_back(doc_of(d, {3, 3}));
  const auto out = snippetize(docs, 4, 20);
  ASSERT_EQ(out.size(), 20u);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].index, i);
    EXPECT_EQ(out[i].doc_id, static_cast<int>(i / 2));
  }
}

TEST(Snippetize, Properties) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Document> docs;
    const auto n_docs = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int d = 0; d < n_docs; ++d) {
      std::vector<std::size_t> lens(std::uniform_int_distribution<std::size_t>(1, 6)(rng));
      for (auto& l : lens) l = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
      docs.push_back(doc_of(d, lens));
    }
    const std::size_t l_snpt = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
    const std::size_t n_snpt = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    const auto out = snippetize(docs, l_snpt, n_snpt);
    EXPECT_LE(out.size(), n_snpt);
    int last_doc = -1;
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_GE(out[i].length(), 1u);
      EXPECT_LE(out[i].length(), l_snpt);
      EXPECT_GE(out[i].doc_id, last_doc);
      last_doc = out[i].doc_id;
    }
  }
}

TEST(Sentences, SplitOnTerminatorsAndNewlines) {
  EXPECT_EQ(split_sentences("a b. c d! e?\nf g"), (std::vector<std::string>{"a b.", "c d!", "e?", "f g"}));
  EXPECT_EQ(split_sentences("x.y z"), (std::vector<std::string>{"x.y z"}));
}

class Clone : public ::testing::Test {
 protected:
  Clone() {
    std::vector<std::string> corpus;
    std::string all;
    for (int i = 0; i < 40; ++i) all += "w" + std::to_string(i) + " ";
    corpus.push_back(all + "a b c d e f g");
    vocab = Vocab::build(corpus, 100);
  }
  std::string words(int from, int to) const {
    std::string s;
    for (int i = from; i < to; ++i) s += "w" + std::to_string(i) + " ";
    return s;
  }
  Vocab vocab;
};

TEST_F(Clone, HandEnumeratedSixGrams) {
  const Article two = make_article("a b c d e f g", vocab);
  EXPECT_DOUBLE_EQ(clone_score(vocab.encode("a b c d e f"), two, 6), 0.5);
  EXPECT_DOUBLE_EQ(clone_score(vocab.encode("a b c d e f g"), two, 6), 1.0);
  EXPECT_DOUBLE_EQ(clone_score(vocab.encode("g f e d c b a"), two, 6), 0.0);
  EXPECT_TRUE(is_near_clone(vocab.encode("a b c d e f g"), two));
}

TEST_F(Clone, StrictThreshold) {
  // 10-token section: 5 six-grams, one shared -> exactly 0.2.
  const Article five = make_article(words(0, 10), vocab);
  const TokenSeq one = vocab.encode(words(0, 6));
  EXPECT_DOUBLE_EQ(clone_score(one, five, 6), 0.2);
  EXPECT_FALSE(is_near_clone(one, five, 6, 0.2));
  // 24-token section: 19 six-grams, four shared -> 4/19 > 0.2.
  const Article nineteen = make_article(words(0, 24), vocab);
  const TokenSeq four = vocab.encode(words(0, 9));
  EXPECT_DOUBLE_EQ(clone_score(four, nineteen, 6), 4.0 / 19.0);
  EXPECT_TRUE(is_near_clone(four, nineteen, 6, 0.2));
}

TEST_F(Clone, BestSectionWinsAndShortSectionsSkip) {
  const Article art = make_article("a b c\n\n" + words(0, 7) + "\n\nw30 w31", vocab);
  ASSERT_EQ(art.sections.size(), 3u);
  EXPECT_DOUBLE_EQ(clone_score(vocab.encode(words(0, 6)), art, 6), 0.5);
  const Article shorts = make_article("a b c\n\nd e", vocab);
  EXPECT_DOUBLE_EQ(clone_score(vocab.encode("a b c d e"), shorts, 6), 0.0);
}

TEST(Corpus, ParsesInOrderAndReportsLineNumbers) {
  testing::TempDir dir("corpus");
  {
    std::ofstream out(dir / "ok.jsonl");
    out << R"({"documents": ["first doc."], "summary": "one"})" << "\n";
    out << R"({"documents": ["second doc."], "summary": "two"})" << "\n";
  }
  const auto ok = read_corpus(dir / "ok.jsonl");
  ASSERT_EQ(ok.size(), 2u);
  EXPECT_EQ(ok[0].summary, "one");
  EXPECT_EQ(ok[1].summary, "two");

  {
    std::ofstream out(dir / "bad.jsonl");
    out << R"({"documents": ["x"], "summary": "s"})" << "\n";
    out << R"({"documents": ["x"]})" << "\n";
  }
  try {
    read_corpus(dir / "bad.jsonl");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("summary"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_raw_example("{not json", 7), InputError);
}

TEST(Corpus, PrepareExampleOrdersDocumentsAndAppendsEos) {
  const std::vector<std::string> corpus = {"alpha beta . gamma . delta epsilon ."};
  const Vocab v = Vocab::build(corpus, 20);
  RawExample raw{{"alpha beta . gamma .", "delta epsilon ."}, "alpha gamma delta epsilon"};
  const auto ex = prepare_example(raw, v, {4, 8, 4});
  ASSERT_EQ(ex.snippets.size(), 3u);
  EXPECT_EQ(ex.snippets[0].doc_id, 0);
  EXPECT_EQ(ex.snippets[2].doc_id, 1);
  EXPECT_EQ(ex.num_documents, 2u);
  ASSERT_EQ(ex.target.size(), 4u);  // truncated to L_dec - 1, then EOS
  EXPECT_EQ(ex.target.back(), kEos);
  EXPECT_EQ(v.decode(ex.target), "alpha gamma delta");
}

TEST(Corpus, PreprocessedLinesRoundTrip) {
  std::mt19937_64 rng(3);
  const auto cfg = testing::tiny_config(models::ModelKind::EA);
  for (int i = 0; i < 20; ++i) {
    const auto ex = testing::random_example(rng, cfg, 0, 2);
    const auto back = from_json_line(to_json_line(ex), 1);
    ASSERT_EQ(back.snippets.size(), ex.snippets.size());
    for (std::size_t s = 0; s < ex.snippets.size(); ++s) {
      EXPECT_EQ(back.snippets[s].tokens, ex.snippets[s].tokens);
      EXPECT_EQ(back.snippets[s].doc_id, ex.snippets[s].doc_id);
      EXPECT_EQ(back.snippets[s].index, ex.snippets[s].index);
    }
    EXPECT_EQ(back.target, ex.target);
    EXPECT_EQ(back.num_documents, ex.num_documents);
  }
  EXPECT_THROW(from_json_line("[1,2]", 3), InputError);
}

TEST(Synthetic, CorporaAreSeededAndCoveredByWordLists) {
  const SalienceTask task;
  const auto a = salience_corpus(task, 5, 9);
  const auto b = salience_corpus(task, 5, 9);
  ASSERT_EQ(a.size(), 5u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].documents, b[i].documents);
    EXPECT_EQ(a[i].summary, b[i].summary);
  }
  std::string all;
  for (const auto& w : salience_words(task)) all += w + " ";
  const Vocab v = Vocab::build(std::vector<std::string>{all}, 1000);
  for (const auto& ex : a) {
    for (TokenId id : v.encode(ex.documents[0])) EXPECT_NE(id, kUnk);
    for (TokenId id : v.encode(ex.summary)) EXPECT_NE(id, kUnk);
  }

  const SegmentTask seg;
  const auto s = segment_corpus(seg, 3, 4);
  for (const auto& ex : s) {
    // Every summary sentence appears verbatim in the input.
    for (const auto& sentence : split_sentences(ex.summary)) {
      EXPECT_NE(ex.documents[0].find(sentence), std::string::npos) << sentence;
    }
  }
}

}  // namespace
}  // namespace seal::text
