// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "seal/labels/proxy_labels.hpp"
#include "seal/numerics/error.hpp"
#include "seal/training/decode.hpp"
#include "seal/training/evaluate.hpp"
#include "seal/training/losses.hpp"
#include "seal/training/optimizer.hpp"
#include "seal/training/trainer.hpp"
#include "support/support.hpp"

namespace seal::training {
namespace {

using models::ModelKind;
using models::Summarizer;
using seal::testing::random_example;
using seal::testing::tiny_config;

TEST(Losses, AbstractiveHandCases) {
  Tape tape(false);
  const TokenSeq targets = {5, 6, text::kPad};
  const Var uniform = tape.constant(Tensor({3, 8}, 0.0));
  EXPECT_NEAR(abstractive_loss(uniform, targets).value().item(), std::log(8.0), 1e-12);
  Tensor four({1, 4}, 0.0);
  EXPECT_NEAR(abstractive_loss(tape.constant(four), TokenSeq{2}).value().item(), std::log(4.0), 1e-12);
  EXPECT_THROW(abstractive_loss(uniform, TokenSeq{0, 0, 0}), InputError);
}

TEST(Losses, AbstractiveMatchesScalarOracle) {
  std::mt19937_64 rng(4);
  const Tensor logits = testing::random_tensor({4, 6}, rng, -3, 3);
  const TokenSeq targets = {1, 5, text::kPad, 2};
  double want = 0;
  int counted = 0;
  for (std::size_t r = 0; r < 4; ++r) {
    if (targets[r] == text::kPad) continue;
    double z = 0;
    for (std::size_t c = 0; c < 6; ++c) z += std::exp(logits.at(r, c));
    want += std::log(z) - logits.at(r, static_cast<std::size_t>(targets[r]));
    ++counted;
  }
  want /= counted;
  Tape tape(false);
  EXPECT_NEAR(abstractive_loss(tape.constant(logits), targets).value().item(), want, 1e-10);
}

TEST(Losses, ExtractiveHandCases) {
  Tape tape(false);
  EXPECT_DOUBLE_EQ(extractive_loss_ea(tape.constant(Tensor::vector({0.5})), Tensor::vector({0.0})).value().item(),
                   0.25);
  const Tensor l = Tensor::vector({0.1, 0.7, 0.3});
  EXPECT_EQ(extractive_loss_ea(tape.constant(l), l).value().item(), 0.0);
  const Tensor s3 = Tensor::vector({0.2, -0.4, 1.0});
  const double want3 = ((0.1 * 0.1) + (1.1 * 1.1) + (0.7 * 0.7)) / 3.0;
  EXPECT_NEAR(extractive_loss_ea(tape.constant(s3), l).value().item(), want3, 1e-15);

  // [n = 2, m = 2]: column j of the labels pairs with segment j's scores.
  const std::vector<Var> zero = {tape.constant(Tensor::vector({0, 0})), tape.constant(Tensor::vector({0, 0}))};
  EXPECT_EQ(extractive_loss_seal(zero, Tensor({2, 2}, 0.0)).value().item(), 0.0);
  const std::vector<Var> scores = {tape.constant(Tensor::vector({1, 2})), tape.constant(Tensor::vector({3, 4}))};
  const Tensor labels = Tensor::matrix({{0, 0}, {1, 1}});
  // (1-0)^2 + (2-1)^2 + (3-0)^2 + (4-1)^2 = 20, over 4 elements.
  EXPECT_DOUBLE_EQ(extractive_loss_seal(scores, labels).value().item(), 5.0);
}

TEST(Schedule, ConstantAndRsqrt) {
  const LrSchedule c{ScheduleKind::Constant, 0.01, 0};
  EXPECT_EQ(c.at(1), 0.01);
  EXPECT_EQ(c.at(1000), 0.01);
  const LrSchedule r{ScheduleKind::RsqrtDecay, 0.01, 100};
  EXPECT_DOUBLE_EQ(r.at(50), 0.005);
  EXPECT_DOUBLE_EQ(r.at(100), 0.01);
  EXPECT_DOUBLE_EQ(r.at(400), 0.005);
  const LrSchedule nw{ScheduleKind::RsqrtDecay, 0.01, 0};
  EXPECT_DOUBLE_EQ(nw.at(4), 0.005);
  EXPECT_EQ(parse_schedule_kind("rsqrt"), ScheduleKind::RsqrtDecay);
  EXPECT_THROW(parse_schedule_kind("cosine"), ConfigError);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParameterStore store;
  Parameter& p = store.create("w", {2}, Init::Zeros, 1);
  p.grad[0] = 3.0;
  p.grad[1] = -0.001;
  Adam adam({0.9, 0.999, 1e-8, 0.0});
  adam.step(store, 0.1);
  EXPECT_NEAR(p.value[0], -0.1, 1e-6);
  EXPECT_NEAR(p.value[1], 0.1, 1e-4);
  EXPECT_EQ(adam.steps_taken(), 1u);
}

class TrainingTest : public ::testing::Test {
 protected:
  std::mt19937_64 rng{21};

  std::vector<TrainingExample> data(const models::ModelConfig& cfg, std::size_t n) {
    std::vector<text::SnippetizedExample> raw;
    for (std::size_t i = 0; i < n; ++i) raw.push_back(random_example(rng, cfg));
    return attach_labels(raw, cfg, {});
  }
};

TEST_F(TrainingTest, LabelsFollowModelKind) {
  for (const auto kind : {ModelKind::Trunc, ModelKind::CA, ModelKind::EA, ModelKind::SEAL}) {
    const auto cfg = tiny_config(kind);
    const auto ex = data(cfg, 1)[0];
    const std::size_t n = ex.example.snippets.size();
    if (kind == ModelKind::EA) EXPECT_EQ(ex.labels.shape(), (Shape{n}));
    else if (kind == ModelKind::SEAL) EXPECT_EQ(ex.labels.shape(), (Shape{n, cfg.n_seg}));
    else EXPECT_EQ(ex.labels.size(), 0u);
  }
}

TEST_F(TrainingTest, TotalIsWeightedSumAndTruncHasNoExtractiveLoss) {
  for (const auto kind : {ModelKind::Trunc, ModelKind::EA, ModelKind::SEAL}) {
    const Summarizer model(tiny_config(kind));
    const auto ex = data(model.config(), 1)[0];
    Tape tape(false);
    const auto l = example_losses(model, tape, ex, {}, 0.7, 1.3);
    if (kind == ModelKind::Trunc) {
      EXPECT_FALSE(l.l_e.has_value());
      EXPECT_DOUBLE_EQ(l.total.value().item(), 0.7 * l.l_a.value().item());
    } else {
      ASSERT_TRUE(l.l_e.has_value());
      EXPECT_DOUBLE_EQ(l.total.value().item(), 0.7 * l.l_a.value().item() + 1.3 * l.l_e->value().item());
    }
  }
  EXPECT_EQ(metrics_json_line({3, 1.5, std::nullopt, 1.5}), R"({"step":3,"l_a":1.5,"l_e":null,"total":1.5})");
}

TEST_F(TrainingTest, AbstractiveLossAloneLeavesScorerUntouched) {
  for (const auto kind : {ModelKind::EA, ModelKind::SEAL}) {
    Summarizer model(tiny_config(kind));
    const auto ex = data(model.config(), 1)[0];
    model.parameters().zero_grad();
    Tape tape;
    const auto l = example_losses(model, tape, ex, {}, 1.0, 0.0);
    tape.backward(l.l_a);
    for (const Parameter* p : model.parameters().all()) {
      if (p->name.rfind("scorer.", 0) != 0) continue;
      for (double g : p->grad.storage()) EXPECT_EQ(g, 0.0) << p->name;
    }
  }
}

TEST_F(TrainingTest, FullLossGradientsMatchFiniteDifferences) {
  for (const auto kind : {ModelKind::Trunc, ModelKind::CA, ModelKind::EA, ModelKind::SEAL}) {
    Summarizer model(tiny_config(kind));
    const auto ex = data(model.config(), 1)[0];
    const auto r = testing::check_parameters(
        model.parameters(), [&](Tape& tape) { return example_losses(model, tape, ex, {}).total; }, 2);
    EXPECT_LT(r.rel_error, 1e-4) << models::to_string(kind);
    EXPECT_GT(r.analytic_norm, 0.0);
  }
}

TEST_F(TrainingTest, LossDecreasesAndSeededRunsMatch) {
  const auto cfg = tiny_config(ModelKind::EA);
  const auto set = data(cfg, 4);
  TrainConfig tc;
  tc.batch_size = 2;
  tc.max_steps = 100;
  tc.schedule.base = 1e-2;
  std::vector<std::vector<StepLosses>> runs;
  std::vector<std::string> logs;
  for (int r = 0; r < 2; ++r) {
    Summarizer model(cfg);
    Trainer trainer(model, tc);
    std::ostringstream log;
    runs.push_back(trainer.fit(set, &log));
    logs.push_back(log.str());
  }
  ASSERT_EQ(runs[0].size(), 100u);
  double early = 0, late = 0;
  for (int i = 0; i < 10; ++i) early += runs[0][i].total, late += runs[0][90 + i].total;
  EXPECT_LT(late, 0.5 * early);
  EXPECT_EQ(logs[0], logs[1]);
  EXPECT_EQ(std::count(logs[0].begin(), logs[0].end(), '\n'), 100);
}

TEST_F(TrainingTest, EarlyStopEndsFit) {
  const auto cfg = tiny_config(ModelKind::Trunc);
  Summarizer model(cfg);
  TrainConfig tc;
  tc.max_steps = 50;
  tc.early_stop_loss = 1e9;
  Trainer trainer(model, tc);
  EXPECT_EQ(trainer.fit(data(cfg, 2)).size(), 1u);
}

TEST_F(TrainingTest, EosFirstGivesEmptySummary) {
  for (const auto kind : {ModelKind::Trunc, ModelKind::EA, ModelKind::SEAL}) {
    Summarizer model(tiny_config(kind));
    model.parameters().get("decoder.output.bias").value[text::kEos] = 100.0;
    const auto ex = random_example(rng, model.config());
    EXPECT_TRUE(greedy_decode(model, ex, 8).empty());
    if (kind != ModelKind::Trunc) {
      const auto r = greedy_decode_segmentwise(model, ex, 8);
      EXPECT_TRUE(r.tokens.empty());
      ASSERT_EQ(r.trace.segments.size(), 1u);
      EXPECT_TRUE(r.trace.segments[0].tokens.empty());
    }
  }
}

TEST_F(TrainingTest, SegmentwiseTraceShape) {
  Summarizer model(tiny_config(ModelKind::SEAL));
  model.parameters().get("decoder.output.bias").value[text::kEos] = -100.0;
  const auto ex = random_example(rng, model.config());
  const auto r = greedy_decode_segmentwise(model, ex, 8);
  EXPECT_EQ(r.tokens.size(), 8u);
  ASSERT_EQ(r.trace.segments.size(), 2u);
  EXPECT_EQ(r.trace.segments[1].start, 4u);
  EXPECT_EQ(r.trace.emitted(), r.tokens);
  EXPECT_EQ(greedy_decode(model, ex, 8), r.tokens);

  // A segment as long as the decode gives one selection event.
  auto cfg = tiny_config(ModelKind::SEAL);
  cfg.l_seg = 8;
  cfg.n_seg = 1;
  cfg.allow_reduction = true;
  const Summarizer single(cfg);
  EXPECT_EQ(greedy_decode_segmentwise(single, ex, 8).trace.segments.size(), 1u);
}

TEST_F(TrainingTest, TeacherForcedLogitsReproduceGreedyDecode) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    for (const auto kind : {ModelKind::EA, ModelKind::SEAL}) {
      const Summarizer model(tiny_config(kind, seed));
      auto ex = random_example(rng, model.config());
      const auto r = greedy_decode_segmentwise(model, ex, 8);
      ex.target = r.tokens;
      if (ex.target.size() < 8) ex.target.push_back(text::kEos);
      Tape tape(false);
      const auto fwd = model.forward(tape, ex, Summarizer::teacher_inputs(ex.target));
      const Tensor& logits = fwd.logits.value();
      for (std::size_t t = 0; t < ex.target.size(); ++t) {
        std::size_t best = 0;
        for (std::size_t v = 1; v < logits.cols(); ++v) {
          if (logits.at(t, v) > logits.at(t, best)) best = v;
        }
        EXPECT_EQ(static_cast<TokenId>(best), ex.target[t]) << "seed " << seed << " position " << t;
      }
    }
  }
}

TEST(Evaluate, ExactAndEmptyPredictions) {
  const std::vector<std::string> corpus = {"the cat sat . a dog ran ."};
  const auto vocab = text::Vocab::build(corpus, 20);
  const std::vector<TokenSeq> refs = {vocab.encode("the cat sat . a dog ran ."), vocab.encode("a dog .")};
  auto with_eos = refs;
  for (auto& r : with_eos) r.push_back(text::kEos);
  const auto exact = score_predictions(refs, with_eos, vocab);
  EXPECT_DOUBLE_EQ(exact.rouge1, 1.0);
  EXPECT_DOUBLE_EQ(exact.rouge2, 1.0);
  EXPECT_DOUBLE_EQ(exact.rouge_l, 1.0);
  EXPECT_DOUBLE_EQ(exact.rouge_lsum, 1.0);
  const std::vector<TokenSeq> empty(2);
  const auto none = score_predictions(empty, refs, vocab);
  EXPECT_EQ(none.rouge1, 0.0);
  EXPECT_EQ(none.rouge2, 0.0);
  EXPECT_EQ(none.rouge_l, 0.0);
  EXPECT_EQ(none.rouge_lsum, 0.0);
  EXPECT_EQ(none.count, 2u);
}

TEST(Evaluate, CorpusMeanOfLabelScores) {
  const std::vector<std::string> corpus = {"a b c d e f"};
  const auto vocab = text::Vocab::build(corpus, 20);
  const std::vector<TokenSeq> preds = {vocab.encode("a b c"), vocab.encode("d e"), vocab.encode("f a")};
  const std::vector<TokenSeq> refs = {vocab.encode("a b d"), vocab.encode("d e f"), vocab.encode("a f")};
  double r1 = 0, r2 = 0;
  for (int i = 0; i < 3; ++i) {
    r1 += labels::rouge_n(preds[i], refs[i], 1).f1 / 3;
    r2 += labels::rouge_n(preds[i], refs[i], 2).f1 / 3;
  }
  const auto rep = score_predictions(preds, refs, vocab);
  EXPECT_NEAR(rep.rouge1, r1, 1e-12);
  EXPECT_NEAR(rep.rouge2, r2, 1e-12);
}

class TraceTest : public ::testing::Test {
 protected:
  TraceTest() {
    std::vector<std::string> words;
    for (int i = 0; i < 20; ++i) words.push_back("w" + std::to_string(i));
    vocab = text::Vocab::build(words, 30);
    std::mt19937_64 rng(6);
    example = random_example(rng, tiny_config(ModelKind::SEAL), 4);
    trace.example_id = "ex-7";
    trace.segments = {{0, 0, {0.1, 0.9, 0.5, 0.2}, {1, 2}, {5, 6, 7, 8}},
                      {1, 4, {0.8, 0.3, 0.6, 0.1}, {0, 2}, {9, 10}}};
  }
  text::Vocab vocab;
  text::SnippetizedExample example;
  DecodeTrace trace;
};

TEST_F(TraceTest, JsonRoundTrip) {
  const std::string json = trace_to_json(trace, example, vocab);
  EXPECT_EQ(trace_from_json(json), trace);
  const auto doc = nlohmann::json::parse(json);
  EXPECT_EQ(doc["snippets"].size(), example.snippets.size());
  EXPECT_EQ(doc["segments"][1]["selected"][0], 0);
}

TEST_F(TraceTest, HtmlColorsSnippetsByFirstSegment) {
  for (const std::string& html : {trace_to_html(trace, example, vocab),
                                  trace_json_to_html(trace_to_json(trace, example, vocab))}) {
    // Snippet 2 is selected by both segments and takes segment 0's color.
    EXPECT_NE(html.find("data-snippet=\"2\" data-first-segment=\"0\""), std::string::npos);
    EXPECT_NE(html.find("data-snippet=\"0\" data-first-segment=\"1\""), std::string::npos);
    EXPECT_NE(html.find("data-snippet=\"1\" data-first-segment=\"0\""), std::string::npos);
    EXPECT_EQ(html.find("data-snippet=\"3\" data-first-segment"), std::string::npos);
    EXPECT_NE(html.find("[0]"), std::string::npos);
    EXPECT_NE(html.find("[1]"), std::string::npos);
    const std::regex sel(R"(class="sel" data-snippet="\d+")");
    EXPECT_EQ(std::distance(std::sregex_iterator(html.begin(), html.end(), sel), std::sregex_iterator()), 4);
  }
}

}  // namespace
}  // namespace seal::training
