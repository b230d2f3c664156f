// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "seal/config/pipeline.hpp"
#include "seal/config/run_config.hpp"
#include "seal/numerics/error.hpp"
#include "seal/text/synthetic.hpp"
#include "seal/training/decode.hpp"
#include "seal/training/trainer.hpp"
#include "support/support.hpp"

namespace seal::config {
namespace {

using nlohmann::json;

TEST(Presets, PaperScaleGeometry) {
  const auto arxiv = preset("arxiv-paper");
  EXPECT_EQ(arxiv.model.l_snpt, 128u);
  EXPECT_EQ(arxiv.model.n_snpt, 224u);
  EXPECT_EQ(arxiv.model.l_ext, 1024u);
  EXPECT_EQ(arxiv.model.l_dec, 768u);
  EXPECT_EQ(arxiv.model.l_seg, 96u);
  EXPECT_EQ(arxiv.model.kind, models::ModelKind::SEAL);
  for (const auto& name : preset_names()) EXPECT_NO_THROW(preset(name).validate()) << name;
  EXPECT_THROW(preset("no-such-preset"), ConfigError);
}

TEST(Presets, DeskPresetsCoverEveryKind) {
  std::set<models::ModelKind> kinds;
  for (const std::string name : {"desk-trunc", "desk-ca", "desk-ea", "desk-seal"}) kinds.insert(preset(name).model.kind);
  EXPECT_EQ(kinds.size(), 4u);
}

TEST(RunConfig, LengthRelationIsValidated) {
  auto cfg = preset("desk-seal");
  cfg.model.l_dec = cfg.model.l_seg * cfg.model.n_seg + 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  json j = json::parse(to_json(preset("desk-seal")));
  j["model"]["n_snpt"] = 3;
  EXPECT_THROW(from_json(j.dump()), ConfigError);
}

TEST(RunConfig, JsonRoundTripIsIdempotent) {
  for (const auto& name : preset_names()) {
    const auto cfg = preset(name);
    const std::string once = to_json(cfg);
    const auto back = from_json(once);
    EXPECT_TRUE(back == cfg) << name;
    EXPECT_EQ(to_json(back), once) << name;
    EXPECT_EQ(config_hash(back), config_hash(cfg));
  }
}

TEST(RunConfig, OverlayOnPresetAndUnknownFields) {
  const auto cfg = from_json(R"({"preset": "desk-ea", "train": {"max_steps": 12}})");
  EXPECT_EQ(cfg.train.max_steps, 12u);
  EXPECT_EQ(cfg.model.kind, models::ModelKind::EA);
  EXPECT_THROW(from_json(R"({"model": {"dmodel": 3}})"), ConfigError);
  EXPECT_THROW(from_json(R"({"optimizer": {}})"), ConfigError);
  EXPECT_THROW(from_json(R"({"model": {"kind": "bart"}})"), ConfigError);
  EXPECT_THROW(from_json("{"), ConfigError);
}

TEST(RunConfig, SchemaMatchesJsonFields) {
  const json j = json::parse(to_json(preset("desk-seal")));
  std::size_t fields = 0;
  for (const auto& [section, body] : j.items()) {
    if (section == "preset") continue;
    fields += body.size();
  }
  EXPECT_EQ(config_schema().size(), fields);
  for (const auto& f : config_schema()) {
    ASSERT_TRUE(j.contains(f.section)) << f.path();
    EXPECT_TRUE(j[f.section].contains(f.key)) << f.path();
    EXPECT_FALSE(f.help.empty()) << f.path();
  }
}

TEST(RunConfig, SetFieldParsesEveryKind) {
  auto cfg = preset("desk-seal");
  set_field(cfg, "model.d_model", "32");
  set_field(cfg, "train.learning_rate", "0.5");
  set_field(cfg, "labels.sequential", "true");
  set_field(cfg, "model.kind", "ea");
  set_field(cfg, "paths.work_dir", "/tmp/x");
  set_field(cfg, "train.schedule", "rsqrt");
  EXPECT_EQ(cfg.model.d_model, 32u);
  EXPECT_EQ(cfg.train.schedule.base, 0.5);
  EXPECT_TRUE(cfg.train.labels.sequential);
  EXPECT_EQ(cfg.model.kind, models::ModelKind::EA);
  EXPECT_EQ(cfg.paths.work_dir, "/tmp/x");
  EXPECT_EQ(cfg.train.schedule.kind, training::ScheduleKind::RsqrtDecay);
  EXPECT_THROW(set_field(cfg, "model.nope", "1"), ConfigError);
  EXPECT_THROW(set_field(cfg, "model.d_model", "abc"), ConfigError);
  EXPECT_THROW(set_field(cfg, "model.kind", "bart"), ConfigError);
}

/// A small desk-seal run over a generated corpus.
class PipelineTest : public ::testing::Test {
 protected:
  PipelineTest() : dir("pipeline") {
    text::SalienceTask task;
    task.sentences = 6;
    text::write_corpus(dir / "train.jsonl", text::salience_corpus(task, 12, 1));
    text::write_corpus(dir / "eval.jsonl", text::salience_corpus(task, 3, 2));
    cfg = preset("desk-seal");
    cfg.model.d_model = 16;
    cfg.model.d_ff = 32;
    cfg.model.heads = 2;
    cfg.model.encoder_layers = cfg.model.decoder_layers = 1;
    cfg.train.max_steps = 3;
    cfg.train.batch_size = 2;
    cfg.paths.corpus = (dir / "train.jsonl").string();
    cfg.paths.eval_corpus = (dir / "eval.jsonl").string();
    cfg.paths.work_dir = (dir / "work").string();
  }

  PipelineResult run() {
    std::ostringstream log;
    return run_pipeline(pipeline_stages(), cfg, log);
  }

  testing::TempDir dir;
  RunConfig cfg;
};

TEST_F(PipelineTest, RerunHitsCacheForEveryStage) {
  const auto first = run();
  ASSERT_EQ(first.exit_code, 0) << first.message;
  ASSERT_EQ(first.stages.size(), 5u);
  for (const auto& s : first.stages) EXPECT_FALSE(s.cached) << s.name;
  for (const char* f : {"vocab.txt", "train.jsonl", "labels.jsonl", "metrics.jsonl", "eval.json", "trace.json",
                        "trace.html", "ckpt/params.bin"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / ("work/" + std::string(f)))) << f;
  }
  const auto second = run();
  ASSERT_EQ(second.exit_code, 0) << second.message;
  for (const auto& s : second.stages) EXPECT_TRUE(s.cached) << s.name;

  // A config change invalidates training and everything after it.
  cfg.train.max_steps = 4;
  const auto third = run();
  ASSERT_EQ(third.exit_code, 0) << third.message;
  EXPECT_TRUE(third.stages[0].cached);
  EXPECT_FALSE(third.stages[2].cached);
  EXPECT_FALSE(third.stages[3].cached);
}

TEST_F(PipelineTest, CorruptedIntermediateHaltsAtConsumingStage) {
  ASSERT_EQ(run().exit_code, 0);
  {
    std::ofstream out(dir / "work/train.jsonl", std::ios::app);
    out << "garbage\n";
  }
  const auto r = run();
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(r.failed_stage, "label");
  EXPECT_NE(r.message.find("line"), std::string::npos) << r.message;
}

TEST_F(PipelineTest, MissingCorpusIsAnInputError) {
  cfg.paths.corpus = (dir / "missing.jsonl").string();
  const auto r = run();
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(r.failed_stage, "preprocess");
}

TEST_F(PipelineTest, CheckpointRoundTripReproducesDecodes) {
  const auto corpus = text::read_corpus(cfg.paths.corpus);
  const auto vocab = build_vocab(corpus, cfg.data.max_vocab);
  std::vector<text::SnippetizedExample> examples;
  for (const auto& raw : corpus) examples.push_back(text::prepare_example(raw, vocab, cfg.snippet_config()));
  std::filesystem::create_directories(dir / "work");
  train_model(cfg, examples, {}, vocab, dir / "work/ckpt", {});

  auto trained_cfg = cfg;
  trained_cfg.model.vocab_size = vocab.size();
  models::Summarizer model(trained_cfg.model);
  {
    // Reference copy: same training run, kept in memory.
    auto data = training::attach_labels(examples, trained_cfg.model, cfg.train.labels);
    training::Trainer trainer(model, cfg.train);
    trainer.fit(data);
  }
  const auto loaded = load_model(dir / "work/ckpt");
  EXPECT_EQ(loaded.step, 3u);
  EXPECT_EQ(loaded.vocab.serialize(), vocab.serialize());
  for (const Parameter* p : model.parameters().all()) {
    EXPECT_EQ(loaded.model->parameters().get(p->name).value, p->value) << p->name;
  }
  for (const auto& ex : examples) {
    EXPECT_EQ(training::greedy_decode(*loaded.model, ex, 32), training::greedy_decode(model, ex, 32));
  }
  // Tampering with the stored config breaks the hash check.
  {
    std::ofstream out(dir / "work/ckpt/config.json", std::ios::trunc);
    out << to_json(preset("desk-ea"));
  }
  EXPECT_THROW(load_model(dir / "work/ckpt"), Error);
}

}  // namespace
}  // namespace seal::config
