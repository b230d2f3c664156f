// SPDX-License-Identifier: Apache-2.0
// Throughput of the hot paths: raw kernels and one optimizer step per kind.
#include <benchmark/benchmark.h>

#include "seal/numerics/ops.hpp"
#include "seal/training/trainer.hpp"
#include "support/support.hpp"

namespace {

using namespace seal;

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const Tensor a = testing::random_tensor({n, n}, rng), b = testing::random_tensor({n, n}, rng);
  for (auto _ : state) {
    Tape tape(false);
    benchmark::DoNotOptimize(ops::matmul(tape.constant(a), tape.constant(b)).value().storage().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

void BM_AttentionForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  const Tensor q = testing::random_tensor({n, 32}, rng), k = testing::random_tensor({n, 32}, rng),
               v = testing::random_tensor({n, 32}, rng);
  for (auto _ : state) {
    Tape tape;
    const Var out = ops::attention(tape.leaf(q), tape.leaf(k), tape.leaf(v), {.heads = 2, .causal = true});
    tape.backward(ops::sum(out));
  }
}
BENCHMARK(BM_AttentionForwardBackward)->Arg(16)->Arg(64)->Arg(128);

void BM_TrainStep(benchmark::State& state) {
  auto cfg = testing::tiny_config(static_cast<models::ModelKind>(state.range(0)), 1, 64);
  cfg.d_model = 32;
  cfg.d_ff = 64;
  cfg.l_snpt = 8;
  cfg.n_snpt = 8;
  cfg.l_input = 64;
  cfg.l_ext = 32;
  cfg.l_dec = 16;
  cfg.l_seg = 8;
  cfg.compressed_size = 4;
  cfg.group_size = 4;
  models::Summarizer model(cfg);
  std::mt19937_64 rng(3);
  std::vector<text::SnippetizedExample> raw;
  for (int i = 0; i < 4; ++i) raw.push_back(testing::random_example(rng, cfg));
  const auto batch = training::attach_labels(raw, cfg, {});
  training::TrainConfig tc;
  tc.batch_size = batch.size();
  training::Trainer trainer(model, tc);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.train_step(batch).total);
  state.SetLabel(std::string(models::to_string(cfg.kind)));
}
BENCHMARK(BM_TrainStep)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
