// SPDX-License-Identifier: Apache-2.0
// Shared fixtures and independent oracles for the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "seal/labels/rouge.hpp"
#include "seal/models/gate.hpp"
#include "seal/models/summarizer.hpp"
#include "seal/numerics/ops.hpp"
#include "seal/numerics/tape.hpp"
#include "seal/text/snippets.hpp"

namespace seal::testing {

using text::TokenId;
using text::TokenSeq;

// ---------------------------------------------------------------- gradients

/// ||g_a - g_n|| / (||g_a|| + ||g_n||) over every checked coordinate.
struct GradCheck {
  double rel_error = 0.0;
  std::size_t coordinates = 0;
  double analytic_norm = 0.0;
};

inline double relative_error(std::span<const double> a, std::span<const double> n) {
  double diff = 0, na = 0, nn = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - n[i]) * (a[i] - n[i]);
    na += a[i] * a[i];
    nn += n[i] * n[i];
  }
  const double denom = std::sqrt(na) + std::sqrt(nn);
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

/// Reduces any output to a scalar with fixed pseudo-random weights, so every
/// output element contributes a distinct gradient direction.
inline Var scalarize(Tape& tape, const Var& out) {
  if (out.value().size() == 1) return ops::sum(out);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor w(out.shape());
  for (auto& x : w.storage()) x = u(rng);
  return ops::sum(ops::mul(out, tape.constant(w)));
}

using LeafFn = std::function<Var(Tape&, const std::vector<Var>&)>;

/// Central differences on every coordinate of every input tensor.
inline GradCheck check_leaves(std::vector<Tensor> inputs, const LeafFn& f, double h = 1e-5) {
  std::vector<double> analytic, numeric;
  {
    Tape tape;
    std::vector<Var> leaves;
    for (const auto& t : inputs) leaves.push_back(tape.leaf(t));
    const Var loss = scalarize(tape, f(tape, leaves));
    tape.backward(loss);
    for (const auto& leaf : leaves) {
      const Tensor g = tape.grad(leaf);
      analytic.insert(analytic.end(), g.storage().begin(), g.storage().end());
    }
  }
  auto eval = [&] {
    Tape tape(false);
    std::vector<Var> leaves;
    for (const auto& t : inputs) leaves.push_back(tape.constant(t));
    return scalarize(tape, f(tape, leaves)).value().item();
  };
  for (auto& t : inputs) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double orig = t[i];
      t[i] = orig + h;
      const double up = eval();
      t[i] = orig - h;
      const double down = eval();
      t[i] = orig;
      numeric.push_back((up - down) / (2 * h));
    }
  }
  GradCheck out{relative_error(analytic, numeric), analytic.size(), 0.0};
  for (double g : analytic) out.analytic_norm += g * g;
  out.analytic_norm = std::sqrt(out.analytic_norm);
  return out;
}

/// Central differences on up to `per_param` random coordinates of every
/// parameter of `store` (all coordinates when the tensor is that small).
inline GradCheck check_parameters(ParameterStore& store, const std::function<Var(Tape&)>& f, std::size_t per_param,
                                  std::uint64_t seed = 3, double h = 1e-5) {
  store.zero_grad();
  {
    Tape tape;
    tape.backward(f(tape));
  }
  std::mt19937_64 rng(seed);
  std::vector<double> analytic, numeric;
  for (Parameter* p : store.all()) {
    std::vector<std::size_t> coords(p->value.size());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(std::min(per_param, coords.size()));
    for (std::size_t i : coords) {
      analytic.push_back(p->grad[i]);
      const double orig = p->value[i];
      p->value[i] = orig + h;
      Tape up_tape(false);
      const double up = f(up_tape).value().item();
      p->value[i] = orig - h;
      Tape down_tape(false);
      const double down = f(down_tape).value().item();
      p->value[i] = orig;
      numeric.push_back((up - down) / (2 * h));
    }
  }
  GradCheck out{relative_error(analytic, numeric), analytic.size(), 0.0};
  for (double g : analytic) out.analytic_norm += g * g;
  out.analytic_norm = std::sqrt(out.analytic_norm);
  return out;
}

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(std::move(shape));
  for (auto& x : t.storage()) x = u(rng);
  return t;
}

// ---------------------------------------------------------------- models

/// Small geometry every model kind accepts: 4 snippets of up to 4 tokens,
/// 2 decode segments of 4 positions.
inline models::ModelConfig tiny_config(models::ModelKind kind, std::uint64_t seed = 1, std::size_t vocab = 24) {
  models::ModelConfig c;
  c.kind = kind;
  c.d_model = 8;
  c.d_ff = 16;
  c.heads = 2;
  c.encoder_layers = 1;
  c.scorer_layers = 1;
  c.decoder_layers = 1;
  c.l_snpt = 4;
  c.n_snpt = 4;
  c.l_input = 16;
  c.l_ext = 8;
  c.l_dec = 8;
  c.l_seg = 4;
  c.n_seg = 2;
  c.compressed_size = 2;
  c.group_size = 2;
  c.vocab_size = vocab;
  c.seed = seed;
  return c;
}

/// Random example: `snippets` snippets of length 1..l_snpt over ordinary
/// token ids, and a target of 1..l_dec-1 tokens followed by EOS.
inline text::SnippetizedExample random_example(std::mt19937_64& rng, const models::ModelConfig& c,
                                               std::size_t snippets = 0, std::size_t docs = 1) {
  std::uniform_int_distribution<TokenId> tok(static_cast<TokenId>(text::kReservedTokens),
                                             static_cast<TokenId>(c.vocab_size - 1));
  if (snippets == 0) snippets = std::uniform_int_distribution<std::size_t>(1, c.n_snpt)(rng);
  text::SnippetizedExample ex;
  ex.num_documents = docs;
  for (std::size_t i = 0; i < snippets; ++i) {
    text::Snippet s;
    const auto len = std::uniform_int_distribution<std::size_t>(1, c.l_snpt)(rng);
    for (std::size_t p = 0; p < len; ++p) s.tokens.push_back(tok(rng));
    s.doc_id = static_cast<int>(i * docs / snippets);
    s.index = i;
    ex.snippets.push_back(s);
  }
  const auto tlen = std::uniform_int_distribution<std::size_t>(1, c.l_dec - 1)(rng);
  for (std::size_t p = 0; p < tlen; ++p) ex.target.push_back(tok(rng));
  ex.target.push_back(text::kEos);
  return ex;
}

inline std::size_t total_length(const text::SnippetizedExample& ex) {
  std::size_t n = 0;
  for (const auto& s : ex.snippets) n += s.length();
  return n;
}

// ---------------------------------------------------------------- oracles

/// Counts n-grams with an ordered map, independent of the library's hashing.
inline std::map<std::vector<TokenId>, std::size_t> ngram_counts(std::span<const TokenId> seq, std::size_t n) {
  std::map<std::vector<TokenId>, std::size_t> counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) ++counts[std::vector<TokenId>(seq.begin() + i, seq.begin() + i + n)];
  return counts;
}

inline double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2 * p * r / (p + r); }

inline labels::RougeScore brute_rouge_n(std::span<const TokenId> cand, std::span<const TokenId> ref, std::size_t n) {
  const auto cc = ngram_counts(cand, n);
  const auto rc = ngram_counts(ref, n);
  double overlap = 0, ctotal = 0, rtotal = 0;
  for (const auto& [g, k] : cc) {
    ctotal += k;
    if (auto it = rc.find(g); it != rc.end()) overlap += std::min(k, it->second);
  }
  for (const auto& [g, k] : rc) rtotal += k;
  labels::RougeScore s;
  s.precision = ctotal == 0 ? 0.0 : overlap / ctotal;
  s.recall = rtotal == 0 ? 0.0 : overlap / rtotal;
  s.f1 = f1_of(s.precision, s.recall);
  return s;
}

/// LCS by enumerating every subsequence of `a` (|a| <= 16) and testing it
/// against `b` greedily.
inline std::size_t brute_lcs(std::span<const TokenId> a, std::span<const TokenId> b) {
  std::size_t best = 0;
  const std::size_t n = a.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const auto bits = static_cast<std::size_t>(std::popcount(mask));
    if (bits <= best) continue;
    std::size_t j = 0;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) ok = false;
      else ++j;
    }
    if (ok) best = bits;
  }
  return best;
}

inline labels::RougeScore brute_rouge_l(std::span<const TokenId> cand, std::span<const TokenId> ref) {
  const double lcs = static_cast<double>(brute_lcs(cand, ref));
  labels::RougeScore s;
  s.precision = cand.empty() ? 0.0 : lcs / cand.size();
  s.recall = ref.empty() ? 0.0 : lcs / ref.size();
  s.f1 = f1_of(s.precision, s.recall);
  return s;
}

/// Gate rule by repeated arg-max (first index wins ties), stopping at the
/// first snippet that does not fit.
struct BruteGate {
  std::vector<std::size_t> selected;
  std::size_t total = 0;
};

inline BruteGate brute_gate(std::span<const double> scores, std::span<const std::size_t> lengths, std::size_t l_ext) {
  BruteGate g;
  std::vector<bool> used(scores.size(), false);
  for (std::size_t round = 0; round < scores.size(); ++round) {
    std::size_t best = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (used[i]) continue;
      if (best == scores.size() || scores[i] > scores[best]) best = i;
    }
    if (g.total + lengths[best] > l_ext) break;
    used[best] = true;
    g.total += lengths[best];
    g.selected.push_back(best);
  }
  return g;
}

// ---------------------------------------------------------------- files

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("seal-test-" + tag + "-" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace seal::testing
