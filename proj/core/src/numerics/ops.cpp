// SPDX-License-Identifier: Apache-2.0
#include "seal/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "seal/numerics/error.hpp"

namespace seal::ops {
namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
}

void require_rank2(const Var& a, const char* op) {
  if (a.value().rank() != 2) throw ShapeError(std::string(op) + ": expected a matrix, got " + to_string(a.shape()));
}

// C[p,r] += A[p,q] * B[q,r]
void gemm_nn(const double* A, const double* B, double* C, std::size_t p, std::size_t q, std::size_t r) {
  for (std::size_t i = 0; i < p; ++i) {
    double* c = C + i * r;
    for (std::size_t k = 0; k < q; ++k) {
      const double a = A[i * q + k];
      if (a == 0.0) continue;
      const double* b = B + k * r;
      for (std::size_t j = 0; j < r; ++j) c[j] += a * b[j];
    }
  }
}

// dA[p,q] += dC[p,r] * B[q,r]^T
void gemm_nt(const double* dC, const double* B, double* dA, std::size_t p, std::size_t q, std::size_t r) {
  for (std::size_t i = 0; i < p; ++i) {
    const double* g = dC + i * r;
    for (std::size_t k = 0; k < q; ++k) {
      const double* b = B + k * r;
      double acc = 0.0;
      for (std::size_t j = 0; j < r; ++j) acc += g[j] * b[j];
      dA[i * q + k] += acc;
    }
  }
}

// dB[q,r] += A[p,q]^T * dC[p,r]
void gemm_tn(const double* A, const double* dC, double* dB, std::size_t p, std::size_t q, std::size_t r) {
  for (std::size_t i = 0; i < p; ++i) {
    const double* g = dC + i * r;
    for (std::size_t k = 0; k < q; ++k) {
      const double a = A[i * q + k];
      if (a == 0.0) continue;
      double* d = dB + k * r;
      for (std::size_t j = 0; j < r; ++j) d[j] += a * g[j];
    }
  }
}

template <typename F>
Var unary(const Var& a, const char* op, F&& f, Tape::Backward backward) {
  Tensor out(a.shape());
  const auto& x = a.value().storage();
  auto& y = out.storage();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  return a.tape().record(std::move(out), {a}, std::move(backward), op);
}

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  auto& y = out.storage();
  const auto& bv = b.value().storage();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  const NodeId ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, NodeId self) {
    auto g = t.grad_in(self);
    for (NodeId in : {ia, ib}) {
      if (!t.requires_grad(in)) continue;
      auto& d = t.grad_out(in);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
    }
  }, "add");
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  auto& y = out.storage();
  const auto& bv = b.value().storage();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
  const NodeId ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, NodeId self) {
    auto g = t.grad_in(self);
    if (t.requires_grad(ia)) {
      auto& d = t.grad_out(ia);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
    }
    if (t.requires_grad(ib)) {
      auto& d = t.grad_out(ib);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] -= g[i];
    }
  }, "sub");
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  auto& y = out.storage();
  const auto& bv = b.value().storage();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  const NodeId ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, NodeId self) {
    auto g = t.grad_in(self);
    const auto& av = t.value(ia).storage();
    const auto& bv = t.value(ib).storage();
    if (t.requires_grad(ia)) {
      auto& d = t.grad_out(ia);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * bv[i];
    }
    if (t.requires_grad(ib)) {
      auto& d = t.grad_out(ib);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * av[i];
    }
  }, "mul");
}

Var scale(const Var& a, double factor) {
  const NodeId ia = a.id();
  return unary(a, "scale", [factor](double x) { return x * factor; }, [ia, factor](Tape& t, NodeId self) {
    auto g = t.grad_in(self);
    auto& d = t.grad_out(ia);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * factor;
  });
}

Var relu(const Var& a) {
  const NodeId ia = a.id();
  return unary(a, "relu", [](double x) { return x > 0.0 ? x : 0.0; }, [ia](Tape& t, NodeId self) {
    auto g = t.grad_in(self);
    const auto& x = t.value(ia).storage();
    auto& d = t.grad_out(ia);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[i] > 0.0) d[i] += g[i];
    }
  });
}

Var add_bias(const Var& x, const Var& bias) {
  const std::size_t n = x.value().cols();
  if (bias.value().size() != n) {
    throw ShapeError("add_bias: bias " + to_string(bias.shape()) + " vs input " + to_string(x.shape()));
  }
  Tensor out = x.value();
  auto& y = out.storage();
  const auto& b = bias.value().storage();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i % n];
  const NodeId ix = x.id(), ib = bias.id();
  return x.tape().record(std::move(out), {x, bias}, [ix, ib, n](Tape& t, NodeId self) {
    auto g = t.grad_in(self);
    if (t.requires_grad(ix)) {
      auto& d = t.grad_out(ix);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
    }
    if (t.requires_grad(ib)) {
      auto& d = t.grad_out(ib);
      for (std::size_t i = 0; i < g.size(); ++i) d[i % n] += g[i];
    }
  }, "add_bias");
}

Var matmul(const Var& a, const Var& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() < 2 || sa.size() > 3 || sb.size() < 2 || sb.size() > 3) {
    throw ShapeError("matmul: expected rank 2 or 3 operands, got " + to_string(sa) + " x " + to_string(sb));
  }
  const std::size_t ba = sa.size() == 3 ? sa[0] : 1;
  const std::size_t bb = sb.size() == 3 ? sb[0] : 1;
  const std::size_t p = sa[sa.size() - 2], q = sa.back();
  const std::size_t q2 = sb[sb.size() - 2], r = sb.back();
  if (q != q2) throw ShapeError("matmul: inner dimensions differ " + to_string(sa) + " x " + to_string(sb));
  if (ba != bb && ba != 1 && bb != 1) {
    throw ShapeError("matmul: batch dimensions not broadcastable " + to_string(sa) + " x " + to_string(sb));
  }
  const std::size_t batch = std::max(ba, bb);
  const bool batched = sa.size() == 3 || sb.size() == 3;
  Tensor out(batched ? Shape{batch, p, r} : Shape{p, r});
  const double* A = a.value().storage().data();
  const double* B = b.value().storage().data();
  double* C = out.storage().data();
  for (std::size_t n = 0; n < batch; ++n) {
    gemm_nn(A + (ba == 1 ? 0 : n * p * q), B + (bb == 1 ? 0 : n * q * r), C + n * p * r, p, q, r);
  }
  const NodeId ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib, ba, bb, batch, p, q, r](Tape& t, NodeId self) {
    const double* G = t.grad_in(self).data();
    const double* A = t.value(ia).storage().data();
    const double* B = t.value(ib).storage().data();
    if (t.requires_grad(ia)) {
      double* dA = t.grad_out(ia).data();
      for (std::size_t n = 0; n < batch; ++n) {
        gemm_nt(G + n * p * r, B + (bb == 1 ? 0 : n * q * r), dA + (ba == 1 ? 0 : n * p * q), p, q, r);
      }
    }
    if (t.requires_grad(ib)) {
      double* dB = t.grad_out(ib).data();
      for (std::size_t n = 0; n < batch; ++n) {
        gemm_tn(A + (ba == 1 ? 0 : n * p * q), G + n * p * r, dB + (bb == 1 ? 0 : n * q * r), p, q, r);
      }
    }
  }, "matmul");
}

Var transpose(const Var& a) {
  require_rank2(a, "transpose");
  const std::size_t m = a.value().dim(0), n = a.value().dim(1);
  Tensor out(Shape{n, m});
  const auto& x = a.value().storage();
  auto& y = out.storage();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) y[j * m + i] = x[i * n + j];
  const NodeId ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia, m, n](Tape& t, NodeId self) {
    auto g = t.grad_in(self);
    auto& d = t.grad_out(ia);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i * n + j] += g[j * m + i];
  }, "transpose");
}

Var reshape(const Var& a, Shape shape) {
  Tensor out = a.value();
  out.reshape(std::move(shape));
  const NodeId ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape& t, NodeId self) {
    auto g = t.grad_in(self);
    auto& d = t.grad_out(ia);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
  }, "reshape");
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t cols = parts[0].value().cols();
  std::size_t rows = 0;
  for (const Var& v : parts) {
    require_rank2(v, "concat_rows");
    if (v.value().cols() != cols) throw ShapeError("concat_rows: column mismatch");
    rows += v.value().rows();
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  std::vector<NodeId> ids;
  for (const Var& v : parts) {
    data.insert(data.end(), v.value().storage().begin(), v.value().storage().end());
    ids.push_back(v.id());
  }
  return parts[0].tape().record(Tensor(Shape{rows, cols}, std::move(data)), parts, [ids](Tape& t, NodeId self) {
    auto g = t.grad_in(self);
    std::size_t offset = 0;
    for (NodeId in : ids) {
      const std::size_t n = t.value(in).size();
      if (t.requires_grad(in)) {
        auto& d = t.grad_out(in);
        for (std::size_t i = 0; i < n; ++i) d[i] += g[offset + i];
      }
      offset += n;
    }
  }, "concat_rows");
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = parts[0].value().rows();
  std::size_t cols = 0;
  std::vector<NodeId> ids;
  std::vector<std::size_t> widths;
  for (const Var& v : parts) {
    require_rank2(v, "concat_cols");
    if (v.value().rows() != rows) throw ShapeError("concat_cols: row mismatch");
    cols += v.value().cols();
    ids.push_back(v.id());
    widths.push_back(v.value().cols());
  }
  Tensor out(Shape{rows, cols});
  std::size_t offset = 0;
  for (const Var& v : parts) {
    const std::size_t w = v.value().cols();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < w; ++c) out.at(r, offset + c) = v.value().at(r, c);
    offset += w;
  }
  return parts[0].tape().record(std::move(out), parts, [ids, widths, rows, cols](Tape& t, NodeId self) {
    auto g = t.grad_in(self);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const std::size_t w = widths[k];
      if (t.requires_grad(ids[k])) {
        auto& d = t.grad_out(ids[k]);
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t c = 0; c < w; ++c) d[r * w + c] += g[r * cols + offset + c];
      }
      offset += w;
    }
  }, "concat_cols");
}

Var slice_rows(const Var& a, std::size_t begin, std::size_t end) {
  require_rank2(a, "slice_rows");
  const std::size_t cols = a.value().cols();
  if (begin >= end || end > a.value().rows()) {
    throw ShapeError("slice_rows: bad range [" + std::to_string(begin) + ", " + std::to_string(end) + ") of " +
                     to_string(a.shape()));
  }
  const auto& x = a.value().storage();
  std::vector<double> data(x.begin() + static_cast<std::ptrdiff_t>(begin * cols),
                           x.begin() + static_cast<std::ptrdiff_t>(end * cols));
  const NodeId ia = a.id();
  return a.tape().record(Tensor(Shape{end - begin, cols}, std::move(data)), {a},
                         [ia, begin, cols](Tape& t, NodeId self) {
                           auto g = t.grad_in(self);
                           auto& d = t.grad_out(ia);
                           for (std::size_t i = 0; i < g.size(); ++i) d[begin * cols + i] += g[i];
                         },
                         "slice_rows");
}

Var slice_cols(const Var& a, std::size_t begin, std::size_t end) {
  require_rank2(a, "slice_cols");
  const std::size_t rows = a.value().rows(), cols = a.value().cols();
  if (begin >= end || end > cols) throw ShapeError("slice_cols: bad range of " + to_string(a.shape()));
  const std::size_t w = end - begin;
  Tensor out(Shape{rows, w});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < w; ++c) out.at(r, c) = a.value().at(r, begin + c);
  const NodeId ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia, begin, w, rows, cols](Tape& t, NodeId self) {
    auto g = t.grad_in(self);
    auto& d = t.grad_out(ia);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < w; ++c) d[r * cols + begin + c] += g[r * w + c];
  }, "slice_cols");
}

Var pad_rows(const Var& a, std::size_t rows) {
  require_rank2(a, "pad_rows");
  if (rows < a.value().rows()) throw ShapeError("pad_rows: target smaller than input");
  if (rows == a.value().rows()) return a;
  std::vector<double> data = a.value().storage();
  data.resize(rows * a.value().cols(), 0.0);
  const NodeId ia = a.id();
  const std::size_t n = a.value().size();
  return a.tape().record(Tensor(Shape{rows, a.value().cols()}, std::move(data)), {a},
                         [ia, n](Tape& t, NodeId self) {
                           auto g = t.grad_in(self);
                           auto& d = t.grad_out(ia);
                           for (std::size_t i = 0; i < n; ++i) d[i] += g[i];
                         },
                         "pad_rows");
}

Var gather_rows(const Var& table, std::span<const std::int64_t> rows) {
  require_rank2(table, "gather_rows");
  const std::size_t n = table.value().rows(), cols = table.value().cols();
  if (rows.empty()) throw ShapeError("gather_rows: empty index list");
  Tensor out(Shape{rows.size(), cols});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || static_cast<std::size_t>(rows[i]) >= n) {
      throw ShapeError("gather_rows: row " + std::to_string(rows[i]) + " out of range " + std::to_string(n));
    }
    const double* src = table.value().storage().data() + static_cast<std::size_t>(rows[i]) * cols;
    std::copy(src, src + cols, out.storage().data() + i * cols);
  }
  const NodeId it = table.id();
  std::vector<std::int64_t> idx(rows.begin(), rows.end());
  return table.tape().record(std::move(out), {table}, [it, idx, cols](Tape& t, NodeId self) {
    auto g = t.grad_in(self);
    auto& d = t.grad_out(it);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      double* dst = d.data() + static_cast<std::size_t>(idx[i]) * cols;
      for (std::size_t c = 0; c < cols; ++c) dst[c] += g[i * cols + c];
    }
  }, "gather_rows");
}

Var embedding_lookup(const Var& table, std::span<const std::int32_t> ids) {
  const std::size_t vocab = table.value().rows();
  std::vector<std::int64_t> rows;
  rows.reserve(ids.size());
  for (auto id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw InputError("token id " + std::to_string(id) + " outside vocabulary of size " + std::to_string(vocab));
    }
    rows.push_back(id);
  }
  return gather_rows(table, rows);
}

Var masked_softmax(const Var& logits, const Tensor& mask) {
  if (mask.shape() != logits.shape()) {
    throw ShapeError("masked_softmax: mask " + to_string(mask.shape()) + " vs logits " + to_string(logits.shape()));
  }
  const std::size_t k = logits.value().cols(), rows = logits.value().rows();
  Tensor out(logits.shape());
  const auto& x = logits.value().storage();
  const auto& m = mask.storage();
  auto& y = out.storage();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t base = r * k;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j)
      if (m[base + j] != 0.0) mx = std::max(mx, x[base + j]);
    if (mx == -std::numeric_limits<double>::infinity()) {
      throw ShapeError("masked_softmax: row " + std::to_string(r) + " is fully masked");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (m[base + j] != 0.0) {
        y[base + j] = std::exp(x[base + j] - mx);
        total += y[base + j];
      }
    }
    for (std::size_t j = 0; j < k; ++j) y[base + j] /= total;
  }
  const NodeId il = logits.id();
  return logits.tape().record(std::move(out), {logits}, [il, k, rows](Tape& t, NodeId self) {
    auto g = t.grad_in(self);
    const auto& y = t.value(self).storage();
    auto& d = t.grad_out(il);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t base = r * k;
      double dot = 0.0;
      for (std::size_t j = 0; j < k; ++j) dot += g[base + j] * y[base + j];
      for (std::size_t j = 0; j < k; ++j) d[base + j] += y[base + j] * (g[base + j] - dot);
    }
  }, "masked_softmax");
}

Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps) {
  const std::size_t n = x.value().cols(), rows = x.value().rows();
  if (gain.value().size() != n || bias.value().size() != n) throw ShapeError("layer_norm: affine size mismatch");
  Tensor out(x.shape());
  std::vector<double> inv_std(rows);
  const auto& xv = x.value().storage();
  const auto& gv = gain.value().storage();
  const auto& bv = bias.value().storage();
  auto& y = out.storage();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * n;
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += row[j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std[r] = inv;
    for (std::size_t j = 0; j < n; ++j) y[r * n + j] = (row[j] - mu) * inv * gv[j] + bv[j];
  }
  const NodeId ix = x.id(), ig = gain.id(), ib = bias.id();
  return x.tape().record(std::move(out), {x, gain, bias},
                         [ix, ig, ib, n, rows, inv_std = std::move(inv_std)](Tape& t, NodeId self) {
    auto g = t.grad_in(self);
    const auto& xv = t.value(ix).storage();
    const auto& gv = t.value(ig).storage();
    std::vector<double> xhat(n), dxhat(n);
    const bool want_x = t.requires_grad(ix), want_g = t.requires_grad(ig), want_b = t.requires_grad(ib);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* row = xv.data() + r * n;
      const double* gr = g.data() + r * n;
      double mu = 0.0;
      for (std::size_t j = 0; j < n; ++j) mu += row[j];
      mu /= static_cast<double>(n);
      double mean_d = 0.0, mean_dx = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        xhat[j] = (row[j] - mu) * inv_std[r];
        dxhat[j] = gr[j] * gv[j];
        mean_d += dxhat[j];
        mean_dx += dxhat[j] * xhat[j];
      }
      mean_d /= static_cast<double>(n);
      mean_dx /= static_cast<double>(n);
      if (want_x) {
        auto& d = t.grad_out(ix);
        for (std::size_t j = 0; j < n; ++j) d[r * n + j] += inv_std[r] * (dxhat[j] - mean_d - xhat[j] * mean_dx);
      }
      if (want_g) {
        auto& d = t.grad_out(ig);
        for (std::size_t j = 0; j < n; ++j) d[j] += gr[j] * xhat[j];
      }
      if (want_b) {
        auto& d = t.grad_out(ib);
        for (std::size_t j = 0; j < n; ++j) d[j] += gr[j];
      }
    }
  }, "layer_norm");
}

Var sum(const Var& a) {
  double total = 0.0;
  for (double v : a.value().storage()) total += v;
  const NodeId ia = a.id();
  return a.tape().record(Tensor::scalar(total), {a}, [ia](Tape& t, NodeId self) {
    const double g = t.grad_in(self)[0];
    auto& d = t.grad_out(ia);
    for (double& v : d) v += g;
  }, "sum");
}

Var mean(const Var& a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var mse(const Var& prediction, const Var& target) {
  require_same_shape(prediction, target, "mse");
  const Var diff = sub(prediction, target);
  return mean(mul(diff, diff));
}

Var cross_entropy(const Var& logits, std::span<const std::int32_t> targets, std::span<const double> weights) {
  require_rank2(logits, "cross_entropy");
  const std::size_t T = logits.value().rows(), V = logits.value().cols();
  if (targets.size() != T || weights.size() != T) {
    throw ShapeError("cross_entropy: " + std::to_string(T) + " logit rows vs " + std::to_string(targets.size()) +
                     " targets");
  }
  double total_weight = 0.0;
  for (double w : weights) total_weight += w;
  if (total_weight <= 0.0) throw InputError("cross_entropy: target has no non-pad positions");

  std::vector<double> probs(T * V);
  double loss = 0.0;
  const auto& x = logits.value().storage();
  for (std::size_t r = 0; r < T; ++r) {
    if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= V) {
      throw InputError("cross_entropy: target id " + std::to_string(targets[r]) + " outside vocabulary");
    }
    const double* row = x.data() + r * V;
    const double mx = *std::max_element(row, row + V);
    double z = 0.0;
    for (std::size_t j = 0; j < V; ++j) {
      probs[r * V + j] = std::exp(row[j] - mx);
      z += probs[r * V + j];
    }
    for (std::size_t j = 0; j < V; ++j) probs[r * V + j] /= z;
    if (weights[r] != 0.0) loss += weights[r] * -(row[targets[r]] - mx - std::log(z));
  }
  loss /= total_weight;
  const NodeId il = logits.id();
  std::vector<std::int32_t> tg(targets.begin(), targets.end());
  std::vector<double> w(weights.begin(), weights.end());
  return logits.tape().record(
      Tensor::scalar(loss), {logits},
      [il, T, V, total_weight, probs = std::move(probs), tg = std::move(tg), w = std::move(w)](Tape& t, NodeId self) {
        const double g = t.grad_in(self)[0];
        auto& d = t.grad_out(il);
        for (std::size_t r = 0; r < T; ++r) {
          if (w[r] == 0.0) continue;
          const double c = g * w[r] / total_weight;
          for (std::size_t j = 0; j < V; ++j) d[r * V + j] += c * probs[r * V + j];
          d[r * V + static_cast<std::size_t>(tg[r])] -= c;
        }
      },
      "cross_entropy");
}

Var dropout(const Var& a, double rate, Rng& rng) {
  if (rate <= 0.0) return a;
  if (rate >= 1.0) throw ConfigError("dropout rate must be < 1");
  std::bernoulli_distribution keep(1.0 - rate);
  const double s = 1.0 / (1.0 - rate);
  std::vector<double> mask(a.value().size());
  for (double& m : mask) m = keep(rng) ? s : 0.0;
  Tensor out = a.value();
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] *= mask[i];
  const NodeId ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia, mask = std::move(mask)](Tape& t, NodeId self) {
    auto g = t.grad_in(self);
    auto& d = t.grad_out(ia);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * mask[i];
  }, "dropout");
}

Var attention(const Var& q, const Var& k, const Var& v, const AttentionOptions& opt) {
  require_rank2(q, "attention");
  require_rank2(k, "attention");
  require_rank2(v, "attention");
  const std::size_t m = q.value().rows(), n = k.value().rows(), d = q.value().cols();
  if (k.value().cols() != d || v.value().cols() != d || v.value().rows() != n) {
    throw ShapeError("attention: q " + to_string(q.shape()) + ", k " + to_string(k.shape()) + ", v " +
                     to_string(v.shape()));
  }
  const std::size_t h = opt.heads;
  if (h == 0 || d % h != 0) throw ShapeError("attention: head count must divide the model dimension");
  if (opt.mask && opt.mask->shape() != Shape{m, n}) {
    throw ShapeError("attention: mask " + to_string(opt.mask->shape()) + " for scores [" + std::to_string(m) + ", " +
                     std::to_string(n) + "]");
  }
  const std::size_t dk = d / h;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dk));

  // visible[i * n + j]
  std::vector<char> visible(m * n, 1);
  for (std::size_t i = 0; i < m; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
      bool ok = !(opt.causal && j > i);
      if (ok && opt.mask) ok = opt.mask->at(i, j) != 0.0;
      visible[i * n + j] = ok ? 1 : 0;
      any = any || ok;
    }
    if (!any) throw ShapeError("attention: query row " + std::to_string(i) + " is fully masked");
  }

  const double* Q = q.value().storage().data();
  const double* K = k.value().storage().data();
  const double* Vv = v.value().storage().data();
  std::vector<double> probs(h * m * n, 0.0);
  std::vector<double> drop;
  if (opt.dropout > 0.0) {
    if (!opt.rng) throw ConfigError("attention dropout requires a generator");
    std::bernoulli_distribution keep(1.0 - opt.dropout);
    drop.resize(h * m * n);
    for (double& x : drop) x = keep(*opt.rng) ? 1.0 / (1.0 - opt.dropout) : 0.0;
  }
  Tensor out(Shape{m, d});
  double* O = out.storage().data();
  std::vector<double> row(n);
  for (std::size_t hh = 0; hh < h; ++hh) {
    const std::size_t c0 = hh * dk;
    for (std::size_t i = 0; i < m; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (!visible[i * n + j]) continue;
        double s = 0.0;
        for (std::size_t c = 0; c < dk; ++c) s += Q[i * d + c0 + c] * K[j * d + c0 + c];
        row[j] = s * inv_sqrt;
        mx = std::max(mx, row[j]);
      }
      double z = 0.0;
      double* P = probs.data() + (hh * m + i) * n;
      for (std::size_t j = 0; j < n; ++j) {
        if (!visible[i * n + j]) continue;
        P[j] = std::exp(row[j] - mx);
        z += P[j];
      }
      for (std::size_t j = 0; j < n; ++j) P[j] /= z;
      for (std::size_t j = 0; j < n; ++j) {
        if (!visible[i * n + j]) continue;
        const double w = drop.empty() ? P[j] : P[j] * drop[(hh * m + i) * n + j];
        if (w == 0.0) continue;
        for (std::size_t c = 0; c < dk; ++c) O[i * d + c0 + c] += w * Vv[j * d + c0 + c];
      }
    }
  }

  const NodeId iq = q.id(), ik = k.id(), iv = v.id();
  return q.tape().record(
      std::move(out), {q, k, v},
      [iq, ik, iv, m, n, d, h, dk, inv_sqrt, probs = std::move(probs), drop = std::move(drop),
       visible = std::move(visible)](Tape& t, NodeId self) {
        const double* G = t.grad_in(self).data();
        const double* Q = t.value(iq).storage().data();
        const double* K = t.value(ik).storage().data();
        const double* Vv = t.value(iv).storage().data();
        double* dQ = t.requires_grad(iq) ? t.grad_out(iq).data() : nullptr;
        double* dK = t.requires_grad(ik) ? t.grad_out(ik).data() : nullptr;
        double* dV = t.requires_grad(iv) ? t.grad_out(iv).data() : nullptr;
        std::vector<double> dP(n);
        for (std::size_t hh = 0; hh < h; ++hh) {
          const std::size_t c0 = hh * dk;
          for (std::size_t i = 0; i < m; ++i) {
            const double* P = probs.data() + (hh * m + i) * n;
            const double* gi = G + i * d + c0;
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              if (!visible[i * n + j]) {
                dP[j] = 0.0;
                continue;
              }
              const double dm = drop.empty() ? 1.0 : drop[(hh * m + i) * n + j];
              double s = 0.0;
              for (std::size_t c = 0; c < dk; ++c) s += gi[c] * Vv[j * d + c0 + c];
              dP[j] = s * dm;
              dot += dP[j] * P[j];
              if (dV && P[j] * dm != 0.0) {
                const double w = P[j] * dm;
                for (std::size_t c = 0; c < dk; ++c) dV[j * d + c0 + c] += w * gi[c];
              }
            }
            for (std::size_t j = 0; j < n; ++j) {
              if (!visible[i * n + j]) continue;
              const double ds = P[j] * (dP[j] - dot) * inv_sqrt;
              if (ds == 0.0) continue;
              if (dQ)
                for (std::size_t c = 0; c < dk; ++c) dQ[i * d + c0 + c] += ds * K[j * d + c0 + c];
              if (dK)
                for (std::size_t c = 0; c < dk; ++c) dK[j * d + c0 + c] += ds * Q[i * d + c0 + c];
            }
          }
        }
      },
      "attention");
}

}  // namespace seal::ops
