#pragma once

#include <cmath>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "vesselcast/autograd.hpp"
#include "vesselcast/tensor.hpp"

namespace vesselcast::nn {

// Execution context passed through forward calls: dropout needs to know the
// mode and draw from the training RNG stream.
struct Runtime {
  bool training = false;
  std::mt19937_64* rng = nullptr;
};

// ---------------------------------------------------------------------------
// primitive ops
// ---------------------------------------------------------------------------

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  if (a.value().shape != b.value().shape)
    throw ShapeError("add: shape mismatch " + shape_str(a.value().shape) +
                     " vs " + shape_str(b.value().shape));
  Tensor<T> out = a.value();
  for (std::int64_t i = 0; i < out.numel(); ++i) out.data[i] += b.value().data[i];
  auto an = a.node(), bn = b.node();
  return make_result<T>(std::move(out), {a, b}, [an, bn](Node<T>& self) {
    if (an->requires_grad) {
      auto& g = an->grad_ref();
      for (std::size_t i = 0; i < g.data.size(); ++i)
        g.data[i] += self.grad.data[i];
    }
    if (bn->requires_grad) {
      auto& g = bn->grad_ref();
      for (std::size_t i = 0; i < g.data.size(); ++i)
        g.data[i] += self.grad.data[i];
    }
  });
}

// x: [..., d] plus bias [d] on the last axis.
template <typename T>
Var<T> add_bias(const Var<T>& x, const Var<T>& b) {
  const std::int64_t d = x.value().last_dim();
  if (b.value().shape != Shape{d})
    throw ShapeError("add_bias: bias " + shape_str(b.value().shape) +
                     " does not match last dim of " + shape_str(x.value().shape));
  Tensor<T> out = x.value();
  const std::int64_t rows = out.rows_flat();
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = 0; c < d; ++c) out.data[r * d + c] += b.value().data[c];
  auto xn = x.node(), bn = b.node();
  return make_result<T>(std::move(out), {x, b}, [xn, bn, rows, d](Node<T>& self) {
    if (xn->requires_grad) {
      auto& g = xn->grad_ref();
      for (std::size_t i = 0; i < g.data.size(); ++i)
        g.data[i] += self.grad.data[i];
    }
    if (bn->requires_grad) {
      auto& g = bn->grad_ref();
      for (std::int64_t r = 0; r < rows; ++r)
        for (std::int64_t c = 0; c < d; ++c)
          g.data[c] += self.grad.data[r * d + c];
    }
  });
}

// x: [B, T, d] plus a per-position table [T, d] broadcast over the batch.
template <typename T>
Var<T> add_rows(const Var<T>& x, const Var<T>& rows) {
  if (x.value().rank() != 3)
    throw ShapeError("add_rows: expected [B,T,d], got " + shape_str(x.value().shape));
  const std::int64_t B = x.value().dim(0), Tn = x.value().dim(1),
                     d = x.value().dim(2);
  if (rows.value().shape != Shape{Tn, d})
    throw ShapeError("add_rows: table " + shape_str(rows.value().shape) +
                     " does not match " + shape_str(x.value().shape));
  Tensor<T> out = x.value();
  for (std::int64_t b = 0; b < B; ++b)
    for (std::int64_t t = 0; t < Tn; ++t)
      for (std::int64_t c = 0; c < d; ++c)
        out.data[(b * Tn + t) * d + c] += rows.value().data[t * d + c];
  auto xn = x.node(), rn = rows.node();
  return make_result<T>(std::move(out), {x, rows},
                        [xn, rn, B, Tn, d](Node<T>& self) {
    if (xn->requires_grad) {
      auto& g = xn->grad_ref();
      for (std::size_t i = 0; i < g.data.size(); ++i)
        g.data[i] += self.grad.data[i];
    }
    if (rn->requires_grad) {
      auto& g = rn->grad_ref();
      for (std::int64_t b = 0; b < B; ++b)
        for (std::int64_t t = 0; t < Tn; ++t)
          for (std::int64_t c = 0; c < d; ++c)
            g.data[t * d + c] += self.grad.data[(b * Tn + t) * d + c];
    }
  });
}

template <typename T>
Var<T> mul_scalar(const Var<T>& x, T s) {
  Tensor<T> out = x.value();
  for (auto& v : out.data) v *= s;
  auto xn = x.node();
  return make_result<T>(std::move(out), {x}, [xn, s](Node<T>& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->grad_ref();
    for (std::size_t i = 0; i < g.data.size(); ++i)
      g.data[i] += s * self.grad.data[i];
  });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  Tensor<T> out = x.value();
  for (auto& v : out.data) v = v > T{0} ? v : T{0};
  auto xn = x.node();
  return make_result<T>(std::move(out), {x}, [xn](Node<T>& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->grad_ref();
    for (std::size_t i = 0; i < g.data.size(); ++i)
      if (xn->value.data[i] > T{0}) g.data[i] += self.grad.data[i];
  });
}

template <typename T>
Var<T> reshape(const Var<T>& x, Shape shape) {
  if (shape_numel(shape) != x.value().numel())
    throw ShapeError("reshape: cannot view " + shape_str(x.value().shape) +
                     " as " + shape_str(shape));
  Tensor<T> out(shape, x.value().data);
  auto xn = x.node();
  return make_result<T>(std::move(out), {x}, [xn](Node<T>& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->grad_ref();
    for (std::size_t i = 0; i < g.data.size(); ++i)
      g.data[i] += self.grad.data[i];
  });
}

namespace detail {

inline std::vector<std::int64_t> row_strides(const Shape& s) {
  std::vector<std::int64_t> st(s.size(), 1);
  for (std::size_t i = s.size(); i-- > 1;) st[i - 1] = st[i] * s[i];
  return st;
}

// gather[i] = flat index into the source for flat output index i
inline std::vector<std::int64_t> permute_gather(const Shape& in_shape,
                                                const std::vector<int>& perm) {
  Shape out_shape(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out_shape[i] = in_shape[perm[i]];
  const auto in_st = row_strides(in_shape);
  const auto out_st = row_strides(out_shape);
  const std::int64_t n = shape_numel(in_shape);
  std::vector<std::int64_t> gather(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    std::int64_t rem = i, src = 0;
    for (std::size_t a = 0; a < perm.size(); ++a) {
      const std::int64_t idx = rem / out_st[a];
      rem %= out_st[a];
      src += idx * in_st[perm[a]];
    }
    gather[static_cast<std::size_t>(i)] = src;
  }
  return gather;
}

}  // namespace detail

template <typename T>
Var<T> permute(const Var<T>& x, const std::vector<int>& perm) {
  if (perm.size() != x.value().rank())
    throw ShapeError("permute: rank mismatch for " + shape_str(x.value().shape));
  Shape out_shape(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i)
    out_shape[i] = x.value().shape[perm[i]];
  const auto gather = detail::permute_gather(x.value().shape, perm);
  Tensor<T> out(out_shape);
  for (std::size_t i = 0; i < gather.size(); ++i)
    out.data[i] = x.value().data[gather[i]];
  auto xn = x.node();
  return make_result<T>(std::move(out), {x}, [xn, gather](Node<T>& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->grad_ref();
    for (std::size_t i = 0; i < gather.size(); ++i)
      g.data[gather[i]] += self.grad.data[i];
  });
}

// contiguous column slice on the last axis
template <typename T>
Var<T> select_cols(const Var<T>& x, std::int64_t start, std::int64_t len) {
  const std::int64_t d = x.value().last_dim();
  if (start < 0 || len <= 0 || start + len > d)
    throw ShapeError("select_cols: slice out of range");
  Shape out_shape = x.value().shape;
  out_shape.back() = len;
  const std::int64_t rows = x.value().rows_flat();
  Tensor<T> out(out_shape);
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = 0; c < len; ++c)
      out.data[r * len + c] = x.value().data[r * d + start + c];
  auto xn = x.node();
  return make_result<T>(std::move(out), {x},
                        [xn, rows, d, start, len](Node<T>& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->grad_ref();
    for (std::int64_t r = 0; r < rows; ++r)
      for (std::int64_t c = 0; c < len; ++c)
        g.data[r * d + start + c] += self.grad.data[r * len + c];
  });
}

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  if (a.value().rank() != 2 || b.value().rank() != 2 ||
      a.value().dim(1) != b.value().dim(0))
    throw ShapeError("matmul: incompatible shapes " + shape_str(a.value().shape) +
                     " x " + shape_str(b.value().shape));
  const std::int64_t m = a.value().dim(0), k = a.value().dim(1),
                     n = b.value().dim(1);
  Tensor<T> out({m, n});
  as_matrix(out, m, n).noalias() =
      as_matrix(a.value(), m, k) * as_matrix(b.value(), k, n);
  auto an = a.node(), bn = b.node();
  return make_result<T>(std::move(out), {a, b}, [an, bn, m, k, n](Node<T>& self) {
    auto g = as_matrix(self.grad, m, n);
    if (an->requires_grad)
      as_matrix(an->grad_ref(), m, k).noalias() +=
          g * as_matrix(bn->value, k, n).transpose();
    if (bn->requires_grad)
      as_matrix(bn->grad_ref(), k, n).noalias() +=
          as_matrix(an->value, m, k).transpose() * g;
  });
}

// [..., m, k] x [..., k, n] with identical leading dims
template <typename T>
Var<T> batched_matmul(const Var<T>& a, const Var<T>& b) {
  const auto& sa = a.value().shape;
  const auto& sb = b.value().shape;
  if (sa.size() < 2 || sa.size() != sb.size())
    throw ShapeError("batched_matmul: rank mismatch");
  for (std::size_t i = 0; i + 2 < sa.size(); ++i)
    if (sa[i] != sb[i]) throw ShapeError("batched_matmul: leading dim mismatch");
  const std::int64_t m = sa[sa.size() - 2], k = sa.back();
  if (sb[sb.size() - 2] != k)
    throw ShapeError("batched_matmul: inner dim mismatch " + shape_str(sa) +
                     " x " + shape_str(sb));
  const std::int64_t n = sb.back();
  const std::int64_t slices = a.value().numel() / (m * k);
  Shape out_shape(sa.begin(), sa.end() - 2);
  out_shape.push_back(m);
  out_shape.push_back(n);
  Tensor<T> out(out_shape);
  for (std::int64_t s = 0; s < slices; ++s) {
    MapC<T> A(a.value().data.data() + s * m * k, m, k);
    MapC<T> B(b.value().data.data() + s * k * n, k, n);
    MapM<T> C(out.data.data() + s * m * n, m, n);
    C.noalias() = A * B;
  }
  auto an = a.node(), bn = b.node();
  return make_result<T>(std::move(out), {a, b},
                        [an, bn, m, k, n, slices](Node<T>& self) {
    for (std::int64_t s = 0; s < slices; ++s) {
      MapC<T> G(self.grad.data.data() + s * m * n, m, n);
      if (an->requires_grad) {
        MapM<T> dA(an->grad_ref().data.data() + s * m * k, m, k);
        MapC<T> B(bn->value.data.data() + s * k * n, k, n);
        dA.noalias() += G * B.transpose();
      }
      if (bn->requires_grad) {
        MapM<T> dB(bn->grad_ref().data.data() + s * k * n, k, n);
        MapC<T> A(an->value.data.data() + s * m * k, m, k);
        dB.noalias() += A.transpose() * G;
      }
    }
  });
}

template <typename T>
Var<T> softmax_lastdim(const Var<T>& x) {
  const std::int64_t d = x.value().last_dim();
  const std::int64_t rows = x.value().rows_flat();
  Tensor<T> out = x.value();
  for (std::int64_t r = 0; r < rows; ++r) {
    T* row = out.data.data() + r * d;
    T mx = row[0];
    for (std::int64_t c = 1; c < d; ++c) mx = std::max(mx, row[c]);
    T sum{0};
    for (std::int64_t c = 0; c < d; ++c) {
      row[c] = std::exp(row[c] - mx);
      sum += row[c];
    }
    for (std::int64_t c = 0; c < d; ++c) row[c] /= sum;
  }
  auto xn = x.node();
  Var<T> res = make_result<T>(std::move(out), {x}, [xn, rows, d](Node<T>& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->grad_ref();
    for (std::int64_t r = 0; r < rows; ++r) {
      const T* y = self.value.data.data() + r * d;
      const T* go = self.grad.data.data() + r * d;
      T dot{0};
      for (std::int64_t c = 0; c < d; ++c) dot += go[c] * y[c];
      T* gi = g.data.data() + r * d;
      for (std::int64_t c = 0; c < d; ++c) gi[c] += (go[c] - dot) * y[c];
    }
  });
  return res;
}

// Normalizes the last axis to zero mean / unit variance, then applies the
// affine pair. eps defaults small so the unit-variance contract holds tightly.
template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta,
                  T eps = T{1e-6}) {
  const std::int64_t d = x.value().last_dim();
  if (gamma.value().shape != Shape{d} || beta.value().shape != Shape{d})
    throw ShapeError("layer_norm: affine params must be [d]");
  const std::int64_t rows = x.value().rows_flat();
  Tensor<T> out(x.value().shape);
  Tensor<T> xhat(x.value().shape);   // saved for backward
  std::vector<T> inv_std(static_cast<std::size_t>(rows));
  for (std::int64_t r = 0; r < rows; ++r) {
    const T* in = x.value().data.data() + r * d;
    T mean{0};
    for (std::int64_t c = 0; c < d; ++c) mean += in[c];
    mean /= static_cast<T>(d);
    T var{0};
    for (std::int64_t c = 0; c < d; ++c) var += (in[c] - mean) * (in[c] - mean);
    var /= static_cast<T>(d);
    const T istd = T{1} / std::sqrt(var + eps);
    inv_std[static_cast<std::size_t>(r)] = istd;
    for (std::int64_t c = 0; c < d; ++c) {
      const T xh = (in[c] - mean) * istd;
      xhat.data[r * d + c] = xh;
      out.data[r * d + c] = gamma.value().data[c] * xh + beta.value().data[c];
    }
  }
  auto xn = x.node(), gn = gamma.node(), bn = beta.node();
  return make_result<T>(
      std::move(out), {x, gamma, beta},
      [xn, gn, bn, rows, d, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](Node<T>& self) {
        for (std::int64_t r = 0; r < rows; ++r) {
          const T* go = self.grad.data.data() + r * d;
          const T* xh = xhat.data.data() + r * d;
          if (bn->requires_grad) {
            auto& gb = bn->grad_ref();
            for (std::int64_t c = 0; c < d; ++c) gb.data[c] += go[c];
          }
          if (gn->requires_grad) {
            auto& gg = gn->grad_ref();
            for (std::int64_t c = 0; c < d; ++c) gg.data[c] += go[c] * xh[c];
          }
          if (xn->requires_grad) {
            // dxhat = go * gamma; dx = istd*(dxhat - mean(dxhat) - xhat*mean(dxhat*xhat))
            T mean_dxh{0}, mean_dxh_xh{0};
            for (std::int64_t c = 0; c < d; ++c) {
              const T dxh = go[c] * gn->value.data[c];
              mean_dxh += dxh;
              mean_dxh_xh += dxh * xh[c];
            }
            mean_dxh /= static_cast<T>(d);
            mean_dxh_xh /= static_cast<T>(d);
            auto& gx = xn->grad_ref();
            const T istd = inv_std[static_cast<std::size_t>(r)];
            for (std::int64_t c = 0; c < d; ++c) {
              const T dxh = go[c] * gn->value.data[c];
              gx.data[r * d + c] += istd * (dxh - mean_dxh - xh[c] * mean_dxh_xh);
            }
          }
        }
      });
}

// Inverted dropout; identity when not training.
template <typename T>
Var<T> dropout(const Var<T>& x, double p, const Runtime& rt) {
  if (p <= 0.0 || !rt.training) return x;
  if (p >= 1.0) throw ConfigError("dropout: p must be in [0, 1)");
  if (!rt.rng) throw StateError("dropout: training mode needs an RNG");
  std::bernoulli_distribution keep(1.0 - p);
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  Tensor<T> out = x.value();
  std::vector<T> mask(out.data.size());
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    mask[i] = keep(*rt.rng) ? scale : T{0};
    out.data[i] *= mask[i];
  }
  auto xn = x.node();
  return make_result<T>(std::move(out), {x},
                        [xn, mask = std::move(mask)](Node<T>& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->grad_ref();
    for (std::size_t i = 0; i < g.data.size(); ++i)
      g.data[i] += self.grad.data[i] * mask[i];
  });
}

// Left-padded 1D convolution over [B, T, C_in] with kernels [k, C_in, C_out]:
// output at step t sees inputs at steps <= t only; length is preserved.
template <typename T>
Var<T> causal_conv1d(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  if (x.value().rank() != 3 || w.value().rank() != 3)
    throw ShapeError("causal_conv1d: expected x [B,T,C] and w [k,Cin,Cout]");
  const std::int64_t B = x.value().dim(0), Tn = x.value().dim(1),
                     Cin = x.value().dim(2);
  const std::int64_t k = w.value().dim(0), Cout = w.value().dim(2);
  if (w.value().dim(1) != Cin)
    throw ShapeError("causal_conv1d: kernel channels " +
                     shape_str(w.value().shape) + " do not match input " +
                     shape_str(x.value().shape));
  if (b.value().shape != Shape{Cout})
    throw ShapeError("causal_conv1d: bias must be [Cout]");

  Tensor<T> out({B, Tn, Cout});
  for (std::int64_t r = 0; r < B * Tn; ++r)
    for (std::int64_t c = 0; c < Cout; ++c)
      out.data[r * Cout + c] = b.value().data[c];
  // offset o steps back in time uses kernel tap k-1-o
  for (std::int64_t o = 0; o < k; ++o) {
    if (o >= Tn) break;
    MapC<T> W(w.value().data.data() + (k - 1 - o) * Cin * Cout, Cin, Cout);
    for (std::int64_t bb = 0; bb < B; ++bb) {
      MapC<T> X(x.value().data.data() + bb * Tn * Cin, Tn, Cin);
      MapM<T> O(out.data.data() + bb * Tn * Cout, Tn, Cout);
      O.block(o, 0, Tn - o, Cout).noalias() += X.block(0, 0, Tn - o, Cin) * W;
    }
  }
  auto xn = x.node(), wn = w.node(), bn = b.node();
  return make_result<T>(std::move(out), {x, w, b},
                        [xn, wn, bn, B, Tn, Cin, Cout, k](Node<T>& self) {
    if (bn->requires_grad) {
      auto& gb = bn->grad_ref();
      for (std::int64_t r = 0; r < B * Tn; ++r)
        for (std::int64_t c = 0; c < Cout; ++c)
          gb.data[c] += self.grad.data[r * Cout + c];
    }
    for (std::int64_t o = 0; o < k; ++o) {
      if (o >= Tn) break;
      const std::int64_t tap = (k - 1 - o) * Cin * Cout;
      for (std::int64_t bb = 0; bb < B; ++bb) {
        MapC<T> G(self.grad.data.data() + bb * Tn * Cout, Tn, Cout);
        if (xn->requires_grad) {
          MapC<T> W(wn->value.data.data() + tap, Cin, Cout);
          MapM<T> dX(xn->grad_ref().data.data() + bb * Tn * Cin, Tn, Cin);
          dX.block(0, 0, Tn - o, Cin).noalias() +=
              G.block(o, 0, Tn - o, Cout) * W.transpose();
        }
        if (wn->requires_grad) {
          MapC<T> X(xn->value.data.data() + bb * Tn * Cin, Tn, Cin);
          MapM<T> dW(wn->grad_ref().data.data() + tap, Cin, Cout);
          dW.noalias() += X.block(0, 0, Tn - o, Cin).transpose() *
                          G.block(o, 0, Tn - o, Cout);
        }
      }
    }
  });
}

// Transposed 1D convolution with stride s: out[b, s*t + i] += x[b, t] W[i],
// output length s*T + max(k - s, 0); trailing positions that receive no
// contribution carry only the bias.
template <typename T>
Var<T> conv1d_transpose(const Var<T>& x, const Var<T>& w, const Var<T>& b,
                        std::int64_t stride) {
  if (stride < 1) throw ConfigError("conv1d_transpose: stride must be >= 1");
  if (x.value().rank() != 3 || w.value().rank() != 3)
    throw ShapeError("conv1d_transpose: expected x [B,T,C] and w [k,Cin,Cout]");
  const std::int64_t B = x.value().dim(0), Tn = x.value().dim(1),
                     Cin = x.value().dim(2);
  const std::int64_t k = w.value().dim(0), Cout = w.value().dim(2);
  if (w.value().dim(1) != Cin)
    throw ShapeError("conv1d_transpose: kernel channels mismatch");
  if (b.value().shape != Shape{Cout})
    throw ShapeError("conv1d_transpose: bias must be [Cout]");
  const std::int64_t L = stride * Tn + std::max<std::int64_t>(k - stride, 0);

  Tensor<T> out({B, L, Cout});
  for (std::int64_t r = 0; r < B * L; ++r)
    for (std::int64_t c = 0; c < Cout; ++c)
      out.data[r * Cout + c] = b.value().data[c];
  for (std::int64_t bb = 0; bb < B; ++bb)
    for (std::int64_t t = 0; t < Tn; ++t) {
      MapC<T> xrow(x.value().data.data() + (bb * Tn + t) * Cin, 1, Cin);
      for (std::int64_t i = 0; i < k; ++i) {
        const std::int64_t pos = stride * t + i;
        if (pos >= L) break;
        MapC<T> W(w.value().data.data() + i * Cin * Cout, Cin, Cout);
        MapM<T> orow(out.data.data() + (bb * L + pos) * Cout, 1, Cout);
        orow.noalias() += xrow * W;
      }
    }
  auto xn = x.node(), wn = w.node(), bn = b.node();
  return make_result<T>(std::move(out), {x, w, b},
                        [xn, wn, bn, B, Tn, Cin, Cout, k, stride, L](Node<T>& self) {
    if (bn->requires_grad) {
      auto& gb = bn->grad_ref();
      for (std::int64_t r = 0; r < B * L; ++r)
        for (std::int64_t c = 0; c < Cout; ++c)
          gb.data[c] += self.grad.data[r * Cout + c];
    }
    for (std::int64_t bb = 0; bb < B; ++bb)
      for (std::int64_t t = 0; t < Tn; ++t)
        for (std::int64_t i = 0; i < k; ++i) {
          const std::int64_t pos = stride * t + i;
          if (pos >= L) break;
          MapC<T> grow(self.grad.data.data() + (bb * L + pos) * Cout, 1, Cout);
          if (xn->requires_grad) {
            MapC<T> W(wn->value.data.data() + i * Cin * Cout, Cin, Cout);
            MapM<T> dx(xn->grad_ref().data.data() + (bb * Tn + t) * Cin, 1, Cin);
            dx.noalias() += grow * W.transpose();
          }
          if (wn->requires_grad) {
            MapC<T> xrow(xn->value.data.data() + (bb * Tn + t) * Cin, 1, Cin);
            MapM<T> dW(wn->grad_ref().data.data() + i * Cin * Cout, Cin, Cout);
            dW.noalias() += xrow.transpose() * grow;
          }
        }
  });
}

template <typename T>
Var<T> avg_pool1d(const Var<T>& x, std::int64_t window, std::int64_t stride) {
  if (x.value().rank() != 3)
    throw ShapeError("avg_pool1d: expected [B,T,C]");
  const std::int64_t B = x.value().dim(0), Tn = x.value().dim(1),
                     C = x.value().dim(2);
  if (window < 1 || stride < 1) throw ConfigError("avg_pool1d: bad window/stride");
  if (window > Tn)
    throw ShapeError("avg_pool1d: window " + std::to_string(window) +
                     " exceeds length " + std::to_string(Tn));
  const std::int64_t L = (Tn - window) / stride + 1;
  Tensor<T> out({B, L, C});
  const T inv = T{1} / static_cast<T>(window);
  for (std::int64_t bb = 0; bb < B; ++bb)
    for (std::int64_t t = 0; t < L; ++t)
      for (std::int64_t c = 0; c < C; ++c) {
        T acc{0};
        for (std::int64_t u = 0; u < window; ++u)
          acc += x.value().data[(bb * Tn + t * stride + u) * C + c];
        out.data[(bb * L + t) * C + c] = acc * inv;
      }
  auto xn = x.node();
  return make_result<T>(std::move(out), {x},
                        [xn, B, Tn, C, L, window, stride, inv](Node<T>& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->grad_ref();
    for (std::int64_t bb = 0; bb < B; ++bb)
      for (std::int64_t t = 0; t < L; ++t)
        for (std::int64_t c = 0; c < C; ++c) {
          const T go = self.grad.data[(bb * L + t) * C + c] * inv;
          for (std::int64_t u = 0; u < window; ++u)
            g.data[(bb * Tn + t * stride + u) * C + c] += go;
        }
  });
}

// Broadcast the first T rows of a position table [cap, d] to [B, T, d].
// Gradients flow to exactly the looked-up rows.
template <typename T>
Var<T> embedding_rows(const Var<T>& table, std::int64_t B, std::int64_t Tn) {
  if (table.value().rank() != 2)
    throw ShapeError("embedding_rows: table must be [capacity, d]");
  const std::int64_t cap = table.value().dim(0), d = table.value().dim(1);
  if (Tn > cap)
    throw ConfigError("embedding_rows: " + std::to_string(Tn) +
                      " positions exceed table capacity " + std::to_string(cap));
  Tensor<T> out({B, Tn, d});
  for (std::int64_t b = 0; b < B; ++b)
    for (std::int64_t t = 0; t < Tn; ++t)
      for (std::int64_t c = 0; c < d; ++c)
        out.data[(b * Tn + t) * d + c] = table.value().data[t * d + c];
  auto tn = table.node();
  return make_result<T>(std::move(out), {table}, [tn, B, Tn, d](Node<T>& self) {
    if (!tn->requires_grad) return;
    auto& g = tn->grad_ref();
    for (std::int64_t b = 0; b < B; ++b)
      for (std::int64_t t = 0; t < Tn; ++t)
        for (std::int64_t c = 0; c < d; ++c)
          g.data[t * d + c] += self.grad.data[(b * Tn + t) * d + c];
  });
}

// Keep the first new_len steps of [B, L, C].
template <typename T>
Var<T> crop_time(const Var<T>& x, std::int64_t new_len) {
  if (x.value().rank() != 3) throw ShapeError("crop_time: expected [B,L,C]");
  const std::int64_t B = x.value().dim(0), L = x.value().dim(1),
                     C = x.value().dim(2);
  if (new_len < 1 || new_len > L)
    throw ConfigError("crop_time: target length " + std::to_string(new_len) +
                      " unreachable from " + std::to_string(L));
  if (new_len == L) return x;
  Tensor<T> out({B, new_len, C});
  for (std::int64_t b = 0; b < B; ++b)
    std::copy_n(x.value().data.data() + b * L * C, new_len * C,
                out.data.data() + b * new_len * C);
  auto xn = x.node();
  return make_result<T>(std::move(out), {x}, [xn, B, L, C, new_len](Node<T>& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->grad_ref();
    for (std::int64_t b = 0; b < B; ++b)
      for (std::int64_t i = 0; i < new_len * C; ++i)
        g.data[b * L * C + i] += self.grad.data[b * new_len * C + i];
  });
}

template <typename T>
Var<T> mse_loss(const Var<T>& pred, const Tensor<T>& target) {
  if (pred.value().shape != target.shape)
    throw ShapeError("mse_loss: prediction " + shape_str(pred.value().shape) +
                     " vs target " + shape_str(target.shape));
  const std::int64_t n = pred.value().numel();
  T acc{0};
  for (std::int64_t i = 0; i < n; ++i) {
    const T d = pred.value().data[i] - target.data[i];
    acc += d * d;
  }
  Tensor<T> out({1});
  out.data[0] = acc / static_cast<T>(n);
  auto pn = pred.node();
  return make_result<T>(std::move(out), {pred}, [pn, target, n](Node<T>& self) {
    if (!pn->requires_grad) return;
    auto& g = pn->grad_ref();
    const T g0 = self.grad.data[0] * T{2} / static_cast<T>(n);
    for (std::int64_t i = 0; i < n; ++i)
      g.data[i] += g0 * (pn->value.data[i] - target.data[i]);
  });
}

template <typename T>
T mae_of(const Tensor<T>& pred, const Tensor<T>& target) {
  if (pred.shape != target.shape) throw ShapeError("mae_of: shape mismatch");
  T acc{0};
  for (std::int64_t i = 0; i < pred.numel(); ++i)
    acc += std::abs(pred.data[i] - target.data[i]);
  return acc / static_cast<T>(pred.numel());
}

template <typename T>
T mse_of(const Tensor<T>& pred, const Tensor<T>& target) {
  if (pred.shape != target.shape) throw ShapeError("mse_of: shape mismatch");
  T acc{0};
  for (std::int64_t i = 0; i < pred.numel(); ++i) {
    const T d = pred.data[i] - target.data[i];
    acc += d * d;
  }
  return acc / static_cast<T>(pred.numel());
}

// ---------------------------------------------------------------------------
// parameter registry and layer modules
// ---------------------------------------------------------------------------

// Owns the model parameters: unique names, seeded fan-in init, fixed
// creation order so a seed reproduces the same weights.
template <typename T>
class ParamRegistry {
 public:
  explicit ParamRegistry(std::uint64_t seed) : rng_(seed) {}

  Var<T> uniform_fan_in(const std::string& name, Shape shape,
                        std::int64_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor<T> t(shape);
    for (auto& v : t.data) v = static_cast<T>(dist(rng_));
    return insert(name, std::move(t));
  }

  Var<T> constant(const std::string& name, Shape shape, T value) {
    Tensor<T> t(std::move(shape));
    std::fill(t.data.begin(), t.data.end(), value);
    return insert(name, std::move(t));
  }

  std::vector<Var<T>>& params() { return params_; }
  const std::vector<Var<T>>& params() const { return params_; }

  std::int64_t total_weights() const {
    std::int64_t n = 0;
    for (const auto& p : params_) n += p.value().numel();
    return n;
  }

 private:
  Var<T> insert(const std::string& name, Tensor<T> t) {
    if (!names_.insert(name).second)
      throw ConfigError("ParamRegistry: duplicate parameter name " + name);
    Var<T> v(std::move(t), true, name);
    params_.push_back(v);
    return v;
  }

  std::unordered_set<std::string> names_;
  std::vector<Var<T>> params_;
  std::mt19937_64 rng_;
};

enum class Activation { kIdentity, kRelu };

template <typename T>
struct Dense {
  Var<T> w, b;
  Activation act = Activation::kIdentity;
  std::int64_t d_in = 0, d_out = 0;

  Dense() = default;
  Dense(ParamRegistry<T>& reg, const std::string& prefix, std::int64_t in,
        std::int64_t out, Activation a = Activation::kIdentity)
      : act(a), d_in(in), d_out(out) {
    w = reg.uniform_fan_in(prefix + ".w", {in, out}, in);
    b = reg.constant(prefix + ".b", {out}, T{0});
  }

  // applies on the last axis; leading dims are preserved
  Var<T> operator()(const Var<T>& x) const {
    if (x.value().last_dim() != d_in)
      throw ShapeError("Dense: input " + shape_str(x.value().shape) +
                       " does not match weight " + shape_str(w.value().shape));
    Shape out_shape = x.value().shape;
    out_shape.back() = d_out;
    auto flat = reshape(x, {x.value().rows_flat(), d_in});
    auto y = add_bias(matmul(flat, w), b);
    if (act == Activation::kRelu) y = relu(y);
    return reshape(y, out_shape);
  }
};

template <typename T>
struct CausalConv1d {
  Var<T> w, b;
  bool relu_act = true;

  CausalConv1d() = default;
  CausalConv1d(ParamRegistry<T>& reg, const std::string& prefix,
               std::int64_t c_in, std::int64_t c_out, std::int64_t kernel,
               bool relu_activation = true)
      : relu_act(relu_activation) {
    w = reg.uniform_fan_in(prefix + ".w", {kernel, c_in, c_out}, kernel * c_in);
    b = reg.constant(prefix + ".b", {c_out}, T{0});
  }

  Var<T> operator()(const Var<T>& x) const {
    auto y = causal_conv1d(x, w, b);
    return relu_act ? relu(y) : y;
  }
};

template <typename T>
struct LayerNorm {
  Var<T> gamma, beta;

  LayerNorm() = default;
  LayerNorm(ParamRegistry<T>& reg, const std::string& prefix, std::int64_t d) {
    gamma = reg.constant(prefix + ".gamma", {d}, T{1});
    beta = reg.constant(prefix + ".beta", {d}, T{0});
  }

  Var<T> operator()(const Var<T>& x) const { return layer_norm(x, gamma, beta); }
};

template <typename T>
struct MultiHeadAttention {
  Dense<T> wq, wk, wv, wo;
  std::int64_t d_model = 0, heads = 0;

  MultiHeadAttention() = default;
  MultiHeadAttention(ParamRegistry<T>& reg, const std::string& prefix,
                     std::int64_t d, std::int64_t h)
      : d_model(d), heads(h) {
    if (d % h != 0)
      throw ConfigError("MultiHeadAttention: d_model " + std::to_string(d) +
                        " not divisible by heads " + std::to_string(h));
    wq = Dense<T>(reg, prefix + ".q", d, d);
    wk = Dense<T>(reg, prefix + ".k", d, d);
    wv = Dense<T>(reg, prefix + ".v", d, d);
    wo = Dense<T>(reg, prefix + ".o", d, d);
  }

  // full (non-causal) scaled dot-product self-attention
  Var<T> operator()(const Var<T>& x) const {
    const std::int64_t B = x.value().dim(0), Tn = x.value().dim(1);
    const std::int64_t dh = d_model / heads;
    auto split = [&](const Var<T>& v) {
      return permute(reshape(v, {B, Tn, heads, dh}), {0, 2, 1, 3});
    };
    auto q = split(wq(x));
    auto k = split(wk(x));
    auto v = split(wv(x));
    auto scores = mul_scalar(batched_matmul(q, permute(k, {0, 1, 3, 2})),
                             static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh))));
    auto probs = softmax_lastdim(scores);
    auto ctx = batched_matmul(probs, v);                  // [B,h,T,dh]
    auto joined = reshape(permute(ctx, {0, 2, 1, 3}), {B, Tn, d_model});
    return wo(joined);
  }
};

// Pre-norm encoder block: x + Drop(MHA(LN(x))), then + Drop(FFN(LN(.))).
// With zero-initialized branch outputs the block is the identity.
template <typename T>
struct EncoderBlock {
  LayerNorm<T> ln1, ln2;
  MultiHeadAttention<T> mha;
  Dense<T> ff1, ff2;
  double dropout_p = 0.1;

  EncoderBlock() = default;
  EncoderBlock(ParamRegistry<T>& reg, const std::string& prefix, std::int64_t d,
               std::int64_t h, std::int64_t d_ff, double p)
      : ln1(reg, prefix + ".ln1", d),
        ln2(reg, prefix + ".ln2", d),
        mha(reg, prefix + ".mha", d, h),
        ff1(Dense<T>(reg, prefix + ".ff1", d, d_ff, Activation::kRelu)),
        ff2(Dense<T>(reg, prefix + ".ff2", d_ff, d)),
        dropout_p(p) {}

  Var<T> operator()(const Var<T>& x, const Runtime& rt) const {
    auto attn = add(x, dropout(mha(ln1(x)), dropout_p, rt));
    return add(attn, dropout(ff2(ff1(ln2(attn))), dropout_p, rt));
  }
};

}  // namespace vesselcast::nn
