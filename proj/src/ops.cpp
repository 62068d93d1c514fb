#include "pantry/ops.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <vector>

#include "pantry/kernels.hpp"

namespace pantry::ops {

namespace {

std::atomic<bool> g_finite_checks{true};

template <class T>
void check_finite(const char* op, const TensorT<T>& t) {
  if (!g_finite_checks.load(std::memory_order_relaxed)) return;
  if (!t.finite()) throw NumericError(std::string(op) + ": non-finite value in output");
}

template <class T>
bool tracking(TapeT<T>*& tape, std::initializer_list<const TensorT<T>*> inputs) {
  tape = TapeT<T>::active();
  if (!tape) return false;
  for (const auto* t : inputs) {
    if (t->needs_grad()) return true;
  }
  return false;
}

/// Unpack x[C,H,W] into cols[C*kh*kw, oh*ow] with zero padding.
template <class T>
void im2col(const T* x, int C, int H, int W, int kh, int kw, int stride, int pad, int oh, int ow,
            T* cols) {
  for (int c = 0; c < C; ++c) {
    const T* plane = x + static_cast<std::size_t>(c) * H * W;
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        T* row = cols + (static_cast<std::size_t>(c) * kh * kw + ki * kw + kj) *
                            (static_cast<std::size_t>(oh) * ow);
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ki - pad;
          T* out = row + static_cast<std::size_t>(oy) * ow;
          if (iy < 0 || iy >= H) {
            for (int ox = 0; ox < ow; ++ox) out[ox] = T(0);
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(iy) * W;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kj - pad;
            out[ox] = (ix >= 0 && ix < W) ? src[ix] : T(0);
          }
        }
      }
    }
  }
}

/// Scatter-add of cols[C*kh*kw, oh*ow] back into dx[C,H,W].
template <class T>
void col2im_acc(const T* cols, int C, int H, int W, int kh, int kw, int stride, int pad, int oh,
                int ow, T* dx) {
  for (int c = 0; c < C; ++c) {
    T* plane = dx + static_cast<std::size_t>(c) * H * W;
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        const T* row = cols + (static_cast<std::size_t>(c) * kh * kw + ki * kw + kj) *
                                  (static_cast<std::size_t>(oh) * ow);
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ki - pad;
          if (iy < 0 || iy >= H) continue;
          T* dst = plane + static_cast<std::size_t>(iy) * W;
          const T* src = row + static_cast<std::size_t>(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kj - pad;
            if (ix >= 0 && ix < W) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

template <class T>
std::vector<T> transposed(const T* a, int rows, int cols) {
  std::vector<T> t(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      t[static_cast<std::size_t>(j) * rows + i] = a[static_cast<std::size_t>(i) * cols + j];
    }
  }
  return t;
}

}  // namespace

void set_finite_checks(bool enabled) { g_finite_checks.store(enabled, std::memory_order_relaxed); }
bool finite_checks_enabled() { return g_finite_checks.load(std::memory_order_relaxed); }

template <class T>
TensorT<T> conv2d(const TensorT<T>& input, const TensorT<T>& weight, const TensorT<T>& bias,
                  int stride, int padding) {
  if (input.ndim() != 4) {
    throw ArgumentError("conv2d: input must be [N,C,H,W], got " + shape_str(input.shape()));
  }
  if (weight.ndim() != 4) {
    throw ArgumentError("conv2d: weight must be [F,C,kH,kW], got " + shape_str(weight.shape()));
  }
  const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const int F = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
  if (weight.dim(1) != C) {
    throw ArgumentError("conv2d: weight expects " + std::to_string(weight.dim(1)) +
                        " input channels, input has " + std::to_string(C));
  }
  if (bias.ndim() != 1 || bias.dim(0) != F) {
    throw ArgumentError("conv2d: bias must be [" + std::to_string(F) + "], got " +
                        shape_str(bias.shape()));
  }
  if (stride <= 0) throw ArgumentError("conv2d: stride must be positive");
  if (padding < 0) throw ArgumentError("conv2d: padding must be non-negative");
  if (kh > H + 2 * padding || kw > W + 2 * padding) {
    throw ArgumentError("conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                        " exceeds padded input " + std::to_string(H + 2 * padding) + "x" +
                        std::to_string(W + 2 * padding));
  }
  const int oh = out_dim(H, kh, stride, padding);
  const int ow = out_dim(W, kw, stride, padding);
  const int ckk = C * kh * kw;
  const std::size_t ohw = static_cast<std::size_t>(oh) * ow;

  auto out = TensorT<T>::zeros({N, F, oh, ow});
  std::vector<T> cols(static_cast<std::size_t>(ckk) * ohw);
  for (int n = 0; n < N; ++n) {
    const T* xn = input.data() + static_cast<std::size_t>(n) * C * H * W;
    T* yn = out.data() + static_cast<std::size_t>(n) * F * ohw;
    im2col(xn, C, H, W, kh, kw, stride, padding, oh, ow, cols.data());
    kernels::gemm_nn(F, static_cast<int>(ohw), ckk, weight.data(), cols.data(), yn);
    for (int f = 0; f < F; ++f) {
      const T bv = bias.data()[f];
      T* row = yn + static_cast<std::size_t>(f) * ohw;
      for (std::size_t i = 0; i < ohw; ++i) row[i] += bv;
    }
  }
  check_finite("conv2d", out);

  TapeT<T>* tape = nullptr;
  if (tracking(tape, {&input, &weight, &bias})) {
    auto x = input;
    auto w = weight;
    auto b = bias;
    auto y = out;
    tape->record("conv2d", out, [x, w, b, y, stride, padding, N, C, H, W, F, kh, kw, oh,
                                 ow]() mutable {
      if (!y.has_grad()) return;
      const int ckk = C * kh * kw;
      const std::size_t ohw = static_cast<std::size_t>(oh) * ow;
      const bool need_dx = x.needs_grad();
      const bool need_dw = w.needs_grad();
      const bool need_db = b.needs_grad();
      if (need_dx) x.ensure_grad();
      if (need_dw) w.ensure_grad();
      if (need_db) b.ensure_grad();
      std::vector<T> cols(need_dw ? static_cast<std::size_t>(ckk) * ohw : 0);
      std::vector<T> dcols(need_dx ? static_cast<std::size_t>(ckk) * ohw : 0);
      std::vector<T> wt = need_dx ? transposed(w.data(), F, ckk) : std::vector<T>{};
      for (int n = 0; n < N; ++n) {
        const T* dy = y.grad() + static_cast<std::size_t>(n) * F * ohw;
        if (need_db) {
          for (int f = 0; f < F; ++f) {
            T s = T(0);
            const T* row = dy + static_cast<std::size_t>(f) * ohw;
            for (std::size_t i = 0; i < ohw; ++i) s += row[i];
            b.grad()[f] += s;
          }
        }
        if (need_dw) {
          const T* xn = x.data() + static_cast<std::size_t>(n) * C * H * W;
          im2col(xn, C, H, W, kh, kw, stride, padding, oh, ow, cols.data());
          kernels::gemm_nt(F, ckk, static_cast<int>(ohw), dy, cols.data(), w.grad(), true);
        }
        if (need_dx) {
          kernels::gemm_nn(ckk, static_cast<int>(ohw), F, wt.data(), dy, dcols.data());
          T* dxn = x.grad() + static_cast<std::size_t>(n) * C * H * W;
          col2im_acc(dcols.data(), C, H, W, kh, kw, stride, padding, oh, ow, dxn);
        }
      }
    });
  }
  return out;
}

template <class T>
TensorT<T> pool2d(const TensorT<T>& input, PoolKind kind, int window, int stride, int padding) {
  if (input.ndim() != 4) {
    throw ArgumentError("pool2d: input must be [N,C,H,W], got " + shape_str(input.shape()));
  }
  if (window <= 0) throw ArgumentError("pool2d: window must be positive");
  if (stride <= 0) throw ArgumentError("pool2d: stride must be positive");
  if (padding < 0 || padding >= window) {
    throw ArgumentError("pool2d: padding must satisfy 0 <= padding < window");
  }
  const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  if (window > H + 2 * padding || window > W + 2 * padding) {
    throw ArgumentError("pool2d: window " + std::to_string(window) + " exceeds padded input " +
                        std::to_string(H + 2 * padding) + "x" + std::to_string(W + 2 * padding));
  }
  const int oh = out_dim(H, window, stride, padding);
  const int ow = out_dim(W, window, stride, padding);
  const std::size_t ohw = static_cast<std::size_t>(oh) * ow;
  const std::size_t planes = static_cast<std::size_t>(N) * C;

  auto out = TensorT<T>::zeros({N, C, oh, ow});
  // For max pooling, remember which input element won each window.
  auto argmax = std::make_shared<std::vector<int>>();
  if (kind == PoolKind::max) argmax->resize(planes * ohw);

  for (std::size_t p = 0; p < planes; ++p) {
    const T* plane = input.data() + p * H * W;
    T* yplane = out.data() + p * ohw;
    int* amax = kind == PoolKind::max ? argmax->data() + p * ohw : nullptr;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const int y0 = oy * stride - padding;
        const int x0 = ox * stride - padding;
        if (kind == PoolKind::max) {
          T best{};
          int besti = -1;
          for (int ky = 0; ky < window; ++ky) {
            const int iy = y0 + ky;
            if (iy < 0 || iy >= H) continue;
            for (int kx = 0; kx < window; ++kx) {
              const int ix = x0 + kx;
              if (ix < 0 || ix >= W) continue;
              const T v = plane[static_cast<std::size_t>(iy) * W + ix];
              if (besti < 0 || v > best) {
                best = v;
                besti = iy * W + ix;
              }
            }
          }
          yplane[static_cast<std::size_t>(oy) * ow + ox] = best;
          amax[static_cast<std::size_t>(oy) * ow + ox] = besti;
        } else {
          T sum = T(0);
          int count = 0;
          for (int ky = 0; ky < window; ++ky) {
            const int iy = y0 + ky;
            if (iy < 0 || iy >= H) continue;
            for (int kx = 0; kx < window; ++kx) {
              const int ix = x0 + kx;
              if (ix < 0 || ix >= W) continue;
              sum += plane[static_cast<std::size_t>(iy) * W + ix];
              ++count;
            }
          }
          yplane[static_cast<std::size_t>(oy) * ow + ox] = sum / static_cast<T>(count);
        }
      }
    }
  }
  check_finite("pool2d", out);

  TapeT<T>* tape = nullptr;
  if (tracking(tape, {&input})) {
    auto x = input;
    auto y = out;
    tape->record("pool2d", out, [x, y, kind, window, stride, padding, H, W, oh, ow, planes,
                                 argmax]() mutable {
      if (!y.has_grad()) return;
      x.ensure_grad();
      const std::size_t ohw = static_cast<std::size_t>(oh) * ow;
      for (std::size_t p = 0; p < planes; ++p) {
        const T* dy = y.grad() + p * ohw;
        T* dx = x.grad() + p * H * W;
        if (kind == PoolKind::max) {
          const int* amax = argmax->data() + p * ohw;
          for (std::size_t i = 0; i < ohw; ++i) {
            if (amax[i] >= 0) dx[amax[i]] += dy[i];
          }
        } else {
          for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
              const int y0 = oy * stride - padding;
              const int x0 = ox * stride - padding;
              int count = 0;
              for (int ky = 0; ky < window; ++ky) {
                const int iy = y0 + ky;
                if (iy < 0 || iy >= H) continue;
                for (int kx = 0; kx < window; ++kx) {
                  const int ix = x0 + kx;
                  if (ix >= 0 && ix < W) ++count;
                }
              }
              const T g = dy[static_cast<std::size_t>(oy) * ow + ox] / static_cast<T>(count);
              for (int ky = 0; ky < window; ++ky) {
                const int iy = y0 + ky;
                if (iy < 0 || iy >= H) continue;
                for (int kx = 0; kx < window; ++kx) {
                  const int ix = x0 + kx;
                  if (ix >= 0 && ix < W) dx[static_cast<std::size_t>(iy) * W + ix] += g;
                }
              }
            }
          }
        }
      }
    });
  }
  return out;
}

template <class T>
TensorT<T> dense(const TensorT<T>& input, const TensorT<T>& weight, const TensorT<T>& bias) {
  if (input.ndim() != 2) {
    throw ArgumentError("dense: input must be [N,D], got " + shape_str(input.shape()));
  }
  if (weight.ndim() != 2) {
    throw ArgumentError("dense: weight must be [K,D], got " + shape_str(weight.shape()));
  }
  const int N = input.dim(0), D = input.dim(1), K = weight.dim(0);
  if (weight.dim(1) != D) {
    throw ArgumentError("dense: weight expects " + std::to_string(weight.dim(1)) +
                        " features, input has " + std::to_string(D));
  }
  if (bias.ndim() != 1 || bias.dim(0) != K) {
    throw ArgumentError("dense: bias must be [" + std::to_string(K) + "], got " +
                        shape_str(bias.shape()));
  }

  auto out = TensorT<T>::zeros({N, K});
  kernels::gemm_nt(N, K, D, input.data(), weight.data(), out.data());
  for (int n = 0; n < N; ++n) {
    T* row = out.data() + static_cast<std::size_t>(n) * K;
    for (int k = 0; k < K; ++k) row[k] += bias.data()[k];
  }
  check_finite("dense", out);

  TapeT<T>* tape = nullptr;
  if (tracking(tape, {&input, &weight, &bias})) {
    auto x = input;
    auto w = weight;
    auto b = bias;
    auto y = out;
    tape->record("dense", out, [x, w, b, y, N, D, K]() mutable {
      if (!y.has_grad()) return;
      const T* dy = y.grad();
      if (b.needs_grad()) {
        b.ensure_grad();
        for (int n = 0; n < N; ++n) {
          kernels::add(static_cast<std::size_t>(K), b.grad(), dy + static_cast<std::size_t>(n) * K,
                       b.grad());
        }
      }
      if (w.needs_grad()) {
        w.ensure_grad();
        auto dyt = transposed(dy, N, K);
        kernels::gemm_nn(K, D, N, dyt.data(), x.data(), w.grad(), true);
      }
      if (x.needs_grad()) {
        x.ensure_grad();
        kernels::gemm_nn(N, D, K, dy, w.data(), x.grad(), true);
      }
    });
  }
  return out;
}

template <class T>
TensorT<T> relu(const TensorT<T>& x) {
  auto out = TensorT<T>::zeros(x.shape());
  kernels::relu(x.numel(), x.data(), out.data());
  check_finite("relu", out);

  TapeT<T>* tape = nullptr;
  if (tracking(tape, {&x})) {
    auto xin = x;
    auto y = out;
    tape->record("relu", out, [xin, y]() mutable {
      if (!y.has_grad()) return;
      xin.ensure_grad();
      kernels::relu_backward(xin.numel(), xin.data(), y.grad(), xin.grad());
    });
  }
  return out;
}

template <class T>
TensorT<T> softmax(const TensorT<T>& x) {
  if (x.ndim() < 1) throw ArgumentError("softmax: tensor must have at least one dimension");
  const int K = x.shape().back();
  const std::size_t rows = x.numel() / static_cast<std::size_t>(K);

  auto out = TensorT<T>::zeros(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = x.data() + r * K;
    T* y = out.data() + r * K;
    T m = in[0];
    for (int k = 1; k < K; ++k) m = std::max(m, in[k]);
    T sum = T(0);
    for (int k = 0; k < K; ++k) {
      y[k] = std::exp(in[k] - m);
      sum += y[k];
    }
    for (int k = 0; k < K; ++k) y[k] /= sum;
  }
  check_finite("softmax", out);

  TapeT<T>* tape = nullptr;
  if (tracking(tape, {&x})) {
    auto xin = x;
    auto y = out;
    tape->record("softmax", out, [xin, y, K, rows]() mutable {
      if (!y.has_grad()) return;
      xin.ensure_grad();
      for (std::size_t r = 0; r < rows; ++r) {
        const T* yv = y.data() + r * K;
        const T* dy = y.grad() + r * K;
        T* dx = xin.grad() + r * K;
        T dot = T(0);
        for (int k = 0; k < K; ++k) dot += dy[k] * yv[k];
        for (int k = 0; k < K; ++k) dx[k] += yv[k] * (dy[k] - dot);
      }
    });
  }
  return out;
}

template <class T>
TensorT<T> cross_entropy(const TensorT<T>& probabilities, const TensorT<T>& one_hot_targets) {
  if (probabilities.ndim() != 2 || one_hot_targets.ndim() != 2 ||
      probabilities.shape() != one_hot_targets.shape()) {
    throw ArgumentError("cross_entropy: probabilities " + shape_str(probabilities.shape()) +
                        " and targets " + shape_str(one_hot_targets.shape()) +
                        " must be matching [N,K]");
  }
  const int N = probabilities.dim(0), K = probabilities.dim(1);
  constexpr T kClampLo = T(1e-12);

  for (int n = 0; n < N; ++n) {
    const T* p = probabilities.data() + static_cast<std::size_t>(n) * K;
    const T* t = one_hot_targets.data() + static_cast<std::size_t>(n) * K;
    double psum = 0.0;
    int ones = 0;
    for (int k = 0; k < K; ++k) {
      psum += static_cast<double>(p[k]);
      if (t[k] == T(1)) {
        ++ones;
      } else if (t[k] != T(0)) {
        throw ArgumentError("cross_entropy: target row " + std::to_string(n) + " is not one-hot");
      }
    }
    if (ones != 1) {
      throw ArgumentError("cross_entropy: target row " + std::to_string(n) + " is not one-hot");
    }
    if (std::abs(psum - 1.0) > 1e-6) {
      throw ArgumentError("cross_entropy: probability row " + std::to_string(n) +
                          " sums to " + std::to_string(psum) + ", expected 1");
    }
  }

  T loss = T(0);
  for (int n = 0; n < N; ++n) {
    const T* p = probabilities.data() + static_cast<std::size_t>(n) * K;
    const T* t = one_hot_targets.data() + static_cast<std::size_t>(n) * K;
    for (int k = 0; k < K; ++k) {
      if (t[k] == T(1)) {
        const T clamped = std::min(std::max(p[k], kClampLo), T(1));
        loss -= std::log(clamped);
      }
    }
  }
  loss /= static_cast<T>(N);

  auto out = TensorT<T>::scalar(loss);
  check_finite("cross_entropy", out);

  TapeT<T>* tape = nullptr;
  if (tracking(tape, {&probabilities})) {
    auto p = probabilities;
    auto t = one_hot_targets;
    auto y = out;
    tape->record("cross_entropy", out, [p, t, y, N, K]() mutable {
      if (!y.has_grad()) return;
      const T g = y.grad()[0] / static_cast<T>(N);
      p.ensure_grad();
      for (int n = 0; n < N; ++n) {
        const T* pv = p.data() + static_cast<std::size_t>(n) * K;
        const T* tv = t.data() + static_cast<std::size_t>(n) * K;
        T* dp = p.grad() + static_cast<std::size_t>(n) * K;
        for (int k = 0; k < K; ++k) {
          if (tv[k] != T(1)) continue;
          // Gradient is zero outside the clamp's interior.
          if (pv[k] > T(1e-12) && pv[k] <= T(1)) dp[k] -= g / pv[k];
        }
      }
    });
  }
  return out;
}

template <class T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
  if (a.shape() != b.shape()) {
    throw ArgumentError("add: shapes differ, " + shape_str(a.shape()) + " vs " +
                        shape_str(b.shape()));
  }
  auto out = TensorT<T>::zeros(a.shape());
  kernels::add(a.numel(), a.data(), b.data(), out.data());
  check_finite("add", out);

  TapeT<T>* tape = nullptr;
  if (tracking(tape, {&a, &b})) {
    auto ain = a;
    auto bin = b;
    auto y = out;
    tape->record("add", out, [ain, bin, y]() mutable {
      if (!y.has_grad()) return;
      if (ain.needs_grad()) {
        ain.ensure_grad();
        kernels::add(ain.numel(), ain.grad(), y.grad(), ain.grad());
      }
      if (bin.needs_grad()) {
        bin.ensure_grad();
        kernels::add(bin.numel(), bin.grad(), y.grad(), bin.grad());
      }
    });
  }
  return out;
}

template <class T>
TensorT<T> multiply(const TensorT<T>& a, const TensorT<T>& b) {
  if (a.shape() != b.shape()) {
    throw ArgumentError("multiply: shapes differ, " + shape_str(a.shape()) + " vs " +
                        shape_str(b.shape()));
  }
  auto out = TensorT<T>::zeros(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  check_finite("multiply", out);

  TapeT<T>* tape = nullptr;
  if (tracking(tape, {&a, &b})) {
    auto ain = a;
    auto bin = b;
    auto y = out;
    tape->record("multiply", out, [ain, bin, y]() mutable {
      if (!y.has_grad()) return;
      if (ain.needs_grad()) {
        ain.ensure_grad();
        for (std::size_t i = 0; i < ain.numel(); ++i) ain.grad()[i] += y.grad()[i] * bin.data()[i];
      }
      if (bin.needs_grad()) {
        bin.ensure_grad();
        for (std::size_t i = 0; i < bin.numel(); ++i) bin.grad()[i] += y.grad()[i] * ain.data()[i];
      }
    });
  }
  return out;
}

template <class T>
TensorT<T> scale(const TensorT<T>& x, T factor) {
  auto out = TensorT<T>::zeros(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) out.data()[i] = x.data()[i] * factor;
  check_finite("scale", out);

  TapeT<T>* tape = nullptr;
  if (tracking(tape, {&x})) {
    auto xin = x;
    auto y = out;
    tape->record("scale", out, [xin, y, factor]() mutable {
      if (!y.has_grad()) return;
      xin.ensure_grad();
      kernels::axpy(xin.numel(), factor, y.grad(), xin.grad());
    });
  }
  return out;
}

template <class T>
TensorT<T> reduce_sum(const TensorT<T>& x) {
  T s = T(0);
  for (std::size_t i = 0; i < x.numel(); ++i) s += x.data()[i];
  auto out = TensorT<T>::scalar(s);
  check_finite("reduce_sum", out);

  TapeT<T>* tape = nullptr;
  if (tracking(tape, {&x})) {
    auto xin = x;
    auto y = out;
    tape->record("reduce_sum", out, [xin, y]() mutable {
      if (!y.has_grad()) return;
      xin.ensure_grad();
      const T g = y.grad()[0];
      for (std::size_t i = 0; i < xin.numel(); ++i) xin.grad()[i] += g;
    });
  }
  return out;
}

template <class T>
TensorT<T> flatten(const TensorT<T>& x) {
  if (x.ndim() < 1) throw ArgumentError("flatten: tensor must have at least one dimension");
  const int N = x.dim(0);
  const int D = static_cast<int>(x.numel() / static_cast<std::size_t>(N));
  auto out = TensorT<T>::from_data({N, D}, x.values());

  TapeT<T>* tape = nullptr;
  if (tracking(tape, {&x})) {
    auto xin = x;
    auto y = out;
    tape->record("flatten", out, [xin, y]() mutable {
      if (!y.has_grad()) return;
      xin.ensure_grad();
      kernels::add(xin.numel(), xin.grad(), y.grad(), xin.grad());
    });
  }
  return out;
}

template <class T>
void backward(TensorT<T>& loss) {
  auto* tape = loss.producing_tape();
  if (!tape || !tape->holds(loss)) {
    throw StateError("backward: value was not produced on an active tape");
  }
  tape->backward(loss);
}

#define PANTRY_INSTANTIATE_OPS(T)                                                              \
  template TensorT<T> conv2d<T>(const TensorT<T>&, const TensorT<T>&, const TensorT<T>&, int, \
                                int);                                                         \
  template TensorT<T> pool2d<T>(const TensorT<T>&, PoolKind, int, int, int);                  \
  template TensorT<T> dense<T>(const TensorT<T>&, const TensorT<T>&, const TensorT<T>&);      \
  template TensorT<T> relu<T>(const TensorT<T>&);                                             \
  template TensorT<T> softmax<T>(const TensorT<T>&);                                          \
  template TensorT<T> cross_entropy<T>(const TensorT<T>&, const TensorT<T>&);                 \
  template TensorT<T> add<T>(const TensorT<T>&, const TensorT<T>&);                           \
  template TensorT<T> multiply<T>(const TensorT<T>&, const TensorT<T>&);                      \
  template TensorT<T> scale<T>(const TensorT<T>&, T);                                         \
  template TensorT<T> reduce_sum<T>(const TensorT<T>&);                                       \
  template TensorT<T> flatten<T>(const TensorT<T>&);                                          \
  template void backward<T>(TensorT<T>&);

PANTRY_INSTANTIATE_OPS(float)
PANTRY_INSTANTIATE_OPS(double)

#undef PANTRY_INSTANTIATE_OPS

}  // namespace pantry::ops
