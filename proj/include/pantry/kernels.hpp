#pragma once

#include <cmath>
#include <cstddef>
#include <string>

namespace pantry::kernels {

// Data-parallel inner loops used by the tensor ops and the optimizer.
// Every kernel exists as a portable scalar reference (any element type) and,
// for float, as an AVX2 variant selected at runtime. The two float paths may
// differ in the last bits (FMA, different accumulation order); results are
// bitwise deterministic for a fixed backend.
//
// Backend resolution order: set_backend() > PANTRY_KERNELS env var
// ("scalar"/"avx2") > CPU detection.

enum class Backend { scalar, avx2 };

Backend active_backend();
void set_backend(Backend backend);
bool avx2_available();
std::string backend_name(Backend backend);

// Scalar reference kernels. Matrices are row-major and densely packed.
namespace ref {

/// C[M,N] = A[M,K] * B[K,N], overwriting C unless accumulate.
template <class T>
void gemm_nn(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate = false) {
  for (int i = 0; i < m; ++i) {
    T* crow = c + static_cast<std::size_t>(i) * n;
    if (!accumulate) {
      for (int j = 0; j < n; ++j) crow[j] = T(0);
    }
    const T* arow = a + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

/// C[M,N] = A[M,K] * B[N,K]^T (row dot row), overwriting C unless accumulate.
template <class T>
void gemm_nt(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate = false) {
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<std::size_t>(i) * k;
    for (int j = 0; j < n; ++j) {
      const T* brow = b + static_cast<std::size_t>(j) * k;
      T acc = T(0);
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      T& out = c[static_cast<std::size_t>(i) * n + j];
      out = accumulate ? out + acc : acc;
    }
  }
}

template <class T>
void relu(std::size_t n, const T* x, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

/// dx[i] += dy[i] where x[i] > 0.
template <class T>
void relu_backward(std::size_t n, const T* x, const T* dy, T* dx) {
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > T(0)) dx[i] += dy[i];
  }
}

template <class T>
void add(std::size_t n, const T* a, const T* b, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}

/// y[i] += alpha * x[i]
template <class T>
void axpy(std::size_t n, T alpha, const T* x, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

/// One fused Adam step over a parameter block.
/// bc1 = 1 - beta1^t and bc2 = 1 - beta2^t are the bias-correction terms.
template <class T>
void adam_update(std::size_t n, T* p, const T* g, T* m, T* v, T beta1, T beta2, T lr, T eps,
                 T bc1, T bc2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (T(1) - beta1) * g[i];
    v[i] = beta2 * v[i] + (T(1) - beta2) * g[i] * g[i];
    const T mhat = m[i] / bc1;
    const T vhat = v[i] / bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace ref

// Dispatched float entry points.
void gemm_nn(int m, int n, int k, const float* a, const float* b, float* c, bool accumulate = false);
void gemm_nt(int m, int n, int k, const float* a, const float* b, float* c, bool accumulate = false);
void relu(std::size_t n, const float* x, float* y);
void relu_backward(std::size_t n, const float* x, const float* dy, float* dx);
void add(std::size_t n, const float* a, const float* b, float* y);
void axpy(std::size_t n, float alpha, const float* x, float* y);
void adam_update(std::size_t n, float* p, const float* g, float* m, float* v, float beta1,
                 float beta2, float lr, float eps, float bc1, float bc2);

// Non-float element types always take the reference path.
template <class T>
void gemm_nn(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate = false) {
  ref::gemm_nn(m, n, k, a, b, c, accumulate);
}
template <class T>
void gemm_nt(int m, int n, int k, const T* a, const T* b, T* c, bool accumulate = false) {
  ref::gemm_nt(m, n, k, a, b, c, accumulate);
}
template <class T>
void relu(std::size_t n, const T* x, T* y) {
  ref::relu(n, x, y);
}
template <class T>
void relu_backward(std::size_t n, const T* x, const T* dy, T* dx) {
  ref::relu_backward(n, x, dy, dx);
}
template <class T>
void add(std::size_t n, const T* a, const T* b, T* y) {
  ref::add(n, a, b, y);
}
template <class T>
void axpy(std::size_t n, T alpha, const T* x, T* y) {
  ref::axpy(n, alpha, x, y);
}
template <class T>
void adam_update(std::size_t n, T* p, const T* g, T* m, T* v, T beta1, T beta2, T lr, T eps,
                 T bc1, T bc2) {
  ref::adam_update(n, p, g, m, v, beta1, beta2, lr, eps, bc1, bc2);
}

}  // namespace pantry::kernels
