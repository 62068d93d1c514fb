// AVX2+FMA float kernels. This file is compiled with -mavx2 -mfma; nothing in
// it runs unless the dispatcher selected the avx2 backend on a capable CPU.

#include "pantry/kernels.hpp"

#ifdef PANTRY_HAVE_AVX2

#include <immintrin.h>

#include "kernel_table.hpp"

namespace pantry::kernels {

namespace {

void gemm_nn_avx2(int m, int n, int k, const float* a, const float* b, float* c,
                  bool accumulate) {
  const int n8 = n & ~7;
  for (int i = 0; i < m; ++i) {
    float* crow = c + static_cast<std::size_t>(i) * n;
    if (!accumulate) {
      int j = 0;
      const __m256 zero = _mm256_setzero_ps();
      for (; j < n8; j += 8) _mm256_storeu_ps(crow + j, zero);
      for (; j < n; ++j) crow[j] = 0.0f;
    }
    const float* arow = a + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const float av = arow[p];
      if (av == 0.0f) continue;
      const __m256 avv = _mm256_set1_ps(av);
      const float* brow = b + static_cast<std::size_t>(p) * n;
      int j = 0;
      for (; j < n8; j += 8) {
        __m256 cv = _mm256_loadu_ps(crow + j);
        cv = _mm256_fmadd_ps(avv, _mm256_loadu_ps(brow + j), cv);
        _mm256_storeu_ps(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

inline float hsum256(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_hadd_ps(lo, lo);
  lo = _mm_hadd_ps(lo, lo);
  return _mm_cvtss_f32(lo);
}

void gemm_nt_avx2(int m, int n, int k, const float* a, const float* b, float* c,
                  bool accumulate) {
  const int k8 = k & ~7;
  for (int i = 0; i < m; ++i) {
    const float* arow = a + static_cast<std::size_t>(i) * k;
    for (int j = 0; j < n; ++j) {
      const float* brow = b + static_cast<std::size_t>(j) * k;
      __m256 acc = _mm256_setzero_ps();
      int p = 0;
      for (; p < k8; p += 8) {
        acc = _mm256_fmadd_ps(_mm256_loadu_ps(arow + p), _mm256_loadu_ps(brow + p), acc);
      }
      float sum = hsum256(acc);
      for (; p < k; ++p) sum += arow[p] * brow[p];
      float& out = c[static_cast<std::size_t>(i) * n + j];
      out = accumulate ? out + sum : sum;
    }
  }
}

void relu_avx2(std::size_t n, const float* x, float* y) {
  const std::size_t n8 = n & ~std::size_t(7);
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i < n8; i += 8) _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward_avx2(std::size_t n, const float* x, const float* dy, float* dx) {
  const std::size_t n8 = n & ~std::size_t(7);
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i < n8; i += 8) {
    const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + i), zero, _CMP_GT_OQ);
    const __m256 grad = _mm256_and_ps(_mm256_loadu_ps(dy + i), mask);
    _mm256_storeu_ps(dx + i, _mm256_add_ps(_mm256_loadu_ps(dx + i), grad));
  }
  for (; i < n; ++i) {
    if (x[i] > 0.0f) dx[i] += dy[i];
  }
}

void add_avx2(std::size_t n, const float* a, const float* b, float* y) {
  const std::size_t n8 = n & ~std::size_t(7);
  std::size_t i = 0;
  for (; i < n8; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  }
  for (; i < n; ++i) y[i] = a[i] + b[i];
}

void axpy_avx2(std::size_t n, float alpha, const float* x, float* y) {
  const std::size_t n8 = n & ~std::size_t(7);
  const __m256 av = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i < n8; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void adam_update_avx2(std::size_t n, float* p, const float* g, float* m, float* v, float beta1,
                      float beta2, float lr, float eps, float bc1, float bc2) {
  const std::size_t n8 = n & ~std::size_t(7);
  const __m256 b1 = _mm256_set1_ps(beta1);
  const __m256 b2 = _mm256_set1_ps(beta2);
  const __m256 ob1 = _mm256_set1_ps(1.0f - beta1);
  const __m256 ob2 = _mm256_set1_ps(1.0f - beta2);
  const __m256 lrv = _mm256_set1_ps(lr);
  const __m256 epsv = _mm256_set1_ps(eps);
  const __m256 rbc1 = _mm256_set1_ps(bc1);
  const __m256 rbc2 = _mm256_set1_ps(bc2);
  std::size_t i = 0;
  for (; i < n8; i += 8) {
    const __m256 gv = _mm256_loadu_ps(g + i);
    __m256 mv = _mm256_fmadd_ps(b1, _mm256_loadu_ps(m + i), _mm256_mul_ps(ob1, gv));
    __m256 vv = _mm256_fmadd_ps(b2, _mm256_loadu_ps(v + i), _mm256_mul_ps(ob2, _mm256_mul_ps(gv, gv)));
    _mm256_storeu_ps(m + i, mv);
    _mm256_storeu_ps(v + i, vv);
    const __m256 mhat = _mm256_div_ps(mv, rbc1);
    const __m256 vhat = _mm256_div_ps(vv, rbc2);
    const __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), epsv);
    const __m256 step = _mm256_div_ps(_mm256_mul_ps(lrv, mhat), denom);
    _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), step));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
    const float mhat = m[i] / bc1;
    const float vhat = v[i] / bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

const KernelTable kAvx2Table = {
    &gemm_nn_avx2, &gemm_nt_avx2, &relu_avx2, &relu_backward_avx2,
    &add_avx2,     &axpy_avx2,    &adam_update_avx2,
};

}  // namespace pantry::kernels

#endif  // PANTRY_HAVE_AVX2
