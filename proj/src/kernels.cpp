#include "pantry/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kernel_table.hpp"
#include "pantry/errors.hpp"

namespace pantry::kernels {

namespace {

const KernelTable kScalarTable = {
    &ref::gemm_nn<float>, &ref::gemm_nt<float>, &ref::relu<float>, &ref::relu_backward<float>,
    &ref::add<float>,     &ref::axpy<float>,    &ref::adam_update<float>,
};

bool cpu_has_avx2() {
#if defined(PANTRY_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<const KernelTable*> g_table{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};

const KernelTable* table_for(Backend backend) {
#ifdef PANTRY_HAVE_AVX2
  if (backend == Backend::avx2) return &kAvx2Table;
#endif
  return &kScalarTable;
}

Backend resolve_default() {
  if (const char* env = std::getenv("PANTRY_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_available()) return Backend::avx2;
  }
  return avx2_available() ? Backend::avx2 : Backend::scalar;
}

const KernelTable& table() {
  const KernelTable* t = g_table.load(std::memory_order_acquire);
  if (!t) {
    Backend b = resolve_default();
    g_backend.store(b, std::memory_order_relaxed);
    t = table_for(b);
    g_table.store(t, std::memory_order_release);
  }
  return *t;
}

}  // namespace

bool avx2_available() { return cpu_has_avx2(); }

Backend active_backend() {
  table();
  return g_backend.load(std::memory_order_relaxed);
}

void set_backend(Backend backend) {
  if (backend == Backend::avx2 && !avx2_available()) {
    throw ArgumentError("kernels: AVX2 backend requested but not available on this host");
  }
  g_backend.store(backend, std::memory_order_relaxed);
  g_table.store(table_for(backend), std::memory_order_release);
}

std::string backend_name(Backend backend) {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

void gemm_nn(int m, int n, int k, const float* a, const float* b, float* c, bool accumulate) {
  table().gemm_nn(m, n, k, a, b, c, accumulate);
}
void gemm_nt(int m, int n, int k, const float* a, const float* b, float* c, bool accumulate) {
  table().gemm_nt(m, n, k, a, b, c, accumulate);
}
void relu(std::size_t n, const float* x, float* y) { table().relu(n, x, y); }
void relu_backward(std::size_t n, const float* x, const float* dy, float* dx) {
  table().relu_backward(n, x, dy, dx);
}
void add(std::size_t n, const float* a, const float* b, float* y) { table().add(n, a, b, y); }
void axpy(std::size_t n, float alpha, const float* x, float* y) { table().axpy(n, alpha, x, y); }
void adam_update(std::size_t n, float* p, const float* g, float* m, float* v, float beta1,
                 float beta2, float lr, float eps, float bc1, float bc2) {
  table().adam_update(n, p, g, m, v, beta1, beta2, lr, eps, bc1, bc2);
}

}  // namespace pantry::kernels
