#pragma once

#include <cstddef>

// Internal: the per-backend dispatch table shared by kernels.cpp and the
// SIMD translation units.

namespace pantry::kernels {

struct KernelTable {
  void (*gemm_nn)(int, int, int, const float*, const float*, float*, bool);
  void (*gemm_nt)(int, int, int, const float*, const float*, float*, bool);
  void (*relu)(std::size_t, const float*, float*);
  void (*relu_backward)(std::size_t, const float*, const float*, float*);
  void (*add)(std::size_t, const float*, const float*, float*);
  void (*axpy)(std::size_t, float, const float*, float*);
  void (*adam_update)(std::size_t, float*, const float*, float*, float*, float, float, float,
                      float, float, float);
};

#ifdef PANTRY_HAVE_AVX2
extern const KernelTable kAvx2Table;
#endif

}  // namespace pantry::kernels
