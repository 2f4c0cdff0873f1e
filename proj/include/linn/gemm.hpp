#pragma once

#include <cstdint>

namespace linn {

// C[M,N] = A[M,K] * B[K,N] (row-major, explicit leading dims).
// accumulate=true adds into C instead of overwriting.
// Uses an AVX-512 register-tiled kernel when compiled in, a blocked
// scalar/auto-vec path otherwise. Partitioned over rows of C, so results
// are identical for any thread count.
void gemm_f32(int64_t m, int64_t n, int64_t k,
              const float* a, int64_t lda,
              const float* b, int64_t ldb,
              float* c, int64_t ldc, bool accumulate);

void gemm_f64(int64_t m, int64_t n, int64_t k,
              const double* a, int64_t lda,
              const double* b, int64_t ldb,
              double* c, int64_t ldc, bool accumulate);

inline void gemm(int64_t m, int64_t n, int64_t k, const float* a, int64_t lda,
                 const float* b, int64_t ldb, float* c, int64_t ldc, bool accumulate) {
    gemm_f32(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}
inline void gemm(int64_t m, int64_t n, int64_t k, const double* a, int64_t lda,
                 const double* b, int64_t ldb, double* c, int64_t ldc, bool accumulate) {
    gemm_f64(m, n, k, a, lda, b, ldb, c, ldc, accumulate);
}

}  // namespace linn
