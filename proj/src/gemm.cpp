#include "linn/gemm.hpp"

#include <algorithm>

#include "linn/common.hpp"

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace linn {

namespace {

#if defined(__AVX512F__)

// 8x48 register tile: 24 zmm accumulators, 3 B loads + 8 broadcasts per k.
void kernel_8x48(int64_t k, const float* a, int64_t lda, const float* b, int64_t ldb,
                 float* c, int64_t ldc, bool accumulate) {
    __m512 acc[8][3];
    for (int r = 0; r < 8; ++r)
        for (int j = 0; j < 3; ++j)
            acc[r][j] = accumulate ? _mm512_loadu_ps(c + r * ldc + 16 * j) : _mm512_setzero_ps();
    for (int64_t p = 0; p < k; ++p) {
        const float* bp = b + p * ldb;
        __m512 b0 = _mm512_loadu_ps(bp);
        __m512 b1 = _mm512_loadu_ps(bp + 16);
        __m512 b2 = _mm512_loadu_ps(bp + 32);
        for (int r = 0; r < 8; ++r) {
            __m512 av = _mm512_set1_ps(a[r * lda + p]);
            acc[r][0] = _mm512_fmadd_ps(av, b0, acc[r][0]);
            acc[r][1] = _mm512_fmadd_ps(av, b1, acc[r][1]);
            acc[r][2] = _mm512_fmadd_ps(av, b2, acc[r][2]);
        }
    }
    for (int r = 0; r < 8; ++r)
        for (int j = 0; j < 3; ++j)
            _mm512_storeu_ps(c + r * ldc + 16 * j, acc[r][j]);
}

// 8 x (<=16) masked tile for the N remainder.
void kernel_8xm(int64_t k, int64_t ncols, const float* a, int64_t lda, const float* b,
                int64_t ldb, float* c, int64_t ldc, bool accumulate) {
    __mmask16 mask = static_cast<__mmask16>((1u << ncols) - 1u);
    __m512 acc[8];
    for (int r = 0; r < 8; ++r)
        acc[r] = accumulate ? _mm512_maskz_loadu_ps(mask, c + r * ldc) : _mm512_setzero_ps();
    for (int64_t p = 0; p < k; ++p) {
        __m512 bv = _mm512_maskz_loadu_ps(mask, b + p * ldb);
        for (int r = 0; r < 8; ++r)
            acc[r] = _mm512_fmadd_ps(_mm512_set1_ps(a[r * lda + p]), bv, acc[r]);
    }
    for (int r = 0; r < 8; ++r) _mm512_mask_storeu_ps(c + r * ldc, mask, acc[r]);
}

// single-row variants for the M remainder
void kernel_1x48(int64_t k, const float* a, const float* b, int64_t ldb, float* c,
                 bool accumulate) {
    __m512 a0 = accumulate ? _mm512_loadu_ps(c) : _mm512_setzero_ps();
    __m512 a1 = accumulate ? _mm512_loadu_ps(c + 16) : _mm512_setzero_ps();
    __m512 a2 = accumulate ? _mm512_loadu_ps(c + 32) : _mm512_setzero_ps();
    for (int64_t p = 0; p < k; ++p) {
        const float* bp = b + p * ldb;
        __m512 av = _mm512_set1_ps(a[p]);
        a0 = _mm512_fmadd_ps(av, _mm512_loadu_ps(bp), a0);
        a1 = _mm512_fmadd_ps(av, _mm512_loadu_ps(bp + 16), a1);
        a2 = _mm512_fmadd_ps(av, _mm512_loadu_ps(bp + 32), a2);
    }
    _mm512_storeu_ps(c, a0);
    _mm512_storeu_ps(c + 16, a1);
    _mm512_storeu_ps(c + 32, a2);
}

void kernel_1xm(int64_t k, int64_t ncols, const float* a, const float* b, int64_t ldb,
                float* c, bool accumulate) {
    __mmask16 mask = static_cast<__mmask16>((1u << ncols) - 1u);
    __m512 acc = accumulate ? _mm512_maskz_loadu_ps(mask, c) : _mm512_setzero_ps();
    for (int64_t p = 0; p < k; ++p)
        acc = _mm512_fmadd_ps(_mm512_set1_ps(a[p]), _mm512_maskz_loadu_ps(mask, b + p * ldb), acc);
    _mm512_mask_storeu_ps(c, mask, acc);
}

void gemm_rows_avx512(int64_t m0, int64_t m1, int64_t n, int64_t k, const float* a,
                      int64_t lda, const float* b, int64_t ldb, float* c, int64_t ldc,
                      bool accumulate) {
    int64_t m = m0;
    for (; m + 8 <= m1; m += 8) {
        int64_t col = 0;
        for (; col + 48 <= n; col += 48)
            kernel_8x48(k, a + m * lda, lda, b + col, ldb, c + m * ldc + col, ldc, accumulate);
        for (; col < n; col += 16)
            kernel_8xm(k, std::min<int64_t>(16, n - col), a + m * lda, lda, b + col, ldb,
                       c + m * ldc + col, ldc, accumulate);
    }
    for (; m < m1; ++m) {
        int64_t col = 0;
        for (; col + 48 <= n; col += 48)
            kernel_1x48(k, a + m * lda, b + col, ldb, c + m * ldc + col, accumulate);
        for (; col < n; col += 16)
            kernel_1xm(k, std::min<int64_t>(16, n - col), a + m * lda, b + col, ldb,
                       c + m * ldc + col, accumulate);
    }
}

#endif  // __AVX512F__

template <typename Real>
void gemm_rows_generic(int64_t m0, int64_t m1, int64_t n, int64_t k, const Real* a,
                       int64_t lda, const Real* b, int64_t ldb, Real* c, int64_t ldc,
                       bool accumulate) {
    if (!accumulate)
        for (int64_t m = m0; m < m1; ++m) std::fill(c + m * ldc, c + m * ldc + n, Real(0));
    int64_t m = m0;
    for (; m + 4 <= m1; m += 4) {
        const Real* a0 = a + m * lda;
        const Real* a1 = a0 + lda;
        const Real* a2 = a1 + lda;
        const Real* a3 = a2 + lda;
        Real* c0 = c + m * ldc;
        Real* c1 = c0 + ldc;
        Real* c2 = c1 + ldc;
        Real* c3 = c2 + ldc;
        for (int64_t p = 0; p < k; ++p) {
            const Real* bp = b + p * ldb;
            Real v0 = a0[p], v1 = a1[p], v2 = a2[p], v3 = a3[p];
            for (int64_t j = 0; j < n; ++j) {
                Real bj = bp[j];
                c0[j] += v0 * bj;
                c1[j] += v1 * bj;
                c2[j] += v2 * bj;
                c3[j] += v3 * bj;
            }
        }
    }
    for (; m < m1; ++m) {
        const Real* ar = a + m * lda;
        Real* cr = c + m * ldc;
        for (int64_t p = 0; p < k; ++p) {
            const Real* bp = b + p * ldb;
            Real v = ar[p];
            for (int64_t j = 0; j < n; ++j) cr[j] += v * bp[j];
        }
    }
}

}  // namespace

void gemm_f32(int64_t m, int64_t n, int64_t k, const float* a, int64_t lda, const float* b,
              int64_t ldb, float* c, int64_t ldc, bool accumulate) {
    if (m <= 0 || n <= 0) return;
    auto run = [&](int64_t lo, int64_t hi) {
#if defined(__AVX512F__)
        gemm_rows_avx512(lo, hi, n, k, a, lda, b, ldb, c, ldc, accumulate);
#else
        gemm_rows_generic(lo, hi, n, k, a, lda, b, ldb, c, ldc, accumulate);
#endif
    };
    // row-block parallelism; each worker owns disjoint rows of C
    if (thread_count() > 1 && m >= 64) {
        parallel_for(m, run);
    } else {
        run(0, m);
    }
}

void gemm_f64(int64_t m, int64_t n, int64_t k, const double* a, int64_t lda, const double* b,
              int64_t ldb, double* c, int64_t ldc, bool accumulate) {
    if (m <= 0 || n <= 0) return;
    auto run = [&](int64_t lo, int64_t hi) {
        gemm_rows_generic(lo, hi, n, k, a, lda, b, ldb, c, ldc, accumulate);
    };
    if (thread_count() > 1 && m >= 64) {
        parallel_for(m, run);
    } else {
        run(0, m);
    }
}

}  // namespace linn
