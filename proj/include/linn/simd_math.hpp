#pragma once

#include <cmath>
#include <cstdint>

#include "linn/nn.hpp"

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace linn {

// Batched SiLU forward and backward. The float paths use a vector exp
// (degree-6 polynomial on the reduced argument, ~1 ulp); the double paths
// stay on std::exp so 64-bit gradient checks see the exact scalar math.

inline void silu_inplace(double* p, int64_t n) {
    for (int64_t i = 0; i < n; ++i) p[i] = silu(p[i]);
}

// d[i] *= silu'(x[i])
inline void silu_grad_mul_inplace(const double* x, double* d, int64_t n) {
    for (int64_t i = 0; i < n; ++i) d[i] *= silu_grad(x[i]);
}

#if defined(__AVX512F__)

namespace detail {

// exp(x) for x <= 0 (clamped at -87), full float precision on that range
inline __m512 exp_nonpos_ps(__m512 x) {
    const __m512 log2e = _mm512_set1_ps(1.44269504088896341f);
    const __m512 ln2 = _mm512_set1_ps(0.6931471805599453f);
    x = _mm512_max_ps(x, _mm512_set1_ps(-87.0f));
    __m512 t = _mm512_mul_ps(x, log2e);
    __m512 n = _mm512_roundscale_ps(t, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m512 u = _mm512_mul_ps(_mm512_sub_ps(t, n), ln2);  // |u| <= ln2/2
    __m512 poly = _mm512_set1_ps(1.0f / 720.0f);
    poly = _mm512_fmadd_ps(poly, u, _mm512_set1_ps(1.0f / 120.0f));
    poly = _mm512_fmadd_ps(poly, u, _mm512_set1_ps(1.0f / 24.0f));
    poly = _mm512_fmadd_ps(poly, u, _mm512_set1_ps(1.0f / 6.0f));
    poly = _mm512_fmadd_ps(poly, u, _mm512_set1_ps(0.5f));
    poly = _mm512_fmadd_ps(poly, u, _mm512_set1_ps(1.0f));
    poly = _mm512_fmadd_ps(poly, u, _mm512_set1_ps(1.0f));
    // scale by 2^n through the exponent field; n in [-126, 0]
    __m512i bits = _mm512_slli_epi32(_mm512_add_epi32(_mm512_cvtps_epi32(n),
                                                      _mm512_set1_epi32(127)),
                                     23);
    return _mm512_mul_ps(poly, _mm512_castsi512_ps(bits));
}

// logistic s(x), split by sign so exp only sees non-positive arguments
inline __m512 sigmoid_ps(__m512 x) {
    const __m512 one = _mm512_set1_ps(1.0f);
    __m512 neg_abs = _mm512_min_ps(x, _mm512_sub_ps(_mm512_setzero_ps(), x));
    __m512 e = exp_nonpos_ps(neg_abs);
    __m512 s_pos = _mm512_div_ps(one, _mm512_add_ps(one, e));
    __mmask16 negative = _mm512_cmp_ps_mask(x, _mm512_setzero_ps(), _CMP_LT_OQ);
    return _mm512_mask_sub_ps(s_pos, negative, one, s_pos);
}

}  // namespace detail

inline void silu_inplace(float* p, int64_t n) {
    int64_t i = 0;
    for (; i + 16 <= n; i += 16) {
        __m512 x = _mm512_loadu_ps(p + i);
        _mm512_storeu_ps(p + i, _mm512_mul_ps(x, detail::sigmoid_ps(x)));
    }
    for (; i < n; ++i) p[i] = silu(p[i]);
}

inline void silu_grad_mul_inplace(const float* x, float* d, int64_t n) {
    const __m512 one = _mm512_set1_ps(1.0f);
    int64_t i = 0;
    for (; i + 16 <= n; i += 16) {
        __m512 xv = _mm512_loadu_ps(x + i);
        __m512 s = detail::sigmoid_ps(xv);
        __m512 grad = _mm512_mul_ps(s, _mm512_fmadd_ps(xv, _mm512_sub_ps(one, s), one));
        _mm512_storeu_ps(d + i, _mm512_mul_ps(_mm512_loadu_ps(d + i), grad));
    }
    for (; i < n; ++i) d[i] *= silu_grad(x[i]);
}

#else

inline void silu_inplace(float* p, int64_t n) {
    for (int64_t i = 0; i < n; ++i) p[i] = silu(p[i]);
}

inline void silu_grad_mul_inplace(const float* x, float* d, int64_t n) {
    for (int64_t i = 0; i < n; ++i) d[i] *= silu_grad(x[i]);
}

#endif

}  // namespace linn
