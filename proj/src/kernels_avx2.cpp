#include "rrl/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define RRL_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#else
#define RRL_HAVE_AVX2_BUILD 0
#endif

#include <cmath>

namespace rrl::kernels {

#if RRL_HAVE_AVX2_BUILD

namespace {

// fdlibm-style split of ln(2) so e*ln2 keeps full precision.
constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kSqrt2 = 1.41421356237309514547;

// Natural log of four positive normal doubles (or exact zeros, which map to
// -inf). Decomposes x = m * 2^e with m in [sqrt(2)/2, sqrt(2)) and evaluates
// ln(m) = 2*atanh(s), s = (m-1)/(m+1), by its odd series.
inline __m256d log4d(__m256d x) {
    const __m256i bits = _mm256_castpd_si256(x);

    // Biased exponent of each lane, as packed int32 in the low half.
    const __m256i shifted = _mm256_srli_epi64(bits, 52);
    const __m256i pick_lo =
        _mm256_setr_epi32(0, 2, 4, 6, 0, 0, 0, 0);
    const __m128i exp32 =
        _mm256_castsi256_si128(_mm256_permutevar8x32_epi32(shifted, pick_lo));
    __m256d e = _mm256_cvtepi32_pd(_mm_sub_epi32(exp32, _mm_set1_epi32(1023)));

    // Mantissa rebased to [1, 2).
    const __m256i mant_mask = _mm256_set1_epi64x(0x000fffffffffffffLL);
    const __m256i one_bits = _mm256_set1_epi64x(0x3ff0000000000000LL);
    __m256d m = _mm256_castsi256_pd(
        _mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));

    // Shift m >= sqrt(2) down one octave so s stays small.
    const __m256d ge = _mm256_cmp_pd(m, _mm256_set1_pd(kSqrt2), _CMP_GE_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), ge);
    e = _mm256_add_pd(e, _mm256_and_pd(ge, _mm256_set1_pd(1.0)));

    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
    const __m256d s2 = _mm256_mul_pd(s, s);

    // atanh series: sum s^(2k)/(2k+1), k = 0..11. |s| < 0.1716 so the cut
    // term is below 1 ulp of the result.
    __m256d p = _mm256_set1_pd(1.0 / 23.0);
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 21.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 19.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 17.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 15.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 13.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 11.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 9.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 7.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 5.0));
    p = _mm256_fmadd_pd(p, s2, _mm256_set1_pd(1.0 / 3.0));
    p = _mm256_fmadd_pd(p, s2, one);
    const __m256d lnm = _mm256_mul_pd(_mm256_add_pd(s, s), p);

    __m256d r = _mm256_fmadd_pd(e, _mm256_set1_pd(kLn2Lo), lnm);
    r = _mm256_fmadd_pd(e, _mm256_set1_pd(kLn2Hi), r);

    // Exact zeros (eps = 0 with a selected false input) map to -inf.
    const __m256d is_zero =
        _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_EQ_OQ);
    const __m256d neg_inf =
        _mm256_set1_pd(-std::numeric_limits<double>::infinity());
    return _mm256_blendv_pd(r, neg_inf, is_zero);
}

inline double hsum4d(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double log_prod_affine_avx2(const double* w, const double* x, std::size_t n,
                            double eps) {
    const std::size_t n4 = n & ~std::size_t(3);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d veps = _mm256_set1_pd(eps);
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < n4; j += 4) {
        const __m256d vw = _mm256_loadu_pd(w + j);
        const __m256d vx = _mm256_loadu_pd(x + j);
        // fma(-w, x, 1) + eps, the same rounding steps as the scalar kernel
        const __m256d t = _mm256_add_pd(_mm256_fnmadd_pd(vw, vx, one), veps);
        acc = _mm256_add_pd(acc, log4d(t));
    }
    double sum = hsum4d(acc);
    for (std::size_t j = n4; j < n; ++j) {
        sum += std::log(std::fma(-w[j], x[j], 1.0) + eps);
    }
    return sum;
}

void logic_backward_row_avx2(const double* w, const double* x, std::size_t n,
                             double eps, double sw, double su, double* gw,
                             double* gx) {
    const std::size_t n4 = n & ~std::size_t(3);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d vsw = _mm256_set1_pd(sw);
    const __m256d vsu = _mm256_set1_pd(su);
    for (std::size_t j = 0; j < n4; j += 4) {
        const __m256d vw = _mm256_loadu_pd(w + j);
        const __m256d vx = _mm256_loadu_pd(x + j);
        const __m256d t = _mm256_add_pd(_mm256_fnmadd_pd(vw, vx, one), veps);
        const __m256d inv = _mm256_div_pd(one, t);
        const __m256d dgw = _mm256_mul_pd(vsw, _mm256_mul_pd(vx, inv));
        const __m256d dgx = _mm256_mul_pd(vsu, _mm256_mul_pd(vw, inv));
        _mm256_storeu_pd(gw + j, _mm256_add_pd(_mm256_loadu_pd(gw + j), dgw));
        _mm256_storeu_pd(gx + j, _mm256_add_pd(_mm256_loadu_pd(gx + j), dgx));
    }
    for (std::size_t j = n4; j < n; ++j) {
        const double inv = 1.0 / (std::fma(-w[j], x[j], 1.0) + eps);
        gw[j] += sw * x[j] * inv;
        gx[j] += su * w[j] * inv;
    }
}

bool cpu_has_avx2_fma() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

}  // namespace

const Ops* avx2_ops() {
    static const bool supported = cpu_has_avx2_fma();
    if (!supported) return nullptr;
    static const Ops ops{"avx2", &log_prod_affine_avx2,
                         &logic_backward_row_avx2};
    return &ops;
}

#else

const Ops* avx2_ops() { return nullptr; }

#endif  // RRL_HAVE_AVX2_BUILD

}  // namespace rrl::kernels
