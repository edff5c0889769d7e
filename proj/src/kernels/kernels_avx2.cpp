// AVX2 variants. Functions carry a target attribute instead of the file being
// compiled with -mavx2, so no inline STL code from this translation unit can
// leak AVX2 instructions into the rest of the binary.

#include "wassbary/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define WASSBARY_HAVE_AVX2 1
#include <immintrin.h>

#include <cmath>
#endif

namespace wassbary::kernels {

#if WASSBARY_HAVE_AVX2

namespace {

#define AVX2_FN __attribute__((target("avx2,fma")))

AVX2_FN void mean_rows_avx2(const double* const* rows, std::size_t nrows, std::size_t len,
                            double* out) {
  const double n = static_cast<double>(nrows);
  const __m256d vn = _mm256_set1_pd(n);
  std::size_t k = 0;
  for (; k + 4 <= len; k += 4) {
    __m256d s = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nrows; ++i) s = _mm256_add_pd(s, _mm256_loadu_pd(rows[i] + k));
    _mm256_storeu_pd(out + k, _mm256_div_pd(s, vn));
  }
  for (; k < len; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < nrows; ++i) s += rows[i][k];
    out[k] = s / n;
  }
}

AVX2_FN void blend_avx2(const double* a, const double* b, double tau, std::size_t len,
                        double* out) {
  const double keep = 1.0 - tau;
  const __m256d vkeep = _mm256_set1_pd(keep);
  const __m256d vtau = _mm256_set1_pd(tau);
  std::size_t k = 0;
  for (; k + 4 <= len; k += 4) {
    __m256d x = _mm256_mul_pd(vkeep, _mm256_loadu_pd(a + k));
    __m256d y = _mm256_mul_pd(vtau, _mm256_loadu_pd(b + k));
    _mm256_storeu_pd(out + k, _mm256_add_pd(x, y));
  }
  for (; k < len; ++k) out[k] = keep * a[k] + tau * b[k];
}

AVX2_FN double squared_distance_avx2(const double* a, const double* b, std::size_t len) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= len; k += 8) {
    __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
    __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; k + 4 <= len; k += 4) {
    __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc0);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; k < len; ++k) {
    double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

// exp(x) for x <= 0: x = n ln2 + r with |r| <= ln2/2, Taylor polynomial to
// degree 13 (truncation below 1e-17 relative), then scale by 2^n through the
// exponent bits. Inputs below -708 flush to zero.
AVX2_FN inline __m256d exp_nonpositive(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d lower = _mm256_set1_pd(-708.0);
  __m256d underflow = _mm256_cmp_pd(x, lower, _CMP_LT_OQ);
  x = _mm256_max_pd(x, lower);
  __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);
  static constexpr double coeff[] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
      1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
      1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
      1.0,                1.0};
  __m256d p = _mm256_set1_pd(coeff[0]);
  for (std::size_t c = 1; c < sizeof(coeff) / sizeof(coeff[0]); ++c)
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(coeff[c]));
  __m128i ni = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(ni), _mm256_set1_epi64x(1023)), 52);
  __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, result);
}

AVX2_FN void gaussian_profile_avx2(const double* centers, std::size_t len, double x,
                                   double inv_two_var, double* out) {
  const __m256d vx = _mm256_set1_pd(x);
  const __m256d vneg = _mm256_set1_pd(-inv_two_var);
  std::size_t k = 0;
  for (; k + 4 <= len; k += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(centers + k), vx);
    __m256d e = _mm256_mul_pd(_mm256_mul_pd(d, d), vneg);
    _mm256_storeu_pd(out + k, exp_nonpositive(e));
  }
  for (; k < len; ++k) {
    double d = centers[k] - x;
    out[k] = std::exp(-(d * d) * inv_two_var);
  }
}

AVX2_FN void squared_euclidean_row_avx2(const double* const* axes, std::size_t dim, std::size_t len,
                                        const double* x, double* out) {
  std::size_t j = 0;
  for (; j + 4 <= len; j += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t a = 0; a < dim; ++a) {
      __m256d d = _mm256_sub_pd(_mm256_loadu_pd(axes[a] + j), _mm256_set1_pd(x[a]));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < len; ++j) {
    double acc = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
      double d = axes[a][j] - x[a];
      acc += d * d;
    }
    out[j] = acc;
  }
}

#undef AVX2_FN

}  // namespace

const KernelTable* avx2_table() {
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  static const KernelTable table{Isa::Avx2,
                                 mean_rows_avx2,
                                 blend_avx2,
                                 squared_distance_avx2,
                                 gaussian_profile_avx2,
                                 squared_euclidean_row_avx2};
  return supported ? &table : nullptr;
}

#else

const KernelTable* avx2_table() { return nullptr; }

#endif

}  // namespace wassbary::kernels
