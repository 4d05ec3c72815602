#include "cbf/simd/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define CBF_HAVE_AVX2_TARGET 1
#include <immintrin.h>
#else
#define CBF_HAVE_AVX2_TARGET 0
#endif

namespace cbf::simd {

#if CBF_HAVE_AVX2_TARGET

namespace {

__attribute__((target("avx2,fma"))) void beam_gain_avx2(const double* g_re, const double* g_im,
                                                        int nt, int n, const double* v_re,
                                                        const double* v_im, double* out) {
  int d = 0;
  for (; d + 4 <= n; d += 4) {
    __m256d sr = _mm256_setzero_pd();
    __m256d si = _mm256_setzero_pd();
    for (int a = 0; a < nt; ++a) {
      const __m256d gr = _mm256_loadu_pd(g_re + a * n + d);
      const __m256d gi = _mm256_loadu_pd(g_im + a * n + d);
      const __m256d vr = _mm256_set1_pd(v_re[a]);
      const __m256d vi = _mm256_set1_pd(v_im[a]);
      sr = _mm256_fmadd_pd(gr, vr, sr);
      sr = _mm256_fmadd_pd(gi, vi, sr);
      si = _mm256_fmadd_pd(gr, vi, si);
      si = _mm256_fnmadd_pd(gi, vr, si);
    }
    _mm256_storeu_pd(out + d, _mm256_fmadd_pd(sr, sr, _mm256_mul_pd(si, si)));
  }
  for (; d < n; ++d) {
    double sr = 0.0;
    double si = 0.0;
    for (int a = 0; a < nt; ++a) {
      const double gr = g_re[a * n + d];
      const double gi = g_im[a * n + d];
      sr += gr * v_re[a] + gi * v_im[a];
      si += gr * v_im[a] - gi * v_re[a];
    }
    out[d] = sr * sr + si * si;
  }
}

__attribute__((target("avx2,fma"))) void accumulate_avx2(const double* x, int n, double* acc) {
  int d = 0;
  for (; d + 4 <= n; d += 4) {
    _mm256_storeu_pd(acc + d, _mm256_add_pd(_mm256_loadu_pd(acc + d), _mm256_loadu_pd(x + d)));
  }
  for (; d < n; ++d) acc[d] += x[d];
}

__attribute__((target("avx2,fma"))) std::int64_t count_below_avx2(const double* signal,
                                                                  const double* interference,
                                                                  int n, double threshold,
                                                                  double noise) {
  const __m256d thr = _mm256_set1_pd(threshold);
  const __m256d nz = _mm256_set1_pd(noise);
  std::int64_t count = 0;
  int d = 0;
  for (; d + 4 <= n; d += 4) {
    const __m256d s = _mm256_loadu_pd(signal + d);
    // The product is rounded before comparing, matching the scalar path.
    const __m256d rhs = _mm256_mul_pd(thr, _mm256_add_pd(_mm256_loadu_pd(interference + d), nz));
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(s, rhs, _CMP_LT_OQ));
    count += __builtin_popcount(static_cast<unsigned>(mask));
  }
  for (; d < n; ++d) {
    if (signal[d] < threshold * (interference[d] + noise)) ++count;
  }
  return count;
}

}  // namespace

const Kernels* avx2_kernels() {
  static const Kernels k{beam_gain_avx2, accumulate_avx2, count_below_avx2};
  return &k;
}

bool cpu_has_avx2() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

#else

const Kernels* avx2_kernels() { return nullptr; }
bool cpu_has_avx2() { return false; }

#endif

}  // namespace cbf::simd
