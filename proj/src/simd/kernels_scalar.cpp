#include "cbf/simd/kernels.hpp"

namespace cbf::simd {

namespace {

void beam_gain_scalar(const double* g_re, const double* g_im, int nt, int n, const double* v_re,
                      const double* v_im, double* out) {
  for (int d = 0; d < n; ++d) {
    double sr = 0.0;
    double si = 0.0;
    for (int a = 0; a < nt; ++a) {
      const double gr = g_re[a * n + d];
      const double gi = g_im[a * n + d];
      // conj(g) v
      sr += gr * v_re[a] + gi * v_im[a];
      si += gr * v_im[a] - gi * v_re[a];
    }
    out[d] = sr * sr + si * si;
  }
}

void accumulate_scalar(const double* x, int n, double* acc) {
  for (int d = 0; d < n; ++d) acc[d] += x[d];
}

std::int64_t count_below_scalar(const double* signal, const double* interference, int n,
                                double threshold, double noise) {
  std::int64_t count = 0;
  for (int d = 0; d < n; ++d) {
    if (signal[d] < threshold * (interference[d] + noise)) ++count;
  }
  return count;
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{beam_gain_scalar, accumulate_scalar, count_below_scalar};
  return k;
}

}  // namespace cbf::simd
