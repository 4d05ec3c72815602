#pragma once

#include <cstdint>
#include <string_view>

namespace cbf::simd {

// Batched kernels behind the Monte-Carlo outage estimator. Every variant must
// agree with the scalar reference to rounding (FMA contraction allowed).
struct Kernels {
  // out[d] = |sum_a conj(g[a, d]) v[a]|^2 for antenna-major g (re, im split,
  // row stride n). With v = L^H w this is |h^H w|^2 for h = L g.
  void (*beam_gain)(const double* g_re, const double* g_im, int nt, int n, const double* v_re,
                    const double* v_im, double* out);
  // acc[d] += x[d]
  void (*accumulate)(const double* x, int n, double* acc);
  // Number of d with signal[d] < threshold * (interference[d] + noise).
  std::int64_t (*count_below)(const double* signal, const double* interference, int n,
                              double threshold, double noise);
};

enum class Backend { kScalar, kAvx2 };

const Kernels& scalar_kernels();
// Null when the binary was built without AVX2 support.
const Kernels* avx2_kernels();

bool cpu_has_avx2();

// Best backend the CPU supports; CBF_SIMD=scalar in the environment forces
// the reference path.
Backend active_backend();
const Kernels& kernels(Backend backend);
const Kernels& active_kernels();

std::string_view backend_name(Backend backend);

}  // namespace cbf::simd
