#include <cstdlib>
#include <string_view>

#include "cbf/simd/kernels.hpp"

namespace cbf::simd {

Backend active_backend() {
  static const Backend chosen = [] {
    if (const char* env = std::getenv("CBF_SIMD"); env && std::string_view(env) == "scalar") {
      return Backend::kScalar;
    }
    return (avx2_kernels() != nullptr && cpu_has_avx2()) ? Backend::kAvx2 : Backend::kScalar;
  }();
  return chosen;
}

const Kernels& kernels(Backend backend) {
  if (backend == Backend::kAvx2 && avx2_kernels() != nullptr && cpu_has_avx2()) {
    return *avx2_kernels();
  }
  return scalar_kernels();
}

const Kernels& active_kernels() { return kernels(active_backend()); }

std::string_view backend_name(Backend backend) {
  return backend == Backend::kAvx2 ? "avx2" : "scalar";
}

}  // namespace cbf::simd
