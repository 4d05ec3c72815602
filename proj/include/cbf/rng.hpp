#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace cbf {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every output
// block is a pure function of (key, counter), so a stream can be addressed by
// (seed, stream id, index) with no sequential state.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)} {}

  Block operator()(Block ctr) const {
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Block single_round(const Block& c, const std::array<std::uint32_t, 2>& k) {
    std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    auto lo0 = static_cast<std::uint32_t>(p0);
    auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  std::array<std::uint32_t, 2> key_;
};

// Stream domains keep unrelated consumers of one seed apart.
enum class StreamDomain : std::uint32_t {
  kCovariance = 1,
  kChannel = 2,
  kRandomization = 3,
  kInstance = 4,
};

// Addressable stream of standard complex Gaussians CN(0, 1):
// sample(index) is a pure function of (seed, domain, stream, index).
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, StreamDomain domain, std::uint32_t stream)
      : gen_(seed), domain_(static_cast<std::uint32_t>(domain)), stream_(stream) {}

  std::complex<double> sample(std::uint64_t index) const {
    auto out = gen_({static_cast<std::uint32_t>(index),
                     static_cast<std::uint32_t>(index >> 32), stream_, domain_});
    // u1 in (0, 1], u2 in [0, 1) with 53 bits each.
    double u1 = (static_cast<double>(to_u53(out[0], out[1])) + 1.0) * 0x1.0p-53;
    double u2 = static_cast<double>(to_u53(out[2], out[3])) * 0x1.0p-53;
    double radius = std::sqrt(-std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  // Uniform on [0, 1) from the same counter space (distinct index bit).
  double uniform(std::uint64_t index) const {
    auto out = gen_({static_cast<std::uint32_t>(index),
                     static_cast<std::uint32_t>(index >> 32) | 0x80000000u, stream_,
                     domain_});
    return static_cast<double>(to_u53(out[0], out[1])) * 0x1.0p-53;
  }

 private:
  static std::uint64_t to_u53(std::uint32_t a, std::uint32_t b) {
    return ((static_cast<std::uint64_t>(a) << 32) | b) >> 11;
  }

  Philox4x32 gen_;
  std::uint32_t domain_;
  std::uint32_t stream_;
};

}  // namespace cbf
