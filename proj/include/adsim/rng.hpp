#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace adsim {

// Deterministic random stream. All distribution sampling is implemented by
// hand on top of mt19937_64 so that sequences are identical across platforms
// and standard-library versions (std::normal_distribution et al. are not
// portable). Every logical consumer (one agent's gradient noise, one directed
// link's delays, ...) owns its own stream, derived from the master seed and a
// purpose tag, so interleaving of consumers cannot change any sequence.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

  // Standard normal via Box-Muller; the spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Derives a child stream from (master_seed, tag, a, b). Used to give each
// agent / directed link / purpose an independent deterministic stream.
inline RngStream derive_stream(std::uint64_t master_seed, std::string_view tag,
                               std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t s = detail::splitmix64(master_seed);
  s = detail::splitmix64(s ^ h);
  s = detail::splitmix64(s ^ (a * 0x9e3779b97f4a7c15ULL + 1));
  s = detail::splitmix64(s ^ (b * 0xc2b2ae3d27d4eb4fULL + 1));
  return RngStream(s);
}

}  // namespace adsim
