#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <utility>

namespace lrp {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Every consumer of randomness draws from a stream keyed by (master, role, ids...).
enum class Role : std::uint64_t {
  env_class = 1,
  env_edge,
  walk,
  ensemble,
  reveal_vertex,
  reveal_pair,
  coupling_w,
  coupling_R,
  coupling_Rtilde,
  type_sample,
  stable,
  reference,
  bootstrap,
  trial,
  fixture,
  environment_seed,
  calibration,
  vstar,
  sigma,
  selection,
};

constexpr std::uint64_t derive_key(std::uint64_t master, Role role,
                                   std::initializer_list<std::uint64_t> ids = {}) noexcept {
  std::uint64_t h = mix64(master ^ 0x6A09E667F3BCC909ULL);
  h = mix64(h ^ (static_cast<std::uint64_t>(role) * 0xD1B54A32D192ED03ULL));
  std::uint64_t pos = 1;
  for (std::uint64_t id : ids) {
    h = mix64(h ^ mix64(id + pos * 0x8CB92BA72F3D8DD7ULL));
    ++pos;
  }
  return h;
}

// Map 64 random bits to a double in the open interval (0,1).
constexpr double to_unit_open(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Counter-based stream: output i is a pure function of (key, i).
class Stream {
 public:
  using result_type = std::uint64_t;

  constexpr Stream() noexcept = default;
  constexpr explicit Stream(std::uint64_t key) noexcept : key_(key) {}
  Stream(std::uint64_t master, Role role, std::initializer_list<std::uint64_t> ids = {}) noexcept
      : key_(derive_key(master, role, ids)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    std::uint64_t z = key_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t position() const noexcept { return counter_; }

  Stream split(std::uint64_t id) const noexcept { return Stream(derive_key(key_, Role::ensemble, {id})); }

  double uniform() noexcept { return to_unit_open((*this)()); }

  // Uniform integer in [0, n), Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) noexcept {
    std::uint64_t x = (*this)();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = (*this)();
        m = static_cast<__uint128_t>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  double exponential() noexcept { return -std::log(uniform()); }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, r2;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      r2 = u * u + v * v;
    } while (r2 >= 1.0 || r2 == 0.0);
    const double f = std::sqrt(-2.0 * std::log(r2) / r2);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Number of Bernoulli(p) trials up to and including the first success, >= 1.
  // Returns max() when p == 0 or the draw overflows.
  std::uint64_t geometric_skip(double p) noexcept {
    if (p >= 1.0) return 1;
    if (p <= 0.0) return max();
    const double g = std::ceil(std::log(uniform()) / std::log1p(-p));
    if (!(g < 9.0e18)) return max();
    return g < 1.0 ? 1 : static_cast<std::uint64_t>(g);
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Per-edge uniform: pure function of (seed, min endpoint, max endpoint).
inline double edge_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  if (a > b) std::swap(a, b);
  return to_unit_open(mix64(derive_key(seed, Role::env_edge, {a, b})));
}

}  // namespace lrp
