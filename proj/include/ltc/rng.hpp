#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace ltc {

// splitmix64 finalizer, used to derive independent stream seeds from a
// base seed plus a stream tag.
inline uint64_t mix_seed(uint64_t base, uint64_t tag) {
  uint64_t z = base + 0x9e3779b97f4a7c15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// mt19937_64 with explicit uniform/normal mappings. The distributions are
// implemented here rather than with std:: distribution objects so that a
// draw sequence is exactly reproducible and the entire state round-trips
// through serialize()/deserialize() (std::normal_distribution caches an
// internal spare value that would be lost).
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : engine_(seed) {}

  // [0, 1), 53-bit resolution
  double uniform_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_unit(); }

  // Box-Muller, both uniforms drawn fresh every call (no cached spare).
  double normal() {
    double u1 = uniform_unit();
    while (u1 == 0.0) u1 = uniform_unit();
    const double u2 = uniform_unit();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  uint64_t next_u64() { return engine_(); }

  size_t index(size_t n) { return static_cast<size_t>(engine_() % n); }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void deserialize(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ltc
