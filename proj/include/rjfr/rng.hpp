#pragma once

#include <cstdint>
#include <random>

namespace rjfr {

// splitmix64: cheap, well-mixed 64-bit hash used to derive independent
// stream seeds from a (seed, tag...) tuple.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ splitmix64(a + 0x632be59bd9b4e019ULL));
  h = splitmix64(h ^ splitmix64(b + 0x9e3779b97f4a7c15ULL));
  h = splitmix64(h ^ splitmix64(c + 0xd1b54a32d192ed03ULL));
  return h;
}

// One random stream per logical owner (walker, dataset, ...). Streams derived
// via mix_seed are independent for distinct tags, so results do not depend on
// any parallel schedule.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}
  RngStream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
            std::uint64_t c = 0)
      : engine_(mix_seed(seed, a, b, c)) {}

  std::mt19937_64& engine() { return engine_; }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }
  double student_t(double dof) {
    return std::student_t_distribution<double>(dof)(engine_);
  }
  double cauchy(double loc, double scale) {
    return std::cauchy_distribution<double>(loc, scale)(engine_);
  }
  // Inverse-gamma(shape, scale): scale / Gamma(shape, 1).
  double inverse_gamma(double shape, double scale) {
    double g = std::gamma_distribution<double>(shape, 1.0)(engine_);
    return scale / g;
  }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rjfr
