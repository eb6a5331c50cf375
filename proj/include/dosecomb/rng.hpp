#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dosecomb {

inline std::uint64_t splitmix64_next(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256** stream with explicit derivation: child(k) depends only on the
// parent's identity and k, never on how much the parent has been consumed.
// This makes replicate-level results a pure function of (root seed, index),
// independent of scheduling and thread count.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : id_seed_(seed), id_stream_(stream) {
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    x ^= stream << 1;
    for (auto& w : state_) w = splitmix64_next(x);
    bool all_zero = true;
    for (auto w : state_) all_zero &= (w == 0);
    if (all_zero) state_[0] = 1;
  }

  RngStream child(std::uint64_t key) const {
    std::uint64_t x = id_stream_ + 0x9e3779b97f4a7c15ULL * (key + 1);
    return RngStream(id_seed_, splitmix64_next(x));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform on [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1]
  double uniform01_open0() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    const double u1 = uniform01_open0();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  int binomial(int n, double p) {
    int k = 0;
    for (int i = 0; i < n; ++i) k += bernoulli(p);
    return k;
  }

  // Marsaglia-Tsang, with the standard shape < 1 boost.
  double gamma(double shape) {
    if (shape <= 0.0) throw std::invalid_argument("gamma shape must be positive");
    if (shape < 1.0) {
      const double u = uniform01_open0();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01_open0();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double alpha, double b) {
    const double x = gamma(alpha);
    const double y = gamma(b);
    return x / (x + y);
  }

  double student_t(double df, double location = 0.0, double scale = 1.0) {
    const double z = normal();
    const double chi2 = 2.0 * gamma(0.5 * df);
    return location + scale * z / std::sqrt(chi2 / df);
  }

  // index into probs, probs assumed to sum to ~1
  int categorical(const std::vector<double>& probs) {
    double u = uniform01();
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  std::array<int, 3> multinomial3(int n, double p0, double p1) {
    std::array<int, 3> counts{0, 0, 0};
    for (int i = 0; i < n; ++i) {
      const double u = uniform01();
      if (u < p0)
        ++counts[0];
      else if (u < p0 + p1)
        ++counts[1];
      else
        ++counts[2];
    }
    return counts;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_;
  std::uint64_t id_seed_;
  std::uint64_t id_stream_;
};

}  // namespace dosecomb
