#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "tropkraus/matkernel.hpp"

namespace tropkraus {

/// Seeded generator with a fully specified output sequence. std::mt19937_64 is
/// pinned by the standard; the normal and uniform transforms are implemented
/// here because the <random> distributions are implementation-defined.
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64+box-muller/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline Vector gaussian_vector(Index n, Rng& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

inline Vector random_unit_vector(Index n, Rng& rng) {
  Vector v = gaussian_vector(n, rng);
  while (v.norm() == 0.0) v = gaussian_vector(n, rng);
  return v / v.norm();
}

/// Wishart-type PSD matrix G G^T / cols with G n-by-cols Gaussian.
inline SymMatrix random_gram(Index n, Index cols, Rng& rng) {
  Matrix g = gaussian_matrix(n, cols, rng);
  return SymMatrix(Matrix(g * g.transpose() / static_cast<double>(cols)));
}

}  // namespace tropkraus
