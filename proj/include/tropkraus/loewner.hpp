#pragma once

// Minimal upper bounds in the Loewner order.
//
// For two symmetric matrices P, Q and a positive definite selector C, the
// minimal upper bound selected by C is the unique minimizer of <C, Z> over
// {Z : Z >= P, Z >= Q}:
//
//   X_C = (P+Q)/2 + 1/2 C^{-1/2} |C^{1/2} (P-Q) C^{1/2}| C^{-1/2}.
//
// C = I gives the trace selection; C = P^{-1} gives the minimum-volume
// (determinant) selection for positive definite pairs. Longer lists are folded
// right-to-left: Q1 u (Q2 u (... u Qp)).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tropkraus/matkernel.hpp"
#include "tropkraus/random.hpp"

namespace tropkraus {

class Selection {
 public:
  enum class Kind { trace, det, custom };

  static Selection trace() { return Selection(Kind::trace); }
  static Selection det() { return Selection(Kind::det); }
  static Selection custom(SymMatrix c) {
    const double lo = min_eigenvalue(c);
    if (!(lo > pd_tolerance(c))) throw DomainError("Selection::custom: selector not positive definite", lo);
    Selection s(Kind::custom);
    auto [half, inv_half] = sqrt_and_inv_sqrt_pd(c);
    s.selector_ = std::move(c);
    s.sqrt_ = std::move(half);
    s.inv_sqrt_ = std::move(inv_half);
    return s;
  }

  static Selection parse(std::string_view name) {
    if (name == "trace" || name == "tr") return trace();
    if (name == "det") return det();
    throw UsageError("unknown selection '" + std::string(name) + "' (expected trace or det)");
  }

  Kind kind() const noexcept { return kind_; }
  std::string name() const {
    switch (kind_) {
      case Kind::trace: return "trace";
      case Kind::det: return "det";
      case Kind::custom: return "custom";
    }
    return "?";
  }
  /// Only meaningful for Kind::custom.
  const SymMatrix& selector() const { return selector_; }
  const SymMatrix& selector_sqrt() const { return sqrt_; }
  const SymMatrix& selector_inv_sqrt() const { return inv_sqrt_; }

 private:
  explicit Selection(Kind k) : kind_(k) {}

  Kind kind_;
  SymMatrix selector_, sqrt_, inv_sqrt_;
};

namespace detail {

inline void check_pair(const SymMatrix& p, const SymMatrix& q) {
  if (p.dim() != q.dim()) {
    throw UsageError("mub: dimension mismatch " + std::to_string(p.dim()) + " vs " + std::to_string(q.dim()));
  }
}

/// X_C given C^{1/2} and C^{-1/2}.
inline SymMatrix mub_with_roots(const SymMatrix& p, const SymMatrix& q, const SymMatrix& c_half,
                                const SymMatrix& c_inv_half) {
  Matrix diff = c_half.mat() * (p.mat() - q.mat()) * c_half.mat();
  SymMatrix a = abs_sym(SymMatrix(diff));
  Matrix corr = c_inv_half.mat() * a.mat() * c_inv_half.mat();
  return SymMatrix(Matrix(0.5 * (p.mat() + q.mat() + corr)));
}

}  // namespace detail

/// Trace selection (C = I): (P+Q)/2 + |P-Q|/2.
inline SymMatrix mub_pair_trace(const SymMatrix& p, const SymMatrix& q) {
  detail::check_pair(p, q);
  SymMatrix a = abs_sym(p - q);
  return SymMatrix(Matrix(0.5 * (p.mat() + q.mat() + a.mat())));
}

/// Determinant selection (C = P^{-1}); P must be positive definite.
inline SymMatrix mub_pair_det(const SymMatrix& p, const SymMatrix& q) {
  detail::check_pair(p, q);
  auto [p_half, p_inv_half] = sqrt_and_inv_sqrt_pd(p);
  // C^{1/2} = P^{-1/2}, C^{-1/2} = P^{1/2}
  return detail::mub_with_roots(p, q, p_inv_half, p_half);
}

/// Minimal upper bound of {P, Q} selected by the positive definite matrix C.
inline SymMatrix mub_pair(const SymMatrix& p, const SymMatrix& q, const SymMatrix& c) {
  detail::check_pair(p, q);
  if (c.dim() != p.dim()) throw UsageError("mub_pair: selector dimension mismatch");
  auto e = eig_sym(c);
  require_pd(e, pd_tolerance(c), "mub_pair selector");
  SymMatrix c_half = spectral_map(e, [](double x) { return std::sqrt(x); });
  SymMatrix c_inv_half = spectral_map(e, [](double x) { return 1.0 / std::sqrt(x); });
  return detail::mub_with_roots(p, q, c_half, c_inv_half);
}

inline SymMatrix mub_pair(const SymMatrix& p, const SymMatrix& q, const Selection& sel) {
  switch (sel.kind()) {
    case Selection::Kind::trace: return mub_pair_trace(p, q);
    case Selection::Kind::det: return mub_pair_det(p, q);
    case Selection::Kind::custom:
      detail::check_pair(p, q);
      if (sel.selector().dim() != p.dim()) throw UsageError("mub_pair: selector dimension mismatch");
      return detail::mub_with_roots(p, q, sel.selector_sqrt(), sel.selector_inv_sqrt());
  }
  throw UsageError("mub_pair: bad selection");
}

/// Right-associated sequential fold Q1 u (Q2 u (... u Qp)) in list order.
inline SymMatrix mub_fold(std::span<const SymMatrix> list, const Selection& sel) {
  if (list.empty()) throw UsageError("mub_fold: empty list");
  const Index n = list.front().dim();
  for (const auto& q : list) {
    if (q.dim() != n) throw UsageError("mub_fold: non-uniform dimensions");
  }
  if (sel.kind() == Selection::Kind::det) {
    // Left operands are checked by the square root inside mub_pair_det.
    const SymMatrix& last = list.back();
    const double lo = min_eigenvalue(last);
    if (!(lo > pd_tolerance(last))) throw DomainError("mub_fold: det selection needs positive definite entries", lo);
  }
  SymMatrix acc = list.back();
  for (std::size_t k = list.size() - 1; k-- > 0;) acc = mub_pair(list[k], acc, sel);
  return acc;
}

inline SymMatrix mub_fold(std::initializer_list<SymMatrix> list, const Selection& sel) {
  return mub_fold(std::span<const SymMatrix>(list.begin(), list.size()), sel);
}

/// X >= Q_i for every i, up to tol on the smallest eigenvalue of X - Q_i.
inline bool is_upper_bound(const SymMatrix& x, std::span<const SymMatrix> list, double tol) {
  for (const auto& q : list) {
    if (q.dim() != x.dim()) throw UsageError("is_upper_bound: dimension mismatch");
    if (min_eigenvalue(x - q) < -tol) return false;
  }
  return true;
}

struct WitnessOptions {
  int trials = 200;
  /// Step along each direction; negative means 1e-3 * ||X||_F.
  double step = -1.0;
  std::uint64_t seed = 0x5eed;
  /// Tolerance of the upper-bound test; negative means 1e-12 * (1 + ||X||_F).
  double tol = -1.0;
};

/// Probabilistic necessary condition for minimality: for `trials` random
/// unit-Frobenius PSD directions D (full rank, Wishart with 2n columns),
/// X - step*D must not be an upper bound. Returns false as soon as a strictly
/// smaller upper bound is found.
inline bool minimality_witness(const SymMatrix& x, std::span<const SymMatrix> list, const WitnessOptions& opt = {}) {
  const double scale = x.frobenius();
  const double step = opt.step < 0 ? 1e-3 * scale : opt.step;
  const double tol = opt.tol < 0 ? 1e-12 * (1.0 + scale) : opt.tol;
  Rng rng(opt.seed);
  const Index n = x.dim();
  for (int t = 0; t < opt.trials; ++t) {
    SymMatrix d = random_gram(n, 2 * n, rng);
    d /= d.frobenius();
    if (is_upper_bound(x - step * d, list, tol)) return false;
  }
  return true;
}

}  // namespace tropkraus
