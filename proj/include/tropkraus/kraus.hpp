#pragma once

// Tropical Kraus map and its normalized eigen-iterations.
//
//   T_j(X) = u { A_s^T X_i A_s + eps I : i.s = j }
//
// where u is a selection of minimal upper bound folded in canonical edge
// order. A positive eigenvector lambda X = T(X) yields the quadratic
// Lyapunov-type norm v(z) = max_j sqrt(z^T X_j z) with v(A_s z) <= sqrt(lambda) v(z).

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "tropkraus/automaton.hpp"
#include "tropkraus/loewner.hpp"
#include "tropkraus/matkernel.hpp"
#include "tropkraus/parallel.hpp"

namespace tropkraus {

/// Tuple (X_1, ..., X_p) of symmetric n-by-n matrices indexed by automaton nodes.
class KrausState {
 public:
  KrausState() = default;

  explicit KrausState(std::vector<SymMatrix> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw UsageError("KrausState: no blocks");
    for (const auto& b : blocks_) {
      if (b.dim() != blocks_.front().dim()) throw UsageError("KrausState: non-uniform block dimensions");
    }
  }

  static KrausState constant(Index n, std::size_t p, double c) {
    return KrausState(std::vector<SymMatrix>(p, c * SymMatrix::identity(n)));
  }

  /// (I_n, ..., I_n) / (n p): the barycenter of the non-commutative simplex.
  static KrausState barycenter(Index n, std::size_t p) {
    return constant(n, p, 1.0 / (static_cast<double>(n) * static_cast<double>(p)));
  }

  std::size_t size() const noexcept { return blocks_.size(); }
  Index dim() const noexcept { return blocks_.empty() ? 0 : blocks_.front().dim(); }
  const SymMatrix& operator[](std::size_t j) const { return blocks_[j]; }
  SymMatrix& operator[](std::size_t j) { return blocks_[j]; }
  const std::vector<SymMatrix>& blocks() const noexcept { return blocks_; }

  /// <I_n^p, X> = sum_j trace(X_j).
  double total_trace() const {
    double s = 0.0;
    for (const auto& b : blocks_) s += b.trace();
    return s;
  }

  double frobenius() const {
    double s = 0.0;
    for (const auto& b : blocks_) s += b.mat().squaredNorm();
    return std::sqrt(s);
  }

  bool all_finite() const {
    for (const auto& b : blocks_)
      if (!b.all_finite()) return false;
    return true;
  }

  KrausState& operator*=(double a) {
    for (auto& b : blocks_) b *= a;
    return *this;
  }
  friend KrausState operator*(double a, KrausState x) { return x *= a; }

  friend double distance(const KrausState& a, const KrausState& b) {
    if (a.size() != b.size()) throw UsageError("distance: state sizes differ");
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += (a[j].mat() - b[j].mat()).squaredNorm();
    return std::sqrt(s);
  }

 private:
  std::vector<SymMatrix> blocks_;
};

struct EigenResult {
  KrausState state;
  double lambda = 0.0;
  double rho_cert = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
  double epsilon = 0.0;
  /// Absolute shift actually added to each edge term.
  double shift = 0.0;
  bool converged = false;
  /// Successive-difference norms, one per iteration.
  std::vector<double> history;
};

struct KrausOptions {
  Selection selection = Selection::trace();
  double eps = 1e-3;
  /// Measure eps against the barycenter block scale: the shift applied to
  /// each edge term is eps / (n p) * I, so its weight relative to the
  /// normalized blocks does not grow with the node count. When false the
  /// shift is eps * I.
  bool eps_relative = true;
  double tol = 1e-9;
  std::size_t max_iter = 10'000;
  unsigned threads = 1;
  std::optional<KrausState> x0;
};

namespace detail {

inline void check_instance(const MatrixFamily& family, const Automaton& aut) {
  if (family.size() != aut.alphabet_size()) {
    throw UsageError("family has " + std::to_string(family.size()) + " matrices but the automaton alphabet has " +
                     std::to_string(aut.alphabet_size()) + " letters");
  }
}

inline void check_state(const KrausState& x, Index n, const Automaton& aut) {
  if (x.size() != aut.node_count() || x.dim() != n) {
    throw UsageError("state shape (" + std::to_string(x.size()) + " x " + std::to_string(x.dim()) +
                     ") does not match instance (" + std::to_string(aut.node_count()) + " x " + std::to_string(n) + ")");
  }
}

}  // namespace detail

/// One application of T^sel with the eps I shift applied to each edge term.
inline KrausState apply_T(const KrausState& x, const MatrixFamily& family, const Automaton& aut, const Selection& sel,
                          double eps, unsigned threads = 1) {
  detail::check_instance(family, aut);
  detail::check_state(x, family.dim(), aut);
  if (eps < 0) throw UsageError("apply_T: negative eps");
  std::vector<SymMatrix> out(aut.node_count());
  parallel_for(aut.node_count(), threads, [&](std::size_t j) {
    auto in = aut.incoming(j);
    if (in.empty()) throw InstanceError("apply_T: node " + std::to_string(j) + " has no incoming transition");
    std::vector<SymMatrix> terms;
    terms.reserve(in.size());
    for (const auto& e : in) {
      SymMatrix t = congruence(family[e.letter], x[e.from]);
      if (eps > 0) t.shift(eps);
      terms.push_back(std::move(t));
    }
    out[j] = mub_fold(terms, sel);
  });
  return KrausState(std::move(out));
}

/// rho such that rho^2 X_j >= A_s^T X_i A_s on every edge, computed as the
/// max over edges of sqrt(lambda_max(L_j^{-1} A_s^T X_i A_s L_j^{-T})) with
/// X_j = L_j L_j^T.
inline double certify(const KrausState& x, const MatrixFamily& family, const Automaton& aut) {
  detail::check_instance(family, aut);
  detail::check_state(x, family.dim(), aut);
  std::vector<Eigen::LLT<Matrix>> chol;
  chol.reserve(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    chol.emplace_back(x[j].mat());
    if (chol.back().info() != Eigen::Success) {
      throw DomainError("certify: X_" + std::to_string(j) + " is not positive definite", min_eigenvalue(x[j]));
    }
  }
  double worst = 0.0;
  for (const auto& e : aut.edges()) {
    SymMatrix m = congruence(family[e.letter], x[e.from]);
    const auto l = chol[e.to].matrixL();
    Matrix y = l.solve(m.mat());
    Matrix w = l.solve(y.transpose());
    worst = std::max(worst, max_eigenvalue(SymMatrix(w)));
  }
  return std::sqrt(std::max(0.0, worst));
}

/// min over edges of lambda_min(rho^2 X_j - A_s^T X_i A_s); >= 0 for a valid certificate.
inline double certificate_margin(const KrausState& x, const MatrixFamily& family, const Automaton& aut, double rho) {
  detail::check_instance(family, aut);
  detail::check_state(x, family.dim(), aut);
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& e : aut.edges()) {
    SymMatrix d = rho * rho * x[e.to] - congruence(family[e.letter], x[e.from]);
    margin = std::min(margin, min_eigenvalue(d));
  }
  return margin;
}

/// v(z) = max_j sqrt(z^T X_j z).
inline double extremal_norm(const KrausState& x, const Vector& z) {
  double v = 0.0;
  for (const auto& b : x.blocks()) {
    if (b.dim() != z.size()) throw UsageError("extremal_norm: dimension mismatch");
    v = std::max(v, z.dot(b.mat() * z));
  }
  return std::sqrt(v);
}

namespace detail {

template <typename Update>
EigenResult eigen_iterate(const MatrixFamily& family, const Automaton& aut, const KrausOptions& opt, Update&& update) {
  check_instance(family, aut);
  if (!(opt.tol > 0)) throw UsageError("km_iterate: tol must be positive");
  const Index n = family.dim();
  KrausState x = opt.x0 ? *opt.x0 : KrausState::barycenter(n, aut.node_count());
  check_state(x, n, aut);
  const double t0 = x.total_trace();
  if (!(t0 > 0) || !std::isfinite(t0)) throw UsageError("km_iterate: initial state must have positive trace");
  x *= 1.0 / t0;

  if (!(opt.eps >= 0)) throw UsageError("km_iterate: eps must be non-negative");
  const double shift =
      opt.eps_relative ? opt.eps / (static_cast<double>(n) * static_cast<double>(aut.node_count())) : opt.eps;

  EigenResult r;
  r.epsilon = opt.eps;
  r.shift = shift;
  for (std::size_t k = 1; k <= opt.max_iter; ++k) {
    KrausState tx = apply_T(x, family, aut, opt.selection, shift, opt.threads);
    const double s = tx.total_trace();
    if (!(s > 0) || !std::isfinite(s)) throw DivergenceError("km_iterate: degenerate T(X) trace", k);
    tx *= 1.0 / s;
    KrausState next = update(std::move(tx), x, k);
    // renormalize onto the simplex to kill rounding drift
    next *= 1.0 / next.total_trace();
    if (!next.all_finite()) throw DivergenceError("km_iterate: non-finite iterate", k);
    const double diff = distance(next, x);
    x = std::move(next);
    r.iterations = k;
    r.history.push_back(diff);
    if (diff <= opt.tol) {
      r.converged = true;
      break;
    }
  }
  KrausState tx = apply_T(x, family, aut, opt.selection, shift, opt.threads);
  r.lambda = tx.total_trace();
  tx *= 1.0 / r.lambda;
  r.residual = distance(tx, x);
  r.rho_cert = certify(x, family, aut);
  r.state = std::move(x);
  return r;
}

}  // namespace detail

/// Damped normalized power iteration X <- (T(X)/<I,T(X)> + X) / 2 on the
/// simplex {sum_j trace X_j = 1}.
inline EigenResult km_iterate(const MatrixFamily& family, const Automaton& aut, const KrausOptions& opt = {}) {
  return detail::eigen_iterate(family, aut, opt, [](KrausState tx, const KrausState& x, std::size_t) {
    for (std::size_t j = 0; j < tx.size(); ++j) tx[j] = 0.5 * (tx[j] + x[j]);
    return tx;
  });
}

/// Multiplicative variant X <- (T(X)/<I,T(X)>) # X, blockwise geometric mean.
inline EigenResult km_iterate_multiplicative(const MatrixFamily& family, const Automaton& aut,
                                             const KrausOptions& opt = {}) {
  return detail::eigen_iterate(family, aut, opt, [&](KrausState tx, const KrausState& x, std::size_t k) {
    try {
      parallel_for(tx.size(), opt.threads, [&](std::size_t j) { tx[j] = geometric_mean(tx[j], x[j]); });
    } catch (const DomainError& e) {
      throw DivergenceError(std::string("km_iterate_multiplicative: lost positive definiteness: ") + e.what(), k);
    }
    return tx;
  });
}

}  // namespace tropkraus
