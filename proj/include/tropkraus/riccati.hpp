#pragma once

// Switched linear-quadratic problems: Riccati flows through the Hamiltonian
// exponential, the tropical map M_tau, its fixed-point iteration and
// diagnostics of the resulting max-of-quadratics value function.
//
// Mode sigma has dynamics (A, B), running reward 1/2 x^T D x and control
// penalty gamma^2/2 |u|^2, giving Q = gamma^{-2} B B^T and the flow
//
//   dP/dt = A^T P + P A + P Q P + D.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "tropkraus/automaton.hpp"
#include "tropkraus/kraus.hpp"
#include "tropkraus/loewner.hpp"
#include "tropkraus/matkernel.hpp"
#include "tropkraus/parallel.hpp"
#include "tropkraus/random.hpp"

namespace tropkraus {

struct LQMode {
  SquareMatrix a;
  Matrix b;
  SymMatrix d;
};

class LQProblem {
 public:
  LQProblem(std::vector<LQMode> modes, double gamma) : modes_(std::move(modes)), gamma_(gamma) {
    if (modes_.empty()) throw UsageError("LQProblem: no modes");
    if (!(gamma_ > 0) || !std::isfinite(gamma_)) throw UsageError("LQProblem: gamma must be positive");
    n_ = modes_.front().a.rows();
    if (n_ == 0) throw UsageError("LQProblem: zero dimension");
    for (const auto& md : modes_) {
      require_square_finite(md.a, "LQProblem A");
      if (md.a.rows() != n_ || md.b.rows() != n_ || md.d.dim() != n_) {
        throw UsageError("LQProblem: mode dimensions disagree");
      }
      if (!md.b.allFinite() || !md.d.all_finite()) throw UsageError("LQProblem: non-finite entry");
      qctrl_.emplace_back(Matrix(md.b * md.b.transpose() / (gamma_ * gamma_)));
    }
  }

  Index dim() const noexcept { return n_; }
  std::size_t mode_count() const noexcept { return modes_.size(); }
  double gamma() const noexcept { return gamma_; }
  const LQMode& mode(std::size_t s) const { return modes_.at(s); }
  const std::vector<LQMode>& modes() const noexcept { return modes_; }
  /// gamma^{-2} B B^T
  const SymMatrix& qctrl(std::size_t s) const { return qctrl_.at(s); }

 private:
  std::vector<LQMode> modes_;
  std::vector<SymMatrix> qctrl_;
  double gamma_;
  Index n_ = 0;
};

/// [[-A, -Q], [D, A^T]]; Y X^{-1} of its exponential flow solves the Riccati ODE.
inline SquareMatrix hamiltonian_matrix(const LQProblem& prob, std::size_t sigma) {
  if (sigma >= prob.mode_count()) throw UsageError("hamiltonian_matrix: mode index out of range");
  const Index n = prob.dim();
  const auto& md = prob.mode(sigma);
  Matrix h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = -md.a;
  h.topRightCorner(n, n) = -prob.qctrl(sigma).mat();
  h.bottomLeftCorner(n, n) = md.d.mat();
  h.bottomRightCorner(n, n) = md.a.transpose();
  return h;
}

/// X(tau) is declared singular below this reciprocal condition number.
inline constexpr double kEscapeRcond = 1e-12;

/// Substep length bound: tau * ||H||_1 / substeps stays below this.
inline constexpr double kSubstepNorm = 0.5;
inline constexpr std::size_t kMaxSubsteps = 1024;
/// A substep multiplying the norm of P by more than this counts as an escape.
inline constexpr double kEscapeGrowth = 1e8;

/// Time-tau Riccati flows of every mode. Each flow is composed from equal
/// substeps sharing one exponential per mode. Requiring det X > 0 after every
/// substep catches a finite-time escape inside [0, tau]; past the pole the
/// endpoint formula alone would return a finite but meaningless matrix.
class RiccatiPropagator {
 public:
  RiccatiPropagator(const LQProblem& prob, double tau) : n_(prob.dim()), tau_(tau) {
    if (!(tau >= 0) || !std::isfinite(tau)) throw UsageError("RiccatiPropagator: tau must be non-negative");
    exps_.reserve(prob.mode_count());
    for (std::size_t s = 0; s < prob.mode_count(); ++s) {
      const Matrix h = hamiltonian_matrix(prob, s);
      const double norm1 = h.cwiseAbs().colwise().sum().maxCoeff();
      const auto k = static_cast<std::size_t>(
          std::clamp(std::ceil(tau * norm1 / kSubstepNorm), 1.0, static_cast<double>(kMaxSubsteps)));
      steps_.push_back(k);
      exps_.push_back(matexp(Matrix(h * (tau / static_cast<double>(k)))));
    }
  }

  double tau() const noexcept { return tau_; }
  std::size_t mode_count() const noexcept { return exps_.size(); }
  std::size_t substeps(std::size_t sigma) const { return steps_.at(sigma); }

  /// P(tau) = Y X^{-1} with (X; Y) = exp(H h) (I; P) applied substep by substep.
  SymMatrix flow(std::size_t sigma, const SymMatrix& p0) const {
    if (sigma >= exps_.size()) throw UsageError("riccati_flow: mode index out of range");
    if (p0.dim() != n_) throw UsageError("riccati_flow: dimension mismatch");
    if (tau_ == 0.0) return p0;
    const Matrix& e = exps_[sigma];
    Matrix p = p0.mat();
    for (std::size_t k = 0; k < steps_[sigma]; ++k) {
      Matrix x = e.topLeftCorner(n_, n_) + e.topRightCorner(n_, n_) * p;
      Matrix y = e.bottomLeftCorner(n_, n_) + e.bottomRightCorner(n_, n_) * p;
      Eigen::PartialPivLU<Matrix> lu(x.transpose());
      if (!(lu.rcond() > kEscapeRcond) || !(lu.determinant() > 0)) throw escape(x, sigma);
      Matrix pt = lu.solve(y.transpose());
      if (!pt.allFinite() || pt.norm() > kEscapeGrowth * (1.0 + p.norm())) throw escape(x, sigma);
      p = 0.5 * (pt + pt.transpose());
    }
    return SymMatrix(p);
  }

 private:
  EscapeError escape(const Matrix& x, std::size_t sigma) const {
    double smin = 0.0;
    if (x.allFinite()) {
      Eigen::JacobiSVD<Matrix> svd(x);
      smin = svd.singularValues()(n_ - 1);
    }
    return EscapeError("Riccati flow of mode " + std::to_string(sigma) + " escapes before tau = " + std::to_string(tau_) +
                           "; try a smaller tau",
                       smin);
  }

  Index n_;
  double tau_;
  std::vector<Matrix> exps_;
  std::vector<std::size_t> steps_;
};

inline SymMatrix riccati_flow(const LQProblem& prob, std::size_t sigma, const SymMatrix& p0, double tau) {
  if (sigma >= prob.mode_count()) throw UsageError("riccati_flow: mode index out of range");
  if (tau == 0.0) {
    if (p0.dim() != prob.dim()) throw UsageError("riccati_flow: dimension mismatch");
    return p0;
  }
  LQProblem single({prob.mode(sigma)}, prob.gamma());
  return RiccatiPropagator(single, tau).flow(0, p0);
}

/// (M_tau)_j(X) = u { Ricc_{tau,s}(X_i) : i.s = j }.
inline KrausState apply_M_tau(const KrausState& x, const RiccatiPropagator& prop, const Automaton& aut,
                              const Selection& sel, unsigned threads = 1) {
  if (prop.mode_count() != aut.alphabet_size()) throw UsageError("apply_M_tau: mode count does not match alphabet");
  if (x.size() != aut.node_count()) throw UsageError("apply_M_tau: state size does not match automaton");
  std::vector<SymMatrix> out(aut.node_count());
  parallel_for(aut.node_count(), threads, [&](std::size_t j) {
    auto in = aut.incoming(j);
    if (in.empty()) throw InstanceError("apply_M_tau: node " + std::to_string(j) + " has no incoming transition");
    std::vector<SymMatrix> terms;
    terms.reserve(in.size());
    for (const auto& e : in) {
      try {
        terms.push_back(prop.flow(e.letter, x[e.from]));
      } catch (const EscapeError& err) {
        throw EscapeError(std::string(err.what()) + " on edge (" + std::to_string(e.from) + ", " +
                              std::to_string(e.letter) + ", " + std::to_string(e.to) + ")",
                          err.smallest_singular_value());
      }
    }
    out[j] = mub_fold(terms, sel);
  });
  return KrausState(std::move(out));
}

inline KrausState apply_M_tau(const KrausState& x, const LQProblem& prob, const Automaton& aut, const Selection& sel,
                              double tau) {
  return apply_M_tau(x, RiccatiPropagator(prob, tau), aut, sel);
}

/// V(z) = max_i z^T X_i z over the nodes of an automaton.
struct ValueApprox {
  KrausState state;
  double tau = 0.0;
  Automaton automaton;
};

struct HjbOptions {
  Selection selection = Selection::det();
  double tau = 0.1;
  double tol = 1e-8;
  std::size_t max_iter = 1000;
  /// Default start X_i = init_scale * I.
  double init_scale = 0.1;
  double divergence_bound = 1e12;
  unsigned threads = 1;
  std::optional<KrausState> x0;
};

struct HjbResult {
  ValueApprox value;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

/// Plain fixed-point iteration X <- M_tau(X); the map is not homogeneous, so
/// no normalization is applied.
inline HjbResult hjb_fixed_point(const LQProblem& prob, const Automaton& aut, const HjbOptions& opt = {}) {
  if (prob.mode_count() != aut.alphabet_size()) throw UsageError("hjb_fixed_point: mode count does not match alphabet");
  if (!(opt.tol > 0)) throw UsageError("hjb_fixed_point: tol must be positive");
  KrausState x = opt.x0 ? *opt.x0 : KrausState::constant(prob.dim(), aut.node_count(), opt.init_scale);
  if (x.size() != aut.node_count() || x.dim() != prob.dim()) throw UsageError("hjb_fixed_point: bad initial state");
  const RiccatiPropagator prop(prob, opt.tau);
  HjbResult r{ValueApprox{x, opt.tau, aut}, 0.0, 0, false, {}};
  for (std::size_t k = 1; k <= opt.max_iter; ++k) {
    KrausState next = apply_M_tau(x, prop, aut, opt.selection, opt.threads);
    if (!next.all_finite() || next.frobenius() > opt.divergence_bound) {
      throw DivergenceError("hjb_fixed_point: iterate norm exceeded bound (history length " +
                                std::to_string(r.history.size()) + ")",
                            k);
    }
    const double diff = distance(next, x);
    x = std::move(next);
    r.iterations = k;
    r.residual = diff;
    r.history.push_back(diff);
    if (diff <= opt.tol) {
      r.converged = true;
      break;
    }
  }
  r.value.state = std::move(x);
  return r;
}

struct ValueGradient {
  double value = 0.0;
  Vector grad;
  std::size_t argmax = 0;
};

/// V(x) = max_i x^T X_i x and the gradient 2 X_{i*} x of the first maximizing piece.
inline ValueGradient value_and_gradient(const KrausState& x, const Vector& z) {
  ValueGradient g;
  g.value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].dim() != z.size()) throw UsageError("value_and_gradient: dimension mismatch");
    const double v = z.dot(x[i].mat() * z);
    if (v > g.value) {
      g.value = v;
      g.argmax = i;
    }
  }
  g.grad = 2.0 * (x[g.argmax].mat() * z);
  return g;
}

inline ValueGradient value_and_gradient(const ValueApprox& va, const Vector& z) {
  return value_and_gradient(va.state, z);
}

/// H(x, p) = max_s (A_s x)^T p + 1/2 x^T D_s x + 1/2 p^T Q_s p.
inline double hamiltonian(const LQProblem& prob, const Vector& x, const Vector& p) {
  double h = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < prob.mode_count(); ++s) {
    const auto& md = prob.mode(s);
    const double v = (md.a * x).dot(p) + 0.5 * x.dot(md.d.mat() * x) + 0.5 * p.dot(prob.qctrl(s).mat() * p);
    h = std::max(h, v);
  }
  return h;
}

/// max |H(x, p(x))| over x = cos(t) e1 + sin(t) e2 on a uniform grid of
/// `samples` angles. The Riccati flow propagates the quadratic 1/2 x^T P x, so
/// the costate of the active piece is X_{i*} x (half the gradient of V).
inline double backsub_error(const ValueApprox& va, const LQProblem& prob, int samples = 720) {
  if (prob.dim() < 2) throw UsageError("backsub_error: needs dimension >= 2");
  if (samples < 1) throw UsageError("backsub_error: samples must be positive");
  double worst = 0.0;
  Vector x = Vector::Zero(prob.dim());
  for (int k = 0; k < samples; ++k) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(samples);
    x(0) = std::cos(t);
    x(1) = std::sin(t);
    const auto g = value_and_gradient(va.state, x);
    const Vector p = 0.5 * g.grad;
    worst = std::max(worst, std::abs(hamiltonian(prob, x, p)));
  }
  return worst;
}

/// max over modes s, pieces i and sampled unit z of
/// z^T Ricc_{tau,s}(X_i) z - V(z); non-positive for a sub-invariant V.
inline double subinvariance_check(const ValueApprox& va, const LQProblem& prob, double tau, int samples = 1000,
                                  std::uint64_t seed = 0x5b1) {
  if (samples < 1) throw UsageError("subinvariance_check: samples must be positive");
  const RiccatiPropagator prop(prob, tau);
  std::vector<Vector> zs;
  zs.reserve(static_cast<std::size_t>(samples));
  Rng rng(seed);
  for (int k = 0; k < samples; ++k) zs.push_back(random_unit_vector(prob.dim(), rng));
  std::vector<double> v(zs.size());
  for (std::size_t k = 0; k < zs.size(); ++k) v[k] = value_and_gradient(va.state, zs[k]).value;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < prob.mode_count(); ++s) {
    for (std::size_t i = 0; i < va.state.size(); ++i) {
      const SymMatrix f = prop.flow(s, va.state[i]);
      for (std::size_t k = 0; k < zs.size(); ++k) worst = std::max(worst, zs[k].dot(f.mat() * zs[k]) - v[k]);
    }
  }
  return worst;
}

}  // namespace tropkraus
