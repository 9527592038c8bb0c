#pragma once

// Shared fixtures and independent reference computations for the test suites.

#include <cmath>
#include <vector>

#include "tropkraus/automaton.hpp"
#include "tropkraus/loewner.hpp"
#include "tropkraus/matkernel.hpp"
#include "tropkraus/random.hpp"
#include "tropkraus/riccati.hpp"

namespace tk_test {

using namespace tropkraus;

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline SymMatrix random_sym(Index n, Rng& rng) { return SymMatrix(gaussian_matrix(n, n, rng)); }

/// Well-conditioned PD matrix G G^T / n + 0.1 I.
inline SymMatrix random_pd(Index n, Rng& rng) {
  SymMatrix g = random_gram(n, n, rng);
  g.shift(0.1);
  return g;
}

inline Matrix random_invertible(Index n, Rng& rng) {
  return gaussian_matrix(n, n, rng) + 2.0 * Matrix::Identity(n, n);
}

inline MatrixFamily guglielmi_pair() {
  Matrix a1(3, 3), a2(3, 3);
  a1 << -1, 1, -1, -1, -1, 1, 0, 1, 1;
  a2 << -1, 1, -1, -1, -1, 0, 1, 1, 1;
  return MatrixFamily({a1, a2});
}

inline double guglielmi_jsr() { return 1.78893; }

/// Classical RK4 for X' = M X from X(0) = I over [0, 1].
inline Matrix expm_by_ode(const Matrix& m, int steps = 4000) {
  const double h = 1.0 / steps;
  Matrix x = Matrix::Identity(m.rows(), m.cols());
  for (int k = 0; k < steps; ++k) {
    Matrix k1 = m * x;
    Matrix k2 = m * (x + 0.5 * h * k1);
    Matrix k3 = m * (x + 0.5 * h * k2);
    Matrix k4 = m * (x + h * k3);
    x += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return x;
}

/// Explicit midpoint rule for the Riccati ODE with a fine fixed step; kept
/// separate from the library's RK4 so the two integrators validate each other.
inline Matrix riccati_midpoint(const LQProblem& prob, std::size_t s, const Matrix& p0, double tau, int steps = 20000) {
  const Matrix& a = prob.mode(s).a;
  const Matrix& d = prob.mode(s).d.mat();
  const Matrix& q = prob.qctrl(s).mat();
  auto f = [&](const Matrix& p) -> Matrix { return a.transpose() * p + p * a + p * q * p + d; };
  const double h = tau / steps;
  Matrix p = p0;
  for (int k = 0; k < steps; ++k) p += h * f(p + 0.5 * h * f(p));
  return p;
}

/// Stable random switched LQ instance: A = G/sqrt(n) - 1.5 I, one control
/// column B with entries of size 0.3, D a Gram matrix of norm about 0.5.
inline LQProblem random_stable_lq(Index n, std::size_t m, Rng& rng) {
  std::vector<LQMode> modes;
  for (std::size_t s = 0; s < m; ++s) {
    Matrix a = gaussian_matrix(n, n, rng) / std::sqrt(static_cast<double>(n)) - 1.5 * Matrix::Identity(n, n);
    Matrix b = 0.3 * gaussian_matrix(n, 1, rng);
    SymMatrix d = 0.5 * random_gram(n, n, rng);
    modes.push_back({a, b, d});
  }
  return LQProblem(std::move(modes), 1.0);
}

/// Random instance with a finite value function: x^T A x <= -c_a |x|^2 for
/// every mode, ||B|| = 1, D positive definite with ||D|| = delta, and gamma
/// set so that c_a^2 gamma^2 = margin * ||B||^2 * delta. The last condition
/// makes p |x|^2 a supersolution for some p > 0.
inline LQProblem dissipative_lq(Index n, std::size_t m, Rng& rng, double delta = 5.0, double c_a = 1.0,
                                double margin = 2.0) {
  std::vector<LQMode> modes;
  for (std::size_t s = 0; s < m; ++s) {
    Matrix k = gaussian_matrix(n, n, rng) / std::sqrt(static_cast<double>(n));
    const double top = max_eigenvalue(SymMatrix(k));
    Matrix a = k - (c_a + top) * Matrix::Identity(n, n);
    Matrix b = gaussian_matrix(n, 1, rng);
    b /= b.norm();
    SymMatrix d = random_pd(n, rng);
    d = d * (delta / max_eigenvalue(d));
    modes.push_back({a, b, d});
  }
  return LQProblem(std::move(modes), std::sqrt(margin * delta) / c_a);
}

/// Means of all simple cycles, enumerated from their smallest node.
inline double max_cycle_mean_exhaustive(const Automaton& aut, const std::vector<double>& w) {
  const auto es = aut.edges();
  const std::size_t p = aut.node_count();
  std::vector<std::vector<std::pair<std::size_t, double>>> out(p);
  for (std::size_t e = 0; e < es.size(); ++e) out[es[e].from].push_back({es[e].to, w[e]});
  double best = -std::numeric_limits<double>::infinity();
  std::vector<bool> on(p, false);
  for (std::size_t start = 0; start < p; ++start) {
    // depth-first over simple paths from start through nodes > start
    auto dfs = [&](auto&& self, std::size_t v, double sum, std::size_t len) -> void {
      for (auto [u, wt] : out[v]) {
        if (u == start) best = std::max(best, (sum + wt) / static_cast<double>(len + 1));
        else if (u > start && !on[u]) {
          on[u] = true;
          self(self, u, sum + wt, len + 1);
          on[u] = false;
        }
      }
    };
    on[start] = true;
    dfs(dfs, start, 0.0, 0);
    on[start] = false;
  }
  return best;
}

inline double scale_of(const SymMatrix& p, const SymMatrix& q) { return 1.0 + std::max(p.max_abs(), q.max_abs()); }

inline bool dominates(const SymMatrix& x, const SymMatrix& y, double tol) { return min_eigenvalue(x - y) >= -tol; }

/// Random pair with neither P >= Q nor Q >= P.
inline std::pair<SymMatrix, SymMatrix> incomparable_pd_pair(Index n, Rng& rng) {
  while (true) {
    SymMatrix p = random_pd(n, rng), q = random_pd(n, rng);
    if (!dominates(p, q, 0) && !dominates(q, p, 0)) return {p, q};
  }
}

/// Upper bounds of {P, Q}: other minimal upper bounds, the one-sided
/// |Q - P| corrections, and PSD perturbations of `x`.
inline std::vector<SymMatrix> feasible_upper_bounds(const SymMatrix& p, const SymMatrix& q, const SymMatrix& x, int count,
                                             Rng& rng) {
  const Index n = p.dim();
  std::vector<SymMatrix> zs;
  zs.push_back(p + abs_sym(q - p));
  zs.push_back(q + abs_sym(p - q));
  while (static_cast<int>(zs.size()) < count) {
    switch (zs.size() % 3) {
      case 0: zs.push_back(mub_pair(p, q, random_pd(n, rng))); break;
      case 1: zs.push_back(x + rng.uniform(0.0, 0.1) * random_gram(n, 1, rng)); break;
      default: {
        SymMatrix c = random_pd(n, rng);
        auto [ch, cih] = sqrt_and_inv_sqrt_pd(c);
        Matrix corr = cih.mat() * abs_sym(SymMatrix(Matrix(ch.mat() * (q - p).mat() * ch.mat()))).mat() * cih.mat();
        zs.push_back(SymMatrix(Matrix(p.mat() + corr)));
      }
    }
  }
  return zs;
}

}  // namespace tk_test
