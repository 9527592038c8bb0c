#pragma once

// Independent reference computations: product enumeration bounds on the
// joint spectral radius, Karp's maximum cycle mean, and RK4 integration of
// the Riccati ODE.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "tropkraus/automaton.hpp"
#include "tropkraus/matkernel.hpp"
#include "tropkraus/riccati.hpp"

namespace tropkraus {

struct ProductBound {
  double lower = 0.0;  // max_k max_products rho(product)^{1/k}
  double upper = 0.0;  // min_k (max_products ||product||_2)^{1/k}
  std::size_t depth = 0;
};

inline double spectral_radius(const Matrix& a) {
  if (a.rows() == 1) return std::abs(a(0, 0));
  Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) throw NumericFailure("spectral_radius: eigensolver failed", 0.0);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline double norm2(const Matrix& a) {
  if (a.rows() == 1 && a.cols() == 1) return std::abs(a(0, 0));
  const double l = max_eigenvalue(SymMatrix(Matrix(a.transpose() * a)));
  return std::sqrt(std::max(0.0, l));
}

inline constexpr std::size_t kProductBudget = 1'000'000;

/// Enumerates every product of length 1..max_depth.
inline ProductBound jsr_bruteforce(const MatrixFamily& family, std::size_t max_depth,
                                   std::size_t budget = kProductBudget) {
  if (max_depth == 0) throw UsageError("jsr_bruteforce: depth must be positive");
  const std::size_t m = family.size();
  std::size_t top = 1;
  for (std::size_t k = 0; k < max_depth; ++k) {
    if (top > budget / m) throw ResourceError("jsr_bruteforce: m^depth exceeds product budget");
    top *= m;
  }
  std::vector<double> max_norm(max_depth + 1, 0.0);
  ProductBound b;
  b.depth = max_depth;

  // depth-first over prefixes; stack[k] holds the product of the first k+1 factors
  std::vector<Matrix> stack(max_depth);
  std::vector<std::size_t> choice(max_depth, 0);
  std::size_t level = 0;
  stack[0] = family[0];
  while (true) {
    const std::size_t k = level + 1;
    const Matrix& prod = stack[level];
    b.lower = std::max(b.lower, std::pow(spectral_radius(prod), 1.0 / static_cast<double>(k)));
    max_norm[k] = std::max(max_norm[k], norm2(prod));
    if (k < max_depth) {
      choice[level + 1] = 0;
      stack[level + 1] = prod * family[0];
      ++level;
      continue;
    }
    // advance to the next sibling, backtracking as needed
    while (true) {
      if (++choice[level] < m) {
        stack[level] = level == 0 ? family[choice[0]] : Matrix(stack[level - 1] * family[choice[level]]);
        break;
      }
      if (level == 0) {
        b.upper = std::numeric_limits<double>::infinity();
        for (std::size_t d = 1; d <= max_depth; ++d) {
          b.upper = std::min(b.upper, std::pow(max_norm[d], 1.0 / static_cast<double>(d)));
        }
        return b;
      }
      --level;
    }
  }
}

/// Karp's algorithm for the maximum mean weight of a cycle. weights[k] is
/// the weight of aut.edges()[k]. A virtual source with zero-weight arcs to
/// every node makes the recurrence cover graphs that are not strongly connected.
inline double max_cycle_mean(const Automaton& aut, const std::vector<double>& weights) {
  const auto edges = aut.edges();
  if (weights.size() != edges.size()) throw UsageError("max_cycle_mean: one weight per edge required");
  const std::size_t p = aut.node_count();
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  // best[k][v]: maximum weight of a walk with exactly k edges ending at v
  std::vector<std::vector<double>> best(p + 1, std::vector<double>(p, kNone));
  std::fill(best[0].begin(), best[0].end(), 0.0);
  for (std::size_t k = 1; k <= p; ++k) {
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double prev = best[k - 1][edges[e].from];
      if (prev == kNone) continue;
      best[k][edges[e].to] = std::max(best[k][edges[e].to], prev + weights[e]);
    }
  }
  double result = kNone;
  for (std::size_t v = 0; v < p; ++v) {
    if (best[p][v] == kNone) continue;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < p; ++k) {
      if (best[k][v] == kNone) continue;
      worst = std::min(worst, (best[p][v] - best[k][v]) / static_cast<double>(p - k));
    }
    result = std::max(result, worst);
  }
  return result;
}

/// Classical RK4 for dP/dt = A^T P + P A + P Q P + D, symmetrized every step.
/// A non-positive step means tau / 1000.
inline SymMatrix riccati_rk4(const LQProblem& prob, std::size_t sigma, const SymMatrix& p0, double tau,
                             double step = -1.0) {
  if (sigma >= prob.mode_count()) throw UsageError("riccati_rk4: mode index out of range");
  if (p0.dim() != prob.dim()) throw UsageError("riccati_rk4: dimension mismatch");
  if (tau == 0.0) return p0;
  if (step <= 0) step = tau / 1000.0;
  const auto steps = static_cast<std::size_t>(std::ceil(tau / step - 1e-9));
  const double h = tau / static_cast<double>(steps);
  const Matrix& a = prob.mode(sigma).a;
  const Matrix& d = prob.mode(sigma).d.mat();
  const Matrix& q = prob.qctrl(sigma).mat();
  auto rhs = [&](const Matrix& p) -> Matrix { return a.transpose() * p + p * a + p * q * p + d; };
  Matrix p = p0.mat();
  for (std::size_t k = 0; k < steps; ++k) {
    Matrix k1 = rhs(p);
    Matrix k2 = rhs(p + 0.5 * h * k1);
    Matrix k3 = rhs(p + 0.5 * h * k2);
    Matrix k4 = rhs(p + h * k3);
    p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    p = 0.5 * (p + p.transpose()).eval();
    if (!p.allFinite() || p.norm() > 1e12) {
      throw EscapeError("riccati_rk4: solution blew up at t = " + std::to_string(h * static_cast<double>(k + 1)), 0.0);
    }
  }
  return SymMatrix(p);
}

}  // namespace tropkraus
