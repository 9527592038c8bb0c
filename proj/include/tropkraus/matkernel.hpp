#pragma once

// Dense symmetric-matrix kernel used by every other module.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "tropkraus/error.hpp"

namespace tropkraus {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// General square matrix (A_sigma, Hamiltonian blocks). Kept as a plain Eigen
/// matrix; require_square_finite() enforces the invariants at API boundaries.
using SquareMatrix = Matrix;

inline void require_square_finite(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw UsageError(std::string(what) + ": matrix is " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ", expected square");
  }
  if (!m.allFinite()) throw UsageError(std::string(what) + ": non-finite entry");
}

/// Real symmetric matrix. Every constructor symmetrizes its input, so the
/// stored entries are exactly symmetric.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(Index n) : m_(Matrix::Zero(n, n)) {}

  explicit SymMatrix(const Matrix& m) {
    if (m.rows() != m.cols()) {
      throw UsageError("SymMatrix: matrix is " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + ", expected square");
    }
    m_ = 0.5 * (m + m.transpose());
  }

  SymMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    const auto n = static_cast<Index>(rows.size());
    Matrix m(n, n);
    Index i = 0;
    for (const auto& row : rows) {
      if (static_cast<Index>(row.size()) != n) throw UsageError("SymMatrix: ragged initializer");
      Index j = 0;
      for (double v : row) m(i, j++) = v;
      ++i;
    }
    *this = SymMatrix(m);
  }

  static SymMatrix zero(Index n) { return SymMatrix(n); }
  static SymMatrix identity(Index n) { return SymMatrix(Matrix::Identity(n, n)); }
  static SymMatrix diagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }
  static SymMatrix diagonal(std::initializer_list<double> d) {
    Vector v(static_cast<Index>(d.size()));
    Index i = 0;
    for (double x : d) v(i++) = x;
    return diagonal(v);
  }

  Index dim() const noexcept { return m_.rows(); }
  const Matrix& mat() const noexcept { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  double trace() const { return m_.trace(); }
  double frobenius() const { return m_.norm(); }
  double max_abs() const { return m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff(); }
  bool all_finite() const { return m_.allFinite(); }

  SymMatrix& operator+=(const SymMatrix& o) {
    check_same(o);
    m_ += o.m_;
    return *this;
  }
  SymMatrix& operator-=(const SymMatrix& o) {
    check_same(o);
    m_ -= o.m_;
    return *this;
  }
  SymMatrix& operator*=(double a) {
    m_ *= a;
    return *this;
  }
  SymMatrix& operator/=(double a) {
    m_ /= a;
    return *this;
  }
  /// Adds a*I in place.
  SymMatrix& shift(double a) {
    m_.diagonal().array() += a;
    return *this;
  }

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
  friend SymMatrix operator/(SymMatrix a, double s) { return a /= s; }
  friend SymMatrix operator-(SymMatrix a) {
    a.m_ = -a.m_;
    return a;
  }
  friend bool operator==(const SymMatrix& a, const SymMatrix& b) { return a.m_ == b.m_; }

 private:
  void check_same(const SymMatrix& o) const {
    if (o.dim() != dim()) {
      throw UsageError("SymMatrix: dimension mismatch " + std::to_string(dim()) + " vs " +
                       std::to_string(o.dim()));
    }
  }

  Matrix m_;
};

/// A^T X A, symmetrized.
inline SymMatrix congruence(const Matrix& a, const SymMatrix& x) {
  if (a.rows() != x.dim()) throw UsageError("congruence: dimension mismatch");
  Matrix xa = x.mat() * a;
  Matrix r = a.transpose() * xa;
  return SymMatrix(r);
}

inline double frobenius_distance(const SymMatrix& a, const SymMatrix& b) {
  return (a.mat() - b.mat()).norm();
}

struct EigenDecomposition {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns
};

/// Symmetric eigendecomposition M = U diag(lambda) U^T, eigenvalues ascending.
inline EigenDecomposition eig_sym(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat());
  if (es.info() != Eigen::Success || !es.eigenvalues().allFinite()) {
    double residual = std::numeric_limits<double>::infinity();
    if (es.eigenvalues().size() == m.dim()) {
      residual = (m.mat() * es.eigenvectors() - es.eigenvectors() * es.eigenvalues().asDiagonal()).norm();
    }
    throw NumericFailure("eig_sym: eigensolver did not converge", residual);
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

inline Vector eigenvalues_sym(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success || !es.eigenvalues().allFinite()) {
    throw NumericFailure("eigenvalues_sym: eigensolver did not converge",
                         std::numeric_limits<double>::infinity());
  }
  return es.eigenvalues();
}

/// U f(diag) U^T, symmetrized.
template <typename F>
SymMatrix spectral_map(const EigenDecomposition& e, F&& f) {
  Vector d = e.values.unaryExpr(std::forward<F>(f));
  Matrix r = e.vectors * d.asDiagonal() * e.vectors.transpose();
  return SymMatrix(r);
}

/// Relative floor for positive-definiteness checks: 1e-12 (1 + trace(M)/n).
inline double pd_tolerance(const SymMatrix& m) {
  if (m.dim() == 0) return 1e-12;
  return 1e-12 * (1.0 + m.trace() / static_cast<double>(m.dim()));
}

inline double min_eigenvalue(const SymMatrix& m) { return eigenvalues_sym(m)(0); }
inline double max_eigenvalue(const SymMatrix& m) { return eigenvalues_sym(m)(m.dim() - 1); }

inline bool is_psd(const SymMatrix& m, double tol) { return min_eigenvalue(m) >= -tol; }

inline void require_pd(const EigenDecomposition& e, double tol, const char* what) {
  if (!(e.values(0) > tol)) throw DomainError(std::string(what) + ": matrix is not positive definite", e.values(0));
}

/// Unique positive definite square root.
inline SymMatrix sqrt_pd(const SymMatrix& m, double tol) {
  auto e = eig_sym(m);
  require_pd(e, tol, "sqrt_pd");
  return spectral_map(e, [](double x) { return std::sqrt(x); });
}
inline SymMatrix sqrt_pd(const SymMatrix& m) { return sqrt_pd(m, pd_tolerance(m)); }

/// M^{1/2} and M^{-1/2} from a single eigendecomposition.
inline std::pair<SymMatrix, SymMatrix> sqrt_and_inv_sqrt_pd(const SymMatrix& m) {
  auto e = eig_sym(m);
  require_pd(e, pd_tolerance(m), "sqrt_and_inv_sqrt_pd");
  return {spectral_map(e, [](double x) { return std::sqrt(x); }),
          spectral_map(e, [](double x) { return 1.0 / std::sqrt(x); })};
}

/// |M| = (M M^T)^{1/2} = U diag(|lambda|) U^T.
inline SymMatrix abs_sym(const SymMatrix& m) {
  return spectral_map(eig_sym(m), [](double x) { return std::abs(x); });
}

inline SymMatrix inverse_pd(const SymMatrix& m) {
  Eigen::LLT<Matrix> llt(m.mat());
  if (llt.info() != Eigen::Success) throw DomainError("inverse_pd: Cholesky failed", min_eigenvalue(m));
  Matrix inv = llt.solve(Matrix::Identity(m.dim(), m.dim()));
  return SymMatrix(inv);
}

/// Matrix exponential (scaling and squaring with a degree-13 Pade approximant).
inline SquareMatrix matexp(const SquareMatrix& m) {
  require_square_finite(m, "matexp");
  Matrix r = m.exp();
  if (!r.allFinite()) {
    throw NumericFailure("matexp: overflow", m.cwiseAbs().colwise().sum().maxCoeff());
  }
  return r;
}

/// Frobenius scalar product <P, Q> = trace(PQ).
inline double inner(const SymMatrix& p, const SymMatrix& q) {
  if (p.dim() != q.dim()) throw UsageError("inner: dimension mismatch");
  return (p.mat() * q.mat()).trace();
}

/// Riemannian barycenter P # Q = P^{1/2} (P^{-1/2} Q P^{-1/2})^{1/2} P^{1/2}.
inline SymMatrix geometric_mean(const SymMatrix& p, const SymMatrix& q) {
  if (p.dim() != q.dim()) throw UsageError("geometric_mean: dimension mismatch");
  const double qmin = min_eigenvalue(q);
  if (!(qmin > pd_tolerance(q))) throw DomainError("geometric_mean: second argument not positive definite", qmin);
  auto [s, si] = sqrt_and_inv_sqrt_pd(p);
  SymMatrix inner_sqrt = sqrt_pd(SymMatrix(Matrix(si.mat() * q.mat() * si.mat())));
  return SymMatrix(Matrix(s.mat() * inner_sqrt.mat() * s.mat()));
}

}  // namespace tropkraus
