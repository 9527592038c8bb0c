#pragma once

// Deterministic transition structures (i, sigma) -> i.sigma over a node set
// and an alphabet, plus the matrix family they act on.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "tropkraus/matkernel.hpp"
#include "tropkraus/random.hpp"

namespace tropkraus {

struct Edge {
  std::size_t from;
  std::size_t letter;
  std::size_t to;

  friend bool operator==(const Edge&, const Edge&) = default;
};

class Automaton {
 public:
  /// delta is node-major: delta[i * m + sigma] = i.sigma.
  Automaton(std::size_t m, std::size_t p, std::vector<std::size_t> delta, std::vector<std::string> labels = {})
      : m_(m), p_(p), delta_(std::move(delta)), labels_(std::move(labels)) {
    if (m_ == 0) throw UsageError("Automaton: empty alphabet");
    if (p_ == 0) throw UsageError("Automaton: no nodes");
    // Totality of delta is exactly path-completeness for deterministic graphs.
    if (delta_.size() != m_ * p_) {
      throw UsageError("Automaton: transition table has " + std::to_string(delta_.size()) + " entries, expected " +
                       std::to_string(m_ * p_));
    }
    for (std::size_t j : delta_) {
      if (j >= p_) throw UsageError("Automaton: transition target " + std::to_string(j) + " out of range");
    }
    if (!labels_.empty() && labels_.size() != p_) throw UsageError("Automaton: label count mismatch");

    edges_.reserve(m_ * p_);
    for (std::size_t i = 0; i < p_; ++i)
      for (std::size_t s = 0; s < m_; ++s) edges_.push_back({i, s, next(i, s)});
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
      return std::tie(a.to, a.from, a.letter) < std::tie(b.to, b.from, b.letter);
    });
    in_offset_.assign(p_ + 1, 0);
    for (const auto& e : edges_) ++in_offset_[e.to + 1];
    for (std::size_t j = 0; j < p_; ++j) in_offset_[j + 1] += in_offset_[j];
  }

  std::size_t alphabet_size() const noexcept { return m_; }
  std::size_t node_count() const noexcept { return p_; }
  std::size_t next(std::size_t i, std::size_t sigma) const { return delta_[i * m_ + sigma]; }
  const std::vector<std::size_t>& delta() const noexcept { return delta_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// All transitions, lexicographic in (to, from, letter).
  std::span<const Edge> edges() const noexcept { return edges_; }

  /// Transitions into node j, in canonical order.
  std::span<const Edge> incoming(std::size_t j) const {
    return std::span<const Edge>(edges_).subspan(in_offset_[j], in_offset_[j + 1] - in_offset_[j]);
  }

  friend bool operator==(const Automaton& a, const Automaton& b) {
    return a.m_ == b.m_ && a.p_ == b.p_ && a.delta_ == b.delta_ && a.labels_ == b.labels_;
  }

 private:
  std::size_t m_, p_;
  std::vector<std::size_t> delta_;
  std::vector<std::string> labels_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> in_offset_;
};

inline std::vector<Edge> edges(const Automaton& aut) { return {aut.edges().begin(), aut.edges().end()}; }

inline constexpr std::size_t kDefaultNodeCap = 1'000'000;

/// De Bruijn graph of order d: nodes are words s1..sd (base-m, s1 most
/// significant), and s1..sd . s = s2..sd s. Order 0 is the one-node automaton.
inline Automaton de_bruijn(std::size_t m, std::size_t d, std::size_t node_cap = kDefaultNodeCap) {
  if (m == 0) throw UsageError("de_bruijn: empty alphabet");
  std::size_t p = 1;
  for (std::size_t k = 0; k < d; ++k) {
    if (p > node_cap / m) {
      throw ResourceError("de_bruijn: " + std::to_string(m) + "^" + std::to_string(d) + " nodes exceed cap " +
                          std::to_string(node_cap));
    }
    p *= m;
  }
  if (p > node_cap) throw ResourceError("de_bruijn: node count exceeds cap");

  std::vector<std::size_t> delta(p * m);
  std::vector<std::string> labels(p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t s = 0; s < m; ++s) delta[i * m + s] = (i * m + s) % p;
    // base-m digits, most significant first; '.'-separated once digits need two characters
    std::vector<std::size_t> digits(d);
    std::size_t code = i;
    for (std::size_t k = d; k-- > 0; code /= m) digits[k] = code % m;
    std::string label;
    for (std::size_t k = 0; k < d; ++k) {
      if (m > 10 && k > 0) label += '.';
      label += std::to_string(digits[k]);
    }
    labels[i] = label;
  }
  return Automaton(m, p, std::move(delta), std::move(labels));
}

class MatrixFamily {
 public:
  explicit MatrixFamily(std::vector<SquareMatrix> matrices, std::vector<std::string> names = {})
      : matrices_(std::move(matrices)), names_(std::move(names)) {
    if (matrices_.empty()) throw UsageError("MatrixFamily: no matrices");
    n_ = matrices_.front().rows();
    if (n_ == 0) throw UsageError("MatrixFamily: zero dimension");
    for (const auto& a : matrices_) {
      require_square_finite(a, "MatrixFamily");
      if (a.rows() != n_) throw UsageError("MatrixFamily: non-uniform dimensions");
    }
    if (!names_.empty() && names_.size() != matrices_.size()) throw UsageError("MatrixFamily: name count mismatch");
  }

  Index dim() const noexcept { return n_; }
  std::size_t size() const noexcept { return matrices_.size(); }
  const SquareMatrix& operator[](std::size_t s) const { return matrices_[s]; }
  const std::vector<SquareMatrix>& matrices() const noexcept { return matrices_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<SquareMatrix> matrices_;
  std::vector<std::string> names_;
  Index n_ = 0;
};

inline constexpr Index kDefaultLiftCap = 4096;

/// One matrix E_ij (x) A_sigma of size n*p per edge (i, sigma, j), in
/// canonical edge order.
inline std::vector<SquareMatrix> lift(const MatrixFamily& family, const Automaton& aut,
                                      Index dim_cap = kDefaultLiftCap) {
  if (family.size() != aut.alphabet_size()) throw UsageError("lift: family size does not match alphabet");
  const Index n = family.dim();
  const auto p = static_cast<Index>(aut.node_count());
  if (p > dim_cap / n) throw ResourceError("lift: lifted dimension exceeds cap " + std::to_string(dim_cap));
  std::vector<SquareMatrix> out;
  out.reserve(aut.edges().size());
  for (const auto& e : aut.edges()) {
    Matrix big = Matrix::Zero(n * p, n * p);
    big.block(static_cast<Index>(e.from) * n, static_cast<Index>(e.to) * n, n, n) = family[e.letter];
    out.push_back(std::move(big));
  }
  return out;
}

/// Probabilistic irreducibility test for {A_alpha}. With
/// Phi(X) = sum_alpha A_alpha^T X A_alpha, form Z = sum_{t<k} Phi^t(x x^T) for a
/// random unit x; Z is positive definite iff the orbit of x spans R^k. Each
/// term is rescaled to unit trace (this does not change the kernel of Z).
/// Majority vote over `votes` seeds.
inline bool irreducible(std::span<const SquareMatrix> lifted, std::uint64_t seed, int votes = 3) {
  if (lifted.empty()) throw UsageError("irreducible: empty list");
  const Index k = lifted.front().rows();
  for (const auto& a : lifted) {
    if (a.rows() != k || a.cols() != k) throw UsageError("irreducible: non-uniform dimensions");
  }
  int yes = 0;
  for (int v = 0; v < votes; ++v) {
    Rng rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(v));
    Vector x = random_unit_vector(k, rng);
    Matrix term = x * x.transpose();
    Matrix z = term;
    for (Index t = 1; t < k; ++t) {
      Matrix nxt = Matrix::Zero(k, k);
      for (const auto& a : lifted) nxt.noalias() += a.transpose() * term * a;
      const double tr = nxt.trace();
      if (!(tr > 0.0) || !std::isfinite(tr)) break;
      term = nxt / tr;
      z += term;
    }
    SymMatrix zs(z);
    if (min_eigenvalue(zs) > 1e-10 * zs.trace() / static_cast<double>(k)) ++yes;
  }
  return 2 * yes > votes;
}

}  // namespace tropkraus
