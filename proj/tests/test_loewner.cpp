#include <vector>

#include <gtest/gtest.h>

#include "support.hpp"
#include "tropkraus/loewner.hpp"

using namespace tropkraus;
using namespace tk_test;

TEST(MubPair, Examples) {
  Rng rng(1);
  const SymMatrix i2 = SymMatrix::identity(2);
  for (int t = 0; t < 5; ++t) {
    EXPECT_LE(max_abs_diff(mub_pair(i2, i2, random_pd(2, rng)).mat(), i2.mat()), 1e-12);
  }
  SymMatrix x = mub_pair(SymMatrix::diagonal({1, 0}), SymMatrix::diagonal({0, 1}), i2);
  EXPECT_LE(max_abs_diff(x.mat(), i2.mat()), 1e-15);
  for (auto [a, b] : {std::pair{2.0, 5.0}, {-1.0, -3.0}, {4.0, 4.0}}) {
    for (double c : {0.1, 1.0, 7.0}) {
      const double r = mub_pair(SymMatrix::diagonal({a}), SymMatrix::diagonal({b}), SymMatrix::diagonal({c}))(0, 0);
      EXPECT_NEAR(r, std::max(a, b), 1e-12);
    }
  }
}

TEST(MubPair, UpperBoundOfBoth) {
  Rng rng(2);
  for (Index n : {2, 3, 5, 10}) {
    for (int t = 0; t < 100; ++t) {
      SymMatrix p = random_sym(n, rng), q = random_sym(n, rng), c = random_pd(n, rng);
      SymMatrix x = mub_pair(p, q, c);
      const double tol = 1e-9 * scale_of(p, q);
      ASSERT_TRUE(dominates(x, p, tol));
      ASSERT_TRUE(dominates(x, q, tol));
    }
  }
}

TEST(MubPair, ComparableInputsReturnLarger) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    SymMatrix q = random_sym(4, rng);
    SymMatrix p = q + random_gram(4, 2, rng);
    for (const Selection& sel : {Selection::trace(), Selection::custom(random_pd(4, rng))}) {
      EXPECT_LE(max_abs_diff(mub_pair(p, q, sel).mat(), p.mat()), 1e-9 * scale_of(p, q));
      EXPECT_LE(max_abs_diff(mub_pair(q, p, sel).mat(), p.mat()), 1e-9 * scale_of(p, q));
    }
  }
}

TEST(MubPair, SelectionDispatchAgreesWithExplicitSelector) {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    auto [p, q] = incomparable_pd_pair(4, rng);
    EXPECT_LE(max_abs_diff(mub_pair(p, q, Selection::trace()).mat(), mub_pair(p, q, SymMatrix::identity(4)).mat()),
              1e-12);
    EXPECT_LE(max_abs_diff(mub_pair(p, q, Selection::det()).mat(), mub_pair(p, q, inverse_pd(p)).mat()),
              1e-9 * scale_of(p, q));
    SymMatrix c = random_pd(4, rng);
    EXPECT_LE(max_abs_diff(mub_pair(p, q, Selection::custom(c)).mat(), mub_pair(p, q, c).mat()), 1e-12);
  }
}

TEST(MubPair, DetSelectionIsSymmetric) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    auto [p, q] = incomparable_pd_pair(5, rng);
    EXPECT_LE(max_abs_diff(mub_pair_det(p, q).mat(), mub_pair_det(q, p).mat()), 1e-9 * scale_of(p, q));
  }
}

TEST(MubPair, CongruenceCovariance) {
  Rng rng(6);
  for (Index n : {2, 3, 5}) {
    for (int t = 0; t < 30; ++t) {
      SymMatrix p = random_sym(n, rng), q = random_sym(n, rng), c = random_pd(n, rng);
      Matrix m = random_invertible(n, rng);
      Matrix mi = m.inverse();
      SymMatrix lhs = mub_pair(congruence(m, p), congruence(m, q), SymMatrix(Matrix(mi * c.mat() * mi.transpose())));
      SymMatrix rhs = congruence(m, mub_pair(p, q, c));
      EXPECT_LE(max_abs_diff(lhs.mat(), rhs.mat()), 1e-8 * (1 + rhs.max_abs()));
    }
  }
}

TEST(MubPair, PositiveHomogeneity) {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    SymMatrix p = random_sym(4, rng), q = random_sym(4, rng), c = random_pd(4, rng);
    const double a = rng.uniform(0.1, 10.0);
    SymMatrix x = mub_pair(p, q, c);
    EXPECT_LE(max_abs_diff(mub_pair(a * p, a * q, c).mat(), a * x.mat()), 1e-10 * (1 + a * x.max_abs()));
  }
}

TEST(MubPair, ExposedByItsSelector) {
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    auto [p, q] = incomparable_pd_pair(3, rng);
    SymMatrix c = random_pd(3, rng);
    SymMatrix x = mub_pair(p, q, c);
    const double best = inner(c, x);
    for (const auto& z : feasible_upper_bounds(p, q, x, 500, rng)) {
      ASSERT_TRUE(dominates(z, p, 1e-9 * scale_of(p, q)) && dominates(z, q, 1e-9 * scale_of(p, q)));
      ASSERT_LE(best, inner(c, z) + 1e-6);
    }
  }
}

TEST(MubPair, DetSelectionMinimizesInverseWeightedTrace) {
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    auto [p, q] = incomparable_pd_pair(3, rng);
    SymMatrix x = mub_pair_det(p, q);
    SymMatrix pinv = inverse_pd(p);
    const double best = inner(pinv, x);
    for (const auto& z : feasible_upper_bounds(p, q, x, 500, rng)) ASSERT_LE(best, inner(pinv, z) + 1e-6);
  }
}

TEST(MubPair, DiagonalInputsGiveEntrywiseMax) {
  Rng rng(10);
  for (int t = 0; t < 50; ++t) {
    Vector a = gaussian_vector(5, rng), b = gaussian_vector(5, rng);
    Vector pos_a = a.cwiseAbs().array() + 0.1, pos_b = b.cwiseAbs().array() + 0.1;
    Matrix want = pos_a.cwiseMax(pos_b).asDiagonal();
    SymMatrix p = SymMatrix::diagonal(pos_a), q = SymMatrix::diagonal(pos_b);
    Vector cd = gaussian_vector(5, rng).cwiseAbs().array() + 0.1;
    for (const Selection& sel : {Selection::trace(), Selection::det(), Selection::custom(SymMatrix::diagonal(cd))}) {
      EXPECT_LE(max_abs_diff(mub_pair(p, q, sel).mat(), want), 1e-10) << sel.name();
    }
    Matrix signed_max = a.cwiseMax(b).asDiagonal();
    EXPECT_LE(max_abs_diff(mub_pair_trace(SymMatrix::diagonal(a), SymMatrix::diagonal(b)).mat(), signed_max), 1e-10);
  }
}

TEST(MubPair, Errors) {
  EXPECT_THROW(mub_pair(SymMatrix::identity(2), SymMatrix::identity(3), SymMatrix::identity(2)), UsageError);
  EXPECT_THROW(mub_pair(SymMatrix::identity(2), SymMatrix::identity(2), SymMatrix::diagonal({1, -1})), DomainError);
  EXPECT_THROW(mub_pair(SymMatrix::identity(2), SymMatrix::identity(2), SymMatrix::identity(3)), UsageError);
  EXPECT_THROW(mub_pair_det(SymMatrix::diagonal({1, 0}), SymMatrix::identity(2)), DomainError);
  EXPECT_THROW(Selection::custom(SymMatrix::diagonal({1, 0})), DomainError);
  EXPECT_THROW(Selection::parse("volume"), UsageError);
}

TEST(MubFold, Examples) {
  Rng rng(11);
  SymMatrix m = random_sym(3, rng);
  EXPECT_EQ(mub_fold({m}, Selection::trace()), m);

  SymMatrix x = mub_fold({SymMatrix::diagonal({1, 0}), SymMatrix::diagonal({0, 1}), SymMatrix::diagonal({0.5, 0.5})},
                         Selection::trace());
  EXPECT_LE(max_abs_diff(x.mat(), Matrix::Identity(2, 2)), 1e-15);

  for (const Selection& sel : {Selection::trace(), Selection::det()}) {
    SymMatrix s = mub_fold({SymMatrix::diagonal({2}), SymMatrix::diagonal({5}), SymMatrix::diagonal({3})}, sel);
    EXPECT_NEAR(s(0, 0), 5.0, 1e-12) << sel.name();
  }
}

TEST(MubFold, RightAssociatedOrder) {
  Rng rng(12);
  std::vector<SymMatrix> l;
  for (int k = 0; k < 4; ++k) l.push_back(random_pd(3, rng));
  for (const Selection& sel : {Selection::trace(), Selection::det()}) {
    SymMatrix want = mub_pair(l[0], mub_pair(l[1], mub_pair(l[2], l[3], sel), sel), sel);
    EXPECT_EQ(mub_fold(l, sel), want);
  }
}

TEST(MubFold, UpperBoundOfEveryElement) {
  Rng rng(13);
  for (int t = 0; t < 100; ++t) {
    const Index n = 2 + static_cast<Index>(rng.below(4));
    std::vector<SymMatrix> l;
    const int len = 1 + static_cast<int>(rng.below(6));
    for (int k = 0; k < len; ++k) l.push_back(random_pd(n, rng));
    for (const Selection& sel : {Selection::trace(), Selection::det()}) {
      SymMatrix x = mub_fold(l, sel);
      ASSERT_TRUE(is_upper_bound(x, l, 1e-8));
    }
  }
}

TEST(MubFold, Errors) {
  std::vector<SymMatrix> empty;
  EXPECT_THROW(mub_fold(empty, Selection::trace()), UsageError);
  EXPECT_THROW(mub_fold({SymMatrix::identity(2), SymMatrix::identity(3)}, Selection::trace()), UsageError);
  EXPECT_THROW(mub_fold({SymMatrix::identity(2), SymMatrix::diagonal({1, 0})}, Selection::det()), DomainError);
  EXPECT_THROW(mub_fold({SymMatrix::diagonal({0, 1}), SymMatrix::identity(2)}, Selection::det()), DomainError);
}

TEST(IsUpperBound, Examples) {
  const std::vector<SymMatrix> zero{SymMatrix::zero(2)}, ident{SymMatrix::identity(2)};
  EXPECT_TRUE(is_upper_bound(SymMatrix::identity(2), zero, 1e-9));
  EXPECT_FALSE(is_upper_bound(SymMatrix::zero(2), ident, 1e-9));
}

TEST(MinimalityWitness, MinimalUpperBoundPasses) {
  Rng rng(14);
  for (Index n : {2, 3, 5, 10}) {
    for (int t = 0; t < 10; ++t) {
      auto [p, q] = incomparable_pd_pair(n, rng);
      const std::vector<SymMatrix> l{p, q};
      WitnessOptions opt;
      opt.seed = rng.next_u64();
      EXPECT_TRUE(minimality_witness(mub_pair(p, q, SymMatrix::identity(n)), l, opt));
      EXPECT_TRUE(minimality_witness(mub_pair_det(p, q), l, opt));
    }
  }
}

TEST(MinimalityWitness, SumIsNotMinimal) {
  Rng rng(15);
  for (int t = 0; t < 20; ++t) {
    auto [p, q] = incomparable_pd_pair(3, rng);
    EXPECT_FALSE(minimality_witness(p + q, std::vector<SymMatrix>{p, q}));
  }
}

TEST(MinimalityWitness, Singleton) {
  Rng rng(16);
  SymMatrix m = random_sym(4, rng);
  EXPECT_TRUE(minimality_witness(m, std::vector<SymMatrix>{m}));
}
