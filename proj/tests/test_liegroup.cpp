#include "qham/liegroup.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qham;

namespace {

Mat series_exp(const Mat& X, int terms = 30) {
  Mat acc = Mat::Identity(X.rows(), X.cols());
  Mat term = acc;
  for (int k = 1; k < terms; ++k) {
    term = term * X / static_cast<double>(k);
    acc += term;
  }
  return acc;
}

Mat diag2(cd a, cd b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST(LieGroup, ExpOfZeroIsIdentity) {
  for (const auto& G : {MatrixGroup::su(2), MatrixGroup::su(3), MatrixGroup::so(3)})
    EXPECT_LT(mat_dist(G.exp(G.zero()), G.identity()), 1e-15);
}

TEST(LieGroup, ExpOfDiagonalMatchesClosedFormAndSeries) {
  const auto G = MatrixGroup::su(2);
  const double th = 0.7;
  const Mat X = diag2(cd(0, th), cd(0, -th));
  const Mat expected = diag2(std::polar(1.0, th), std::polar(1.0, -th));
  EXPECT_LT(mat_dist(G.exp(X), expected), 1e-14);
  EXPECT_LT(mat_dist(G.exp(X), series_exp(X)), 1e-13);
}

TEST(LieGroup, ExpMatchesSeriesOnRandomDraws) {
  Rng rng(11);
  for (const auto& G : {MatrixGroup::su(2), MatrixGroup::su(3), MatrixGroup::so(3)}) {
    for (int i = 0; i < 20; ++i) {
      const Mat X = G.random_algebra(rng, 0.8);
      EXPECT_LT(mat_dist(G.exp(X), series_exp(X, 40)), 1e-12);
    }
  }
}

TEST(LieGroup, ExpIsUnitaryOnThousandDraws) {
  const auto G = MatrixGroup::su(2);
  Rng rng(3);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Mat U = G.exp(G.random_algebra(rng));
    worst = std::max(worst, mat_dist(U.adjoint() * U, G.identity()));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(LieGroup, ExpTimesExpOfNegativeIsIdentity) {
  Rng rng(4);
  for (const auto& G : {MatrixGroup::su(2), MatrixGroup::su(3), MatrixGroup::so(3)}) {
    for (int i = 0; i < 50; ++i) {
      Mat X = G.random_algebra(rng);
      const double n = std::sqrt(G.inner(X, X));
      X *= 5.0 * (i + 1) / 50.0 / n;  // norms up to 5
      EXPECT_LT(mat_dist(G.exp(X) * G.exp(-X), G.identity()), 1e-12);
    }
  }
}

TEST(LieGroup, ExpDerivativeAtZeroIsGenerator) {
  const auto G = MatrixGroup::su(3);
  Rng rng(5);
  const double h = 1e-5;
  for (int i = 0; i < 10; ++i) {
    const Mat X = G.random_algebra(rng);
    const Mat d = (G.exp(h * X) - G.exp(-h * X)) / (2 * h);
    EXPECT_LT(mat_dist(d, X), 1e-8);
  }
}

TEST(LieGroup, InnerProductHandValue) {
  for (double scale : {1.0, 2.5}) {
    const auto G = MatrixGroup::su(2, scale);
    const Mat X = diag2(cd(0, 1), cd(0, -1));
    EXPECT_NEAR(G.inner(X, X), 2.0 * scale, 1e-15);
    EXPECT_EQ(G.inner(G.zero(), X), 0.0);
  }
}

TEST(LieGroup, BasisIsOrthonormalAndCoordsRoundTrip) {
  for (const auto& G : {MatrixGroup::su(2), MatrixGroup::su(3, 0.5), MatrixGroup::so(3)}) {
    const auto& B = G.basis();
    for (std::size_t i = 0; i < B.size(); ++i) {
      EXPECT_TRUE(G.is_algebra(B[i]));
      for (std::size_t j = 0; j < B.size(); ++j) EXPECT_NEAR(G.inner(B[i], B[j]), i == j ? 1.0 : 0.0, 1e-14);
    }
    Rng rng(6);
    const Mat X = G.random_algebra(rng);
    EXPECT_LT(mat_dist(G.from_coords(G.coords(X)), X), 1e-14);
  }
  EXPECT_EQ(MatrixGroup::su(2).dim(), 3);
  EXPECT_EQ(MatrixGroup::su(3).dim(), 8);
  EXPECT_EQ(MatrixGroup::so(3).dim(), 3);
}

TEST(LieGroup, AdjointProperties) {
  const auto G = MatrixGroup::su(3);
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    const Mat g = G.random_element(rng), h = G.random_element(rng);
    const Mat X = G.random_algebra(rng), Y = G.random_algebra(rng);
    EXPECT_LT(mat_dist(G.Ad(G.identity(), X), X), 1e-15);
    EXPECT_LT(mat_dist(G.Ad(g * h, X), G.Ad(g, G.Ad(h, X))), 1e-13);
    EXPECT_NEAR(G.inner(G.Ad(g, X), G.Ad(g, Y)), G.inner(X, Y), 1e-10);
    EXPECT_TRUE(G.is_algebra(G.Ad(g, X), 1e-12));
  }
}

TEST(LieGroup, RandomElementsAreValidAndSeeded) {
  for (const auto& G : {MatrixGroup::su(2), MatrixGroup::su(3), MatrixGroup::so(3)}) {
    Rng a(42), b(42);
    for (int i = 0; i < 3; ++i) {
      const Mat x = G.random_element(a), y = G.random_element(b);
      EXPECT_TRUE(G.is_element(x));
      EXPECT_EQ(x, y);
      EXPECT_EQ(G.random_algebra(a), G.random_algebra(b));
    }
  }
}

TEST(LieGroup, GaussianAlgebraNormMatchesDimension) {
  // With standard Gaussian coordinates, (X, X) is chi-squared with dim degrees of freedom.
  const auto G = MatrixGroup::su(3);
  Rng rng(8);
  const int n = 4000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Mat X = G.random_algebra(rng);
    sum += G.inner(X, X);
  }
  const double mean = sum / n;
  const double sd = std::sqrt(2.0 * G.dim() / n);
  EXPECT_NEAR(mean, G.dim(), 3 * sd);
}

TEST(LieGroup, LogInvertsExpNearIdentity) {
  const auto G = MatrixGroup::su(2);
  Rng rng(9);
  for (int i = 0; i < 20; ++i) {
    const Mat X = G.random_algebra(rng, 0.3);
    EXPECT_LT(mat_dist(G.log_near_identity(G.exp(X)), X), 1e-12);
  }
}

TEST(Automorphism, IdentityAndInner) {
  const auto G = MatrixGroup::su(2);
  Rng rng(10);
  const Mat w = G.random_element(rng);
  const auto k = Automorphism::inner(w);
  for (int i = 0; i < 20; ++i) {
    const Mat g = G.random_element(rng), h = G.random_element(rng);
    EXPECT_EQ(Automorphism::identity().apply(g), g);
    EXPECT_LT(mat_dist(k.apply(g), w * g * w.adjoint()), 1e-15);
    EXPECT_LT(mat_dist(k.apply(g * h), k.apply(g) * k.apply(h)), 1e-12);
    EXPECT_LT(mat_dist(k.apply(g.adjoint()), k.apply(g).adjoint()), 1e-12);
  }
}

TEST(Automorphism, ComplexConjugationHasOrderTwo) {
  const auto G = MatrixGroup::su(3);
  const auto k = Automorphism::conjugation();
  Rng rng(12);
  for (int i = 0; i < 20; ++i) {
    const Mat g = G.random_element(rng), h = G.random_element(rng);
    EXPECT_LT(mat_dist(k.apply(k.apply(g)), g), 1e-15);
    EXPECT_LT(mat_dist(k.apply(g * h), k.apply(g) * k.apply(h)), 1e-12);
    const Mat X = G.random_algebra(rng), Y = G.random_algebra(rng);
    EXPECT_NEAR(G.inner(k.apply(X), k.apply(Y)), G.inner(X, Y), 1e-10);
  }
  EXPECT_TRUE(validate_automorphism(G, k));
  EXPECT_EQ(empirical_order(G, k, 6), 2);
}

TEST(Automorphism, ComposeInversePower) {
  const auto G = MatrixGroup::su(3);
  Rng rng(13);
  const auto a = Automorphism::inner(G.random_element(rng));
  const auto b = Automorphism::conjugation().compose(Automorphism::inner(G.random_element(rng)));
  for (int i = 0; i < 10; ++i) {
    const Mat g = G.random_element(rng);
    EXPECT_LT(mat_dist(a.compose(b).apply(g), a.apply(b.apply(g))), 1e-12);
    EXPECT_LT(mat_dist(b.inverse().apply(b.apply(g)), g), 1e-12);
    EXPECT_LT(mat_dist(b.power(3).apply(g), b.apply(b.apply(b.apply(g)))), 1e-12);
  }
}

TEST(Automorphism, DeclaredOrderIsValidated) {
  const auto G = MatrixGroup::su(2);
  Mat w = Mat::Zero(2, 2);
  w(0, 0) = cd(0, 1);
  w(1, 1) = cd(0, -1);
  EXPECT_TRUE(validate_automorphism(G, Automorphism::inner(w, 2)));
  std::string why;
  EXPECT_FALSE(validate_automorphism(G, Automorphism::inner(w, 3), 7, &why));
  EXPECT_FALSE(why.empty());
}
