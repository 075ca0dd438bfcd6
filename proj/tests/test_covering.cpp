#include "qham/covering.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace qham;

namespace {

void expect_lift_shape(const LiftedQuiver& X, const SurfaceData& S) {
  for (const auto& b : boundary_lifts(X)) {
    const int g = std::gcd(X.mod(b.hom), X.m);
    EXPECT_EQ(b.circles, g == 0 ? X.m : g) << "component " << b.component;
    EXPECT_EQ(b.stabilizer * b.circles, X.m);
    EXPECT_EQ(b.points_per_circle * b.circles, S.base_points[b.component] * X.m);
    EXPECT_TRUE(b.stabilizer_cyclic);
    EXPECT_TRUE(b.orbit_stabilizer);
  }
}

}  // namespace

TEST(Cover, AnnulusDoubleCover) {
  const CoveringSpec spec{SurfaceData::annulus(1, 1), 2, {0, 1}};
  const LiftedQuiver X = build_cover(spec);
  EXPECT_EQ(X.vertices(), 4);
  EXPECT_EQ(X.edges(), 4);
  EXPECT_TRUE(cover_connected(X));
  EXPECT_TRUE(deck_action_free(X));
  const auto lifts = boundary_lifts(X);
  ASSERT_EQ(lifts.size(), 2u);
  for (const auto& b : lifts) {
    EXPECT_EQ(X.mod(b.hom), 1);
    EXPECT_EQ(b.circles, 1);
    EXPECT_EQ(b.points_per_circle, 2);
    EXPECT_EQ(b.stabilizer, 2);
  }
  expect_lift_shape(X, spec.base);
}

TEST(Cover, TorusTripleCover) {
  const CoveringSpec spec{{1, {1}}, 3, {1, 0}};
  const LiftedQuiver X = build_cover(spec);
  EXPECT_TRUE(cover_connected(X));
  const auto lifts = boundary_lifts(X);
  ASSERT_EQ(lifts.size(), 1u);
  EXPECT_EQ(X.mod(lifts[0].hom), 0);
  EXPECT_EQ(lifts[0].circles, 3);
  EXPECT_EQ(lifts[0].stabilizer, 1);
  EXPECT_EQ(lifts[0].points_per_circle, 1);
}

TEST(Cover, TrivialHomIsDisconnected) {
  const LiftedQuiver X = build_cover({SurfaceData::annulus(1, 1), 3, {0, 0}});
  EXPECT_FALSE(cover_connected(X));
  EXPECT_TRUE(deck_action_free(X));
}

TEST(Cover, LiftShapesOnPanel) {
  const std::vector<CoveringSpec> panel{{{0, {2, 3}}, 2, {1, 1, 0, 1, 1}},
                                        {{1, {2}}, 3, {1, 2, 1}},
                                        {{0, {1, 1, 1}}, 4, {1, 2, 0, 3}},
                                        {{1, {1, 2}}, 6, {2, 3, 1, 4, 5}}};
  for (const auto& spec : panel) {
    ASSERT_EQ(static_cast<int>(spec.hom.size()), build_quiver(spec.base).stored);
    const LiftedQuiver X = build_cover(spec);
    EXPECT_TRUE(deck_action_free(X));
    expect_lift_shape(X, spec.base);
  }
}

TEST(Cover, MonodromyIsAHomomorphism) {
  const CoveringSpec spec{{1, {2, 1}}, 4, {1, 3, 2, 0, 1}};
  const LiftedQuiver X = build_cover(spec);
  const Quiver& Q = X.base;
  ASSERT_EQ(static_cast<int>(spec.hom.size()), Q.stored);
  Rng rng(1);
  std::vector<int> I(Q.vertices.size());
  for (int& i : I) i = static_cast<int>(rng() % 4);
  const auto mon = monodromy_rep(X, I);
  ASSERT_EQ(mon.size(), Q.edges.size());
  for (int j = 0; j < 2; ++j) {
    const GroupoidWord a = Q.boundary_loop(j);
    EXPECT_EQ(X.mod(monodromy_of(X, I, concat(a, a))), X.mod(2 * monodromy_of(X, I, a)));
    EXPECT_EQ(X.mod(monodromy_of(X, I, inverse_word(a)) + monodromy_of(X, I, a)), 0);
    // a loop's class does not depend on I
    EXPECT_EQ(X.mod(monodromy_of(X, I, a)), X.mod(X.hom_of(a)));
  }
  EXPECT_EQ(X.mod(monodromy_of(X, I, Q.polygon)), 0);
}

TEST(Enumeration, ZThreeTrivialAndInversion) {
  const auto Z3 = FiniteGroup::cyclic(3);
  const CoveringSpec spec{SurfaceData::annulus(1, 1), 2, {0, 1}};
  const int stored = build_quiver(spec.base).stored;
  for (const Perm& k : {Z3.identity_aut(), Z3.inversion_map()}) {
    const auto r = enumerate_finite(spec, Z3, k);
    EXPECT_EQ(r.hom_x, 81u);  // 3^(2 * 2)
    EXPECT_EQ(r.fixed, static_cast<std::uint64_t>(std::pow(3, stored)));
    EXPECT_EQ(r.twisted, r.fixed);
    EXPECT_TRUE(r.bijection());
  }
}

TEST(Enumeration, SThreeAnnulusAndTorus) {
  const auto S3 = FiniteGroup::symmetric3();
  {
    const auto r = enumerate_finite({SurfaceData::annulus(1, 1), 2, {0, 1}}, S3, S3.inner_aut(1));
    EXPECT_EQ(r.hom_x, 1296u);
    EXPECT_EQ(r.fixed, 36u);
    EXPECT_TRUE(r.bijection());
  }
  {
    const auto r = enumerate_finite({{1, {1}}, 3, {1, 0}}, S3, S3.inner_aut(4));
    EXPECT_EQ(r.fixed, 36u);
    EXPECT_TRUE(r.bijection());
  }
  {
    const auto Z3 = FiniteGroup::cyclic(3);
    const auto r = enumerate_finite({{1, {1}}, 3, {1, 0}}, Z3, Z3.identity_aut());
    EXPECT_EQ(r.fixed, 9u);
    EXPECT_TRUE(r.bijection());
  }
}

TEST(Enumeration, NonzeroOffsetsGiveTheSameCounts) {
  const auto S3 = FiniteGroup::symmetric3();
  const CoveringSpec spec{SurfaceData::annulus(1, 2), 2, {1, 0, 1}};
  const auto Q = build_quiver(spec.base);
  std::vector<int> I(Q.vertices.size(), 0);
  I.back() = 1;
  const auto r = enumerate_finite(spec, S3, S3.inner_aut(1), I);
  EXPECT_EQ(r.fixed, 216u);
  EXPECT_TRUE(r.bijection());
}

TEST(Enumeration, DiskHasOneRepresentation) {
  const auto S3 = FiniteGroup::symmetric3();
  const auto r = enumerate_finite({SurfaceData::disk(), 2, {}}, S3, S3.inner_aut(1));
  EXPECT_EQ(r.fixed, 1u);
  EXPECT_EQ(r.twisted, 1u);
  EXPECT_TRUE(r.bijection());
}

TEST(Enumeration, GuardIsEnforced) {
  const auto S3 = FiniteGroup::symmetric3();
  const CoveringSpec spec{{2, {1, 1}}, 3, {1, 0, 2, 0, 1, 1}};
  EXPECT_THROW(enumerate_finite(spec, S3, S3.identity_aut(), {}, 1000000), GuardExceeded);
}

TEST(MatrixCover, PushAndLiftRoundTrip) {
  const auto G = MatrixGroup::su(2);
  MatOps ops{2};
  const CoveringSpec spec{{1, {2}}, 2, {1, 0, 1}};
  const LiftedQuiver X = build_cover(spec);
  const auto kappa = Automorphism::conjugation();
  const std::vector<int> I{0, 1};
  Rng rng(2);
  for (int s = 0; s < 20; ++s) {
    TwistedRepresentation<MatOps> t;
    t.gamma_part = monodromy_rep(X, I);
    t.gamma_part.resize(X.base.stored);
    for (int e = 0; e < X.base.stored; ++e) t.g.push_back(G.random_element(rng));
    const auto rho = lift_twisted_rep(ops, X, kappa, I, t);
    EXPECT_LE(fixed_residual(ops, X, kappa, rho), 1e-12);
    const auto back = push_fixed_rep(ops, X, kappa, I, rho);
    EXPECT_EQ(back.gamma_part, t.gamma_part);
    EXPECT_LE(rep_dist(ops, back.g, t.g), 1e-12);
    int pairs = 0;
    EXPECT_LE(push_hom_residual(ops, X, kappa, I, rho, &pairs), 1e-10);
    EXPECT_GT(pairs, 0);
  }
}

TEST(MatrixCover, NonFixedRepresentationIsRejected) {
  const auto G = MatrixGroup::su(2);
  MatOps ops{2};
  const LiftedQuiver X = build_cover({SurfaceData::annulus(1, 1), 2, {0, 1}});
  Rng rng(3);
  std::vector<Mat> rho;
  for (int e = 0; e < X.edges(); ++e) rho.push_back(G.random_element(rng));
  EXPECT_THROW(push_fixed_rep(ops, X, Automorphism::identity(), {0, 0}, rho), std::invalid_argument);
}

TEST(MatrixCover, GammaActionComposes) {
  const auto G = MatrixGroup::su(3);
  MatOps ops{3};
  const LiftedQuiver X = build_cover({{0, {2, 1}}, 3, {1, 2, 0}});
  Mat w = Mat::Zero(3, 3);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < 3; ++i) w(i, i) = std::polar(1.0, 2 * pi * i / 3);
  const auto kappa = Automorphism::inner(w, 3);
  Rng rng(4);
  std::vector<Mat> rho, g;
  for (int e = 0; e < X.edges(); ++e) rho.push_back(G.random_element(rng));
  for (int v = 0; v < X.vertices(); ++v) g.push_back(G.random_element(rng));
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const auto lhs = gamma_act_rep(ops, X, kappa, a, gamma_act_rep(ops, X, kappa, b, rho));
      EXPECT_LT(rep_dist(ops, lhs, gamma_act_rep(ops, X, kappa, a + b, rho)), 1e-12);
    }
  EXPECT_LT(rep_dist(ops, gamma_act_rep(ops, X, kappa, 0, rho), rho), 1e-16);
  // Gamma intertwines the gauge action
  for (int phi = 0; phi < 3; ++phi) {
    const auto lhs = gamma_act_rep(ops, X, kappa, phi, gauge_cover(ops, X, g, rho));
    const auto rhs = gauge_cover(ops, X, gamma_act_gauge(ops, X, kappa, phi, g), gamma_act_rep(ops, X, kappa, phi, rho));
    EXPECT_LT(rep_dist(ops, lhs, rhs), 1e-12);
  }
}
