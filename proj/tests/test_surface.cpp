#include "qham/surface.hpp"
#include "qham/verify.hpp"

#include <gtest/gtest.h>

using namespace qham;

namespace {

int count_kind(const Quiver& Q, EdgeKind k) {
  int c = 0;
  for (const auto& e : Q.edges) c += e.kind == k;
  return c;
}

SuiteOptions quick(int samples, std::uint64_t seed = 5) {
  SuiteOptions o;
  o.samples = samples;
  o.seed = seed;
  return o;
}

}  // namespace

TEST(Quiver, AnnulusEdges) {
  const Quiver Q = build_quiver(SurfaceData::annulus(1, 1));
  EXPECT_EQ(Q.vertices.size(), 2u);
  EXPECT_EQ(Q.edges.size(), 3u);
  EXPECT_EQ(Q.stored, 2);
  EXPECT_EQ(count_kind(Q, EdgeKind::Gamma), 1);
  EXPECT_EQ(count_kind(Q, EdgeKind::Boundary), 2);
  ASSERT_GE(Q.derived_edge, 0);
  EXPECT_TRUE(Q.edges[Q.derived_edge].derived);
  EXPECT_EQ(Q.edges[Q.derived_edge].component, 0);
  EXPECT_TRUE(Q.composable(Q.derived_word));
  EXPECT_TRUE(Q.composable(Q.polygon));
}

TEST(Quiver, GenusOneEdges) {
  const Quiver Q = build_quiver({1, {1}});
  EXPECT_EQ(Q.stored, 2);
  EXPECT_EQ(count_kind(Q, EdgeKind::A), 1);
  EXPECT_EQ(count_kind(Q, EdgeKind::B), 1);
  EXPECT_EQ(count_kind(Q, EdgeKind::Gamma), 0);
}

TEST(Quiver, DiskHasNoFreeEdges) {
  const Quiver Q = build_quiver(SurfaceData::disk());
  EXPECT_EQ(Q.stored, 0);
  EXPECT_EQ(Q.edges.size(), 1u);
}

TEST(Quiver, StoredEdgeCountFormula) {
  // 2g handles, r connecting edges, sum of base points, minus the derived edge
  const std::vector<SurfaceData> panel{{0, {2, 2}}, {0, {3, 2}}, {0, {3, 3, 3}}, {1, {1}}, {1, {2}}, {2, {1, 2}}};
  for (const auto& S : panel) {
    int sum = 0;
    for (int m : S.base_points) sum += m;
    const Quiver Q = build_quiver(S);
    EXPECT_EQ(Q.stored, 2 * S.genus + (S.boundaries() - 1) + sum - 1);
    EXPECT_EQ(static_cast<int>(Q.vertices.size()), sum);
    EXPECT_EQ(Q.base_point_order().size(), Q.vertices.size());
  }
}

TEST(Quiver, InvalidSurfacesRejected) {
  EXPECT_THROW((SurfaceData{-1, {1}}).validate(), std::invalid_argument);
  EXPECT_THROW((SurfaceData{0, {}}).validate(), std::invalid_argument);
  EXPECT_THROW((SurfaceData{0, {0}}).validate(), std::invalid_argument);
}

TEST(Words, EvaluationIsFunctorial) {
  const auto G = MatrixGroup::su(2);
  MatOps ops{2};
  const Quiver Q = build_quiver({1, {2, 1}});
  Rng rng(1);
  std::vector<Mat> rho;
  for (int e = 0; e < Q.stored; ++e) rho.push_back(G.random_element(rng));
  const GroupoidWord a = Q.boundary_loop(0), b = Q.boundary_loop(0);
  EXPECT_LT(mat_dist(eval_word(ops, Q, rho, concat(a, b)), eval_word(ops, Q, rho, a) * eval_word(ops, Q, rho, b)),
            1e-13);
  EXPECT_LT(mat_dist(eval_word(ops, Q, rho, inverse_word(a)), eval_word(ops, Q, rho, a).adjoint()), 1e-13);
  EXPECT_LT(mat_dist(eval_word(ops, Q, rho, {}), G.identity()), 1e-16);
  // the polygon relation holds automatically through the derived edge
  EXPECT_LT(mat_dist(eval_word(ops, Q, rho, Q.polygon), G.identity()), 1e-12);
}

TEST(Representation, BoundaryMonodromiesOfTrivialRepresentation) {
  MatOps ops{2};
  const Quiver Q = build_quiver({1, {2, 3}});
  const std::vector<Mat> rho(Q.stored, Mat::Identity(2, 2));
  const auto mon = boundary_monodromies(ops, Q, rho);
  EXPECT_EQ(mon.size(), 5u);
  for (const auto& m : mon) EXPECT_LT(mat_dist(m, Mat::Identity(2, 2)), 1e-16);
}

TEST(Representation, GaugeTouchesOnlyAdjacentEdges) {
  const auto G = MatrixGroup::su(2);
  MatOps ops{2};
  const Quiver Q = build_quiver({0, {3, 2}});
  Rng rng(2);
  std::vector<Mat> rho;
  for (int e = 0; e < Q.stored; ++e) rho.push_back(G.random_element(rng));
  for (int v = 0; v < static_cast<int>(Q.vertices.size()); ++v) {
    std::vector<Mat> g(Q.vertices.size(), G.identity());
    g[v] = G.random_element(rng);
    const auto out = gauge_rep(ops, Q, g, rho);
    for (int e = 0; e < Q.stored; ++e) {
      const bool adjacent = Q.edges[e].source == v || Q.edges[e].target == v;
      const double d = mat_dist(out[e], rho[e]);
      if (adjacent && Q.edges[e].source != Q.edges[e].target)
        EXPECT_GT(d, 1e-6);
      else if (!adjacent)
        EXPECT_EQ(d, 0.0);
    }
  }
}

TEST(RepSpace, AnnulusAgreesWithGeneralizedDouble) {
  const auto G = MatrixGroup::su(2);
  for (auto [minf, m0] : {std::pair{1, 1}, std::pair{2, 3}, std::pair{3, 2}}) {
    const auto R = rep_space(SurfaceData::annulus(minf, m0), G);
    const auto D = make_generalized_double(G, minf, m0);
    ASSERT_EQ(R->factors(), D->factors());
    ASSERT_EQ(R->structure_size(), D->structure_size());
    Rng rng(3);
    for (int s = 0; s < 20; ++s) {
      const Point p = D->sample_point(rng);
      const Tangent u = D->sample_tangent(p, rng), v = D->sample_tangent(p, rng);
      EXPECT_LE(std::abs(R->omega(p, u, v) - D->omega(p, u, v)), 1e-10);
      const Point mr = R->mu_value(p), md = D->mu_value(p);
      ASSERT_EQ(mr.size(), md.size());
      for (std::size_t i = 0; i < mr.size(); ++i) EXPECT_LT(mat_dist(mr[i], md[i]), 1e-12);
    }
  }
}

TEST(RepSpace, MomentMapIsBoundaryMonodromy) {
  const auto G = MatrixGroup::su(2);
  const SurfaceData S{1, {2, 1}};
  const auto R = rep_space(S, G);
  const Quiver Q = build_quiver(S);
  Rng rng(4);
  const Point p = R->sample_point(rng);
  const auto mon = boundary_monodromies(MatOps{2}, Q, p);
  const Point mu = R->mu_value(p);
  ASSERT_EQ(mu.size(), mon.size());
  for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_LT(mat_dist(mu[i], mon[i]), 1e-12);
}

TEST(RepSpace, PanelPassesAllSuites) {
  const auto G = MatrixGroup::su(2);
  const std::vector<SurfaceData> panel{{0, {2, 2}}, {0, {3, 2}}, {0, {3, 3, 3}}, {1, {1}}, {1, {2}}, {0, {1, 1, 1}}};
  for (const auto& S : panel) {
    const auto R = rep_space(S, G);
    for (const auto& name : suite_names()) {
      const auto r = run_suite(*R, name, quick(8));
      EXPECT_TRUE(r.pass) << R->name() << " " << name << ": " << r.max_residual << " " << r.detail;
    }
  }
}

TEST(RepSpace, FusionOrderDoesNotChangeTheForm) {
  const auto G = MatrixGroup::su(2);
  const SurfaceData S{1, {1, 1}};
  const auto R = rep_space(S, G), Rr = rep_space(S, G, true);
  for (const auto& name : {std::string("qh1"), std::string("qh2"), std::string("qh3")}) {
    EXPECT_TRUE(run_suite(*Rr, name, quick(8)).pass) << name;
    EXPECT_TRUE(run_suite(*R, name, quick(8)).pass) << name;
  }
}

TEST(RepSpace, PointSpaceIsTrivial) {
  const auto G = MatrixGroup::su(2);
  const auto P = make_point(G, 2);
  EXPECT_EQ(P->factors(), 0);
  const Point mu = P->mu_value({});
  ASSERT_EQ(mu.size(), 2u);
  for (const auto& m : mu) EXPECT_LT(mat_dist(m, G.identity()), 1e-16);
}
