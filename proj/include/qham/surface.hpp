#pragma once

#include "qham/space.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace qham {

// Compact oriented surface with boundary components V0, V1, ..., Vr;
// base_points[j] base points on Vj (cyclically ordered).  V0 is the
// distinguished component whose last boundary edge is derived.
struct SurfaceData {
  int genus = 0;
  std::vector<int> base_points{1};

  int boundaries() const { return static_cast<int>(base_points.size()); }
  void validate() const;
  static SurfaceData disk(int m0 = 1) { return {0, {m0}}; }
  static SurfaceData annulus(int m_inf, int m0) { return {0, {m0, m_inf}}; }
};

enum class EdgeKind { A, B, Gamma, Boundary };

struct QuiverVertex {
  int component = 0;  // boundary component j
  int index = 0;      // base point lambda, 0-based
  std::string name;
};

struct QuiverEdge {
  EdgeKind kind = EdgeKind::Boundary;
  int source = 0;
  int target = 0;
  int component = 0;  // handle k for A/B, boundary j for Gamma/Boundary
  int index = 0;      // lambda for boundary edges
  bool derived = false;
  std::string name;
};

// Word in the free groupoid, written in composition order: the value of
// (e1, e2, ...) is rho(e1) rho(e2) ..., so the last step is traversed first.
struct WordStep {
  int edge = 0;
  int exponent = 1;
};
using GroupoidWord = std::vector<WordStep>;

GroupoidWord inverse_word(const GroupoidWord& w);
GroupoidWord concat(const GroupoidWord& a, const GroupoidWord& b);

struct Quiver {
  std::vector<QuiverVertex> vertices;
  std::vector<QuiverEdge> edges;  // stored edges first, then the derived edge
  int stored = 0;                 // number of free generators
  int derived_edge = -1;          // index of the last boundary edge of V0
  GroupoidWord derived_word;      // its value as a word in stored edges
  GroupoidWord polygon;           // boundary word of the cut-open polygon (trivial)

  int vertex(int component, int index) const;
  int source(const GroupoidWord& w) const;  // traversed-first endpoint
  int target(const GroupoidWord& w) const;
  bool composable(const GroupoidWord& w) const;
  // Word of the boundary loop of Vj based at its first base point.
  GroupoidWord boundary_loop(int j) const;
  // Structure-group ordering of base points: V1, ..., Vr, V0.
  std::vector<int> base_point_order() const;
};

Quiver build_quiver(const SurfaceData& S);

// Value of every edge (including the derived one) from the stored values.
template <class Ops>
std::vector<typename Ops::Elem> complete_representation(const Ops& ops, const Quiver& Q,
                                                       const std::vector<typename Ops::Elem>& stored);

template <class Ops, class E>
E eval_steps(const Ops& ops, const std::vector<E>& values, const GroupoidWord& w, const E& unit) {
  E acc = unit;
  for (const auto& s : w) {
    if (s.edge < 0 || s.edge >= static_cast<int>(values.size())) throw std::invalid_argument("word: unknown edge");
    acc = ops.mul(acc, s.exponent > 0 ? values[s.edge] : ops.inv(values[s.edge]));
  }
  return acc;
}

// Evaluate a composable word on a representation of the stored edges.
template <class Ops>
typename Ops::Elem eval_word(const Ops& ops, const Quiver& Q, const std::vector<typename Ops::Elem>& rho,
                             const GroupoidWord& w) {
  if (!Q.composable(w)) throw std::invalid_argument("word: not composable");
  if (static_cast<int>(rho.size()) != Q.stored) throw std::invalid_argument("word: representation has wrong size");
  std::vector<typename Ops::Elem> all = rho;
  if (Q.derived_edge >= 0) all.push_back(eval_steps(ops, rho, Q.derived_word, ops.identity()));
  return eval_steps(ops, all, w, ops.identity());
}

template <class Ops>
std::vector<typename Ops::Elem> complete_representation(const Ops& ops, const Quiver& Q,
                                                       const std::vector<typename Ops::Elem>& stored) {
  auto all = stored;
  if (Q.derived_edge >= 0) all.push_back(eval_steps(ops, stored, Q.derived_word, ops.identity()));
  return all;
}

// Re-gauging at base points: rho(e) -> g_t rho(e) g_s^{-1}; g indexed by vertex.
template <class Ops, class E>
std::vector<E> gauge_rep(const Ops& ops, const Quiver& Q, const std::vector<E>& g, const std::vector<E>& rho) {
  std::vector<E> out;
  for (int e = 0; e < Q.stored; ++e)
    out.push_back(ops.mul(ops.mul(g[Q.edges[e].target], rho[e]), ops.inv(g[Q.edges[e].source])));
  return out;
}

// Boundary coordinates: (rho(d^j_lambda)^{-1}) in the order V1, ..., Vr, V0.
template <class Ops>
std::vector<typename Ops::Elem> boundary_monodromies(const Ops& ops, const Quiver& Q,
                                                     const std::vector<typename Ops::Elem>& rho) {
  const auto all = complete_representation(ops, Q, rho);
  std::vector<typename Ops::Elem> out;
  const int r = Q.vertices.back().component;
  auto emit = [&](int j) {
    for (std::size_t e = 0; e < Q.edges.size(); ++e)
      if (Q.edges[e].kind == EdgeKind::Boundary && Q.edges[e].component == j) out.push_back(ops.inv(all[e]));
  };
  for (int j = 1; j <= r; ++j) emit(j);
  emit(0);
  return out;
}

// Representation space of the surface as a quasi-Hamiltonian G^beta-space;
// coordinates are the stored edges.  Assembled from one double per boundary
// Vj (j >= 1) and one fused double per handle, fused over V0 in the order
// j = 1..r, k = 1..g (reversed if requested), then refined at the base points.
SpacePtr rep_space(const SurfaceData& S, const MatrixGroup& G, bool reversed_fusion = false);

// Trivial space: no factors, `blocks` untwisted size-one components, mu = 1.
SpacePtr make_point(const MatrixGroup& G, int blocks = 1);

}  // namespace qham
