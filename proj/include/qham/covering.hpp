#pragma once

#include "qham/finite_group.hpp"
#include "qham/surface.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qham {

// Cyclic cover X -> Y given by a classifying map from the stored edges of
// Q_Y to Z/m.  The lift of e from sheet s ends on sheet s + hom(e).
struct CoveringSpec {
  SurfaceData base;
  int order = 1;
  std::vector<int> hom;  // one value per stored edge of Q_Y
};

struct LiftedQuiver {
  Quiver base;
  int m = 1;
  std::vector<int> hom;  // per edge of Q_Y, derived edge included

  int vertices() const { return static_cast<int>(base.vertices.size()) * m; }
  int edges() const { return base.stored * m; }  // lifts of stored edges
  int vertex(int v, int sheet) const { return v * m + mod(sheet); }
  int edge(int e, int sheet) const { return e * m + mod(sheet); }
  int edge_source(int le) const { return vertex(base.edges[le / m].source, le % m); }
  int edge_target(int le) const { return vertex(base.edges[le / m].target, le % m + hom[le / m]); }
  int mod(int s) const { return ((s % m) + m) % m; }
  // Partial lift information of a word in Q_Y edges (derived edge allowed).
  int hom_of(const GroupoidWord& w) const;
  // Replace derived-edge steps by their expression in stored edges.
  GroupoidWord expand(const GroupoidWord& w) const;
};

LiftedQuiver build_cover(const CoveringSpec& spec);

// Cover is connected iff the hom values generate Z/m.
bool cover_connected(const LiftedQuiver& X);
// The deck action (v, s) -> (v, s + phi) fixes no vertex or edge for phi != 0.
bool deck_action_free(const LiftedQuiver& X);

// mon_I(e) = I(s) + hom(e) - I(t), for every edge of Q_Y (derived included).
std::vector<int> monodromy_rep(const LiftedQuiver& X, const std::vector<int>& I);
int monodromy_of(const LiftedQuiver& X, const std::vector<int>& I, const GroupoidWord& w);

// Per boundary component of Y: how it lifts.
struct BoundaryLift {
  int component = 0;
  int hom = 0;              // class of the boundary loop in Z/m
  int stabilizer = 1;       // order of the subgroup fixing one lifted circle
  int circles = 0;          // lifted circles found by walking the lifted edges
  int points_per_circle = 0;
  bool stabilizer_cyclic = false;
  bool orbit_stabilizer = false;  // circles * stabilizer == m
};
std::vector<BoundaryLift> boundary_lifts(const LiftedQuiver& X);

// ---- representations (templated on the coefficient group) ----

template <class Ops>
typename Ops::Aut aut_power(const Ops& ops, const typename Ops::Aut& a, int k, int m) {
  k = ((k % m) + m) % m;
  auto out = ops.id_aut();
  for (int i = 0; i < k; ++i) out = ops.compose(a, out);
  return out;
}

// Value of rho on the lift of w that starts on sheet `start` over source(w).
template <class Ops>
typename Ops::Elem eval_lifted(const Ops& ops, const LiftedQuiver& X, const std::vector<typename Ops::Elem>& rho,
                               const GroupoidWord& w, int start) {
  const GroupoidWord ws = X.expand(w);
  auto acc = ops.identity();
  int sheet = X.mod(start);
  for (auto it = ws.rbegin(); it != ws.rend(); ++it) {
    const int e = it->edge;
    if (it->exponent > 0) {
      acc = ops.mul(rho[X.edge(e, sheet)], acc);
      sheet = X.mod(sheet + X.hom[e]);
    } else {
      sheet = X.mod(sheet - X.hom[e]);
      acc = ops.mul(ops.inv(rho[X.edge(e, sheet)]), acc);
    }
  }
  return acc;
}

// (phi.rho)(e_s) = kappa_phi(rho(e_{s+phi})).
template <class Ops>
std::vector<typename Ops::Elem> gamma_act_rep(const Ops& ops, const LiftedQuiver& X, const typename Ops::Aut& kappa,
                                              int phi, const std::vector<typename Ops::Elem>& rho) {
  const auto k = aut_power(ops, kappa, phi, X.m);
  std::vector<typename Ops::Elem> out(rho.size());
  for (int e = 0; e < X.base.stored; ++e)
    for (int s = 0; s < X.m; ++s) out[X.edge(e, s)] = ops.apply(k, rho[X.edge(e, s + phi)]);
  return out;
}

// Gauge transformation on X, g indexed by lifted vertex.
template <class Ops>
std::vector<typename Ops::Elem> gauge_cover(const Ops& ops, const LiftedQuiver& X,
                                            const std::vector<typename Ops::Elem>& g,
                                            const std::vector<typename Ops::Elem>& rho) {
  std::vector<typename Ops::Elem> out(rho.size());
  for (int le = 0; le < X.edges(); ++le)
    out[le] = ops.mul(ops.mul(g[X.edge_target(le)], rho[le]), ops.inv(g[X.edge_source(le)]));
  return out;
}

// (phi.g)(v, s) = kappa_phi(g(v, s + phi)).
template <class Ops>
std::vector<typename Ops::Elem> gamma_act_gauge(const Ops& ops, const LiftedQuiver& X, const typename Ops::Aut& kappa,
                                                int phi, const std::vector<typename Ops::Elem>& g) {
  const auto k = aut_power(ops, kappa, phi, X.m);
  std::vector<typename Ops::Elem> out(g.size());
  for (std::size_t v = 0; v < X.base.vertices.size(); ++v)
    for (int s = 0; s < X.m; ++s) out[X.vertex(static_cast<int>(v), s)] = ops.apply(k, g[X.vertex(static_cast<int>(v), s + phi)]);
  return out;
}

template <class Ops>
double rep_dist(const Ops& ops, const std::vector<typename Ops::Elem>& a, const std::vector<typename Ops::Elem>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, ops.dist(a[i], b[i]));
  return d;
}

template <class Ops>
double fixed_residual(const Ops& ops, const LiftedQuiver& X, const typename Ops::Aut& kappa,
                      const std::vector<typename Ops::Elem>& rho) {
  double d = 0.0;
  for (int phi = 1; phi < X.m; ++phi) d = std::max(d, rep_dist(ops, gamma_act_rep(ops, X, kappa, phi, rho), rho));
  return d;
}

// Element of Z/m x| G with (phi, g)(psi, h) = (phi + psi, kappa_psi^{-1}(g) h).
template <class Ops>
struct Twisted {
  int phi = 0;
  typename Ops::Elem g;
};

template <class Ops>
Twisted<Ops> twisted_mul(const Ops& ops, const typename Ops::Aut& kappa, int m, const Twisted<Ops>& a,
                         const Twisted<Ops>& b) {
  const auto kinv = aut_power(ops, kappa, -b.phi, m);
  return {((a.phi + b.phi) % m + m) % m, ops.mul(ops.apply(kinv, a.g), b.g)};
}

template <class Ops>
Twisted<Ops> twisted_inv(const Ops& ops, const typename Ops::Aut& kappa, int m, const Twisted<Ops>& a) {
  return {((-a.phi) % m + m) % m, ops.inv(ops.apply(aut_power(ops, kappa, a.phi, m), a.g))};
}

template <class Ops>
struct TwistedRepresentation {
  std::vector<int> gamma_part;          // per stored edge of Q_Y
  std::vector<typename Ops::Elem> g;    // per stored edge of Q_Y
};

// rho_I(e) = (mon_I(e), rho(lift of e starting at I(s(e)))).
template <class Ops>
TwistedRepresentation<Ops> push_fixed_rep(const Ops& ops, const LiftedQuiver& X, const typename Ops::Aut& kappa,
                                         const std::vector<int>& I, const std::vector<typename Ops::Elem>& rho,
                                         double tol = 1e-10) {
  if (fixed_residual(ops, X, kappa, rho) > tol) throw std::invalid_argument("push: representation is not Gamma-fixed");
  TwistedRepresentation<Ops> out;
  out.gamma_part = monodromy_rep(X, I);
  out.gamma_part.resize(X.base.stored);
  for (int e = 0; e < X.base.stored; ++e) out.g.push_back(rho[X.edge(e, I[X.base.edges[e].source])]);
  return out;
}

// Inverse of push: rho(e_{I(s)+phi}) = kappa_{-phi}(g_e).
template <class Ops>
std::vector<typename Ops::Elem> lift_twisted_rep(const Ops& ops, const LiftedQuiver& X, const typename Ops::Aut& kappa,
                                                 const std::vector<int>& I, const TwistedRepresentation<Ops>& t) {
  const auto mon = monodromy_rep(X, I);
  for (int e = 0; e < X.base.stored; ++e)
    if (X.mod(t.gamma_part[e]) != mon[e]) throw std::invalid_argument("lift: Gamma part differs from the monodromy");
  std::vector<typename Ops::Elem> rho(X.edges(), ops.identity());
  for (int e = 0; e < X.base.stored; ++e) {
    const int s0 = I[X.base.edges[e].source];
    for (int phi = 0; phi < X.m; ++phi) rho[X.edge(e, s0 + phi)] = ops.apply(aut_power(ops, kappa, -phi, X.m), t.g[e]);
  }
  return rho;
}

// Value of a twisted representation on a word of Q_Y.
template <class Ops>
Twisted<Ops> eval_twisted(const Ops& ops, const LiftedQuiver& X, const typename Ops::Aut& kappa,
                          const TwistedRepresentation<Ops>& t, const GroupoidWord& w) {
  const GroupoidWord ws = X.expand(w);
  Twisted<Ops> acc{0, ops.identity()};
  for (const auto& s : ws) {
    Twisted<Ops> x{t.gamma_part[s.edge], t.g[s.edge]};
    if (s.exponent < 0) x = twisted_inv(ops, kappa, X.m, x);
    acc = twisted_mul(ops, kappa, X.m, acc, x);
  }
  return acc;
}

// Homomorphism residual of the pushed representation on all composable
// pairs of (signed) edges of Q_Y, derived edge included: the pushed value of
// the lifted word vs the product in Z/m x| G.
template <class Ops>
double push_hom_residual(const Ops& ops, const LiftedQuiver& X, const typename Ops::Aut& kappa,
                         const std::vector<int>& I, const std::vector<typename Ops::Elem>& rho, int* pairs = nullptr) {
  const auto t = push_fixed_rep(ops, X, kappa, I, rho);
  const int E = static_cast<int>(X.base.edges.size());
  auto pushed = [&](const GroupoidWord& w) {
    return Twisted<Ops>{monodromy_of(X, I, w), eval_lifted(ops, X, rho, w, I[X.base.source(w)])};
  };
  double d = 0.0;
  int count = 0;
  for (int e1 = 0; e1 < E; ++e1)
    for (int x1 : {1, -1})
      for (int e2 = 0; e2 < E; ++e2)
        for (int x2 : {1, -1}) {
          const GroupoidWord a{{e1, x1}}, b{{e2, x2}}, ab{{e1, x1}, {e2, x2}};
          if (!X.base.composable(ab)) continue;
          ++count;
          const auto lhs = pushed(ab);
          const auto rhs = twisted_mul(ops, kappa, X.m, pushed(a), pushed(b));
          const auto via_rep = eval_twisted(ops, X, kappa, t, ab);
          if (lhs.phi != rhs.phi || lhs.phi != via_rep.phi) return std::numeric_limits<double>::infinity();
          d = std::max({d, ops.dist(lhs.g, rhs.g), ops.dist(lhs.g, via_rep.g)});
        }
  if (pairs) *pairs = count;
  return d;
}

// ---- exhaustive finite oracle ----

struct GuardExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EnumerationReport {
  std::uint64_t hom_x = 0;       // |Hom(Pi_X, G)|
  std::uint64_t fixed = 0;       // |Hom(Pi_X, G)^Gamma|
  std::uint64_t twisted = 0;     // |Hom_mon(Pi_Y, G)|
  bool injective = false;
  bool surjective = false;
  bool roundtrip = false;        // lift(push(rho)) = rho and push(lift(t)) = t
  bool homomorphism = false;     // push lands in groupoid homomorphisms
  bool bijection() const { return injective && surjective && roundtrip && homomorphism && fixed == twisted; }
};

constexpr std::uint64_t kEnumerationGuard = 10000000ULL;

EnumerationReport enumerate_finite(const CoveringSpec& spec, const FiniteGroup& G, const Perm& kappa,
                                   const std::vector<int>& I = {}, std::uint64_t guard = kEnumerationGuard);

}  // namespace qham
