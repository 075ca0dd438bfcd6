#include "qham/surface.hpp"

#include <algorithm>

namespace qham {

void SurfaceData::validate() const {
  if (genus < 0) throw std::invalid_argument("surface: genus must be non-negative");
  if (base_points.empty()) throw std::invalid_argument("surface: need at least one boundary component");
  for (int m : base_points)
    if (m < 1) throw std::invalid_argument("surface: every boundary component needs a base point");
}

GroupoidWord inverse_word(const GroupoidWord& w) {
  GroupoidWord out;
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back({it->edge, -it->exponent});
  return out;
}

GroupoidWord concat(const GroupoidWord& a, const GroupoidWord& b) {
  GroupoidWord out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

int Quiver::vertex(int component, int index) const {
  for (std::size_t v = 0; v < vertices.size(); ++v)
    if (vertices[v].component == component && vertices[v].index == index) return static_cast<int>(v);
  throw std::invalid_argument("quiver: no such base point");
}

namespace {

int step_source(const Quiver& Q, const WordStep& s) {
  const auto& e = Q.edges.at(s.edge);
  return s.exponent > 0 ? e.source : e.target;
}

int step_target(const Quiver& Q, const WordStep& s) {
  const auto& e = Q.edges.at(s.edge);
  return s.exponent > 0 ? e.target : e.source;
}

}  // namespace

int Quiver::source(const GroupoidWord& w) const { return w.empty() ? -1 : step_source(*this, w.back()); }
int Quiver::target(const GroupoidWord& w) const { return w.empty() ? -1 : step_target(*this, w.front()); }

bool Quiver::composable(const GroupoidWord& w) const {
  for (const auto& s : w)
    if (s.edge < 0 || s.edge >= static_cast<int>(edges.size()) || (s.exponent != 1 && s.exponent != -1)) return false;
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    if (step_source(*this, w[i]) != step_target(*this, w[i + 1])) return false;
  return true;
}

GroupoidWord Quiver::boundary_loop(int j) const {
  GroupoidWord w;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (edges[e].kind == EdgeKind::Boundary && edges[e].component == j) w.push_back({static_cast<int>(e), 1});
  std::reverse(w.begin(), w.end());
  return w;
}

std::vector<int> Quiver::base_point_order() const {
  std::vector<int> out;
  const int r = vertices.back().component;
  for (int j = 1; j <= r; ++j)
    for (std::size_t v = 0; v < vertices.size(); ++v)
      if (vertices[v].component == j) out.push_back(static_cast<int>(v));
  for (std::size_t v = 0; v < vertices.size(); ++v)
    if (vertices[v].component == 0) out.push_back(static_cast<int>(v));
  return out;
}

Quiver build_quiver(const SurfaceData& S) {
  S.validate();
  Quiver Q;
  const int r = S.boundaries() - 1;
  for (int j = 0; j <= r; ++j)
    for (int l = 0; l < S.base_points[j]; ++l)
      Q.vertices.push_back({j, l, "b" + std::to_string(j) + "_" + std::to_string(l + 1)});
  const int b0 = Q.vertex(0, 0);
  auto add = [&](EdgeKind kind, int s, int t, int comp, int idx, const std::string& name) {
    Q.edges.push_back({kind, s, t, comp, idx, false, name});
    return static_cast<int>(Q.edges.size()) - 1;
  };
  std::vector<int> a(S.genus), b(S.genus), gam(r + 1, -1);
  for (int k = 0; k < S.genus; ++k) {
    a[k] = add(EdgeKind::A, b0, b0, k + 1, 0, "a" + std::to_string(k + 1));
    b[k] = add(EdgeKind::B, b0, b0, k + 1, 0, "b" + std::to_string(k + 1));
  }
  for (int j = 1; j <= r; ++j) gam[j] = add(EdgeKind::Gamma, b0, Q.vertex(j, 0), j, 0, "gamma" + std::to_string(j));
  for (int j = 1; j <= r; ++j) {
    const int m = S.base_points[j];
    for (int l = 0; l < m; ++l)
      add(EdgeKind::Boundary, Q.vertex(j, l), Q.vertex(j, (l + 1) % m), j, l,
          "d" + std::to_string(j) + "_" + std::to_string(l + 1));
  }
  const int m0 = S.base_points[0];
  for (int l = 0; l + 1 < m0; ++l)
    add(EdgeKind::Boundary, Q.vertex(0, l), Q.vertex(0, l + 1), 0, l, "d0_" + std::to_string(l + 1));
  Q.stored = static_cast<int>(Q.edges.size());
  Q.derived_edge = add(EdgeKind::Boundary, Q.vertex(0, m0 - 1), b0, 0, m0 - 1, "d0_" + std::to_string(m0));
  Q.edges.back().derived = true;

  GroupoidWord pre;
  for (int j = 1; j <= r; ++j)
    pre = concat(pre, concat(GroupoidWord{{gam[j], -1}}, concat(Q.boundary_loop(j), GroupoidWord{{gam[j], 1}})));
  for (int k = 0; k < S.genus; ++k) pre = concat(pre, GroupoidWord{{a[k], 1}, {b[k], 1}, {a[k], -1}, {b[k], -1}});
  const GroupoidWord loop0 = Q.boundary_loop(0);
  Q.polygon = concat(pre, loop0);
  const GroupoidWord rest(loop0.begin() + 1, loop0.end());
  Q.derived_word = concat(inverse_word(pre), inverse_word(rest));
  return Q;
}

namespace {

class PointSpace : public Space {
 public:
  PointSpace(const MatrixGroup& G, int blocks) : Space(G, 0, make_blocks(G, blocks)) {}
  static std::vector<Block> make_blocks(const MatrixGroup& G, int k) {
    std::vector<Block> out;
    for (int i = 0; i < k; ++i) out.push_back({1, MatBitorsor::trivial(MatOps{G.n()}, 1), std::to_string(i)});
    return out;
  }
  std::string name() const override { return "point"; }
  JetPoint mu(const JetPoint&) const override { return JetPoint(structure_size(), jet_const(G_.identity())); }
  JetPoint act(const JetPoint&, const JetPoint& p) const override { return p; }
  double omega(const Point&, const Tangent&, const Tangent&) const override { return 0.0; }
};

int position(const std::vector<std::string>& labels, const std::string& l) {
  const auto it = std::find(labels.begin(), labels.end(), l);
  if (it == labels.end()) throw std::logic_error("surface assembly: missing component " + l);
  return static_cast<int>(it - labels.begin());
}

struct Piece {
  bool handle;
  int index;  // boundary j or handle k (1-based)
  SpacePtr space;
  std::vector<std::string> labels;
};

class RepSpace : public Space {
 public:
  RepSpace(const SurfaceData& S, const MatrixGroup& G, bool reversed)
      : Space(G, 0, {}), S_(S), Q_(build_quiver(S)) {
    factors_ = Q_.stored;
    const int r = S.boundaries() - 1;
    MatOps ops{G.n()};
    for (int j = 1; j <= r; ++j)
      blocks_.push_back({S.base_points[j], MatBitorsor(ops, Twist<MatOps>::shift(S.base_points[j], ops)),
                         "V" + std::to_string(j)});
    blocks_.push_back({S.base_points[0], MatBitorsor(ops, Twist<MatOps>::shift(S.base_points[0], ops)), "V0"});
    order_ = Q_.base_point_order();

    const MatBitorsor B = MatBitorsor::trivial(ops, 1);
    for (int j = 1; j <= r; ++j) pieces_.push_back({false, j, make_double(G, B, B), {"V" + std::to_string(j), "V0"}});
    for (int k = 1; k <= S.genus; ++k) pieces_.push_back({true, k, make_fused_double(G, B, B), {"V0"}});
    if (reversed) std::reverse(pieces_.begin(), pieces_.end());

    SpacePtr cur;
    std::vector<std::string> labels;
    if (pieces_.empty()) {
      cur = make_point(G, 1);
      labels = {"V0"};
    } else {
      cur = pieces_[0].space;
      labels = pieces_[0].labels;
      for (std::size_t i = 1; i < pieces_.size(); ++i) {
        cur = fuse(cur, pieces_[i].space, position(labels, "V0"), position(pieces_[i].labels, "V0"));
        for (const auto& l : pieces_[i].labels)
          if (l != "V0") labels.push_back(l);
      }
    }
    for (int j = 1; j <= r; ++j) cur = refine(cur, position(labels, "V" + std::to_string(j)), S.base_points[j]);
    cur = refine(cur, position(labels, "V0"), S.base_points[0]);
    inner_ = cur;
    for (const auto& b : blocks_) inner_position_.push_back(position(labels, b.label));
  }

  std::string name() const override { return "rep_space"; }

  const Quiver& quiver() const { return Q_; }

  // Coordinates of the assembled space as functions of the stored edges.
  JetPoint inner_point(const JetPoint& rho) const {
    JetPoint all = rho;
    auto value = [&](const GroupoidWord& w) {
      return eval_steps(ops_, all, w, jet_const(ops_.identity()));
    };
    all.push_back(value(Q_.derived_word));
    JetPoint out;
    for (const auto& pc : pieces_) {
      if (pc.handle) {
        out.push_back(rho[edge_index(EdgeKind::A, pc.index)]);
        out.push_back(rho[edge_index(EdgeKind::B, pc.index)]);
      } else {
        const Jet C = rho[edge_index(EdgeKind::Gamma, pc.index)];
        const Jet H = value(Q_.boundary_loop(pc.index));
        out.push_back(C);
        out.push_back(ops_.mul(ops_.inv(C), ops_.inv(H)));
      }
    }
    const int r = S_.boundaries() - 1;
    auto push_segments = [&](int j) {
      const int m = S_.base_points[j];
      for (int l = 0; l + 1 < m; ++l) out.push_back(rho[boundary_edge(j, l)]);
    };
    for (int j = 1; j <= r; ++j) push_segments(j);
    push_segments(0);
    return out;
  }

  JetPoint mu(const JetPoint& p) const override {
    const JetPoint m = inner_->mu(inner_point(p));
    JetPoint out;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const int ib = inner_position_[b];
      const int off = inner_->block_offset(ib);
      for (int i = 0; i < inner_->blocks()[ib].size; ++i) out.push_back(m[off + i]);
    }
    return out;
  }

  JetPoint act(const JetPoint& g, const JetPoint& p) const override {
    JetPoint gv(Q_.vertices.size());
    for (std::size_t i = 0; i < order_.size(); ++i) gv[order_[i]] = g[i];
    return gauge_rep(ops_, Q_, gv, p);
  }

  double omega(const Point& p, const Tangent& u, const Tangent& v) const override {
    const JetPoint ju = inner_point(make_jets(p, u));
    const JetPoint jv = inner_point(make_jets(p, v));
    return inner_->omega(values(ju), tangents(ju), tangents(jv));
  }

 private:
  int edge_index(EdgeKind kind, int comp) const {
    for (int e = 0; e < Q_.stored; ++e)
      if (Q_.edges[e].kind == kind && Q_.edges[e].component == comp) return e;
    throw std::logic_error("surface: missing edge");
  }
  int boundary_edge(int j, int l) const {
    for (int e = 0; e < Q_.stored; ++e)
      if (Q_.edges[e].kind == EdgeKind::Boundary && Q_.edges[e].component == j && Q_.edges[e].index == l) return e;
    throw std::logic_error("surface: missing boundary edge");
  }

  SurfaceData S_;
  Quiver Q_;
  std::vector<int> order_;
  std::vector<Piece> pieces_;
  SpacePtr inner_;
  std::vector<int> inner_position_;
};

}  // namespace

SpacePtr make_point(const MatrixGroup& G, int blocks) { return std::make_shared<PointSpace>(G, blocks); }

SpacePtr rep_space(const SurfaceData& S, const MatrixGroup& G, bool reversed_fusion) {
  return std::make_shared<RepSpace>(S, G, reversed_fusion);
}

}  // namespace qham
