#include "qham/space.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace qham {

JetPoint make_jets(const Point& p, const Tangent& u) {
  if (p.size() != u.size()) throw std::invalid_argument("tangent has wrong component count");
  JetPoint out;
  for (std::size_t i = 0; i < p.size(); ++i) out.push_back({p[i], u[i]});
  return out;
}

JetPoint make_jets(const Point& p) {
  JetPoint out;
  for (const auto& x : p) out.push_back(jet_const(x));
  return out;
}

Point values(const JetPoint& j) {
  Point out;
  for (const auto& x : j) out.push_back(x.x);
  return out;
}

Tangent tangents(const JetPoint& j) {
  Tangent out;
  for (const auto& x : j) out.push_back(x.d);
  return out;
}

double wedge(const MatrixGroup& G, const Mat& au, const Mat& bu, const Mat& av, const Mat& bv) {
  return G.inner(au, bv) - G.inner(av, bu);
}

double wedge(const MatrixGroup& G, const std::vector<Mat>& au, const std::vector<Mat>& bu,
             const std::vector<Mat>& av, const std::vector<Mat>& bv) {
  double s = 0.0;
  for (std::size_t i = 0; i < au.size(); ++i) s += wedge(G, au[i], bu[i], av[i], bv[i]);
  return s;
}

int Space::structure_size() const {
  int s = 0;
  for (const auto& b : blocks_) s += b.size;
  return s;
}

int Space::block_offset(int b) const {
  int s = 0;
  for (int i = 0; i < b; ++i) s += blocks_[i].size;
  return s;
}

MatBitorsor Space::target() const {
  Twist<MatOps> t;
  Monomial<MatOps> gm;
  bool any_gamma = false;
  int order = 1;
  int off = 0;
  for (const auto& b : blocks_) {
    for (int i = 0; i < b.size; ++i) {
      t.sigma.push_back(b.target.twist().sigma[i] + off);
      t.auts.push_back(b.target.twist().auts[i]);
    }
    if (b.target.gamma()) {
      any_gamma = true;
      order = b.target.gamma()->order;
      gm = gm.block_sum(ops_, b.target.gamma()->gen);
    } else {
      gm = gm.block_sum(ops_, Monomial<MatOps>::identity(b.size, ops_));
    }
    off += b.size;
  }
  std::optional<GammaAction<MatOps>> g;
  if (any_gamma) g = GammaAction<MatOps>{order, gm};
  return MatBitorsor(ops_, t, g);
}

JetPoint Space::gamma_point(int phi, const JetPoint& p) const {
  if (!point_gamma_) return p;
  return point_gamma_->element(ops_, phi).apply(ops_, p);
}

Point Space::gamma_point(int phi, const Point& p) const {
  if (!point_gamma_) return p;
  return point_gamma_->element(ops_, phi).apply(ops_, p);
}

Tangent Space::gamma_tangent(int phi, const Tangent& u) const {
  if (!point_gamma_) return u;
  return point_gamma_->element(ops_, phi).apply_tangent(ops_, u);
}

namespace {

template <class E>
std::vector<E> slice(const std::vector<E>& v, int off, int len) {
  return std::vector<E>(v.begin() + off, v.begin() + off + len);
}

template <class E>
void append(std::vector<E>& out, const std::vector<E>& v) {
  out.insert(out.end(), v.begin(), v.end());
}

template <class E>
std::vector<E> gamma_blocks(const std::vector<Block>& blocks, int phi, const std::vector<E>& g, bool group) {
  std::vector<E> out;
  int off = 0;
  for (const auto& b : blocks) {
    const auto part = slice(g, off, b.size);
    append(out, group ? b.target.gamma_act_group(phi, part) : b.target.gamma_act(phi, part));
    off += b.size;
  }
  return out;
}

}  // namespace

JetPoint Space::gamma_structure(int phi, const JetPoint& g) const { return gamma_blocks(blocks_, phi, g, true); }
Point Space::gamma_structure(int phi, const Point& g) const { return gamma_blocks(blocks_, phi, g, true); }
Point Space::gamma_target(int phi, const Point& x) const { return gamma_blocks(blocks_, phi, x, false); }

std::vector<Tangent> Space::tangent_basis(const Point&) const {
  std::vector<Tangent> out;
  for (int i = 0; i < factors_; ++i) {
    for (const auto& b : G_.basis()) {
      Tangent t(factors_, G_.zero());
      t[i] = b;
      out.push_back(t);
    }
  }
  return out;
}

std::vector<Tangent> Space::structure_basis() const {
  std::vector<Tangent> out;
  const int K = structure_size();
  for (int i = 0; i < K; ++i) {
    for (const auto& b : G_.basis()) {
      Tangent t(K, G_.zero());
      t[i] = b;
      out.push_back(t);
    }
  }
  return out;
}

Point Space::sample_point(Rng& rng) const {
  Point p;
  for (int i = 0; i < factors_; ++i) p.push_back(G_.random_element(rng));
  return p;
}

namespace {

Tangent combine(const std::vector<Tangent>& basis, int len, const MatrixGroup& G, Rng& rng, double sigma) {
  std::normal_distribution<double> nd(0.0, sigma);
  Tangent t(len, G.zero());
  for (const auto& b : basis) {
    const double c = nd(rng);
    for (int i = 0; i < len; ++i) t[i] += c * b[i];
  }
  return t;
}

}  // namespace

Point Space::sample_structure(Rng& rng, double sigma) const {
  const Tangent X = combine(structure_basis(), structure_size(), G_, rng, sigma);
  Point g;
  for (const auto& x : X) g.push_back(G_.exp(x));
  return g;
}

// Unit norm keeps finite-difference truncation error comparable across spaces.
Tangent Space::sample_tangent(const Point& p, Rng& rng) const {
  Tangent t = combine(tangent_basis(p), factors_, G_, rng, 1.0);
  double n2 = 0.0;
  for (const auto& x : t) n2 += x.squaredNorm();
  if (n2 > 0.0)
    for (auto& x : t) x /= std::sqrt(n2);
  return t;
}

Tangent Space::sample_structure_algebra(Rng& rng) const {
  return combine(structure_basis(), structure_size(), G_, rng, 1.0);
}

Tangent Space::generating_vector(const Tangent& xi, const Point& p) const {
  JetPoint g;
  for (const auto& x : xi) g.push_back({G_.identity(), -x});
  return tangents(act(g, make_jets(p)));
}

Tangent Space::act_tangent(const Point& g, const Point& p, const Tangent& u) const {
  return tangents(act(make_jets(g), make_jets(p, u)));
}

namespace {

// Place vectors of length len at offset off inside vectors of length total.
std::vector<Tangent> pad(const std::vector<Tangent>& vs, int off, int total, const MatrixGroup& G) {
  std::vector<Tangent> out;
  for (const auto& v : vs) {
    Tangent t(total, G.zero());
    for (std::size_t i = 0; i < v.size(); ++i) t[off + i] = v[i];
    out.push_back(t);
  }
  return out;
}

// Orthonormal basis (for the summed inner product) of the span of vs.
std::vector<Tangent> span_basis(const MatrixGroup& G, const std::vector<Tangent>& vs) {
  if (vs.empty()) return {};
  const int len = static_cast<int>(vs[0].size());
  const int d = G.dim();
  Eigen::MatrixXd A(len * d, static_cast<Eigen::Index>(vs.size()));
  for (std::size_t j = 0; j < vs.size(); ++j)
    for (int i = 0; i < len; ++i) A.col(j).segment(i * d, d) = G.coords(vs[j][i]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  std::vector<Tangent> out;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s(k) <= 1e-9 * s(0)) break;
    Tangent t;
    for (int i = 0; i < len; ++i) t.push_back(G.from_coords(svd.matrixU().col(k).segment(i * d, d)));
    out.push_back(t);
  }
  return out;
}

// Jet product x_k ... x_1 given [x_1, ..., x_k] (first element acts first).
Jet ordered_product(const MatOps& ops, const JetPoint& xs, int count) {
  Jet acc = jet_const(ops.identity());
  for (int i = 0; i < count; ++i) acc = ops.mul(xs[i], acc);
  return acc;
}

// (1/2) sum_i (k_i^* thetabar, h_i^* theta) with k_i = h_{i-1}...h_1.
double chain_term(const MatrixGroup& G, const MatOps& ops, const JetPoint& hu, const JetPoint& hv) {
  double s = 0.0;
  Jet ku = jet_const(ops.identity());
  Jet kv = jet_const(ops.identity());
  for (std::size_t i = 0; i < hu.size(); ++i) {
    const Mat kbu = ku.x * ku.d * ku.x.adjoint();
    const Mat kbv = kv.x * kv.d * kv.x.adjoint();
    s += 0.5 * wedge(G, kbu, hu[i].d, kbv, hv[i].d);
    ku = ops.mul(hu[i], ku);
    kv = ops.mul(hv[i], kv);
  }
  return s;
}

std::vector<Jet> inv_all(const MatOps& ops, const JetPoint& g) {
  JetPoint out;
  for (const auto& x : g) out.push_back(ops.inv(x));
  return out;
}

// ---- double ----

class DoubleSpace : public Space {
 public:
  DoubleSpace(const MatrixGroup& G, MatBitorsor B1, MatBitorsor B2)
      : Space(G, 2 * B1.size(),
              {Block{B1.size(), product(B1, B2), "1"}, Block{B1.size(), product(inverse(B1), inverse(B2)), "2"}}),
        B1_(std::move(B1)),
        B2_(std::move(B2)),
        B1i_(inverse(B1_)),
        B2i_(inverse(B2_)),
        k_(B1_.size()) {
    if (B1_.size() != B2_.size()) throw std::invalid_argument("double: bitorsors over different index sets");
    if (B1_.gamma().has_value() != B2_.gamma().has_value())
      throw std::invalid_argument("double: only one bitorsor carries a Gamma action");
    if (B1_.gamma()) {
      if (B1_.gamma()->order != B2_.gamma()->order) throw std::invalid_argument("double: Gamma orders differ");
      set_point_gamma(GammaAction<MatOps>{B1_.gamma()->order, B1_.gamma()->gen.block_sum(ops_, B2_.gamma()->gen)});
    }
  }

  std::string name() const override { return "double"; }

  JetPoint mu(const JetPoint& p) const override {
    const auto a = slice(p, 0, k_);
    const auto b = slice(p, k_, k_);
    JetPoint out = product_carrier(B1_, a, b);
    append(out, product_carrier(B1i_, inverse_carrier(B1_, a), inverse_carrier(B2_, b)));
    return out;
  }

  JetPoint act(const JetPoint& g, const JetPoint& p) const override {
    const auto g1 = slice(g, 0, k_);
    const auto g2 = slice(g, k_, k_);
    const auto a = slice(p, 0, k_);
    const auto b = slice(p, k_, k_);
    JetPoint out = B1_.right_act(B1_.left_act(g1, a), inv_all(ops_, g2));
    append(out, B2_.right_act(B2_.left_act(g2, b), inv_all(ops_, g1)));
    return out;
  }

  double omega(const Point& p, const Tangent& u, const Tangent& v) const override {
    const JetPoint ju = make_jets(p, u);
    const JetPoint jv = make_jets(p, v);
    const auto au = slice(ju, 0, k_), bu = slice(ju, k_, k_);
    const auto av = slice(jv, 0, k_), bv = slice(jv, k_, k_);
    const double t1 = wedge(G_, bitorsor_theta(B1_, au), bitorsor_theta_bar(B2_, bu), bitorsor_theta(B1_, av),
                            bitorsor_theta_bar(B2_, bv));
    const double t2 = wedge(G_, bitorsor_theta_bar(B1_, au), bitorsor_theta(B2_, bu), bitorsor_theta_bar(B1_, av),
                            bitorsor_theta(B2_, bv));
    return -0.5 * t1 - 0.5 * t2;
  }

 private:
  MatBitorsor B1_, B2_, B1i_, B2i_;
  int k_;
};

// ---- fusion ----

class FusionSpace : public Space {
 public:
  FusionSpace(SpacePtr M1, SpacePtr M2, int c1, int c2)
      : Space(M1->group(), M1->factors() + M2->factors(), fused_blocks(*M1, *M2, c1, c2)),
        M1_(std::move(M1)),
        M2_(std::move(M2)),
        c1_(c1),
        c2_(c2) {
    if (!(M1_->group() == M2_->group())) throw std::invalid_argument("fuse: different groups");
    if (M1_->has_gamma() != M2_->has_gamma()) throw std::invalid_argument("fuse: only one space carries Gamma");
    if (M1_->has_gamma()) {
      if (M1_->gamma_order() != M2_->gamma_order()) throw std::invalid_argument("fuse: Gamma orders differ");
      set_point_gamma(GammaAction<MatOps>{M1_->gamma_order(),
                                          M1_->point_gamma()->gen.block_sum(ops_, M2_->point_gamma()->gen)});
    }
  }

  static std::vector<Block> fused_blocks(const Space& M1, const Space& M2, int c1, int c2) {
    const int n1 = static_cast<int>(M1.blocks().size());
    const int n2 = static_cast<int>(M2.blocks().size());
    if (c1 < 0 || c1 >= n1 || c2 < 0 || c2 >= n2) throw std::invalid_argument("fuse: no such component");
    if (M1.blocks()[c1].size != M2.blocks()[c2].size) throw std::invalid_argument("fuse: component sizes differ");
    std::vector<Block> out = M1.blocks();
    out[c1].target = product(M1.blocks()[c1].target, M2.blocks()[c2].target);
    for (int b = 0; b < n2; ++b)
      if (b != c2) out.push_back(M2.blocks()[b]);
    return out;
  }

  std::string name() const override { return "fuse(" + M1_->name() + "," + M2_->name() + ")"; }

  JetPoint mu(const JetPoint& p) const override {
    const auto m1 = M1_->mu(slice(p, 0, M1_->factors()));
    const auto m2 = M2_->mu(slice(p, M1_->factors(), M2_->factors()));
    JetPoint out;
    for (int b = 0; b < static_cast<int>(M1_->blocks().size()); ++b) {
      const auto part = slice(m1, M1_->block_offset(b), M1_->blocks()[b].size);
      if (b == c1_) {
        const auto other = slice(m2, M2_->block_offset(c2_), M2_->blocks()[c2_].size);
        append(out, product_carrier(M1_->blocks()[c1_].target, part, other));
      } else {
        append(out, part);
      }
    }
    for (int b = 0; b < static_cast<int>(M2_->blocks().size()); ++b)
      if (b != c2_) append(out, slice(m2, M2_->block_offset(b), M2_->blocks()[b].size));
    return out;
  }

  JetPoint act(const JetPoint& g, const JetPoint& p) const override {
    const int s1 = M1_->structure_size();
    const auto g1 = slice(g, 0, s1);
    JetPoint g2;
    int off = s1;
    for (int b = 0; b < static_cast<int>(M2_->blocks().size()); ++b) {
      const int sz = M2_->blocks()[b].size;
      if (b == c2_) {
        append(g2, slice(g1, M1_->block_offset(c1_), sz));
      } else {
        append(g2, slice(g, off, sz));
        off += sz;
      }
    }
    JetPoint out = M1_->act(g1, slice(p, 0, M1_->factors()));
    append(out, M2_->act(g2, slice(p, M1_->factors(), M2_->factors())));
    return out;
  }

  double omega(const Point& p, const Tangent& u, const Tangent& v) const override {
    const int f1 = M1_->factors(), f2 = M2_->factors();
    const auto p1 = slice(p, 0, f1), p2 = slice(p, f1, f2);
    const auto u1 = slice(u, 0, f1), u2 = slice(u, f1, f2);
    const auto v1 = slice(v, 0, f1), v2 = slice(v, f1, f2);
    double w = M1_->omega(p1, u1, v1) + M2_->omega(p2, u2, v2);
    const auto& B1 = M1_->blocks()[c1_].target;
    const auto& B2 = M2_->blocks()[c2_].target;
    const int o1 = M1_->block_offset(c1_), o2 = M2_->block_offset(c2_), sz = B1.size();
    const auto m1u = slice(M1_->mu(make_jets(p1, u1)), o1, sz);
    const auto m1v = slice(M1_->mu(make_jets(p1, v1)), o1, sz);
    const auto m2u = slice(M2_->mu(make_jets(p2, u2)), o2, sz);
    const auto m2v = slice(M2_->mu(make_jets(p2, v2)), o2, sz);
    w -= 0.5 * wedge(G_, bitorsor_theta(B1, m1u), bitorsor_theta_bar(B2, m2u), bitorsor_theta(B1, m1v),
                     bitorsor_theta_bar(B2, m2v));
    return w;
  }

  std::vector<Tangent> tangent_basis(const Point& p) const override {
    const int f1 = M1_->factors();
    auto out = pad(M1_->tangent_basis(slice(p, 0, f1)), 0, factors_, G_);
    append(out, pad(M2_->tangent_basis(slice(p, f1, M2_->factors())), f1, factors_, G_));
    return out;
  }

  Point sample_point(Rng& rng) const override {
    Point p = M1_->sample_point(rng);
    append(p, M2_->sample_point(rng));
    return p;
  }

  std::vector<Tangent> structure_basis() const override {
    const int K = structure_size();
    const int s1 = M1_->structure_size();
    auto out = pad(M1_->structure_basis(), 0, K, G_);
    for (const auto& b : M2_->structure_basis()) {
      Tangent t(s1, G_.zero());
      for (int blk = 0; blk < static_cast<int>(M2_->blocks().size()); ++blk)
        if (blk != c2_) append(t, slice(b, M2_->block_offset(blk), M2_->blocks()[blk].size));
      out.push_back(t);
    }
    return span_basis(G_, out);
  }

 private:
  SpacePtr M1_, M2_;
  int c1_, c2_;
};

class InternalFusionSpace : public Space {
 public:
  InternalFusionSpace(SpacePtr M, int c1, int c2)
      : Space(M->group(), M->factors(), fused_blocks(*M, c1, c2)), M_(std::move(M)), c1_(c1), c2_(c2) {
    set_point_gamma(M_->point_gamma());
  }

  static std::vector<Block> fused_blocks(const Space& M, int c1, int c2) {
    const int n = static_cast<int>(M.blocks().size());
    if (c1 < 0 || c1 >= n || c2 < 0 || c2 >= n || c1 == c2)
      throw std::invalid_argument("internal_fuse: invalid component designation");
    if (M.blocks()[c1].size != M.blocks()[c2].size)
      throw std::invalid_argument("internal_fuse: component sizes differ");
    std::vector<Block> out;
    for (int b = 0; b < n; ++b) {
      if (b == c2) continue;
      Block blk = M.blocks()[b];
      if (b == c1) blk.target = product(M.blocks()[c1].target, M.blocks()[c2].target);
      out.push_back(blk);
    }
    return out;
  }

  std::string name() const override { return "internal_fuse(" + M_->name() + ")"; }

  JetPoint mu(const JetPoint& p) const override {
    const auto m = M_->mu(p);
    JetPoint out;
    for (int b = 0; b < static_cast<int>(M_->blocks().size()); ++b) {
      if (b == c2_) continue;
      const auto part = slice(m, M_->block_offset(b), M_->blocks()[b].size);
      if (b == c1_) {
        const auto other = slice(m, M_->block_offset(c2_), M_->blocks()[c2_].size);
        append(out, product_carrier(M_->blocks()[c1_].target, part, other));
      } else {
        append(out, part);
      }
    }
    return out;
  }

  JetPoint act(const JetPoint& g, const JetPoint& p) const override {
    // Rebuild the structure element of M, duplicating component c1 into c2.
    std::vector<JetPoint> parts;
    int off = 0;
    JetPoint gc1;
    for (int b = 0; b < static_cast<int>(M_->blocks().size()); ++b) {
      if (b == c2_) {
        parts.emplace_back();
        continue;
      }
      const int sz = M_->blocks()[b].size;
      parts.push_back(slice(g, off, sz));
      if (b == c1_) gc1 = parts.back();
      off += sz;
    }
    parts[c2_] = gc1;
    JetPoint full;
    for (const auto& part : parts) append(full, part);
    return M_->act(full, p);
  }

  double omega(const Point& p, const Tangent& u, const Tangent& v) const override {
    double w = M_->omega(p, u, v);
    const auto& B1 = M_->blocks()[c1_].target;
    const auto& B2 = M_->blocks()[c2_].target;
    const int o1 = M_->block_offset(c1_), o2 = M_->block_offset(c2_), sz = B1.size();
    const auto mu_ = M_->mu(make_jets(p, u));
    const auto mv = M_->mu(make_jets(p, v));
    w -= 0.5 * wedge(G_, bitorsor_theta(B1, slice(mu_, o1, sz)), bitorsor_theta_bar(B2, slice(mu_, o2, sz)),
                     bitorsor_theta(B1, slice(mv, o1, sz)), bitorsor_theta_bar(B2, slice(mv, o2, sz)));
    return w;
  }

  std::vector<Tangent> tangent_basis(const Point& p) const override { return M_->tangent_basis(p); }
  Point sample_point(Rng& rng) const override { return M_->sample_point(rng); }

  std::vector<Tangent> structure_basis() const override {
    // Keep every component of M except c2; the diagonal copy carries c1's data.
    std::vector<Tangent> cut;
    for (const auto& b : M_->structure_basis()) {
      Tangent t;
      for (int blk = 0; blk < static_cast<int>(M_->blocks().size()); ++blk)
        if (blk != c2_) append(t, slice(b, M_->block_offset(blk), M_->blocks()[blk].size));
      cut.push_back(t);
    }
    return span_basis(G_, cut);
  }

 private:
  SpacePtr M_;
  int c1_, c2_;
};

// ---- generalized double ----

class GeneralizedDoubleSpace : public Space {
 public:
  GeneralizedDoubleSpace(const MatrixGroup& G, int m_inf, int m0)
      : Space(G, m_inf + m0,
              {Block{m_inf, MatBitorsor(MatOps{G.n()}, Twist<MatOps>::shift(m_inf, MatOps{G.n()})), "inf"},
               Block{m0, MatBitorsor(MatOps{G.n()}, Twist<MatOps>::shift(m0, MatOps{G.n()})), "0"}}),
        mi_(m_inf),
        m0_(m0) {
    if (m_inf < 1 || m0 < 1) throw std::invalid_argument("generalized double: counts must be >= 1");
  }

  std::string name() const override {
    return "generalized_double(" + std::to_string(mi_) + "," + std::to_string(m0_) + ")";
  }

  struct Coords {
    Jet C;
    JetPoint h;
    JetPoint h0;
  };

  Coords full(const JetPoint& p) const {
    Coords c;
    c.C = p[0];
    c.h = slice(p, 1, mi_);
    c.h0 = slice(p, 1 + mi_, m0_ - 1);
    const Jet H = ordered_product(ops_, c.h, mi_);
    const Jet K = ordered_product(ops_, c.h0, m0_ - 1);
    c.h0.push_back(ops_.mul(ops_.mul(ops_.mul(ops_.inv(c.C), ops_.inv(H)), c.C), ops_.inv(K)));
    return c;
  }

  JetPoint mu(const JetPoint& p) const override {
    const Coords c = full(p);
    JetPoint out;
    for (const auto& x : c.h) out.push_back(ops_.inv(x));
    for (const auto& x : c.h0) out.push_back(ops_.inv(x));
    return out;
  }

  JetPoint act(const JetPoint& g, const JetPoint& p) const override {
    const auto gi = slice(g, 0, mi_);
    const auto g0 = slice(g, mi_, m0_);
    const Coords c = full(p);
    JetPoint out{ops_.mul(ops_.mul(gi[0], c.C), ops_.inv(g0[0]))};
    for (int i = 0; i < mi_; ++i) out.push_back(ops_.mul(ops_.mul(gi[(i + 1) % mi_], c.h[i]), ops_.inv(gi[i])));
    for (int i = 0; i + 1 < m0_; ++i)
      out.push_back(ops_.mul(ops_.mul(g0[(i + 1) % m0_], c.h0[i]), ops_.inv(g0[i])));
    return out;
  }

  double omega(const Point& p, const Tangent& u, const Tangent& v) const override {
    const Coords cu = full(make_jets(p, u));
    const Coords cv = full(make_jets(p, v));
    const Jet Hu = ordered_product(ops_, cu.h, mi_);
    const Jet Hv = ordered_product(ops_, cv.h, mi_);
    const Mat& C = cu.C.x;
    const Mat& H = Hu.x;
    auto Ad = [](const Mat& g, const Mat& X) -> Mat { return g * X * g.adjoint(); };
    const Mat Cbu = Ad(C, cu.C.d), Cbv = Ad(C, cv.C.d);
    double w = 0.5 * wedge(G_, Cbu, Ad(H, Cbu), Cbv, Ad(H, Cbv));
    w += 0.5 * wedge(G_, Cbu, Ad(H, Hu.d) + Hu.d, Cbv, Ad(H, Hv.d) + Hv.d);
    w += chain_term(G_, ops_, cu.h, cv.h);
    w += chain_term(G_, ops_, cu.h0, cv.h0);
    return w;
  }

 private:
  int mi_, m0_;
};

// ---- refinement ----

class RefinedSpace : public Space {
 public:
  RefinedSpace(SpacePtr M, int c, int m)
      : Space(M->group(), M->factors() + m - 1, refined_blocks(*M, c, m)), M_(std::move(M)), c_(c), m_(m) {}

  static std::vector<Block> refined_blocks(const Space& M, int c, int m) {
    if (c < 0 || c >= static_cast<int>(M.blocks().size())) throw std::invalid_argument("refine: no such component");
    const auto& B = M.blocks()[c];
    if (B.size != 1 || !B.target.twist().auts[0].trivial_form())
      throw std::invalid_argument("refine: component must be a single untwisted copy of G");
    if (m < 1) throw std::invalid_argument("refine: need at least one base point");
    std::vector<Block> out = M.blocks();
    MatOps ops{M.group().n()};
    out[c].size = m;
    out[c].target = MatBitorsor(ops, Twist<MatOps>::shift(m, ops));
    return out;
  }

  std::string name() const override { return "refine(" + M_->name() + "," + std::to_string(m_) + ")"; }

  JetPoint segments(const JetPoint& p, const JetPoint& mM) const {
    return refined_segments(ops_, mM[M_->block_offset(c_)], slice(p, M_->factors(), m_ - 1));
  }

  JetPoint mu(const JetPoint& p) const override {
    const auto mM = M_->mu(slice(p, 0, M_->factors()));
    const auto h = segments(p, mM);
    JetPoint out;
    for (int b = 0; b < static_cast<int>(M_->blocks().size()); ++b) {
      if (b == c_) {
        for (const auto& x : h) out.push_back(ops_.inv(x));
      } else {
        append(out, slice(mM, M_->block_offset(b), M_->blocks()[b].size));
      }
    }
    return out;
  }

  JetPoint act(const JetPoint& g, const JetPoint& p) const override {
    JetPoint gM;
    JetPoint gc;
    for (int b = 0; b < static_cast<int>(blocks_.size()); ++b) {
      const auto part = slice(g, block_offset(b), blocks_[b].size);
      if (b == c_) {
        gc = part;
        gM.push_back(part[0]);
      } else {
        append(gM, part);
      }
    }
    JetPoint out = M_->act(gM, slice(p, 0, M_->factors()));
    const auto h = slice(p, M_->factors(), m_ - 1);
    for (int i = 0; i + 1 < m_; ++i) out.push_back(ops_.mul(ops_.mul(gc[i + 1], h[i]), ops_.inv(gc[i])));
    return out;
  }

  double omega(const Point& p, const Tangent& u, const Tangent& v) const override {
    const int f = M_->factors();
    const auto pM = slice(p, 0, f);
    double w = M_->omega(pM, slice(u, 0, f), slice(v, 0, f));
    const JetPoint ju = make_jets(p, u), jv = make_jets(p, v);
    const auto hu = segments(ju, M_->mu(slice(ju, 0, f)));
    const auto hv = segments(jv, M_->mu(slice(jv, 0, f)));
    w += chain_term(G_, ops_, hu, hv);
    return w;
  }

  std::vector<Tangent> tangent_basis(const Point& p) const override {
    const int f = M_->factors();
    std::vector<Tangent> out = pad(M_->tangent_basis(slice(p, 0, f)), 0, factors_, G_);
    for (int i = f; i < factors_; ++i)
      for (const auto& b : G_.basis()) {
        Tangent t(factors_, G_.zero());
        t[i] = b;
        out.push_back(t);
      }
    return out;
  }

  Point sample_point(Rng& rng) const override {
    Point p = M_->sample_point(rng);
    for (int i = M_->factors(); i < factors_; ++i) p.push_back(G_.random_element(rng));
    return p;
  }

 private:
  SpacePtr M_;
  int c_, m_;
};

// ---- fixed locus ----

class FixedLocusSpace : public Space {
 public:
  FixedLocusSpace(SpacePtr M, Point p0, double tol)
      : Space(M->group(), M->factors(), M->blocks()), M_(std::move(M)), p0_(std::move(p0)) {
    if (!M_->has_gamma()) throw std::invalid_argument("fixed_locus: space carries no Gamma action");
    set_point_gamma(M_->point_gamma());
    double r = 0.0;
    const Point x0 = M_->mu_value(p0_);
    for (int phi = 1; phi < gamma_order(); ++phi) {
      const Point q = M_->gamma_point(phi, p0_);
      for (std::size_t i = 0; i < q.size(); ++i) r = std::max(r, mat_dist(q[i], p0_[i]));
    }
    if (r > tol) throw std::invalid_argument("fixed_locus: base point is not Gamma-fixed");
    r = 0.0;
    for (int phi = 1; phi < gamma_order(); ++phi) {
      const Point y = M_->gamma_target(phi, x0);
      for (std::size_t i = 0; i < y.size(); ++i) r = std::max(r, mat_dist(y[i], x0[i]));
    }
    if (r > tol) throw std::invalid_argument("fixed_locus: moment image of the base point is not fixed");
    tangent_basis_ = fixed_tangent_basis(G_, ops_, *point_gamma_, factors_);
    // Structure group Gamma action: block sum of the target linear parts.
    Monomial<MatOps> sm;
    for (const auto& b : blocks_) {
      if (b.target.gamma())
        sm = sm.block_sum(ops_, b.target.gamma()->gen.linear_part());
      else
        sm = sm.block_sum(ops_, Monomial<MatOps>::identity(b.size, ops_));
    }
    structure_basis_ = fixed_tangent_basis(G_, ops_, GammaAction<MatOps>{gamma_order(), sm}, structure_size());
  }

  std::string name() const override { return "fixed(" + M_->name() + ")"; }
  JetPoint mu(const JetPoint& p) const override { return M_->mu(p); }
  JetPoint act(const JetPoint& g, const JetPoint& p) const override { return M_->act(g, p); }
  double omega(const Point& p, const Tangent& u, const Tangent& v) const override { return M_->omega(p, u, v); }
  std::vector<Tangent> tangent_basis(const Point&) const override { return tangent_basis_; }
  std::vector<Tangent> structure_basis() const override { return structure_basis_; }

  Point sample_point(Rng& rng) const override {
    const Tangent X = combine(tangent_basis_, factors_, G_, rng, 1.0);
    Point p;
    for (int i = 0; i < factors_; ++i) p.push_back(p0_[i] * G_.exp(X[i]));
    return p;
  }

 private:
  SpacePtr M_;
  Point p0_;
  std::vector<Tangent> tangent_basis_;
  std::vector<Tangent> structure_basis_;
};

// ---- negative controls ----

class DegenerateSpace : public Space {
 public:
  explicit DegenerateSpace(SpacePtr M) : Space(M->group(), M->factors(), M->blocks()), M_(std::move(M)) {
    set_point_gamma(M_->point_gamma());
    Point id(M_->factors(), G_.identity());
    x0_ = M_->mu_value(id);
  }
  std::string name() const override { return "degenerate(" + M_->name() + ")"; }
  JetPoint mu(const JetPoint&) const override { return make_jets(x0_); }
  JetPoint act(const JetPoint& g, const JetPoint& p) const override { return M_->act(g, p); }
  double omega(const Point&, const Tangent&, const Tangent&) const override { return 0.0; }

  std::vector<Tangent> tangent_basis(const Point& p) const override { return M_->tangent_basis(p); }
  std::vector<Tangent> structure_basis() const override { return M_->structure_basis(); }
  Point sample_point(Rng& rng) const override { return M_->sample_point(rng); }

 private:
  SpacePtr M_;
  Point x0_;
};

class PlantedMuSpace : public Space {
 public:
  PlantedMuSpace(SpacePtr M, Point c) : Space(M->group(), M->factors(), M->blocks()), M_(std::move(M)), c_(std::move(c)) {
    set_point_gamma(M_->point_gamma());
    if (static_cast<int>(c_.size()) != structure_size()) throw std::invalid_argument("planted mu: wrong size");
  }
  std::string name() const override { return "planted_mu(" + M_->name() + ")"; }
  JetPoint mu(const JetPoint& p) const override {
    JetPoint m = M_->mu(p);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = ops_.mul(m[i], jet_const(c_[i]));
    return m;
  }
  JetPoint act(const JetPoint& g, const JetPoint& p) const override { return M_->act(g, p); }
  double omega(const Point& p, const Tangent& u, const Tangent& v) const override { return M_->omega(p, u, v); }
  std::vector<Tangent> tangent_basis(const Point& p) const override { return M_->tangent_basis(p); }
  std::vector<Tangent> structure_basis() const override { return M_->structure_basis(); }
  Point sample_point(Rng& rng) const override { return M_->sample_point(rng); }

 private:
  SpacePtr M_;
  Point c_;
};

}  // namespace

JetPoint refined_segments(const MatOps& ops, const Jet& mu_c, const JetPoint& free_h) {
  JetPoint h = free_h;
  const Jet K = ordered_product(ops, free_h, static_cast<int>(free_h.size()));
  h.push_back(ops.mul(ops.inv(mu_c), ops.inv(K)));
  return h;
}

SpacePtr make_double(const MatrixGroup& G, const MatBitorsor& B1, const MatBitorsor& B2) {
  return std::make_shared<DoubleSpace>(G, B1, B2);
}

SpacePtr fuse(SpacePtr M1, SpacePtr M2, int c1, int c2) {
  return std::make_shared<FusionSpace>(std::move(M1), std::move(M2), c1, c2);
}

SpacePtr internal_fuse(SpacePtr M, int c1, int c2) {
  return std::make_shared<InternalFusionSpace>(std::move(M), c1, c2);
}

SpacePtr make_fused_double(const MatrixGroup& G, const MatBitorsor& B1, const MatBitorsor& B2) {
  return internal_fuse(make_double(G, B1, B2), 0, 1);
}

SpacePtr make_generalized_double(const MatrixGroup& G, int m_inf, int m0) {
  return std::make_shared<GeneralizedDoubleSpace>(G, m_inf, m0);
}

SpacePtr refine(SpacePtr M, int c, int m) { return std::make_shared<RefinedSpace>(std::move(M), c, m); }

SpacePtr fixed_locus(SpacePtr M, const Point& p0, double tol) {
  return std::make_shared<FixedLocusSpace>(std::move(M), p0, tol);
}

SpacePtr make_degenerate(SpacePtr M) { return std::make_shared<DegenerateSpace>(std::move(M)); }

SpacePtr plant_nonequivariant_mu(SpacePtr M, const Point& c) {
  return std::make_shared<PlantedMuSpace>(std::move(M), c);
}

GeneralizedDoubleCoords generalized_double_coords(int m_inf, int m0, const Point& p) {
  GeneralizedDoubleSpace S(MatrixGroup::su(static_cast<int>(p[0].rows()) < 2 ? 2 : static_cast<int>(p[0].rows())),
                           m_inf, m0);
  const auto c = S.full(make_jets(p));
  GeneralizedDoubleCoords out;
  out.C = c.C.x;
  for (const auto& x : c.h) out.h.push_back(x.x);
  for (const auto& x : c.h0) out.h0.push_back(x.x);
  return out;
}

double generalized_double_relation(int m_inf, int m0, const Point& p) {
  const auto c = generalized_double_coords(m_inf, m0, p);
  const int n = static_cast<int>(c.C.rows());
  Mat H = Mat::Identity(n, n), H0 = Mat::Identity(n, n);
  for (const auto& x : c.h) H = x * H;
  for (const auto& x : c.h0) H0 = x * H0;
  return (c.C.adjoint() * H * c.C * H0 - Mat::Identity(n, n)).norm();
}

}  // namespace qham
