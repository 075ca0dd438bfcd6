#include "qham/liegroup.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace qham {

namespace {

// Generalized Gell-Mann matrices, Hermitian with tr(l_a l_b) = 2 delta_ab.
std::vector<Mat> gell_mann(int n) {
  std::vector<Mat> out;
  const cd I(0.0, 1.0);
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      Mat s = Mat::Zero(n, n);
      s(j, k) = 1.0;
      s(k, j) = 1.0;
      out.push_back(s);
      Mat a = Mat::Zero(n, n);
      a(j, k) = -I;
      a(k, j) = I;
      out.push_back(a);
    }
  }
  for (int l = 1; l < n; ++l) {
    Mat d = Mat::Zero(n, n);
    const double c = std::sqrt(2.0 / (l * (l + 1.0)));
    for (int j = 0; j < l; ++j) d(j, j) = c;
    d(l, l) = -c * l;
    out.push_back(d);
  }
  return out;
}

}  // namespace

MatrixGroup::MatrixGroup(GroupKind kind, int n, double scale) : kind_(kind), n_(n), scale_(scale) {
  if (n < 2) throw std::invalid_argument("matrix group needs n >= 2");
  if (!(scale > 0.0)) throw std::invalid_argument("inner product scale must be positive");
  const double norm = 1.0 / std::sqrt(2.0 * scale);
  if (kind == GroupKind::SU) {
    for (const Mat& l : gell_mann(n)) basis_.push_back(cd(0.0, norm) * l);
  } else {
    for (int j = 0; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        Mat e = Mat::Zero(n, n);
        e(j, k) = norm;
        e(k, j) = -norm;
        basis_.push_back(e);
      }
    }
  }
}

std::string MatrixGroup::name() const {
  return (kind_ == GroupKind::SU ? "su(" : "so(") + std::to_string(n_) + ")";
}

double MatrixGroup::inner(const Mat& X, const Mat& Y) const {
  // Re tr(XY) without forming the product.
  return -scale_ * (X.array() * Y.transpose().array()).sum().real();
}

Mat MatrixGroup::exp(const Mat& X) const {
  Mat out = X.exp();
  return out;
}

Mat MatrixGroup::log_near_identity(const Mat& U) const {
  Mat L = U.log();
  return project(L);
}

Mat MatrixGroup::project(const Mat& M) const {
  Mat out = Mat::Zero(n_, n_);
  for (const Mat& b : basis_) out += inner(M, b) * b;
  return out;
}

Vec MatrixGroup::coords(const Mat& X) const {
  Vec c(dim());
  for (int a = 0; a < dim(); ++a) c[a] = inner(X, basis_[a]);
  return c;
}

Mat MatrixGroup::from_coords(const Vec& c) const {
  Mat out = Mat::Zero(n_, n_);
  for (int a = 0; a < dim(); ++a) out += c[a] * basis_[a];
  return out;
}

bool MatrixGroup::is_algebra(const Mat& X, double tol) const {
  if (X.rows() != n_ || X.cols() != n_) return false;
  if ((X + X.adjoint()).norm() > tol) return false;
  if (kind_ == GroupKind::SU) return std::abs(X.trace()) <= tol;
  return X.imag().norm() <= tol;
}

bool MatrixGroup::is_element(const Mat& U, double tol) const {
  if (U.rows() != n_ || U.cols() != n_) return false;
  if ((U.adjoint() * U - identity()).norm() > tol) return false;
  if (std::abs(U.determinant() - 1.0) > tol) return false;
  return kind_ == GroupKind::SU || U.imag().norm() <= tol;
}

Mat MatrixGroup::random_element(Rng& rng) const {
  std::normal_distribution<double> nd(0.0, 1.0);
  if (kind_ == GroupKind::SU) {
    Mat Z(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) Z(i, j) = cd(nd(rng), nd(rng)) / std::sqrt(2.0);
    Eigen::HouseholderQR<Mat> qr(Z);
    Mat Q = qr.householderQ();
    Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n_; ++i) Q.col(i) *= R(i, i) / std::abs(R(i, i));
    const double phase = std::arg(Q.determinant());
    Q *= std::polar(1.0, -phase / n_);
    return Q;
  }
  Eigen::MatrixXd Z(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) Z(i, j) = nd(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n_; ++i)
    if (R(i, i) < 0) Q.col(i) *= -1.0;
  if (Q.determinant() < 0) Q.col(0) *= -1.0;
  return Q.cast<cd>();
}

Mat MatrixGroup::random_algebra(Rng& rng, double sigma) const {
  std::normal_distribution<double> nd(0.0, sigma);
  Mat out = Mat::Zero(n_, n_);
  for (const Mat& b : basis_) out += nd(rng) * b;
  return out;
}

Mat Automorphism::apply(const Mat& x) const {
  Mat y = conj_ ? Mat(x.conjugate()) : x;
  if (w_.size() == 0) return y;
  return w_ * y * w_.adjoint();
}

Automorphism Automorphism::compose(const Automorphism& o) const {
  Mat w;
  if (w_.size() == 0 && o.w_.size() == 0) {
    w = Mat();
  } else if (o.w_.size() == 0) {
    w = w_;
  } else {
    Mat w2 = conj_ ? Mat(o.w_.conjugate()) : o.w_;
    w = w_.size() == 0 ? w2 : Mat(w_ * w2);
  }
  return Automorphism(w, conj_ != o.conj_, 0);
}

Automorphism Automorphism::inverse() const {
  Mat w;
  if (w_.size() != 0) w = conj_ ? Mat(w_.conjugate().adjoint()) : Mat(w_.adjoint());
  return Automorphism(w, conj_, order_);
}

Automorphism Automorphism::power(int k) const {
  Automorphism base = k >= 0 ? *this : inverse();
  Automorphism out = identity();
  for (int i = 0; i < std::abs(k); ++i) out = out.compose(base);
  return out;
}

double mat_dist(const Mat& a, const Mat& b) { return (a - b).norm(); }

namespace {

std::vector<Mat> panel(const MatrixGroup& G, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Mat> out;
  for (int i = 0; i < 64; ++i) out.push_back(G.random_element(rng));
  return out;
}

}  // namespace

int empirical_order(const MatrixGroup& G, const Automorphism& k, int max_order, std::uint64_t seed) {
  const auto pts = panel(G, seed);
  std::vector<Mat> cur = pts;
  for (int ord = 1; ord <= max_order; ++ord) {
    bool back = true;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      cur[i] = k.apply(cur[i]);
      if (mat_dist(cur[i], pts[i]) > kReprTol) back = false;
    }
    if (back) return ord;
  }
  return 0;
}

bool validate_automorphism(const MatrixGroup& G, const Automorphism& k, std::uint64_t seed,
                           std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  // The inner part only has to be unitary; a central phase is harmless.
  if (k.by().size() != 0 && (k.by().adjoint() * k.by() - G.identity()).norm() > 1e-10)
    return fail("inner part is not unitary");
  const auto pts = panel(G, seed);
  if (k.declared_order() > 0) {
    const int ord = empirical_order(G, k, k.declared_order(), seed);
    if (ord == 0 || k.declared_order() % ord != 0) return fail("declared order not reached on panel");
  }
  Rng rng(seed + 1);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Mat& g = pts[i];
    const Mat& h = pts[i + 1];
    if (mat_dist(k.apply(g * h), k.apply(g) * k.apply(h)) > kNumTol) return fail("not multiplicative");
    if (!G.is_element(k.apply(g), 1e-10)) return fail("image leaves the group");
    const Mat X = G.random_algebra(rng);
    const Mat Y = G.random_algebra(rng);
    if (std::abs(G.inner(k.apply(X), k.apply(Y)) - G.inner(X, Y)) > kNumTol)
      return fail("inner product not preserved");
  }
  return true;
}

}  // namespace qham
