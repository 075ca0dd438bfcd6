#pragma once

#include "qham/liegroup.hpp"
#include "qham/verify.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace qham {

// Uniform grid of N intervals on R/mZ; node k sits at k*m/N.
struct LoopGrid {
  int m = 1;
  int N = 1;

  double delta() const { return static_cast<double>(m) / N; }
  int per_segment() const { return N / m; }
  int wrap(int k) const { return ((k % N) + N) % N; }
  void validate() const;
  bool operator==(const LoopGrid& o) const { return m == o.m && N == o.N; }
};

// Piecewise-constant A = a_k dt on interval k.  With a twist kappa the values
// satisfy kappa(a_k) = a_{k + N/m}.
struct DiscreteConnection {
  LoopGrid grid;
  std::vector<Mat> values;
  std::optional<Automorphism> twist;
};

// Node samples xi(k), with kappa(xi_k) = xi_{k + N/m} when twisted.
struct DiscreteLoopAlgebra {
  LoopGrid grid;
  std::vector<Mat> nodes;
  std::optional<Automorphism> twist;
};

struct DiscreteGauge {
  LoopGrid grid;
  std::vector<Mat> nodes;
  std::optional<Automorphism> twist;
};

// Max distance between kappa(x_k) and x_{k+N/m}; 0 without a twist.
double twist_residual(const LoopGrid& grid, const std::optional<Automorphism>& twist, const std::vector<Mat>& x);
// Throws unless sizes match the grid, and the twist constraint holds to 1e-12
// (gauges additionally unitary).
void validate(const MatrixGroup& G, const DiscreteConnection& A);
void validate(const MatrixGroup& G, const DiscreteLoopAlgebra& xi);
void validate(const MatrixGroup& G, const DiscreteGauge& g);

// Path-ordered product of exp(-a_k delta) from node b to node t (b <= t <= b + N).
Mat holonomy(const MatrixGroup& G, const DiscreteConnection& A, int b, int t);

// a'_k = Ad(gm_k)(a_k + X_k / delta) with X_k = log(g_k^{-1} g_{k+1}) and
// gm_k = g_k exp(X_k / 2).
DiscreteConnection gauge_act(const MatrixGroup& G, const DiscreteGauge& g, const DiscreteConnection& A);
// Differential of gauge_act in A: u_k -> Ad(gm_k) u_k.
DiscreteConnection gauge_tangent(const MatrixGroup& G, const DiscreteGauge& g, const DiscreteConnection& u);
DiscreteGauge gauge_mul(const DiscreteGauge& g, const DiscreteGauge& h);
// exp(-t xi) pointwise.
DiscreteGauge exp_gauge(const MatrixGroup& G, const DiscreteLoopAlgebra& xi, double t);

// Midpoint quadrature of (A, xi) over nodes [b, t].
double pairing(const MatrixGroup& G, const DiscreteConnection& A, const DiscreteLoopAlgebra& xi, int b, int t);
// Over the whole circle.
double pairing(const MatrixGroup& G, const DiscreteConnection& A, const DiscreteLoopAlgebra& xi);

// Contraction of the pulled-back right Maurer-Cartan form of s -> Hol^i_s
// with the generating vector of xi: Ad(Hol^i_s) xi(s) - xi(i).
Mat hol_variation_field(const MatrixGroup& G, const DiscreteConnection& A, const DiscreteLoopAlgebra& xi, int i,
                        int s);
// Same for a tangent eta to the connection space: -int_i^s Ad(Hol^i_u) eta du.
Mat hol_variation_conn(const MatrixGroup& G, const DiscreteConnection& A, const DiscreteConnection& eta, int i, int s);

// Finite-difference oracles for the two closed forms above.
Mat hol_variation_field_fd(const MatrixGroup& G, const DiscreteConnection& A, const DiscreteLoopAlgebra& xi, int i,
                           int s, double h = 1e-5);
Mat hol_variation_conn_fd(const MatrixGroup& G, const DiscreteConnection& A, const DiscreteConnection& eta, int i,
                          int s, double h = 1e-5);

// Contribution of the segment [i, i+1] to the 2-form.
double varpi_segment(const MatrixGroup& G, const DiscreteConnection& A, const DiscreteConnection& u,
                     const DiscreteConnection& v, int segment);
// Sum over the m segments; for a twisted connection only segment 0 is used.
double varpi(const MatrixGroup& G, const DiscreteConnection& A, const DiscreteConnection& u,
             const DiscreteConnection& v);

// Generating vector of xi at A: derivative of exp(-t xi).A at t = 0.
DiscreteConnection generating_vector(const MatrixGroup& G, const DiscreteLoopAlgebra& xi, const DiscreteConnection& A,
                                     double h = 1e-5);

struct LoopOptions {
  double fd_step = 1e-4;   // exterior derivative on the connection space
  double hol_step = 1e-5;  // derivatives of holonomies and generating vectors
  double tol = 1e-4;
};

// Segments used by the holonomy map: all m, or only segment 0 when twisted.
int loop_segments(const DiscreteConnection& A);

// The three properties of the 2-form plus gauge covariance of holonomy
// (Hol^0_{N/2}).  Reports: loop_invariance, loop_dvarpi, loop_contraction,
// loop_gauge_covariance.
std::vector<VerificationReport> verify_loop_props(const MatrixGroup& G, const DiscreteConnection& A,
                                                  const DiscreteConnection& u, const DiscreteConnection& v,
                                                  const DiscreteConnection& w, const DiscreteLoopAlgebra& xi,
                                                  const DiscreteGauge& g, const LoopOptions& o = {});

// Smooth algebra-valued field on R/mZ: a Fourier sum with `modes` terms and
// Gaussian coefficients times `scale`.  With a twist of order dividing m the
// field is symmetrized so that kappa f(t) = f(t + 1).
using LoopField = std::function<Mat(double)>;
LoopField random_loop_field(const MatrixGroup& G, int m, Rng& rng, int modes = 3, double scale = 0.4,
                            const std::optional<Automorphism>& twist = std::nullopt);

DiscreteConnection sample_connection(const LoopGrid& grid, const LoopField& f,
                                     const std::optional<Automorphism>& twist = std::nullopt);
DiscreteLoopAlgebra sample_algebra(const LoopGrid& grid, const LoopField& f,
                                   const std::optional<Automorphism>& twist = std::nullopt);
// exp of the node samples.
DiscreteGauge sample_gauge(const MatrixGroup& G, const LoopGrid& grid, const LoopField& f,
                           const std::optional<Automorphism>& twist = std::nullopt);

// Seeded smooth test data (A, u, v, w, xi, g) on a grid.
struct LoopData {
  LoopField A, u, v, w, xi, g;
};
LoopData random_loop_data(const MatrixGroup& G, int m, std::uint64_t seed,
                          const std::optional<Automorphism>& twist = std::nullopt);

// Residuals of one quantity over a refinement sequence.
struct ConvergenceStudy {
  std::string quantity;
  std::vector<int> N;
  std::vector<double> residual;
  // Smallest log2 ratio of consecutive residuals (per grid doubling).
  double order() const;
};

// Closed forms vs finite differences on a nested sequence of grids:
// hol_variation_conn and hol_variation_field over segment [0, 1], and the
// gauge covariance of Hol^0_{N/2}.
std::vector<ConvergenceStudy> convergence_studies(const MatrixGroup& G, int m, const std::vector<int>& Ns,
                                                  std::uint64_t seed);

}  // namespace qham
