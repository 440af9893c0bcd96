#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "whitlab/contour.hpp"
#include "whitlab/numerics.hpp"
#include "whitlab/theta.hpp"

namespace whitlab {

// Weakly decreasing positive rows; the empty partition stands for tau == 1.
struct Partition {
  std::vector<int> rows;

  int weight() const;  // number of boxes
  int length() const { return static_cast<int>(rows.size()); }
  void validate() const;
  std::string label() const;  // "(2,1)", "()" for empty
};

// Components a, a^2/2, ..., a^K/K.
CVector miwa(cplx a, int K);

// Schur polynomial of the partition in the time variables t_1..t_K: the
// Jacobi-Trudi determinant det h_{lambda_i - i + j} of the complete
// homogeneous components defined by exp(sum_k t_k x^k) = sum_m h_m x^m.
// Needs t.size() >= |lambda|.
cplx schur_tau(const Partition& lambda, const CVector& t);

// d schur_tau / d t_r, r in 1..K, using dh_m/dt_r = h_{m-r}.
cplx schur_tau_dt(const Partition& lambda, const CVector& t, int r);

struct TauFunction {
  Partition lambda;
  int K = 0;

  void validate() const;  // K >= |lambda|
  cplx operator()(const CVector& t) const { return schur_tau(lambda, t); }
};

// Normalized residual |sum| / max |term| of the three-term combination
//   (a-b)(c-d) tau(t+[a]+[b]) tau(t+[c]+[d]) + cyclic in (a, b, c).
double tau_fay_residual(const TauFunction& tau, const CVector& t, cplx a,
                        cplx b, cplx c, cplx d);

// Max residual over `count` draws: t components from a half-width-0.5 box,
// shift parameters from the disc |a| <= 0.5.
double tau_fay_residual(const TauFunction& tau, std::size_t count,
                        std::uint64_t seed);

// Holomorphic (q, E, theta) triple: g coordinate functions q_alpha, an
// antisymmetric two-point function E with E(u,v) = u - v + o((u-v)^2), and a
// theta of g arguments, together with analytic slot derivatives.  Evaluators
// must be thread-safe; they are shared across concurrent probes.
struct GeometryData {
  std::string name;
  int g = 1;
  bool tau_mode = false;  // q ladder z^k/k with a tau-function theta

  std::function<cplx(int, cplx)> q;   // q_alpha(z), alpha in [0, g)
  std::function<cplx(int, cplx)> dq;  // q_alpha'(z)
  std::function<cplx(cplx, cplx)> E;
  std::function<cplx(cplx, cplx)> dE_dx;
  std::function<cplx(cplx, cplx)> dE_dy;
  std::function<cplx(const CVector&)> theta;
  std::function<CVector(const CVector&)> theta_grad;

  void validate() const;  // evaluators present, g >= 1
  CVector q_vec(cplx z) const;
  CVector dq_vec(cplx z) const;
};

GeometryData genus1_geometry(const LatticeParam& lat);
GeometryData rational_geometry();  // theta(x) = x, E = x - y
GeometryData schur_tau_geometry(const Partition& lambda, int K);

// Three-term Fay combination at explicit arguments, |sum| / max |term|.
double fay_residual_at(const GeometryData& geom, const CVector& z_vec, cplx u,
                       cplx v, cplx w, cplx t);

// Max over `count` random draws (half-width-0.5 boxes), resampling a bounded
// number of times when theta vanishes at a shifted argument.
double fay_residual(const GeometryData& geom, std::size_t count,
                    std::uint64_t seed);

// Punctures u_i with exponents s_i summing to 1, constant vectors a, b of
// dimension g, over a geometry that passes the Fay entrance check.
struct AbstractConfig {
  GeometryData geom;
  std::vector<cplx> u;
  std::vector<double> s;
  CVector a;
  CVector b;
  std::vector<std::pair<std::string, ContourSpec>> contours;
  ToleranceConfig tol;

  int n() const { return static_cast<int>(u.size()); }
  CVector eta() const;  // s_1 q(u_1) + ... + s_n q(u_n) + a
  ResolveContext context() const;
  cplx z_ref() const;  // puncture centroid + 2
  const ContourSpec& contour(const std::string& name) const;

  // The connection matrices exist for arbitrary exponents, so the unit-sum
  // rule is waived when a caller only assembles those.
  void validate(bool require_unit_sum = true) const;
};

// Connection matrices A_i of the puncture system: row j holds the
// coefficients of d f_j / d u_i on the normalized vector (f_1..f_n).  Row i
// is not part of the system and stays zero.  Each entry of z_samples appends
// one row and column carrying the equation for the section value at that
// point, so the matrices are (n + Z) x (n + Z).  Runs the Fay entrance check
// on the geometry first.
std::vector<CMatrix> comp_system_matrices(const AbstractConfig& cfg,
                                          const std::vector<cplx>& z_samples = {});

// Max-abs entry of  d_j A_i - d_i A_j + A_i A_j - A_j A_i  over the rows the
// system defines: punctures other than i and j, plus every z-sample row.
// u-derivatives by central differences with eta re-derived at each shift.
// Errors when no row is assessable (n = 2 without z samples).
double zero_curvature_residual(const AbstractConfig& cfg, int i, int j,
                               double fd_step,
                               const std::vector<cplx>& z_samples = {});

// Exploratory potential over a tau-mode geometry:
//   integral of  tau(eta + [z] - [t]) / ((z - t) tau(eta))
//              * prod (z - u_i)^{s_i} / prod (t - u_i)^{s_i}
//              * e^{b.([z] - [t])}  dt
// with branch-tracked powers continued from z_ref.  Measured, not asserted.
IntegralResult potential_tau(cplx z, const Contour& c,
                             const AbstractConfig& cfg);
IntegralResult potential_tau(cplx z, const std::string& contour_name,
                             const AbstractConfig& cfg);

}  // namespace whitlab
