#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "whitlab/error.hpp"
#include "whitlab/rng.hpp"

namespace whitlab {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct ToleranceConfig {
  double quad_tol = 1e-12;      // absolute quadrature target
  double fd_step = 1e-5;        // relative finite-difference step
  double rank_rel_tol = 1e-7;   // singular-value cut relative to sigma_max
  double residual_tol = 1e-8;   // identity-residual gate

  // All entries must be positive, and fd_step^2 >= quad_tol so central
  // differences of integrals are not dominated by quadrature noise.
  void validate() const;
};

struct SampleSet {
  std::vector<cplx> points;
  double exclusion_radius = 0.1;

  // Every point keeps exclusion_radius clearance from each listed singular
  // point (plain Euclidean distance; lattice-aware callers pass translates).
  void validate(const std::vector<cplx>& singular) const;
};

// Uniform draws from the annulus r_min <= |z - center| <= r_max, rejecting
// points within `exclusion` of a singular point or rejected by `accept`.
SampleSet sample_annulus(cplx center, double r_min, double r_max,
                         const std::vector<cplx>& singular, double exclusion,
                         std::size_t count, Rng& rng,
                         const std::function<bool(cplx)>& accept = {});

std::vector<double> singular_values(const CMatrix& m);

// Number of singular values above rank_rel_tol * sigma_max.
int numerical_rank(const CMatrix& m, double rank_rel_tol);

struct RankReport {
  int rank = 0;
  double gap = 0.0;  // sigma_rank / sigma_{rank+1}; +inf at full rank
  std::vector<double> sigmas;
};

// Rank of the column family after per-column max-abs normalization; errors on
// a numerically zero family.
RankReport rank_of_columns(CMatrix m, double rank_rel_tol);

struct PolyFit {
  std::vector<cplx> coeffs;  // ascending degree
  double residual = 0.0;     // max |p(z_i) - v_i| over the fit points
};

// Least-squares fit of degree <= max_degree through (points, values).
// Needs at least max_degree + 3 pairwise distinct points.
PolyFit fit_polynomial(const std::vector<cplx>& points,
                       const std::vector<cplx>& values, int max_degree);

cplx eval_polynomial(const std::vector<cplx>& coeffs, cplx z);

// Central difference with step h = step * max(1, |p|), taken along the real
// direction; for holomorphic fn this is the complex derivative.
template <typename F>
cplx finite_diff(F&& fn, cplx point, double step) {
  const double h = step * std::max(1.0, std::abs(point));
  return (fn(point + h) - fn(point - h)) / (2.0 * h);
}

}  // namespace whitlab
