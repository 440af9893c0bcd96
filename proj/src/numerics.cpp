#include "whitlab/numerics.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

namespace whitlab {

void ToleranceConfig::validate() const {
  if (!(quad_tol > 0.0) || !(fd_step > 0.0) || !(rank_rel_tol > 0.0) ||
      !(residual_tol > 0.0)) {
    fail(errc::config, "tolerances must be positive");
  }
  if (fd_step * fd_step < quad_tol) {
    fail(errc::config,
         "fd_step^2 must not be below quad_tol; finite differences of "
         "integrals would sit inside quadrature noise");
  }
}

void SampleSet::validate(const std::vector<cplx>& singular) const {
  for (const cplx& p : points) {
    for (const cplx& s : singular) {
      if (std::abs(p - s) < exclusion_radius) {
        fail(errc::invalid_input, "sample point too close to a singular point");
      }
    }
  }
}

SampleSet sample_annulus(cplx center, double r_min, double r_max,
                         const std::vector<cplx>& singular, double exclusion,
                         std::size_t count, Rng& rng,
                         const std::function<bool(cplx)>& accept) {
  if (!(0.0 <= r_min && r_min < r_max)) {
    fail(errc::invalid_input, "annulus radii must satisfy 0 <= r_min < r_max");
  }
  SampleSet out;
  out.exclusion_radius = exclusion;
  out.points.reserve(count);
  const std::size_t max_tries = 2000 * std::max<std::size_t>(count, 1);
  std::size_t tries = 0;
  while (out.points.size() < count) {
    if (++tries > max_tries) {
      fail(errc::geometry,
           "annulus sampling failed; exclusion zones leave too little room");
    }
    const double rho =
        std::sqrt(rng.uniform(r_min * r_min, r_max * r_max));
    const double phi = rng.uniform(0.0, 2.0 * M_PI);
    const cplx z = center + std::polar(rho, phi);
    bool ok = true;
    for (const cplx& s : singular) {
      if (std::abs(z - s) < exclusion) {
        ok = false;
        break;
      }
    }
    if (ok && accept && !accept(z)) ok = false;
    if (ok) out.points.push_back(z);
  }
  return out;
}

std::vector<double> singular_values(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  std::vector<double> out(svd.singularValues().data(),
                          svd.singularValues().data() +
                              svd.singularValues().size());
  return out;
}

RankReport rank_of_columns(CMatrix m, double rank_rel_tol) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double peak = m.col(c).cwiseAbs().maxCoeff();
    if (peak > 0.0) m.col(c) /= peak;
  }
  if (m.rows() < m.cols()) m = CMatrix(m.adjoint());
  RankReport r;
  r.sigmas = singular_values(m);
  if (r.sigmas.empty() || r.sigmas.front() < 1e-12) {
    fail(errc::degenerate, "sampled function family is numerically zero");
  }
  r.rank = numerical_rank(m, rank_rel_tol);
  const std::size_t k = static_cast<std::size_t>(r.rank);
  r.gap = k < r.sigmas.size() ? r.sigmas[k - 1] / r.sigmas[k]
                              : std::numeric_limits<double>::infinity();
  return r;
}

int numerical_rank(const CMatrix& m, double rank_rel_tol) {
  if (m.rows() == 0 || m.cols() == 0) {
    fail(errc::invalid_input, "rank of an empty matrix");
  }
  const std::vector<double> sv = singular_values(m);
  const double smax = sv.empty() ? 0.0 : sv.front();
  if (smax == 0.0) return 0;
  int r = 0;
  for (double s : sv) {
    if (s > rank_rel_tol * smax) ++r;
  }
  return r;
}

PolyFit fit_polynomial(const std::vector<cplx>& points,
                       const std::vector<cplx>& values, int max_degree) {
  if (max_degree < 0) fail(errc::invalid_input, "negative polynomial degree");
  if (points.size() != values.size()) {
    fail(errc::invalid_input, "point/value count mismatch");
  }
  const std::size_t need = static_cast<std::size_t>(max_degree) + 3;
  if (points.size() < need) {
    fail(errc::invalid_input, "too few points for the requested degree");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (std::abs(points[i] - points[j]) < 1e-14) {
        fail(errc::invalid_input, "fit points must be pairwise distinct");
      }
    }
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(points.size());
  const Eigen::Index cols = max_degree + 1;
  CMatrix vand(rows, cols);
  CVector rhs(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    cplx p = 1.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      vand(i, j) = p;
      p *= points[static_cast<std::size_t>(i)];
    }
    rhs(i) = values[static_cast<std::size_t>(i)];
  }
  const CVector sol = vand.colPivHouseholderQr().solve(rhs);
  PolyFit fit;
  fit.coeffs.assign(sol.data(), sol.data() + sol.size());
  const CVector misfit = vand * sol - rhs;
  fit.residual = misfit.size() ? misfit.cwiseAbs().maxCoeff() : 0.0;
  return fit;
}

cplx eval_polynomial(const std::vector<cplx>& coeffs, cplx z) {
  cplx acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc;
}

}  // namespace whitlab
