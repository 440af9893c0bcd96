#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "whitlab/contour.hpp"
#include "whitlab/genus0.hpp"
#include "whitlab/hydro.hpp"
#include "whitlab/theta.hpp"

namespace whitlab {

// Elliptic weight theta(t-u_1)^{s_1}...theta(t-u_n)^{s_n} theta(t)^{s_{n+1}}
// e^{bt} on the torus C/(Z + tau Z), exponents summing to zero so the weight
// is single-valued around a loop enclosing all punctures.
struct Genus1Config {
  std::vector<cplx> u;    // n punctures; the last marked point is pinned at 0
  std::vector<double> s;  // n+1 exponents, sum zero
  cplx a{};
  cplx b{};
  LatticeParam lat;
  std::vector<std::pair<std::string, ContourSpec>> contours;
  ToleranceConfig tol;

  int n() const { return static_cast<int>(u.size()); }
  std::vector<cplx> marked_points() const;  // u_1..u_n, 0
  ResolveContext context() const;
  cplx eta() const;    // s_1 u_1 + ... + s_n u_n + a
  cplx z_ref() const;  // marked-point centroid + (1 + tau)/2
  const ContourSpec& contour(const std::string& name) const;
  void validate() const;
};

struct FCoefficientsG1 {
  std::vector<cplx> f;  // n+1, ordered as the marked points
};

struct DerivativesG1 {
  cplx dPdz{};
  std::vector<cplx> dPdu;  // n entries
  cplx dPdtau{};
};

struct QuasiPeriodicityReport {
  double shift_one = 0.0;   // |phi(z+1) - phi(z)| / scale, max over samples
  double shift_tau = 0.0;   // |phi(z+tau) - e^{-4 pi i eta} phi(z)| / scale
  double pole_growth = 0.0; // max ratio of |(z-p) phi| across shrinking radii
};

cplx weight_g1(cplx t, const Genus1Config& cfg);

IntegralResult potential_g1(cplx z, const std::string& contour_name,
                            const Genus1Config& cfg);
IntegralResult potential_g1(cplx z, const Contour& c, const Genus1Config& cfg);

// f_i = s_i (theta'(0)^2/theta(eta)) * integral of
// theta(t-u_i-eta)/(theta(t-u_i) W(t)) dt.
FCoefficientsG1 f_coefficients_g1(const std::string& contour_name,
                                  const Genus1Config& cfg);

// All three derivatives in closed form from the f coefficients.  The modulus
// slot is the theta'-sum combination the closed-form system is built on; it
// differs from the plain tau-derivative of the integral (see
// dPdtau_direct_g1), while the z and puncture slots match finite differences
// directly.
DerivativesG1 dP_closed_g1(cplx z, const std::string& contour_name,
                           const Genus1Config& cfg);
DerivativesG1 dP_closed_g1(cplx z, const FCoefficientsG1& f,
                           const Genus1Config& cfg);

// Plain tau-derivative of the potential, differentiating the integrand under
// the integral sign through the heat equation (one weighted quadrature over
// the contour).  Matches finite differences in tau on every contour class.
cplx dPdtau_direct_g1(cplx z, const std::string& contour_name,
                      const Genus1Config& cfg);

// Cross-difference for the contour pair divided by the squared weight; field
// index l in [0, n-1] addresses u_{l+1}, l = n addresses the modulus slot.
cplx phi_g1(cplx z, const FCoefficientsG1& fa, const FCoefficientsG1& fb,
            int l, const Genus1Config& cfg);

// phi(z+1) = phi(z) and phi(z+tau) = e^{-4 pi i eta} phi(z) residuals over
// sample_count points, plus boundedness probes of (z-p) phi at every puncture
// along four approach radii (ratios stay near 1 for simple poles).
QuasiPeriodicityReport quasi_periodicity_check(const std::string& contour_a,
                                               const std::string& contour_b,
                                               int l, const Genus1Config& cfg,
                                               std::size_t sample_count,
                                               std::uint64_t seed = 0);

// cross: cross-differences of the leading contour triple over all field slots
// including the modulus (expected n+1).  potentials: sampled potentials plus
// the constant function over a single clear disk (expected n+2).
RankReport span_dimension_g1(const Genus1Config& cfg,
                             const std::vector<std::string>& contour_names,
                             SpanMode mode, std::uint64_t seed = 0);

// Coefficient matrices for the time triple in a basis picked from the sampled
// cross-difference functions themselves (pivoted column selection), expanded
// by least squares and gated on a held-out residual.
HydroSystem extract_hydro_g1(const Genus1Config& cfg,
                             const std::array<std::string, 3>& triple,
                             std::uint64_t seed = 0);

double hydro_consistency_g1(const HydroSystem& sys, const Genus1Config& cfg,
                            std::uint64_t seed);

// Lattice-aware deterministic z samples: clearance from puncture translates,
// from every lattice translate of the resolved contours, and from the branch
// continuation ray.
std::vector<cplx> g1_sample_points(const Genus1Config& cfg, std::size_t count,
                                   std::uint64_t seed, std::string_view tag);

}  // namespace whitlab
