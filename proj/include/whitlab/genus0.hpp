#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "whitlab/contour.hpp"
#include "whitlab/hydro.hpp"
#include "whitlab/numerics.hpp"

namespace whitlab {

// Higher-multiplicity deformation of the rational weight: the weight gains a
// factor exp(Omega) with
//   Omega(p) = sum over marked points of sum_{j=1}^{d_i - 1} v[i][j-1] r_i(p)^j,
// where r_i(p) = 1/(p - u_i), 1/p, 1/(p - 1) for the finite points and
// r(p) = p for the slot at infinity.  All d_i = 1 leaves the weight untouched.
struct DeformationSpec {
  std::vector<int> d;                // n+3 multiplicities: u_1..u_n, 0, 1, inf
  std::vector<std::vector<cplx>> v;  // v[i].size() == d[i] - 1

  bool trivial() const;
  void validate(int n) const;
  cplx omega(cplx p, const std::vector<cplx>& u) const;
  int field_count(int n) const;  // n + number of v entries
};

struct Genus0Config {
  std::vector<cplx> u;    // punctures away from 0 and 1
  std::vector<double> s;  // n+2 exponents, ordered u_1..u_n, 0, 1
  std::vector<std::pair<std::string, ContourSpec>> contours;
  ToleranceConfig tol;

  int n() const { return static_cast<int>(u.size()); }
  std::vector<cplx> marked_points() const;  // u_1..u_n, 0, 1
  ResolveContext context() const;
  cplx z_ref() const;  // branch reference: marked-point centroid + 2
  const ContourSpec& contour(const std::string& name) const;
  void validate() const;
};

struct FCoefficients {
  std::vector<cplx> f;  // n+2, ordered as the marked points
  cplx sum() const;
};

struct DerivativesG0 {
  cplx dPdz{};
  std::vector<cplx> dPdu;  // n entries
};

enum class SpanMode { cross, potentials };

// Branch-continued weight value at t, continued from the principal branch at
// z_ref along the straight segment.
cplx weight_g0(cplx t, const Genus0Config& cfg,
               const std::optional<DeformationSpec>& def = {});

// P(z) for the named contour; errors when z sits on the contour or the
// continuation path grazes a marked point.
IntegralResult potential_g0(cplx z, const std::string& contour_name,
                            const Genus0Config& cfg,
                            const std::optional<DeformationSpec>& def = {});
IntegralResult potential_g0(cplx z, const Contour& c, const Genus0Config& cfg,
                            const std::optional<DeformationSpec>& def = {});

// f_i = -s_i * integral of dt / ((t - p_i) W(t)); enforces the sum rule as a
// post-check.  Undeformed weights only.
FCoefficients f_coefficients_g0(const std::string& contour_name,
                                const Genus0Config& cfg);

DerivativesG0 dP_closed_g0(cplx z, const std::string& contour_name,
                           const Genus0Config& cfg);
DerivativesG0 dP_closed_g0(cplx z, const FCoefficients& f,
                           const Genus0Config& cfg);

// Cross-difference for the contour pair divided by the common weight factor;
// a polynomial of degree <= n-1 in z.  l is the field index (0-based).
cplx phi_g0(cplx z, const std::string& contour_a, const std::string& contour_b,
            int l, const Genus0Config& cfg);
cplx phi_g0(cplx z, const FCoefficients& fa, const FCoefficients& fb, int l,
            const Genus0Config& cfg);

// Rank of the sampled function family.  cross: all cross-differences over the
// pairs of the leading contour triple (expected n).  potentials: the sampled
// potentials plus the constant function (expected n+2).
RankReport span_dimension_g0(const Genus0Config& cfg,
                             const std::vector<std::string>& contour_names,
                             SpanMode mode, std::uint64_t seed = 0);

// Coefficient matrices of the hydrodynamic system for the time triple, in the
// basis S_r = z^{r-1} * common weight factor.
HydroSystem extract_hydro_g0(const Genus0Config& cfg,
                             const std::array<std::string, 3>& triple,
                             std::uint64_t seed = 0);

// Max over sampled z of the compatibility combination assembled from the
// closed-form derivatives and an admissible rate triple drawn from `seed`.
double hydro_consistency_g0(const HydroSystem& sys, const Genus0Config& cfg,
                            std::uint64_t seed);

// Finite-difference cross-difference rank for a deformed weight, fields
// (u_1..u_n, v entries).  Measured, never asserted.
RankReport measured_cross_rank_g0(const Genus0Config& cfg,
                                  const DeformationSpec& def,
                                  const std::array<std::string, 3>& triple,
                                  std::uint64_t seed = 0);

// Gauss series for |x| < 1 with relative tail below 1e-12.
cplx hyp2f1_oracle(cplx a, cplx b, cplx c, cplx x);

// Deterministic z samples keeping clearance from the marked points, the
// resolved contours, and the straight continuation path from z_ref.
std::vector<cplx> g0_sample_points(const Genus0Config& cfg, std::size_t count,
                                   std::uint64_t seed, std::string_view tag);

}  // namespace whitlab
