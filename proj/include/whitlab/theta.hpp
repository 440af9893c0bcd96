#pragma once

#include <complex>

#include "whitlab/numerics.hpp"

namespace whitlab {

// Lattice Z + tau*Z in the upper half plane.
struct LatticeParam {
  cplx tau{0.0, 1.0};
  void validate() const;
};

struct ThetaJet {
  cplx f;    // theta(z)
  cplx fz;   // d/dz
  cplx fzz;  // d^2/dz^2
};

// Odd theta with simple zeros exactly on Z + tau*Z, normalised as
//   theta(z) = e^{-pi i z} * sum_l (-1)^l e^{2 pi i (l z + l(l-1) tau / 2)},
// so theta(z+1) = -theta(z) and theta(z+tau) = -e^{-2 pi i z - pi i tau} theta(z).
ThetaJet theta_jet(cplx z, const LatticeParam& lat);
cplx theta(cplx z, const LatticeParam& lat);
cplx theta_dz(cplx z, const LatticeParam& lat);

// d theta / d tau at fixed z, via the heat equation the series satisfies.
cplx theta_dtau(cplx z, const LatticeParam& lat);

cplx theta_dz_at_zero(const LatticeParam& lat);

// theta'(0), theta'''(0), theta^(5)(0); even-order derivatives vanish at 0.
struct ThetaZeroJet {
  cplx d1;
  cplx d3;
  cplx d5;
};
ThetaZeroJet theta_zero_jet(const LatticeParam& lat);

// E(x, y) = theta(x - y) / theta'(0); odd, E ~ (x - y) near the diagonal.
cplx prime_form_g1(cplx x, cplx y, const LatticeParam& lat);

// Representative z - m - n*tau closest to the origin (row-wise rounding).
cplx lattice_reduce(cplx z, const LatticeParam& lat, int* m_out = nullptr,
                    int* n_out = nullptr);

// Distance from a - b to the nearest lattice point.
double lattice_distance(cplx a, cplx b, const LatticeParam& lat);

}  // namespace whitlab
