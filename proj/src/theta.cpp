#include "whitlab/theta.hpp"

#include <cmath>

namespace whitlab {
namespace {

constexpr cplx kI{0.0, 1.0};

struct SeriesJet {
  cplx f{0.0}, fz{0.0}, fzz{0.0};
};

// Series jet at a reduced argument (|Re z0| <= 1/2, |Im z0| <= Im tau / 2).
SeriesJet series_jet(cplx z0, cplx tau) {
  SeriesJet out;
  const double imt = tau.imag();
  const double imz = std::abs(z0.imag());
  for (int l = 1;; ++l) {
    bool all_tiny = true;
    for (int sign = 0; sign < 2; ++sign) {
      const int k = sign == 0 ? l : 1 - l;  // pair l and 1-l
      const double quad = static_cast<double>(k) * (k - 1);
      const cplx c = M_PI * kI * static_cast<double>(2 * k - 1);
      const cplx t = static_cast<double>(k % 2 ? -1 : 1) *
                     std::exp(c * z0 + M_PI * kI * tau * quad);
      out.f += t;
      out.fz += c * t;
      out.fzz += c * c * t;
      if (std::abs(t) > 1e-19) all_tiny = false;
    }
    const double margin =
        M_PI * imt * static_cast<double>(l) * (l - 1) -
        M_PI * (2.0 * l + 1.0) * imz;
    if ((l > 1 && all_tiny && margin > 45.0) || l > 64) break;
  }
  return out;
}

// Odd derivatives of theta at 0 (even ones vanish).
void odd_jet_at_zero(cplx tau, cplx& d1, cplx& d3, cplx& d5) {
  d1 = d3 = d5 = 0.0;
  for (int l = 1;; ++l) {
    bool all_tiny = true;
    for (int sign = 0; sign < 2; ++sign) {
      const int k = sign == 0 ? l : 1 - l;
      const double quad = static_cast<double>(k) * (k - 1);
      const cplx c = M_PI * kI * static_cast<double>(2 * k - 1);
      const cplx t = static_cast<double>(k % 2 ? -1 : 1) *
                     std::exp(M_PI * kI * tau * quad);
      const cplx c2 = c * c;
      d1 += c * t;
      d3 += c * c2 * t;
      d5 += c * c2 * c2 * t;
      if (std::abs(t) > 1e-22) all_tiny = false;
    }
    if ((l > 1 && all_tiny) || l > 64) break;
  }
}

}  // namespace

void LatticeParam::validate() const {
  if (!(tau.imag() > 0.0)) {
    fail(errc::invalid_input, "lattice parameter needs positive imaginary part");
  }
  if (tau.imag() < 0.05) {
    fail(errc::invalid_input, "lattice parameter too flat for the series");
  }
}

cplx lattice_reduce(cplx z, const LatticeParam& lat, int* m_out, int* n_out) {
  const long n = std::lround(z.imag() / lat.tau.imag());
  const cplx z1 = z - static_cast<double>(n) * lat.tau;
  const long m = std::lround(z1.real());
  if (m_out) *m_out = static_cast<int>(m);
  if (n_out) *n_out = static_cast<int>(n);
  return z1 - static_cast<double>(m);
}

ThetaJet theta_jet(cplx z, const LatticeParam& lat) {
  int m = 0, n = 0;
  const cplx z0 = lattice_reduce(z, lat, &m, &n);

  SeriesJet base;
  if (std::abs(z0) < 1e-4) {
    cplx d1, d3, d5;
    odd_jet_at_zero(lat.tau, d1, d3, d5);
    const cplx w = z0, w2 = w * w;
    base.f = w * (d1 + w2 * (d3 / 6.0 + w2 * (d5 / 120.0)));
    base.fz = d1 + w2 * (d3 / 2.0 + w2 * (d5 / 24.0));
    base.fzz = w * (d3 + w2 * (d5 / 6.0));
  } else {
    base = series_jet(z0, lat.tau);
  }

  const double dn = static_cast<double>(n);
  const cplx fac = static_cast<double>((m + n) % 2 ? -1 : 1) *
                   std::exp(-2.0 * M_PI * kI * dn * z0 -
                            M_PI * kI * dn * dn * lat.tau);
  const cplx a = -2.0 * M_PI * kI * dn;
  ThetaJet out;
  out.f = fac * base.f;
  out.fz = fac * (base.fz + a * base.f);
  out.fzz = fac * (base.fzz + 2.0 * a * base.fz + a * a * base.f);
  return out;
}

cplx theta(cplx z, const LatticeParam& lat) { return theta_jet(z, lat).f; }

cplx theta_dz(cplx z, const LatticeParam& lat) { return theta_jet(z, lat).fz; }

cplx theta_dtau(cplx z, const LatticeParam& lat) {
  const ThetaJet j = theta_jet(z, lat);
  return -kI / (4.0 * M_PI) * j.fzz - M_PI * kI / 4.0 * j.f;
}

cplx theta_dz_at_zero(const LatticeParam& lat) {
  cplx d1, d3, d5;
  odd_jet_at_zero(lat.tau, d1, d3, d5);
  return d1;
}

ThetaZeroJet theta_zero_jet(const LatticeParam& lat) {
  ThetaZeroJet out;
  odd_jet_at_zero(lat.tau, out.d1, out.d3, out.d5);
  return out;
}

cplx prime_form_g1(cplx x, cplx y, const LatticeParam& lat) {
  return theta(x - y, lat) / theta_dz_at_zero(lat);
}

double lattice_distance(cplx a, cplx b, const LatticeParam& lat) {
  const cplx d0 = lattice_reduce(a - b, lat);
  double best = std::abs(d0);
  for (int dm = -1; dm <= 1; ++dm) {
    for (int dn = -1; dn <= 1; ++dn) {
      best = std::min(best, std::abs(d0 + static_cast<double>(dm) +
                                     static_cast<double>(dn) * lat.tau));
    }
  }
  return best;
}

}  // namespace whitlab
