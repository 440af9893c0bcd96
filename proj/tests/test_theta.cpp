#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "whitlab/theta.hpp"

using namespace whitlab;

namespace {

constexpr cplx kI{0.0, 1.0};

// Direct summation with a fixed wide window, no argument reduction.  Only
// trustworthy for moderate |Im z|, which is all the tests feed it.
cplx theta_brute(cplx z, cplx tau) {
  cplx acc = 0.0;
  for (int l = -64; l <= 65; ++l) {
    const double quad = static_cast<double>(l) * (l - 1);
    acc += static_cast<double>(l % 2 ? -1 : 1) *
           std::exp(2.0 * M_PI * kI * (static_cast<double>(l) * z) +
                    M_PI * kI * tau * quad - M_PI * kI * z);
  }
  return acc;
}

const std::vector<cplx> kTaus = {cplx(0.0, 1.0), cplx(0.15, 1.1),
                                 cplx(-0.3, 0.8)};

}  // namespace

TEST_CASE("series agrees with direct summation") {
  for (const cplx tau : kTaus) {
    const LatticeParam lat{tau};
    Rng rng = seeded_stream(2024, "theta-brute");
    for (int k = 0; k < 25; ++k) {
      const cplx z(rng.uniform(-1.5, 1.5),
                   rng.uniform(-1.2 * tau.imag(), 1.2 * tau.imag()));
      const cplx ref = theta_brute(z, tau);
      if (std::abs(ref) < 1e-6) continue;
      CHECK(std::abs(theta(z, lat) - ref) / std::abs(ref) < 1e-12);
    }
  }
}

TEST_CASE("oddness and lattice behaviour") {
  for (const cplx tau : kTaus) {
    const LatticeParam lat{tau};
    Rng rng = seeded_stream(7, "theta-odd");
    for (int k = 0; k < 10; ++k) {
      const cplx z = rng.box(0.8);
      if (lattice_distance(z, 0.0, lat) < 0.05) continue;
      const cplx t = theta(z, lat);
      CHECK(std::abs(theta(-z, lat) + t) < 1e-12 * std::abs(t));
      CHECK(std::abs(theta(z + 1.0, lat) + t) < 1e-11 * std::abs(t));
      const cplx qshift = -std::exp(-2.0 * M_PI * kI * z - M_PI * kI * tau) * t;
      CHECK(std::abs(theta(z + tau, lat) - qshift) < 1e-11 * std::abs(qshift));
      // a deeper translate through the same reduction formula
      const cplx big = theta(z + 3.0 - 2.0 * tau, lat);
      const cplx fac = std::exp(4.0 * M_PI * kI * z -
                                4.0 * M_PI * kI * tau) *
                       -1.0;
      CHECK(std::abs(big - fac * t) < 1e-10 * std::abs(fac * t));
    }
  }
}

TEST_CASE("zero set sits exactly on the lattice") {
  const LatticeParam lat{cplx(0.15, 1.1)};
  CHECK(std::abs(theta(cplx(0.0), lat)) < 1e-14);
  CHECK(std::abs(theta(cplx(1.0), lat)) < 1e-12);
  CHECK(std::abs(theta(lat.tau, lat)) < 1e-12);
  CHECK(std::abs(theta(3.0 + 2.0 * lat.tau, lat)) < 1e-9);
  CHECK(std::abs(theta(cplx(0.5, 0.3), lat)) > 1e-2);
}

TEST_CASE("derivative entries of the jet match finite differences") {
  for (const cplx tau : kTaus) {
    const LatticeParam lat{tau};
    Rng rng = seeded_stream(99, "theta-jet");
    for (int k = 0; k < 8; ++k) {
      const cplx z(rng.uniform(-0.9, 0.9), rng.uniform(-0.7, 0.7));
      if (lattice_distance(z, 0.0, lat) < 0.1) continue;
      const ThetaJet j = theta_jet(z, lat);
      const cplx fd1 =
          finite_diff([&](cplx w) { return theta(w, lat); }, z, 1e-6);
      const cplx fd2 =
          finite_diff([&](cplx w) { return theta_dz(w, lat); }, z, 1e-6);
      CHECK(std::abs(j.fz - fd1) < 1e-7);
      CHECK(std::abs(j.fzz - fd2) < 1e-6);
    }
  }
}

TEST_CASE("tau derivative matches a finite difference across lattices") {
  Rng rng = seeded_stream(31, "theta-dtau");
  for (const cplx tau : kTaus) {
    for (int k = 0; k < 6; ++k) {
      const cplx z(rng.uniform(-0.9, 0.9), rng.uniform(-0.6, 0.6));
      const double h = 1e-6;
      const LatticeParam lp{tau + h}, lm{tau - h};
      const LatticeParam lpi{tau + h * kI}, lmi{tau - h * kI};
      const cplx fd_re = (theta(z, lp) - theta(z, lm)) / (2.0 * h);
      const cplx fd_im = (theta(z, lpi) - theta(z, lmi)) / (2.0 * h * kI);
      const cplx dt = theta_dtau(z, LatticeParam{tau});
      CHECK(std::abs(dt - fd_re) < 1e-6);
      CHECK(std::abs(dt - fd_im) < 1e-6);
    }
  }
}

TEST_CASE("near-zero evaluation stays accurate") {
  for (const cplx tau : kTaus) {
    const LatticeParam lat{tau};
    const cplx d1 = theta_dz_at_zero(lat);
    CHECK(std::abs(d1) > 1.0);
    // tiny arguments: leading Taylor behaviour
    for (const double eps : {1e-5, 1e-7, 1e-10}) {
      const cplx z(eps, 0.5 * eps);
      const cplx t = theta(z, lat);
      CHECK(std::abs(t - d1 * z) < 1e-8 * std::abs(d1 * z) + 1e-300);
    }
    // continuity across the series/Taylor switch near |z| = 1e-4
    const cplx lo = theta(cplx(0.99e-4, 0.2e-4), lat);
    const cplx ref = theta_brute(cplx(0.99e-4, 0.2e-4), tau);
    CHECK(std::abs(lo - ref) < 1e-10 * std::abs(lo));
    // the same accuracy holds next to a distant lattice copy of the zero
    const cplx near_copy = 2.0 + lat.tau + cplx(1e-7, -2e-7);
    const ThetaJet j = theta_jet(near_copy, lat);
    CHECK(std::abs(j.f) < 1e-4);
    CHECK(std::abs(j.f) > 1e-10);
  }
}

TEST_CASE("prime form is antisymmetric and linear on the diagonal") {
  const LatticeParam lat{cplx(0.15, 1.1)};
  const cplx x(0.31, 0.22), y(-0.14, 0.41);
  const cplx e = prime_form_g1(x, y, lat);
  CHECK(std::abs(prime_form_g1(y, x, lat) + e) < 1e-13 * std::abs(e));
  const cplx d(1e-6, 2e-6);
  CHECK(std::abs(prime_form_g1(x + d, x, lat) - d) < 1e-9 * std::abs(d));
}

TEST_CASE("lattice utilities") {
  const LatticeParam lat{cplx(0.15, 1.1)};
  CHECK(lattice_distance(cplx(0.3, 0.0), 0.0, lat) ==
        doctest::Approx(0.3).epsilon(1e-12));
  CHECK(lattice_distance(1.02 + lat.tau, 0.0, lat) ==
        doctest::Approx(0.02).epsilon(1e-9));
  CHECK(lattice_distance(cplx(0.2, 0.1), cplx(0.2, 0.1) + 3.0 - lat.tau, lat) <
        1e-12);
  int m = 0, n = 0;
  const cplx z0 = lattice_reduce(cplx(2.4, 0.1) + 2.0 * lat.tau, lat, &m, &n);
  CHECK(n == 2);
  CHECK(std::abs(z0 + 2.0 * lat.tau + static_cast<double>(m) -
                 (cplx(2.4, 0.1) + 2.0 * lat.tau)) < 1e-12);
  CHECK(std::abs(z0.real()) <= 0.5 + 1e-12);
  LatticeParam bad{cplx(0.5, -1.0)};
  CHECK_THROWS_AS(bad.validate(), error);
}
