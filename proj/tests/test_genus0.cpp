#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "whitlab/genus0.hpp"

using namespace whitlab;

namespace {

constexpr cplx kI{0.0, 1.0};

double beta_fn(double x, double y) {
  return std::tgamma(x) * std::tgamma(y) / std::tgamma(x + y);
}

Anchor mk(int i) { return Anchor::ref_point(i); }

// Euler-integral reference: one puncture at 2.5 carrying exponent zero, the
// active exponents sit at 0 and 1, contour runs across [0, 1].
Genus0Config oracle_config() {
  Genus0Config cfg;
  cfg.u = {cplx(2.5, 0.0)};
  cfg.s = {0.0, -0.3, -0.2};
  cfg.contours.emplace_back("base", ContourSpec::segment(mk(1), mk(2)));
  return cfg;
}

Genus0Config config1() {
  Genus0Config cfg;
  cfg.u = {cplx(0.45, 0.85)};
  cfg.s = {-0.23, -0.31, -0.17};
  cfg.contours.emplace_back("c1", ContourSpec::segment(mk(0), mk(1)));
  cfg.contours.emplace_back("c2", ContourSpec::segment(mk(1), mk(2)));
  cfg.contours.emplace_back("c3", ContourSpec::segment(mk(0), mk(2)));
  return cfg;
}

Genus0Config config2() {
  Genus0Config cfg;
  cfg.u = {cplx(0.45, 0.85), cplx(-0.62, 0.3)};
  cfg.s = {-0.23, -0.31, -0.17, -0.29};
  cfg.contours.emplace_back("c1", ContourSpec::segment(mk(0), mk(2)));
  cfg.contours.emplace_back("c2", ContourSpec::segment(mk(1), mk(2)));
  cfg.contours.emplace_back("c3", ContourSpec::segment(mk(2), mk(3)));
  cfg.contours.emplace_back("c4", ContourSpec::segment(mk(0), mk(3)));
  return cfg;
}

DeformationSpec pole_deformation() {
  DeformationSpec def;
  def.d = {2, 1, 1, 1, 1};
  def.v = {{cplx(0.06, 0.04)}, {}, {}, {}, {}};
  return def;
}

// Contours that avoid the pole of the deformation exponent at u_1.
Genus0Config deformed_config() {
  Genus0Config cfg = config2();
  cfg.contours.clear();
  cfg.contours.emplace_back("d1", ContourSpec::segment(mk(1), mk(2)));
  cfg.contours.emplace_back("d2", ContourSpec::segment(mk(2), mk(3)));
  cfg.contours.emplace_back("d3", ContourSpec::segment(mk(1), mk(3)));
  return cfg;
}

cplx plain_weight(cplx t, const Genus0Config& cfg) {
  const std::vector<cplx> pts = cfg.marked_points();
  cplx acc = 1.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    acc *= std::pow(t - pts[i], cplx(cfg.s[i], 0.0));
  }
  return acc;
}

}  // namespace

TEST_CASE("weight reduces to principal powers near the reference point") {
  for (const Genus0Config& cfg : {oracle_config(), config1(), config2()}) {
    const cplx t = cfg.z_ref() + cplx(-0.45, 0.35);
    const cplx w = weight_g0(t, cfg);
    const cplx ref = plain_weight(t, cfg);
    CHECK(std::abs(w - ref) < 1e-12 * std::abs(ref));
  }
}

TEST_CASE("zero exponents leave the weight constant") {
  Genus0Config cfg = config1();
  cfg.s = {0.0, 0.0, 0.0};
  CHECK(std::abs(weight_g0(cplx(0.3, -1.2), cfg) - 1.0) < 1e-14);
  CHECK(std::abs(weight_g0(cplx(-2.0, 0.1), cfg) - 1.0) < 1e-14);
}

TEST_CASE("gauss series oracle") {
  CHECK(std::abs(hyp2f1_oracle(1.0, 1.0, 2.0, 0.0) - 1.0) == 0.0);
  CHECK(std::abs(hyp2f1_oracle(0.0, 1.7, 0.4, cplx(0.2, 0.3)) - 1.0) < 1e-14);
  for (cplx x : {cplx(0.3, 0.0), cplx(-0.35, 0.2)}) {
    const cplx got = hyp2f1_oracle(1.0, 1.0, 2.0, x);
    const cplx ref = -std::log(1.0 - x) / x;
    CHECK(std::abs(got - ref) < 1e-13 * std::abs(ref));
  }
  CHECK_THROWS_AS((void)hyp2f1_oracle(1.0, 1.0, 2.0, cplx(1.2, 0.0)), error);
}

TEST_CASE("potential matches the hypergeometric reduction") {
  const Genus0Config cfg = oracle_config();
  const double beta = 0.3, delta = 0.2;
  for (cplx z : {cplx(3.2, 0.0), cplx(2.2, 0.9)}) {
    const cplx wz = std::pow(z, cplx(-beta, 0.0)) *
                    std::pow(z - 1.0, cplx(-delta, 0.0));
    const cplx expect = wz * std::exp(kI * M_PI * delta) / z *
                        beta_fn(beta + 1.0, delta + 1.0) *
                        hyp2f1_oracle(1.0, beta + 1.0, beta + delta + 2.0,
                                      1.0 / z);
    const cplx got = potential_g0(z, "base", cfg).value;
    CHECK(std::abs(got - expect) < 1e-8 * std::abs(expect));
  }
}

TEST_CASE("coefficient integrals obey the sum rule") {
  const Genus0Config oc = oracle_config();
  const FCoefficients fo = f_coefficients_g0("base", oc);
  CHECK(fo.f[0] == cplx{});
  CHECK(std::abs(fo.sum()) < 1e-8);
  CHECK(std::abs(fo.f[1]) > 1e-3);

  const Genus0Config cfg = config2();
  for (const auto& [name, spec] : cfg.contours) {
    (void)spec;
    const FCoefficients f = f_coefficients_g0(name, cfg);
    CHECK(std::abs(f.sum()) < 1e-8);
    for (cplx fi : f.f) CHECK(std::abs(fi) > 1e-6);
  }
}

TEST_CASE("closed-form derivatives match finite differences") {
  for (const Genus0Config& cfg : {config1(), config2()}) {
    const std::vector<cplx> zs = g0_sample_points(cfg, 3, 7, "test.fd");
    for (const std::string name : {"c1", "c3"}) {
      const FCoefficients f = f_coefficients_g0(name, cfg);
      for (cplx z : zs) {
        const DerivativesG0 d = dP_closed_g0(z, f, cfg);
        const cplx fdz = finite_diff(
            [&](cplx w) { return potential_g0(w, name, cfg).value; }, z,
            cfg.tol.fd_step);
        CHECK(std::abs(fdz - d.dPdz) < 1e-6 * (1.0 + std::abs(d.dPdz)));
        for (int l = 0; l < cfg.n(); ++l) {
          const cplx fdu = finite_diff(
              [&](cplx w) {
                Genus0Config shifted = cfg;
                shifted.u[static_cast<std::size_t>(l)] = w;
                return potential_g0(z, name, shifted).value;
              },
              cfg.u[static_cast<std::size_t>(l)], cfg.tol.fd_step);
          CHECK(std::abs(fdu - d.dPdu[static_cast<std::size_t>(l)]) <
                1e-6 * (1.0 + std::abs(d.dPdu[static_cast<std::size_t>(l)])));
        }
      }
    }
  }
}

TEST_CASE("cross-differences are low-degree polynomials") {
  const Genus0Config cfg = config2();
  const FCoefficients fa = f_coefficients_g0("c1", cfg);
  const FCoefficients fb = f_coefficients_g0("c3", cfg);
  const std::vector<cplx> zs = g0_sample_points(cfg, 10, 11, "test.phi");
  for (int l = 0; l < cfg.n(); ++l) {
    std::vector<cplx> vals;
    for (cplx z : zs) vals.push_back(phi_g0(z, fa, fb, l, cfg));
    const PolyFit fit = fit_polynomial(zs, vals, cfg.n() - 1);
    CHECK(fit.residual < 1e-8);
  }
  const cplx z0 = zs.front();
  CHECK(std::abs(phi_g0(z0, fa, fb, 0, cfg) + phi_g0(z0, fb, fa, 0, cfg)) <
        1e-14);
  CHECK(phi_g0(z0, fa, fa, 1, cfg) == cplx{});
}

TEST_CASE("cross-difference equals the derivative product over the common factor") {
  const Genus0Config cfg = config2();
  const FCoefficients fa = f_coefficients_g0("c2", cfg);
  const FCoefficients fb = f_coefficients_g0("c4", cfg);
  const std::vector<cplx> zs = g0_sample_points(cfg, 2, 23, "test.common");
  for (cplx z : zs) {
    const DerivativesG0 da = dP_closed_g0(z, fa, cfg);
    const DerivativesG0 db = dP_closed_g0(z, fb, cfg);
    const cplx wz = weight_g0(z, cfg);
    cplx lin = 1.0;
    for (cplx p : cfg.marked_points()) lin *= z - p;
    for (int l = 0; l < cfg.n(); ++l) {
      const std::size_t ll = static_cast<std::size_t>(l);
      const cplx raw = da.dPdz * db.dPdu[ll] - db.dPdz * da.dPdu[ll];
      const cplx reduced = phi_g0(z, fa, fb, l, cfg) * wz * wz / lin;
      CHECK(std::abs(raw - reduced) < 1e-8 * (1.0 + std::abs(raw)));
    }
  }
}

TEST_CASE("sampled spans have the expected dimensions") {
  {
    const Genus0Config cfg = config1();
    const RankReport cross =
        span_dimension_g0(cfg, {"c1", "c2", "c3"}, SpanMode::cross, 3);
    CHECK(cross.rank == 1);
    CHECK(cross.gap > 100.0);
    const RankReport pots =
        span_dimension_g0(cfg, {"c1", "c2", "c3"}, SpanMode::potentials, 3);
    CHECK(pots.rank == 3);
    CHECK(pots.gap > 100.0);
  }
  {
    const Genus0Config cfg = config2();
    const RankReport cross =
        span_dimension_g0(cfg, {"c1", "c2", "c3"}, SpanMode::cross, 5);
    CHECK(cross.rank == 2);
    CHECK(cross.gap > 100.0);
    const RankReport pots = span_dimension_g0(cfg, {"c1", "c2", "c3", "c4"},
                                              SpanMode::potentials, 5);
    CHECK(pots.rank == 4);
    CHECK(pots.gap > 100.0);
  }
}

TEST_CASE("all-zero exponents make the cross span degenerate") {
  Genus0Config cfg = config1();
  cfg.s = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(
      (void)span_dimension_g0(cfg, {"c1", "c2", "c3"}, SpanMode::cross, 1),
      error);
}

TEST_CASE("extraction reproduces held-out cross samples") {
  const Genus0Config cfg = config2();
  const std::array<std::string, 3> triple{"c1", "c2", "c3"};
  const HydroSystem sys = extract_hydro_g0(cfg, triple, 3);
  CHECK(sys.fields == 2);
  CHECK(sys.rows == 2);
  CHECK(sys.fit_residual < 1e-8);

  std::array<FCoefficients, 3> f;
  for (int t = 0; t < 3; ++t) f[t] = f_coefficients_g0(triple[t], cfg);
  const std::vector<cplx> held = g0_sample_points(cfg, 4, 77, "test.heldout");
  const std::array<std::pair<int, int>, 3> pairs{{{1, 2}, {2, 0}, {0, 1}}};
  const CMatrix* mats[3] = {&sys.a, &sys.b, &sys.c};
  for (int k = 0; k < 3; ++k) {
    const auto [ta, tb] = pairs[k];
    for (int l = 0; l < sys.fields; ++l) {
      for (cplx z : held) {
        cplx poly{};
        cplx zp = 1.0;
        for (int r = 0; r < sys.rows; ++r) {
          poly += (*mats[k])(r, l) * zp;
          zp *= z;
        }
        const cplx direct = phi_g0(z, f[ta], f[tb], l, cfg);
        CHECK(std::abs(direct - poly) < 1e-8 * (1.0 + std::abs(direct)));
      }
    }
  }
}

TEST_CASE("a vanishing-coefficient time slot zeroes its two matrices") {
  Genus0Config cfg = config2();
  cfg.contours.emplace_back(
      "o", ContourSpec::circle(Anchor::fixed(cplx(0.2, 0.4)), 0.05));
  const HydroSystem with_loop = extract_hydro_g0(cfg, {"o", "c1", "c2"}, 9);
  const HydroSystem reference = extract_hydro_g0(cfg, {"c3", "c1", "c2"}, 9);
  CHECK(with_loop.b.cwiseAbs().maxCoeff() < 1e-8);
  CHECK(with_loop.c.cwiseAbs().maxCoeff() < 1e-8);
  CHECK(with_loop.a.cwiseAbs().maxCoeff() > 1e-3);
  CHECK((with_loop.a - reference.a).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("admissible rates cancel the compatibility combination") {
  const Genus0Config cfg = config2();
  const HydroSystem sys = extract_hydro_g0(cfg, {"c1", "c2", "c3"}, 5);
  const double res = hydro_consistency_g0(sys, cfg, 5);
  CHECK(res < 1e-6);

  HydroSystem bad = sys;
  bad.a(0, 0) *= 1.1;
  const double res2 = hydro_consistency_g0(bad, cfg, 5);
  CHECK(res2 > 1e-3);
}

TEST_CASE("rate draws reject rank-deficient leading matrices") {
  HydroSystem sys;
  sys.fields = 2;
  sys.rows = 2;
  sys.times = {"a", "b", "c"};
  sys.a = CMatrix::Zero(2, 2);
  sys.b = CMatrix::Identity(2, 2);
  sys.c = CMatrix::Identity(2, 2);
  sys.basis = {"s1", "s2"};
  Rng rng(1);
  CHECK_THROWS_AS((void)draw_consistent_rates(sys, rng), error);
}

TEST_CASE("small ccw loop around a regular point picks up the kernel residue") {
  Genus0Config cfg = config2();
  const cplx center(0.2, 0.4);
  cfg.contours.emplace_back("o", ContourSpec::circle(Anchor::fixed(center), 0.05));
  const cplx expect = -2.0 * M_PI * kI;

  const cplx got = potential_g0(center, "o", cfg).value;
  CHECK(std::abs(got - expect) < 1e-6);

  const FCoefficients f = f_coefficients_g0("o", cfg);
  for (cplx fi : f.f) CHECK(std::abs(fi) < 1e-8);
  const DerivativesG0 d = dP_closed_g0(cplx(0.21, 0.38), f, cfg);
  CHECK(std::abs(d.dPdz) < 1e-6);

  const cplx deformed = potential_g0(center, "o", cfg, pole_deformation()).value;
  CHECK(std::abs(deformed - expect) < 1e-6);
}

TEST_CASE("trivial deformation leaves weight and potential untouched") {
  const Genus0Config cfg = config2();
  DeformationSpec triv;
  triv.d = {1, 1, 1, 1, 1};
  triv.v = {{}, {}, {}, {}, {}};
  const cplx t(0.3, -0.9);
  CHECK(weight_g0(t, cfg, triv) == weight_g0(t, cfg));
  const cplx z(1.4, 1.1);
  const cplx a = potential_g0(z, "c3", cfg, triv).value;
  const cplx b = potential_g0(z, "c3", cfg).value;
  CHECK(std::abs(a - b) < 1e-12);
}

TEST_CASE("deformed weights report a measured cross rank") {
  const Genus0Config cfg = deformed_config();
  const DeformationSpec def = pole_deformation();
  const RankReport rep =
      measured_cross_rank_g0(cfg, def, {"d1", "d2", "d3"}, 13);
  INFO("measured deformed cross rank ", rep.rank, " gap ", rep.gap);
  CHECK(rep.rank >= 1);
  CHECK(rep.rank <= 3 * def.field_count(cfg.n()));
  CHECK(!rep.sigmas.empty());
}

TEST_CASE("weights and potentials are invariant under puncture relabeling") {
  const Genus0Config cfg = config2();
  Genus0Config swapped = cfg;
  std::swap(swapped.u[0], swapped.u[1]);
  std::swap(swapped.s[0], swapped.s[1]);
  swapped.contours.clear();
  swapped.contours.emplace_back("c1", ContourSpec::segment(mk(1), mk(2)));

  const cplx t(1.6, 0.7);
  CHECK(std::abs(weight_g0(t, cfg) - weight_g0(t, swapped)) <
        1e-12 * std::abs(weight_g0(t, cfg)));
  const cplx z(0.9, -0.8);
  const cplx a = potential_g0(z, "c1", cfg).value;
  const cplx b = potential_g0(z, "c1", swapped).value;
  CHECK(std::abs(a - b) < 1e-10 * (1.0 + std::abs(a)));
}

TEST_CASE("validation rejects malformed configurations") {
  {
    Genus0Config cfg = config1();
    cfg.s = {-0.23, -1.4, -0.17};
    CHECK_THROWS_AS((void)weight_g0(cplx(2.0, 0.0), cfg), error);
  }
  {
    Genus0Config cfg = config1();
    cfg.contours.emplace_back("c1", ContourSpec::segment(mk(1), mk(2)));
    CHECK_THROWS_AS((void)weight_g0(cplx(2.0, 0.0), cfg), error);
  }
  {
    const Genus0Config cfg = config1();
    CHECK_THROWS_AS((void)potential_g0(cplx(3.0, 0.0), "nope", cfg), error);
  }
  {
    const Genus0Config cfg = config1();
    const cplx on_contour = 0.5 * cfg.u[0];
    CHECK_THROWS_AS((void)potential_g0(on_contour, "c1", cfg), error);
  }
  {
    Genus0Config cfg;
    cfg.u = {cplx(0.0, 0.5)};
    cfg.s = {0.4, -0.3, -0.2};
    cfg.contours.emplace_back(
        "up", ContourSpec::segment(mk(0), Anchor::fixed(cplx(0.0, 2.0))));
    CHECK(std::isfinite(std::abs(potential_g0(cplx(2.5, 0.5), "up", cfg).value)));
    CHECK_THROWS_AS((void)f_coefficients_g0("up", cfg), error);
  }
}
