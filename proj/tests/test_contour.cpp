#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "whitlab/contour.hpp"

using namespace whitlab;

namespace {

constexpr cplx kI{0.0, 1.0};

double beta_fn(double x, double y) {
  return std::tgamma(x) * std::tgamma(y) / std::tgamma(x + y);
}

cplx plain(const Contour& c, const std::function<cplx(cplx)>& f,
           double tol = 1e-12) {
  return integrate(c, f, tol).value;
}

}  // namespace

TEST_CASE("residue and winding numbers") {
  const cplx p(0.3, -0.2);
  const auto f = [&](cplx t) { return 1.0 / (t - p); };
  const cplx around = plain(Contour::loop(p + cplx(0.05, 0.02), 0.7), f);
  CHECK(std::abs(around - 2.0 * M_PI * kI) < 1e-10);
  const cplx outside = plain(Contour::loop(p + cplx(3.0, 0.0), 0.5), f);
  CHECK(std::abs(outside) < 1e-10);
}

TEST_CASE("straight-line integrals against antiderivatives") {
  const cplx a(0.0, 0.0), b(1.0, 2.0);
  const cplx poly = plain(Contour::line(a, b), [](cplx t) { return t * t; });
  CHECK(std::abs(poly - b * b * b / 3.0) < 1e-12);
  const cplx expi = plain(Contour::line(a, b), [](cplx t) { return std::exp(t); });
  CHECK(std::abs(expi - (std::exp(b) - 1.0)) < 1e-12);
}

TEST_CASE("euler integral with endpoint singularities at both ends") {
  // weight t^{x-1} (t-1)^{y-1} on [0,1]; the start-anchored branch turns the
  // second factor into e^{i pi (y-1)} (1-t)^{y-1}
  const double x = 0.7, y = 0.55;
  BranchedWeight w;
  w.factors.push_back(WeightFactor::linear(0.0, x - 1.0));
  w.factors.push_back(WeightFactor::linear(1.0, y - 1.0));
  WeightOnContour woc(w, Contour::line(0.0, 1.0));
  CHECK(woc.singular_start());
  CHECK(woc.singular_end());
  const IntegralResult r = integrate(
      woc, [&](const ParamPoint& p) { return woc.weight(p); }, 1e-12);
  const cplx expect =
      std::exp(kI * M_PI * (y - 1.0)) * beta_fn(x, y);
  CHECK(std::abs(r.value - expect) < 1e-10 * std::abs(expect));
  CHECK(r.err < 1e-10);
}

TEST_CASE("euler integral with vanishing (positive-exponent) endpoints") {
  const double x = 1.5, y = 1.3;
  BranchedWeight w;
  w.factors.push_back(WeightFactor::linear(0.0, x - 1.0));
  w.factors.push_back(WeightFactor::linear(1.0, y - 1.0));
  WeightOnContour woc(w, Contour::line(0.0, 1.0));
  const IntegralResult r = integrate(
      woc, [&](const ParamPoint& p) { return woc.weight(p); }, 1e-12);
  const cplx expect = std::exp(kI * M_PI * (y - 1.0)) * beta_fn(x, y);
  CHECK(std::abs(r.value - expect) < 1e-10 * std::abs(expect));
}

TEST_CASE("loop monodromy multiplies factor windings") {
  const cplx p1(0.2, 0.1), p2(1.4, -0.3);
  BranchedWeight w;
  w.factors.push_back(WeightFactor::linear(p1, -0.23));
  w.factors.push_back(WeightFactor::linear(p2, 0.4));

  WeightOnContour both(w, Contour::loop(cplx(0.8, -0.1), 1.1));
  const cplx expect_both = std::exp(2.0 * M_PI * kI * (-0.23 + 0.4));
  CHECK(std::abs(both.monodromy_factor() - expect_both) < 1e-9);

  WeightOnContour one(w, Contour::loop(p1, 0.5));
  const cplx expect_one = std::exp(2.0 * M_PI * kI * -0.23);
  CHECK(std::abs(one.monodromy_factor() - expect_one) < 1e-9);

  WeightOnContour none(w, Contour::loop(cplx(4.0, 2.0), 0.6));
  CHECK(std::abs(none.monodromy_factor() - 1.0) < 1e-9);
}

TEST_CASE("figure eight winds oppositely around its two lobes") {
  Contour eight;
  eight.segments.push_back(PathSegment::arc(0.0, 1.0, 0.0, 2.0 * M_PI));
  eight.segments.push_back(PathSegment::arc(2.0, 1.0, M_PI, -M_PI));
  eight.validate();
  CHECK(eight.closed());

  BranchedWeight w;
  w.factors.push_back(WeightFactor::linear(0.0, -0.23));
  w.factors.push_back(WeightFactor::linear(2.0, -0.31));
  WeightOnContour woc(w, eight);
  const cplx expect = std::exp(2.0 * M_PI * kI * (-0.23 + 0.31));
  CHECK(std::abs(woc.monodromy_factor() - expect) < 1e-9);
}

TEST_CASE("theta-factor monodromy counts lattice zeros like linear ones") {
  const LatticeParam lat{cplx(0.15, 1.1)};
  const cplx p(0.37, 0.23);
  BranchedWeight w;
  w.factors.push_back(WeightFactor::theta_fn(p, -0.28));
  w.lat = lat;
  WeightOnContour woc(w, Contour::loop(p + cplx(0.02, 0.01), 0.3));
  CHECK(std::abs(woc.monodromy_factor() - std::exp(-0.28 * 2.0 * M_PI * kI)) <
        1e-9);
}

TEST_CASE("log weight magnitude matches direct products along the path") {
  const LatticeParam lat{cplx(0.15, 1.1)};
  BranchedWeight w;
  w.factors.push_back(WeightFactor::linear(cplx(0.2, 0.3), -0.31));
  w.factors.push_back(WeightFactor::theta_fn(cplx(-0.4, 0.1), 0.43));
  w.exp_coeff = cplx(0.25, -0.1);
  w.lat = lat;
  const Contour c = Contour::loop(cplx(-0.1, 0.2), 0.9);
  WeightOnContour woc(w, c);
  for (int seg = 0; seg < 2; ++seg) {
    for (int j = 1; j < 40; ++j) {
      const ParamPoint p = woc.at(seg, j / 40.0);
      const double direct =
          std::pow(std::abs(p.t - w.factors[0].p), -0.31) *
          std::pow(std::abs(theta(p.t - w.factors[1].p, lat)), 0.43) *
          std::exp((w.exp_coeff * p.t).real());
      CHECK(std::abs(woc.weight(p)) ==
            doctest::Approx(direct).epsilon(1e-11));
    }
  }
}

TEST_CASE("log weight is continuous across the endpoint formula band") {
  BranchedWeight w;
  w.factors.push_back(WeightFactor::linear(0.0, -0.3));
  w.factors.push_back(WeightFactor::linear(1.0, -0.2));
  WeightOnContour woc(w, Contour::line(0.0, 1.0));
  for (const double s : {0.019, 0.0201, 0.021, 0.979, 0.9799, 0.981}) {
    const ParamPoint a = woc.at(0, s);
    const ParamPoint b = woc.at(0, s + 5e-4);
    CHECK(std::abs(woc.log_weight(a) - woc.log_weight(b)) < 0.05);
  }
}

TEST_CASE("reversal flips the sign of integrals") {
  const Contour c = Contour::line(cplx(0.1, 0.2), cplx(1.3, -0.4));
  const auto f = [](cplx t) { return std::cos(t) + t; };
  const cplx fwd = plain(c, f);
  const cplx bwd = plain(reversed(c), f);
  CHECK(std::abs(fwd + bwd) < 1e-12);
}

TEST_CASE("splitting a path does not change the integral") {
  const cplx a(0.0, 0.0), m(0.7, 0.35), b(1.0, 0.5);
  BranchedWeight w;
  w.factors.push_back(WeightFactor::linear(cplx(0.5, -0.8), -0.4));
  const auto run = [&](const Contour& c) {
    WeightOnContour woc(w, c);
    return integrate(
               woc, [&](const ParamPoint& p) { return woc.weight(p); }, 1e-12)
        .value;
  };
  const cplx whole = run(Contour::line(a, b));
  const cplx split = run(Contour::polyline({a, m, b}));
  CHECK(std::abs(whole - split) < 1e-11);
}

TEST_CASE("geometry violations are rejected") {
  BranchedWeight w;
  w.factors.push_back(WeightFactor::linear(cplx(0.5, 0.0), -0.3));

  // zero in the middle of the path
  CHECK_THROWS_AS(WeightOnContour(w, Contour::line(0.0, 1.0)), error);
  // zero close to, but not on, an endpoint
  CHECK_THROWS_AS(
      WeightOnContour(w, Contour::line(cplx(0.5 + 1e-7, 0.0), 1.0)), error);
  // closed contour through the zero
  CHECK_THROWS_AS(WeightOnContour(w, Contour::loop(cplx(0.5, -0.5), 0.5)),
                  error);
  // arc terminating on the zero
  Contour arcend;
  arcend.segments.push_back(
      PathSegment::arc(cplx(0.5, -0.4), 0.4, M_PI / 2.0, M_PI));
  CHECK_THROWS_AS(WeightOnContour(w, arcend), error);
  // disconnected chain
  Contour gap;
  gap.segments.push_back(PathSegment::line(0.0, cplx(0.3, 0.0)));
  gap.segments.push_back(PathSegment::line(cplx(0.4, 0.0), 1.0));
  CHECK_THROWS_AS(gap.validate(), error);
}

TEST_CASE("a pole hugging the path raises a convergence error") {
  const cplx p(0.5, 1e-9);
  try {
    integrate(
        Contour::line(0.0, 1.0), [&](cplx t) { return 1.0 / (t - p); },
        1e-12);
    FAIL("expected a convergence error");
  } catch (const convergence_error& e) {
    CHECK(std::isfinite(e.best_estimate().real()));
    CHECK(std::isfinite(e.best_estimate().imag()));
    CHECK(e.error_estimate() > 0.0);
  }
}

TEST_CASE("double-exponential endpoint handling reaches machine precision") {
  BranchedWeight w;
  w.factors.push_back(WeightFactor::linear(0.0, -0.45));
  WeightOnContour woc(w, Contour::line(0.0, 1.0));
  const IntegralResult r = integrate(
      woc, [&](const ParamPoint& p) { return woc.weight(p); }, 1e-13);
  // integral of t^{-0.45} over [0,1]
  CHECK(std::abs(r.value - 1.0 / 0.55) < 1e-12);
}

TEST_CASE("straight-path continuation agrees with principal branches") {
  BranchedWeight w;
  w.factors.push_back(WeightFactor::linear(cplx(0.1, 0.2), -0.23));
  w.factors.push_back(WeightFactor::linear(cplx(-0.5, -0.1), 0.4));
  w.exp_coeff = cplx(0.0, 0.3);
  const cplx from(3.0, 0.4);
  for (const cplx to : {cplx(0.9, 1.2), cplx(-1.4, 0.8), cplx(0.3, -1.5)}) {
    cplx expect = w.exp_coeff * to;
    for (const WeightFactor& f : w.factors) {
      expect += f.s * std::log(to - f.p);
    }
    const cplx got = continued_log_weight(w, from, to);
    CHECK(std::abs(got - expect) < 1e-9);
  }
}

TEST_CASE("contour distance helper") {
  const Contour line = Contour::line(0.0, cplx(2.0, 0.0));
  CHECK(contour_distance(line, cplx(1.0, 0.5)) == doctest::Approx(0.5));
  CHECK(contour_distance(line, cplx(-1.0, 0.0)) == doctest::Approx(1.0));
  const Contour loop = Contour::loop(0.0, 1.0);
  CHECK(contour_distance(loop, cplx(0.2, 0.0)) == doctest::Approx(0.8));
  CHECK(contour_distance(loop, cplx(3.0, 0.0)) == doctest::Approx(2.0));
}

TEST_CASE("single-valued exponent hook multiplies the weight through") {
  BranchedWeight plain;
  plain.factors.push_back(WeightFactor::linear(0.0, -0.3));
  BranchedWeight hooked = plain;
  const cplx pole(0.5, 0.7);
  hooked.omega = [pole](cplx t) { return 0.2 / (t - pole) + 0.1 * t * t; };

  WeightOnContour a(plain, Contour::line(0.0, 1.0));
  WeightOnContour b(hooked, Contour::line(0.0, 1.0));
  for (double s : {0.2, 0.55, 0.9}) {
    const ParamPoint pa = a.at(0, s);
    const ParamPoint pb = b.at(0, s);
    const cplx expect = a.weight(pa) * std::exp(0.2 / (pa.t - pole) + 0.1 * pa.t * pa.t);
    CHECK(std::abs(b.weight(pb) - expect) < 1e-13 * std::abs(expect) + 1e-15);
  }
  const cplx la = continued_log_weight(plain, cplx(3.0, 0.2), cplx(0.4, 1.1));
  const cplx lb = continued_log_weight(hooked, cplx(3.0, 0.2), cplx(0.4, 1.1));
  const cplx z(0.4, 1.1);
  CHECK(std::abs(lb - la - (0.2 / (z - pole) + 0.1 * z * z)) < 1e-12);
}

TEST_CASE("symbolic contours re-resolve against moved reference points") {
  ResolveContext ctx;
  ctx.points = {cplx(0.45, 0.85), cplx(-0.62, 0.3), cplx(0.0, 0.0)};
  ctx.tau = cplx(0.15, 1.1);

  const ContourSpec seg = ContourSpec::segment(
      Anchor::ref_point(0), Anchor::ref_point(1, cplx{}, 1));
  Contour c = resolve_contour(seg, ctx);
  CHECK(std::abs(c.start() - ctx.points[0]) < 1e-15);
  CHECK(std::abs(c.end() - (ctx.points[1] + ctx.tau)) < 1e-15);

  ctx.points[0] += cplx(0.01, -0.02);
  c = resolve_contour(seg, ctx);
  CHECK(std::abs(c.start() - ctx.points[0]) < 1e-15);

  const ContourSpec ring = ContourSpec::circle(Anchor::centroid_point(), 0.5);
  const Contour loop = resolve_contour(ring, ctx);
  CHECK(loop.closed());
  cplx mean{};
  for (cplx p : ctx.points) mean += p;
  mean /= 3.0;
  CHECK(std::abs(loop.start() - (mean + 0.5)) < 1e-14);

  const Contour cw = resolve_contour(
      ContourSpec::circle(Anchor::fixed(0.0), 1.0, false), ctx);
  CHECK(std::abs(cw.start() - cw.end()) < 1e-14);
  CHECK_THROWS_AS(resolve_contour(ContourSpec::segment(
                      Anchor::ref_point(7), Anchor::fixed(0.0)), ctx),
                  error);
}
