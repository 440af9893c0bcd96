#include "whitlab/genus1.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "whitlab/error.hpp"
#include "whitlab/parallel.hpp"

namespace whitlab {

namespace {

const cplx kTwoPiI{0.0, 2.0 * std::numbers::pi};
const cplx kFourPiI{0.0, 4.0 * std::numbers::pi};

BranchedWeight build_weight(const Genus1Config& cfg,
                            std::vector<int>* factor_of = nullptr) {
  BranchedWeight w;
  w.exp_coeff = cfg.b;
  w.lat = cfg.lat;
  const std::vector<cplx> pts = cfg.marked_points();
  if (factor_of) factor_of->assign(pts.size(), -1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (cfg.s[i] == 0.0) continue;
    if (factor_of) (*factor_of)[i] = static_cast<int>(w.factors.size());
    w.factors.push_back(WeightFactor::theta_fn(pts[i], cfg.s[i]));
  }
  return w;
}

std::array<std::pair<int, int>, 3> triple_pairs() {
  return {{{1, 2}, {2, 0}, {0, 1}}};  // rows of a, b, c in that order
}

std::vector<cplx> lattice_translates(const std::vector<cplx>& pts,
                                     const LatticeParam& lat, int range) {
  std::vector<cplx> out;
  out.reserve(pts.size() * (2 * range + 1) * (2 * range + 1));
  for (cplx p : pts) {
    for (int m = -range; m <= range; ++m) {
      for (int k = -range; k <= range; ++k) {
        out.push_back(p + double(m) + double(k) * lat.tau);
      }
    }
  }
  return out;
}

// Shared theta evaluations for one config.  K is the kernel shape the closed
// z- and puncture-derivatives are built from; H drives the modulus derivative
// through the heat equation theta_tau = theta'' / (4 pi i) - (pi i / 4) theta.
struct ThetaContext {
  LatticeParam lat;
  cplx eta;
  cplx theta0_dz;
  cplx theta_eta;
  cplx theta_eta_dz;
  cplx h3;  // theta'''(0) / (4 pi i theta'(0))
  cplx c2;  // quadratic Taylor coefficient of theta''/(4 pi i theta) at 0

  explicit ThetaContext(const Genus1Config& cfg)
      : lat(cfg.lat), eta(cfg.eta()) {
    const ThetaZeroJet zj = theta_zero_jet(lat);
    theta0_dz = zj.d1;
    const ThetaJet je = theta_jet(eta, lat);
    theta_eta = je.f;
    theta_eta_dz = je.fz;
    h3 = zj.d3 / (kFourPiI * zj.d1);
    c2 = (zj.d5 / (6.0 * zj.d1) - zj.d3 * zj.d3 / (6.0 * zj.d1 * zj.d1)) /
         kFourPiI;
  }

  cplx kernel(cplx x) const {
    return theta0_dz * theta(x + eta, lat) / (theta_eta * theta(x, lat));
  }
  cplx K(cplx x) const {
    return theta(x + eta, lat) / (theta_eta * theta(x, lat));
  }
  // Modulus-slot kernel of the closed-form system: the theta'-sum shape,
  // regular at x = 0 because the 1/x poles of its two halves cancel.
  cplx Kt(cplx x) const {
    const ThetaJet j = theta_jet(x + eta, lat);
    return (j.fz - theta_eta_dz / theta_eta * j.f) /
           (kTwoPiI * theta_eta * theta(x, lat));
  }

  // theta''(x) / (4 pi i theta(x)): finite across the n = 0 zeros, simple
  // zeta poles on every other lattice sheet.
  cplx H(cplx x) const {
    int n = 0;
    const cplx w = lattice_reduce(x, lat, nullptr, &n);
    if (n == 0 && std::abs(w) < 3e-6) return h3 + c2 * w * w;
    const ThetaJet j = theta_jet(x, lat);
    return j.fzz / (kFourPiI * j.f);
  }

  // H at w + n tau for an exact tiny offset w from a lattice translate.
  cplx H_shifted(cplx w, int n) const {
    const ThetaJet j = theta_jet(w, lat);
    cplx out = std::abs(w) < 3e-6 ? h3 + c2 * w * w : j.fzz / (kFourPiI * j.f);
    if (n != 0) {
      const double dn = static_cast<double>(n);
      out += -dn * j.fz / j.f + cplx(0.0, std::numbers::pi) * dn * dn;
    }
    return out;
  }
};

std::string field_label(int l, int n) {
  return l < n ? "u" + std::to_string(l + 1) : "tau";
}

void require_single_valued(const WeightOnContour& wic, const Contour& c) {
  if (!c.closed()) return;
  if (std::abs(wic.monodromy_factor() - 1.0) > 1e-8) {
    fail(errc::invalid_input, "weight is multivalued around the closed contour");
  }
}

// Displacement of the parameter-d point from the segment start (or end),
// formed without subtracting nearby O(1) positions.
cplx segment_offset(const PathSegment& seg, double d, bool from_end) {
  if (seg.kind == PathSegment::Kind::line) {
    return (from_end ? -d : d) * (seg.b - seg.a);
  }
  const double half = 0.5 * d * (seg.ang1 - seg.ang0);
  const cplx step = std::polar(2.0 * seg.radius * std::sin(half),
                               (from_end ? seg.ang1 - half : seg.ang0 + half) +
                                   0.5 * std::numbers::pi);
  return from_end ? -step : step;
}

struct EndpointPole {
  std::size_t point;  // marked point index
  int n;              // tau multiple of (endpoint - point)
};

std::vector<EndpointPole> endpoint_poles(cplx endpoint,
                                         const std::vector<cplx>& pts,
                                         const std::vector<double>& s,
                                         const LatticeParam& lat) {
  std::vector<EndpointPole> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (s[i] == 0.0) continue;
    int n = 0;
    const cplx w = lattice_reduce(endpoint - pts[i], lat, nullptr, &n);
    if (std::abs(w) < 1e-9) out.push_back({i, n});
  }
  return out;
}

const EndpointPole* find_pole(const std::vector<EndpointPole>& v,
                              std::size_t i) {
  for (const EndpointPole& e : v) {
    if (e.point == i) return &e;
  }
  return nullptr;
}

// dP/dtau at z divided by W(z).  The heat equation turns the tau-derivative
// of each theta factor in the kernel and the weight ratio into an H term, so
// the whole derivative collapses to one weighted quadrature; H factors whose
// pole sits on an open endpoint are evaluated through the exact parameter
// offsets the quadrature nodes carry.
cplx dPdtau_over_weight(cplx z, const Contour& c, const Genus1Config& cfg,
                        const ThetaContext& th) {
  const std::vector<cplx> pts = cfg.marked_points();
  for (cplx zt : lattice_translates({z}, cfg.lat, 4)) {
    if (contour_distance(c, zt) < 1e-6) {
      fail(errc::geometry, "kernel pole sits on the contour");
    }
  }
  const BranchedWeight w = build_weight(cfg);
  const WeightOnContour wic(w, c);
  require_single_valued(wic, c);

  cplx pref = th.h3 - th.H(th.eta);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (cfg.s[i] != 0.0) pref += cfg.s[i] * th.H(z - pts[i]);
  }

  const bool open = !c.closed();
  std::vector<EndpointPole> at_start, at_end;
  if (open) {
    at_start = endpoint_poles(c.start(), pts, cfg.s, cfg.lat);
    at_end = endpoint_poles(c.end(), pts, cfg.s, cfg.lat);
  }
  const int last = static_cast<int>(c.segments.size()) - 1;
  const cplx kpre = th.theta0_dz / th.theta_eta;

  const IntegralResult r = integrate(
      wic,
      [&](const ParamPoint& p) -> cplx {
        const bool in_start =
            open && !at_start.empty() && p.segment == 0 && p.dist0 < 1e-5;
        const bool in_end = open && !at_end.empty() && p.segment == last &&
                            p.dist1 < 1e-5;
        cplx off{};
        if (in_start) off = segment_offset(c.segments.front(), p.dist0, false);
        if (in_end) off = segment_offset(c.segments.back(), p.dist1, true);
        if ((in_start || in_end) && std::abs(off) < 1e-100) return cplx{};
        cplx hsum{};
        for (std::size_t i = 0; i < pts.size(); ++i) {
          if (cfg.s[i] == 0.0) continue;
          const EndpointPole* ep = nullptr;
          if (in_start) ep = find_pole(at_start, i);
          if (!ep && in_end) ep = find_pole(at_end, i);
          hsum += cfg.s[i] *
                  (ep ? th.H_shifted(off, ep->n) : th.H(p.t - pts[i]));
        }
        const ThetaJet jx = theta_jet(z - p.t, cfg.lat);
        const ThetaJet jxe = theta_jet(z - p.t + th.eta, cfg.lat);
        const cplx val =
            kpre *
            (jxe.fzz / kFourPiI +
             jxe.f * (pref - hsum - jx.fzz / (kFourPiI * jx.f))) /
            jx.f;
        return val * std::exp(-wic.log_weight(p));
      },
      cfg.tol.quad_tol);
  return r.value;
}

}  // namespace

std::vector<cplx> Genus1Config::marked_points() const {
  std::vector<cplx> pts = u;
  pts.push_back(cplx{});
  return pts;
}

ResolveContext Genus1Config::context() const {
  ResolveContext ctx;
  ctx.points = marked_points();
  ctx.tau = lat.tau;
  return ctx;
}

cplx Genus1Config::eta() const {
  cplx acc = a;
  for (std::size_t i = 0; i < u.size(); ++i) acc += s[i] * u[i];
  return acc;
}

cplx Genus1Config::z_ref() const {
  return context().centroid() + 0.5 * (1.0 + lat.tau);
}

const ContourSpec& Genus1Config::contour(const std::string& name) const {
  for (const auto& [key, spec] : contours) {
    if (key == name) return spec;
  }
  fail(errc::invalid_input, "unknown contour: " + name);
}

void Genus1Config::validate() const {
  if (u.empty()) fail(errc::invalid_input, "needs at least one puncture");
  if (s.size() != u.size() + 1) {
    fail(errc::invalid_input, "needs one exponent per marked point");
  }
  lat.validate();
  double sum = 0.0;
  for (double e : s) {
    if (!std::isfinite(e)) fail(errc::invalid_input, "exponents must be finite");
    sum += e;
  }
  if (std::abs(sum) > 1e-12) {
    fail(errc::invalid_input, "exponent sum must vanish");
  }
  for (cplx v : {a, b}) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      fail(errc::invalid_input, "shift parameters must be finite");
    }
  }
  const std::vector<cplx> pts = marked_points();
  for (cplx p : pts) {
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) {
      fail(errc::invalid_input, "marked points must be finite");
    }
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (lattice_distance(pts[i], pts[j], lat) < 1e-6) {
        fail(errc::invalid_input,
             "marked points must be distinct modulo the lattice");
      }
    }
  }
  if (lattice_distance(eta(), cplx{}, lat) < 1e-3) {
    fail(errc::invalid_input, "eta sits too close to a lattice point");
  }
  tol.validate();
  const ResolveContext ctx = context();
  for (const auto& [name, spec] : contours) {
    if (name.empty()) fail(errc::invalid_input, "unnamed contour");
    spec.validate();
    if (spec.kind == ContourSpec::Kind::circle) continue;
    for (const Anchor* end : {&spec.anchors.front(), &spec.anchors.back()}) {
      const cplx p = resolve_anchor(*end, ctx);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (lattice_distance(p, pts[i], lat) < 1e-9 &&
            (s[i] >= 1.0 || s[i] <= -1.0)) {
          fail(errc::invalid_input,
               "contour endpoint exponent must lie in (-1, 1): " + name);
        }
      }
    }
  }
  for (std::size_t i = 0; i < contours.size(); ++i) {
    for (std::size_t j = i + 1; j < contours.size(); ++j) {
      if (contours[i].first == contours[j].first) {
        fail(errc::invalid_input, "duplicate contour name: " + contours[i].first);
      }
    }
  }
}

cplx weight_g1(cplx t, const Genus1Config& cfg) {
  cfg.validate();
  const std::vector<cplx> pts = cfg.marked_points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (cfg.s[i] != 0.0 && lattice_distance(t, pts[i], cfg.lat) < 1e-9) {
      fail(errc::geometry, "weight evaluated at a puncture");
    }
  }
  const BranchedWeight w = build_weight(cfg);
  return std::exp(continued_log_weight(w, cfg.z_ref(), t));
}

IntegralResult potential_g1(cplx z, const Contour& c, const Genus1Config& cfg) {
  cfg.validate();
  const std::vector<cplx> pts = cfg.marked_points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (cfg.s[i] != 0.0 && lattice_distance(z, pts[i], cfg.lat) < 1e-6) {
      fail(errc::geometry, "spectral point congruent to a puncture");
    }
  }
  // The kernel has poles wherever z - t hits the lattice, so every lattice
  // translate of z must keep clear of the contour.
  for (cplx zt : lattice_translates({z}, cfg.lat, 4)) {
    if (contour_distance(c, zt) < 1e-6) {
      fail(errc::geometry, "kernel pole sits on the contour");
    }
  }
  const BranchedWeight w = build_weight(cfg);
  const WeightOnContour wic(w, c);
  require_single_valued(wic, c);
  const ThetaContext th(cfg);
  const cplx log_wz = continued_log_weight(w, cfg.z_ref(), z);
  return integrate(
      wic,
      [&](const ParamPoint& p) {
        return th.kernel(z - p.t) * std::exp(log_wz - wic.log_weight(p));
      },
      cfg.tol.quad_tol);
}

IntegralResult potential_g1(cplx z, const std::string& contour_name,
                            const Genus1Config& cfg) {
  return potential_g1(z, resolve_contour(cfg.contour(contour_name), cfg.context()),
                      cfg);
}

FCoefficientsG1 f_coefficients_g1(const std::string& contour_name,
                                  const Genus1Config& cfg) {
  cfg.validate();
  const Contour c = resolve_contour(cfg.contour(contour_name), cfg.context());
  std::vector<int> factor_of;
  const BranchedWeight w = build_weight(cfg, &factor_of);
  const WeightOnContour wic(w, c);
  const std::vector<cplx> pts = cfg.marked_points();
  if (!c.closed()) {
    for (cplx e : {c.start(), c.end()}) {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (lattice_distance(e, pts[i], cfg.lat) < 1e-9 && cfg.s[i] > 0.0) {
          fail(errc::invalid_input,
               "endpoint exponent must be negative for coefficient integrals");
        }
      }
    }
  } else {
    require_single_valued(wic, c);
  }

  const ThetaContext th(cfg);
  const cplx norm = th.theta0_dz * th.theta0_dz / th.theta_eta;
  FCoefficientsG1 out;
  out.f.assign(pts.size(), cplx{});
  parallel_for(pts.size(), [&](std::size_t i) {
    if (cfg.s[i] == 0.0) return;
    const std::size_t fi = static_cast<std::size_t>(factor_of[i]);
    const cplx ui = pts[i];
    const IntegralResult r = integrate(
        wic,
        [&](const ParamPoint& p) {
          return theta(p.t - ui - th.eta, cfg.lat) *
                 std::exp(-wic.log_weight(p) - wic.log_factor(p, fi));
        },
        cfg.tol.quad_tol);
    out.f[i] = cfg.s[i] * norm * r.value;
  });
  return out;
}

DerivativesG1 dP_closed_g1(cplx z, const FCoefficientsG1& f,
                           const Genus1Config& cfg) {
  const std::vector<cplx> pts = cfg.marked_points();
  if (f.f.size() != pts.size()) {
    fail(errc::invalid_input, "coefficient count mismatch");
  }
  const ThetaContext th(cfg);
  const BranchedWeight w = build_weight(cfg);
  const cplx wz = std::exp(continued_log_weight(w, cfg.z_ref(), z));

  DerivativesG1 d;
  cplx sum_k{};
  cplx sum_kt{};
  std::vector<cplx> K(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    K[i] = th.K(z - pts[i]);
    sum_k += f.f[i] * K[i];
    sum_kt += f.f[i] * th.Kt(z - pts[i]);
  }
  d.dPdz = sum_k * wz;
  d.dPdu.resize(cfg.u.size());
  for (std::size_t l = 0; l < cfg.u.size(); ++l) {
    d.dPdu[l] = -f.f[l] * K[l] * wz;
  }
  d.dPdtau = sum_kt * wz;
  return d;
}

DerivativesG1 dP_closed_g1(cplx z, const std::string& contour_name,
                           const Genus1Config& cfg) {
  return dP_closed_g1(z, f_coefficients_g1(contour_name, cfg), cfg);
}

cplx dPdtau_direct_g1(cplx z, const std::string& contour_name,
                      const Genus1Config& cfg) {
  cfg.validate();
  const Contour c = resolve_contour(cfg.contour(contour_name), cfg.context());
  const ThetaContext th(cfg);
  const BranchedWeight w = build_weight(cfg);
  const cplx wz = std::exp(continued_log_weight(w, cfg.z_ref(), z));
  return dPdtau_over_weight(z, c, cfg, th) * wz;
}

cplx phi_g1(cplx z, const FCoefficientsG1& fa, const FCoefficientsG1& fb, int l,
            const Genus1Config& cfg) {
  const std::vector<cplx> pts = cfg.marked_points();
  if (fa.f.size() != pts.size() || fb.f.size() != pts.size()) {
    fail(errc::invalid_input, "coefficient count mismatch");
  }
  if (l < 0 || l > cfg.n()) {
    fail(errc::invalid_input, "field index out of range");
  }
  const ThetaContext th(cfg);
  if (l < cfg.n()) {
    const std::size_t ll = static_cast<std::size_t>(l);
    cplx acc{};
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == ll) continue;
      const cplx coeff = fa.f[ll] * fb.f[i] - fb.f[ll] * fa.f[i];
      if (coeff == cplx{}) continue;
      acc += coeff * th.K(z - pts[i]);
    }
    return th.K(z - pts[ll]) * acc;
  }
  // Modulus slot: cross of the z-slot and modulus-slot kernel sums, expanded
  // over antisymmetrised coefficients so a nearly dependent pair keeps its
  // column on the same function ray instead of drowning in cancellation noise.
  std::vector<cplx> kk(pts.size());
  std::vector<cplx> kt(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    kk[i] = th.K(z - pts[i]);
    kt[i] = th.Kt(z - pts[i]);
  }
  cplx acc{};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const cplx coeff = fa.f[i] * fb.f[j] - fb.f[i] * fa.f[j];
      if (coeff == cplx{}) continue;
      acc += coeff * (kk[i] * kt[j] - kk[j] * kt[i]);
    }
  }
  return acc;
}

QuasiPeriodicityReport quasi_periodicity_check(const std::string& contour_a,
                                               const std::string& contour_b,
                                               int l, const Genus1Config& cfg,
                                               std::size_t sample_count,
                                               std::uint64_t seed) {
  cfg.validate();
  const FCoefficientsG1 fa = f_coefficients_g1(contour_a, cfg);
  const FCoefficientsG1 fb = f_coefficients_g1(contour_b, cfg);
  const std::vector<cplx> pts = cfg.marked_points();
  const cplx center = cfg.context().centroid();
  Rng rng = seeded_stream(seed, "g1.quasi");
  const auto accept = [&](cplx z) {
    for (cplx p : pts) {
      if (lattice_distance(z, p, cfg.lat) < 0.1) return false;
    }
    return true;
  };
  const SampleSet samples =
      sample_annulus(center, 0.2, 1.2, {}, 0.0, sample_count, rng, accept);

  QuasiPeriodicityReport rep;
  std::vector<cplx> base(samples.points.size());
  double scale = 0.0;
  for (std::size_t k = 0; k < samples.points.size(); ++k) {
    base[k] = phi_g1(samples.points[k], fa, fb, l, cfg);
    scale = std::max(scale, std::abs(base[k]));
  }
  if (scale < 1e-20) return rep;  // the pair's cross-difference vanishes
  const cplx mult = std::exp(-2.0 * kTwoPiI * cfg.eta());
  for (std::size_t k = 0; k < samples.points.size(); ++k) {
    const cplx z = samples.points[k];
    rep.shift_one =
        std::max(rep.shift_one,
                 std::abs(phi_g1(z + 1.0, fa, fb, l, cfg) - base[k]) / scale);
    rep.shift_tau = std::max(
        rep.shift_tau,
        std::abs(phi_g1(z + cfg.lat.tau, fa, fb, l, cfg) - mult * base[k]) /
            scale);
  }
  // Simple poles: |(z - p) phi| stays bounded as probe circles shrink.
  for (cplx p : pts) {
    for (int dir = 0; dir < 4; ++dir) {
      const cplx e =
          std::polar(1.0, std::numbers::pi / 4.0 + dir * std::numbers::pi / 2.0);
      double prev = -1.0;
      for (double r : {1e-2, 3e-3, 1e-3}) {
        const cplx z = p + r * e;
        const double g = std::abs((z - p) * phi_g1(z, fa, fb, l, cfg));
        if (prev > 1e-14 * scale) {
          rep.pole_growth = std::max(rep.pole_growth, g / prev);
        }
        prev = g;
      }
    }
  }
  return rep;
}

std::vector<cplx> g1_sample_points(const Genus1Config& cfg, std::size_t count,
                                   std::uint64_t seed, std::string_view tag) {
  cfg.validate();
  const ResolveContext ctx = cfg.context();
  const cplx center = ctx.centroid();
  const cplx zr = cfg.z_ref();
  const std::vector<cplx> ptrans =
      lattice_translates(cfg.marked_points(), cfg.lat, 3);
  std::vector<Contour> resolved;
  resolved.reserve(cfg.contours.size());
  for (const auto& [name, spec] : cfg.contours) {
    resolved.push_back(resolve_contour(spec, ctx));
  }
  Rng rng = seeded_stream(seed, tag);
  const auto accept = [&](cplx z) {
    for (const Contour& c : resolved) {
      for (int m = -3; m <= 3; ++m) {
        for (int k = -3; k <= 3; ++k) {
          if (contour_distance(c, z - double(m) - double(k) * cfg.lat.tau) <
              0.05) {
            return false;
          }
        }
      }
    }
    const Contour ray = Contour::line(zr, z);
    for (cplx p : ptrans) {
      if (contour_distance(ray, p) < 0.08) return false;
    }
    return true;
  };
  return sample_annulus(center, 0.3, 1.5, ptrans, 0.1, count, rng, accept)
      .points;
}

RankReport span_dimension_g1(const Genus1Config& cfg,
                             const std::vector<std::string>& contour_names,
                             SpanMode mode, std::uint64_t seed) {
  cfg.validate();
  const int fields = cfg.n() + 1;

  if (mode == SpanMode::cross) {
    if (contour_names.size() < 3) {
      fail(errc::invalid_input, "cross span needs a contour triple");
    }
    const std::vector<cplx> zs =
        g1_sample_points(cfg, 3 * static_cast<std::size_t>(fields) + 5, seed,
                         "g1.span.cross");
    std::array<FCoefficientsG1, 3> f;
    for (int t = 0; t < 3; ++t) f[t] = f_coefficients_g1(contour_names[t], cfg);
    CMatrix m(zs.size(), 3 * fields);
    parallel_for(zs.size(), [&](std::size_t r) {
      int col = 0;
      for (const auto& [ta, tb] : triple_pairs()) {
        for (int l = 0; l < fields; ++l) {
          m(static_cast<Eigen::Index>(r), col++) =
              phi_g1(zs[r], f[ta], f[tb], l, cfg);
        }
      }
    });
    return rank_of_columns(std::move(m), cfg.tol.rank_rel_tol);
  }

  if (contour_names.empty()) {
    fail(errc::invalid_input, "potential span needs contours");
  }
  std::vector<Contour> resolved;
  for (const std::string& name : contour_names) {
    resolved.push_back(resolve_contour(cfg.contour(name), cfg.context()));
  }
  // Potentials jump across every lattice translate of every contour, so the
  // samples must share one connected component of the complement: a disk kept
  // clear of all translates, reached from z_ref without meeting a puncture.
  const std::vector<cplx> ptrans =
      lattice_translates(cfg.marked_points(), cfg.lat, 3);
  const cplx zr = cfg.z_ref();
  const auto disk_clear = [&](cplx zc, double rd) {
    for (const Contour& c : resolved) {
      for (int m = -3; m <= 3; ++m) {
        for (int k = -3; k <= 3; ++k) {
          if (contour_distance(c, zc - double(m) - double(k) * cfg.lat.tau) <
              rd + 0.05) {
            return false;
          }
        }
      }
    }
    const Contour spoke = Contour::line(zr, zc);
    for (cplx p : ptrans) {
      if (contour_distance(spoke, p) < rd + 0.08) return false;
    }
    return true;
  };
  std::vector<cplx> offsets;
  for (int ox = -6; ox <= 6; ++ox) {
    for (int oy = -6; oy <= 6; ++oy) {
      offsets.push_back(cplx(0.06 * ox, 0.06 * oy));
    }
  }
  std::stable_sort(offsets.begin(), offsets.end(), [](cplx lhs, cplx rhs) {
    const double rl = std::abs(lhs);
    const double rr = std::abs(rhs);
    if (rl != rr) return rl < rr;
    if (lhs.real() != rhs.real()) return lhs.real() < rhs.real();
    return lhs.imag() < rhs.imag();
  });
  cplx zc{};
  double rd = 0.0;
  for (double radius : {0.28, 0.18, 0.12}) {
    for (cplx off : offsets) {
      if (disk_clear(zr + off, radius)) {
        zc = zr + off;
        rd = radius;
        break;
      }
    }
    if (rd > 0.0) break;
  }
  if (rd == 0.0) {
    fail(errc::geometry, "no sampling disk clear of contours and punctures");
  }
  Rng rng = seeded_stream(seed, "g1.span.pot");
  const std::vector<cplx> zs =
      sample_annulus(zc, 0.0, rd, {}, 0.0,
                     3 * static_cast<std::size_t>(fields + 1) + 5, rng)
          .points;
  CMatrix m(zs.size(), contour_names.size() + 1);
  parallel_for(zs.size() * resolved.size(), [&](std::size_t idx) {
    const std::size_t r = idx / resolved.size();
    const std::size_t c = idx % resolved.size();
    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
        potential_g1(zs[r], resolved[c], cfg).value;
  });
  for (std::size_t r = 0; r < zs.size(); ++r) {
    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(resolved.size())) =
        1.0;
  }
  return rank_of_columns(std::move(m), cfg.tol.rank_rel_tol);
}

HydroSystem extract_hydro_g1(const Genus1Config& cfg,
                             const std::array<std::string, 3>& triple,
                             std::uint64_t seed) {
  cfg.validate();
  const int fields = cfg.n() + 1;
  const int cols = 3 * fields;
  std::array<FCoefficientsG1, 3> f;
  for (int t = 0; t < 3; ++t) f[t] = f_coefficients_g1(triple[t], cfg);
  const std::vector<cplx> zs = g1_sample_points(
      cfg, 3 * static_cast<std::size_t>(fields) + 8, seed, "g1.extract");
  const std::vector<cplx> held = g1_sample_points(
      cfg, static_cast<std::size_t>(fields) + 4, seed, "g1.extract.heldout");

  const auto pairs = triple_pairs();
  const auto fill = [&](const std::vector<cplx>& where, CMatrix& m) {
    m.resize(static_cast<Eigen::Index>(where.size()), cols);
    parallel_for(where.size(), [&](std::size_t r) {
      int col = 0;
      for (const auto& [ta, tb] : pairs) {
        for (int l = 0; l < fields; ++l) {
          m(static_cast<Eigen::Index>(r), col++) =
              phi_g1(where[r], f[ta], f[tb], l, cfg);
        }
      }
    });
  };
  CMatrix big, heldm;
  fill(zs, big);
  fill(held, heldm);

  // Pivoted basis: greedily pick the sampled columns with the largest
  // residual after projecting out the picks so far.  Columns keep their raw
  // scale so near-vanishing cross-differences never enter the basis.
  std::vector<double> colscale(cols);
  CMatrix resid = big;
  for (int c = 0; c < cols; ++c) {
    colscale[c] = resid.col(c).cwiseAbs().maxCoeff();
  }
  std::vector<int> basis_idx;
  std::vector<char> used(cols, 0);
  double first_norm = -1.0;
  for (int pick = 0; pick < fields; ++pick) {
    int best = -1;
    double best_norm = 0.0;
    for (int c = 0; c < cols; ++c) {
      if (used[c]) continue;
      const double nn = resid.col(c).norm();
      if (nn > best_norm) {
        best_norm = nn;
        best = c;
      }
    }
    if (first_norm < 0.0) first_norm = best_norm;
    if (best < 0 || best_norm < 1e-8 * first_norm) {
      fail(errc::extraction, "cross-difference span is below the row count");
    }
    used[best] = 1;
    basis_idx.push_back(best);
    const CVector q = resid.col(best) / best_norm;
    for (int c = 0; c < cols; ++c) {
      if (used[c]) continue;
      resid.col(c) -= q * q.dot(resid.col(c));
    }
  }

  CMatrix B(big.rows(), fields);
  CMatrix Bh(heldm.rows(), fields);
  for (int r = 0; r < fields; ++r) {
    B.col(r) = big.col(basis_idx[r]);
    Bh.col(r) = heldm.col(basis_idx[r]);
  }
  const Eigen::ColPivHouseholderQR<CMatrix> solver(B);
  const double scale =
      std::max(*std::max_element(colscale.begin(), colscale.end()), 1e-300);

  HydroSystem sys;
  sys.fields = fields;
  sys.rows = fields;
  sys.times = triple;
  CMatrix* mats[3] = {&sys.a, &sys.b, &sys.c};
  for (auto* m : mats) m->setZero(fields, fields);
  for (int c = 0; c < cols; ++c) {
    const CVector x = solver.solve(big.col(c));
    const double res_in =
        (B * x - big.col(c)).cwiseAbs().maxCoeff() / scale;
    const double res_out =
        (Bh * x - heldm.col(c)).cwiseAbs().maxCoeff() / scale;
    sys.fit_residual = std::max({sys.fit_residual, res_in, res_out});
    const int k = c / fields;
    const int l = c % fields;
    for (int r = 0; r < fields; ++r) (*mats[k])(r, l) = x(r);
  }
  if (sys.fit_residual > cfg.tol.residual_tol) {
    fail(errc::extraction, "cross-differences do not close over the sampled basis");
  }
  for (int r = 0; r < fields; ++r) {
    const int bk = basis_idx[r] / fields;
    const int bl = basis_idx[r] % fields;
    sys.basis.push_back("cross pair (" + triple[pairs[bk].first] + ", " +
                        triple[pairs[bk].second] + "), field " +
                        field_label(bl, cfg.n()));
  }
  sys.validate();
  return sys;
}

double hydro_consistency_g1(const HydroSystem& sys, const Genus1Config& cfg,
                            std::uint64_t seed) {
  sys.validate();
  cfg.validate();
  if (sys.fields != cfg.n() + 1) {
    fail(errc::invalid_input, "hydro system field count mismatch");
  }
  std::array<FCoefficientsG1, 3> f;
  for (int t = 0; t < 3; ++t) f[t] = f_coefficients_g1(sys.times[t], cfg);
  Rng rng = seeded_stream(seed, "g1.consistency");
  const ConsistencyDraw draw = draw_consistent_rates(sys, rng);
  const std::vector<cplx> zs =
      g1_sample_points(cfg, 20, seed, "g1.consistency.z");

  std::vector<double> lhs(zs.size());
  parallel_for(zs.size(), [&](std::size_t r) {
    std::array<DerivativesG1, 3> d;
    for (int t = 0; t < 3; ++t) d[t] = dP_closed_g1(zs[r], f[t], cfg);
    cplx acc{};
    const auto pairs = triple_pairs();
    const CVector* rates[3] = {&draw.x, &draw.p, &draw.q};
    for (int k = 0; k < 3; ++k) {
      const auto [ta, tb] = pairs[k];
      for (int l = 0; l < sys.fields; ++l) {
        const cplx da = l < cfg.n() ? d[ta].dPdu[l] : d[ta].dPdtau;
        const cplx db = l < cfg.n() ? d[tb].dPdu[l] : d[tb].dPdtau;
        acc += (d[ta].dPdz * db - d[tb].dPdz * da) * (*rates[k])[l];
      }
    }
    lhs[r] = std::abs(acc);
  });
  return *std::max_element(lhs.begin(), lhs.end());
}

}  // namespace whitlab
