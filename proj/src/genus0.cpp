#include "whitlab/genus0.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "whitlab/error.hpp"
#include "whitlab/parallel.hpp"

namespace whitlab {

namespace {

// Factor list skips zero exponents; factor_of maps marked-point index to the
// factor slot (-1 when skipped).
BranchedWeight build_weight(const Genus0Config& cfg,
                            const std::optional<DeformationSpec>& def,
                            std::vector<int>* factor_of = nullptr) {
  BranchedWeight w;
  const std::vector<cplx> pts = cfg.marked_points();
  if (factor_of) factor_of->assign(pts.size(), -1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (cfg.s[i] == 0.0) continue;
    if (factor_of) (*factor_of)[i] = static_cast<int>(w.factors.size());
    w.factors.push_back(WeightFactor::linear(pts[i], cfg.s[i]));
  }
  if (def) {
    def->validate(cfg.n());
    if (!def->trivial()) {
      const DeformationSpec d = *def;
      const std::vector<cplx> u = cfg.u;
      w.omega = [d, u](cplx p) { return d.omega(p, u); };
    }
  }
  return w;
}

std::array<std::pair<int, int>, 3> triple_pairs() {
  return {{{1, 2}, {2, 0}, {0, 1}}};  // rows of a, b, c in that order
}

}  // namespace

bool DeformationSpec::trivial() const {
  return std::all_of(d.begin(), d.end(), [](int m) { return m == 1; });
}

void DeformationSpec::validate(int n) const {
  if (static_cast<int>(d.size()) != n + 3) {
    fail(errc::invalid_input, "deformation needs one multiplicity per marked point");
  }
  if (v.size() != d.size()) {
    fail(errc::invalid_input, "deformation coefficient table shape mismatch");
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] < 1) fail(errc::invalid_input, "multiplicities must be positive");
    if (static_cast<int>(v[i].size()) != d[i] - 1) {
      fail(errc::invalid_input, "deformation slot needs d-1 coefficients");
    }
    for (cplx c : v[i]) {
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
        fail(errc::invalid_input, "non-finite deformation coefficient");
      }
    }
  }
}

cplx DeformationSpec::omega(cplx p, const std::vector<cplx>& u) const {
  const int n = static_cast<int>(u.size());
  cplx acc{};
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (v[i].empty()) continue;
    cplx r;
    if (i < static_cast<std::size_t>(n)) {
      r = 1.0 / (p - u[i]);
    } else if (i == static_cast<std::size_t>(n)) {
      r = 1.0 / p;
    } else if (i == static_cast<std::size_t>(n) + 1) {
      r = 1.0 / (p - 1.0);
    } else {
      r = p;
    }
    cplx pw = 1.0;
    for (cplx coeff : v[i]) {
      pw *= r;
      acc += coeff * pw;
    }
  }
  return acc;
}

int DeformationSpec::field_count(int n) const {
  int k = n;
  for (const auto& slot : v) k += static_cast<int>(slot.size());
  return k;
}

std::vector<cplx> Genus0Config::marked_points() const {
  std::vector<cplx> pts = u;
  pts.push_back(0.0);
  pts.push_back(1.0);
  return pts;
}

ResolveContext Genus0Config::context() const {
  ResolveContext ctx;
  ctx.points = marked_points();
  return ctx;
}

cplx Genus0Config::z_ref() const { return context().centroid() + 2.0; }

const ContourSpec& Genus0Config::contour(const std::string& name) const {
  for (const auto& [key, spec] : contours) {
    if (key == name) return spec;
  }
  fail(errc::invalid_input, "unknown contour: " + name);
}

void Genus0Config::validate() const {
  if (u.empty()) fail(errc::invalid_input, "needs at least one puncture");
  if (s.size() != u.size() + 2) {
    fail(errc::invalid_input, "needs one exponent per marked point");
  }
  for (double e : s) {
    if (!std::isfinite(e)) fail(errc::invalid_input, "non-finite exponent");
  }
  const std::vector<cplx> pts = marked_points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!std::isfinite(pts[i].real()) || !std::isfinite(pts[i].imag())) {
      fail(errc::invalid_input, "non-finite puncture");
    }
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (std::abs(pts[i] - pts[j]) < 1e-6) {
        fail(errc::invalid_input, "marked points must be pairwise distinct");
      }
    }
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
        if (std::abs(p - pts[i]) < 1e-9 && (s[i] >= 1.0 || s[i] <= -1.0)) {
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

cplx FCoefficients::sum() const {
  cplx acc{};
  for (cplx c : f) acc += c;
  return acc;
}

cplx weight_g0(cplx t, const Genus0Config& cfg,
               const std::optional<DeformationSpec>& def) {
  cfg.validate();
  const BranchedWeight w = build_weight(cfg, def);
  return std::exp(continued_log_weight(w, cfg.z_ref(), t));
}

IntegralResult potential_g0(cplx z, const Contour& c, const Genus0Config& cfg,
                            const std::optional<DeformationSpec>& def) {
  cfg.validate();
  if (contour_distance(c, z) < 1e-6) {
    fail(errc::geometry, "spectral point sits on the contour");
  }
  const BranchedWeight w = build_weight(cfg, def);
  const WeightOnContour wic(w, c);
  const cplx log_wz = continued_log_weight(w, cfg.z_ref(), z);
  return integrate(
      wic,
      [&](const ParamPoint& p) {
        return std::exp(log_wz - wic.log_weight(p)) / (z - p.t);
      },
      cfg.tol.quad_tol);
}

IntegralResult potential_g0(cplx z, const std::string& contour_name,
                            const Genus0Config& cfg,
                            const std::optional<DeformationSpec>& def) {
  return potential_g0(z, resolve_contour(cfg.contour(contour_name), cfg.context()),
                      cfg, def);
}

FCoefficients f_coefficients_g0(const std::string& contour_name,
                                const Genus0Config& cfg) {
  cfg.validate();
  const Contour c = resolve_contour(cfg.contour(contour_name), cfg.context());
  std::vector<int> factor_of;
  const BranchedWeight w = build_weight(cfg, {}, &factor_of);
  const WeightOnContour wic(w, c);
  const std::vector<cplx> pts = cfg.marked_points();
  if (!c.closed()) {
    for (cplx e : {c.start(), c.end()}) {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (std::abs(e - pts[i]) < 1e-9 && cfg.s[i] > 0.0) {
          fail(errc::invalid_input,
               "endpoint exponent must be negative for coefficient integrals");
        }
      }
    }
  }

  FCoefficients out;
  out.f.assign(pts.size(), cplx{});
  parallel_for(pts.size(), [&](std::size_t i) {
    if (cfg.s[i] == 0.0) return;
    const std::size_t fi = static_cast<std::size_t>(factor_of[i]);
    const IntegralResult r = integrate(
        wic,
        [&](const ParamPoint& p) {
          return std::exp(-wic.log_weight(p) - wic.log_factor(p, fi));
        },
        cfg.tol.quad_tol);
    out.f[i] = -cfg.s[i] * r.value;
  });

  double scale = 0.0;
  for (cplx fi : out.f) scale += std::abs(fi);
  if (std::abs(out.sum()) > 1e-6 * scale + 100.0 * cfg.tol.quad_tol) {
    fail(errc::convergence, "coefficient sum rule violated for " + contour_name);
  }
  return out;
}

DerivativesG0 dP_closed_g0(cplx z, const FCoefficients& f,
                           const Genus0Config& cfg) {
  const std::vector<cplx> pts = cfg.marked_points();
  if (f.f.size() != pts.size()) {
    fail(errc::invalid_input, "coefficient count mismatch");
  }
  const BranchedWeight w = build_weight(cfg, {});
  const cplx wz = std::exp(continued_log_weight(w, cfg.z_ref(), z));
  DerivativesG0 d;
  for (std::size_t i = 0; i < pts.size(); ++i) d.dPdz += f.f[i] / (z - pts[i]);
  d.dPdz *= wz;
  d.dPdu.resize(cfg.u.size());
  for (std::size_t l = 0; l < cfg.u.size(); ++l) {
    d.dPdu[l] = -f.f[l] / (z - cfg.u[l]) * wz;
  }
  return d;
}

DerivativesG0 dP_closed_g0(cplx z, const std::string& contour_name,
                           const Genus0Config& cfg) {
  return dP_closed_g0(z, f_coefficients_g0(contour_name, cfg), cfg);
}

cplx phi_g0(cplx z, const FCoefficients& fa, const FCoefficients& fb, int l,
            const Genus0Config& cfg) {
  if (l < 0 || l >= cfg.n()) fail(errc::invalid_input, "field index out of range");
  const std::vector<cplx> pts = cfg.marked_points();
  const std::size_t ll = static_cast<std::size_t>(l);
  cplx acc{};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i == ll) continue;
    const cplx ci = fb.f[i] * fa.f[ll] - fa.f[i] * fb.f[ll];
    if (ci == cplx{}) continue;
    cplx prod = 1.0;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == ll || j == i) continue;
      prod *= z - pts[j];
    }
    acc += ci * prod;
  }
  return acc;
}

cplx phi_g0(cplx z, const std::string& contour_a, const std::string& contour_b,
            int l, const Genus0Config& cfg) {
  return phi_g0(z, f_coefficients_g0(contour_a, cfg),
                f_coefficients_g0(contour_b, cfg), l, cfg);
}

namespace {

std::vector<cplx> sample_points_impl(const Genus0Config& cfg, std::size_t count,
                                     std::uint64_t seed, std::string_view tag,
                                     double r_min, double r_max) {
  cfg.validate();
  const std::vector<cplx> pts = cfg.marked_points();
  const ResolveContext ctx = cfg.context();
  const cplx center = ctx.centroid();
  const cplx zr = cfg.z_ref();
  std::vector<Contour> resolved;
  resolved.reserve(cfg.contours.size());
  for (const auto& [name, spec] : cfg.contours) {
    resolved.push_back(resolve_contour(spec, ctx));
  }
  Rng rng = seeded_stream(seed, tag);
  const auto accept = [&](cplx z) {
    for (const Contour& c : resolved) {
      if (contour_distance(c, z) < 0.05) return false;
    }
    const Contour ray = Contour::line(zr, z);
    for (cplx p : pts) {
      if (contour_distance(ray, p) < 0.08) return false;
    }
    return true;
  };
  return sample_annulus(center, r_min, r_max, pts, 0.1, count, rng, accept)
      .points;
}

// Radius beyond which every marked point (and so every segment contour) lies
// inside; samples past it sit in one connected component of the contour
// complement, where zero-coefficient potential combinations are constant.
double hull_radius(const Genus0Config& cfg) {
  const cplx center = cfg.context().centroid();
  double r = 0.0;
  for (cplx p : cfg.marked_points()) r = std::max(r, std::abs(p - center));
  return r;
}

}  // namespace

std::vector<cplx> g0_sample_points(const Genus0Config& cfg, std::size_t count,
                                   std::uint64_t seed, std::string_view tag) {
  return sample_points_impl(cfg, count, seed, tag, 0.3, 1.5);
}

RankReport span_dimension_g0(const Genus0Config& cfg,
                             const std::vector<std::string>& contour_names,
                             SpanMode mode, std::uint64_t seed) {
  cfg.validate();
  const int n = cfg.n();

  if (mode == SpanMode::cross) {
    if (contour_names.size() < 3) {
      fail(errc::invalid_input, "cross span needs a contour triple");
    }
    const std::vector<cplx> zs =
        g0_sample_points(cfg, 3 * static_cast<std::size_t>(n) + 5, seed,
                         "g0.span.cross");
    std::array<FCoefficients, 3> f;
    for (int t = 0; t < 3; ++t) f[t] = f_coefficients_g0(contour_names[t], cfg);
    CMatrix m(zs.size(), 3 * n);
    parallel_for(zs.size(), [&](std::size_t r) {
      int col = 0;
      for (const auto& [ta, tb] : triple_pairs()) {
        for (int l = 0; l < n; ++l) {
          m(static_cast<Eigen::Index>(r), col++) =
              phi_g0(zs[r], f[ta], f[tb], l, cfg);
        }
      }
    });
    return rank_of_columns(std::move(m), cfg.tol.rank_rel_tol);
  }

  if (contour_names.empty()) {
    fail(errc::invalid_input, "potential span needs contours");
  }
  const double rh = hull_radius(cfg);
  const std::vector<cplx> zs =
      sample_points_impl(cfg, 3 * static_cast<std::size_t>(n + 2) + 5, seed,
                         "g0.span.pot", rh + 0.35, rh + 1.5);
  std::vector<Contour> resolved;
  for (const std::string& name : contour_names) {
    resolved.push_back(resolve_contour(cfg.contour(name), cfg.context()));
  }
  CMatrix m(zs.size(), contour_names.size() + 1);
  parallel_for(zs.size() * resolved.size(), [&](std::size_t idx) {
    const std::size_t r = idx / resolved.size();
    const std::size_t c = idx % resolved.size();
    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
        potential_g0(zs[r], resolved[c], cfg).value;
  });
  for (std::size_t r = 0; r < zs.size(); ++r) {
    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(resolved.size())) =
        1.0;
  }
  return rank_of_columns(std::move(m), cfg.tol.rank_rel_tol);
}

HydroSystem extract_hydro_g0(const Genus0Config& cfg,
                             const std::array<std::string, 3>& triple,
                             std::uint64_t seed) {
  cfg.validate();
  const int n = cfg.n();
  std::array<FCoefficients, 3> f;
  for (int t = 0; t < 3; ++t) f[t] = f_coefficients_g0(triple[t], cfg);
  const std::vector<cplx> zs = g0_sample_points(
      cfg, static_cast<std::size_t>(n) + 6, seed, "g0.extract");

  HydroSystem sys;
  sys.fields = n;
  sys.rows = n;
  sys.times = triple;
  CMatrix* mats[3] = {&sys.a, &sys.b, &sys.c};
  const auto pairs = triple_pairs();
  for (int k = 0; k < 3; ++k) {
    mats[k]->resize(n, n);
    const auto [ta, tb] = pairs[k];
    for (int l = 0; l < n; ++l) {
      std::vector<cplx> vals(zs.size());
      for (std::size_t r = 0; r < zs.size(); ++r) {
        vals[r] = phi_g0(zs[r], f[ta], f[tb], l, cfg);
      }
      const PolyFit fit = fit_polynomial(zs, vals, n - 1);
      sys.fit_residual = std::max(sys.fit_residual, fit.residual);
      for (int r = 0; r < n; ++r) (*mats[k])(r, l) = fit.coeffs[r];
    }
  }
  if (sys.fit_residual > cfg.tol.residual_tol) {
    fail(errc::extraction, "cross-differences do not fit the polynomial basis");
  }
  for (int r = 0; r < n; ++r) {
    sys.basis.push_back("z^" + std::to_string(r) + " * common weight factor");
  }
  sys.validate();
  return sys;
}

double hydro_consistency_g0(const HydroSystem& sys, const Genus0Config& cfg,
                            std::uint64_t seed) {
  sys.validate();
  cfg.validate();
  if (sys.fields != cfg.n()) {
    fail(errc::invalid_input, "hydro system field count mismatch");
  }
  std::array<FCoefficients, 3> f;
  for (int t = 0; t < 3; ++t) f[t] = f_coefficients_g0(sys.times[t], cfg);
  Rng rng = seeded_stream(seed, "g0.consistency");
  const ConsistencyDraw draw = draw_consistent_rates(sys, rng);
  const std::vector<cplx> zs =
      g0_sample_points(cfg, 20, seed, "g0.consistency.z");

  std::vector<double> lhs(zs.size());
  parallel_for(zs.size(), [&](std::size_t r) {
    std::array<DerivativesG0, 3> d;
    for (int t = 0; t < 3; ++t) d[t] = dP_closed_g0(zs[r], f[t], cfg);
    cplx acc{};
    const auto pairs = triple_pairs();
    const CVector* rates[3] = {&draw.x, &draw.p, &draw.q};
    for (int k = 0; k < 3; ++k) {
      const auto [ta, tb] = pairs[k];
      for (int l = 0; l < sys.fields; ++l) {
        acc += (d[ta].dPdz * d[tb].dPdu[l] - d[tb].dPdz * d[ta].dPdu[l]) *
               (*rates[k])[l];
      }
    }
    lhs[r] = std::abs(acc);
  });
  return *std::max_element(lhs.begin(), lhs.end());
}

RankReport measured_cross_rank_g0(const Genus0Config& cfg,
                                  const DeformationSpec& def,
                                  const std::array<std::string, 3>& triple,
                                  std::uint64_t seed) {
  cfg.validate();
  def.validate(cfg.n());
  const int n = cfg.n();
  const int fields = def.field_count(n);
  const std::vector<cplx> zs = g0_sample_points(
      cfg, 3 * static_cast<std::size_t>(fields) + 5, seed, "g0.deformed");
  std::array<Contour, 3> resolved;
  for (int t = 0; t < 3; ++t) {
    resolved[t] = resolve_contour(cfg.contour(triple[t]), cfg.context());
  }

  // Potential with one field (puncture or deformation coefficient) replaced.
  const auto eval_at = [&](int field, cplx value, cplx z, int t) {
    Genus0Config c2 = cfg;
    DeformationSpec d2 = def;
    if (field < n) {
      c2.u[static_cast<std::size_t>(field)] = value;
      return potential_g0(z, triple[t], c2, d2).value;
    }
    int offset = field - n;
    for (auto& slot : d2.v) {
      if (offset < static_cast<int>(slot.size())) {
        slot[static_cast<std::size_t>(offset)] = value;
        break;
      }
      offset -= static_cast<int>(slot.size());
    }
    return potential_g0(z, resolved[t], c2, d2).value;
  };
  const auto field_value = [&](int field) {
    if (field < cfg.n()) return cfg.u[static_cast<std::size_t>(field)];
    int offset = field - cfg.n();
    for (const auto& slot : def.v) {
      if (offset < static_cast<int>(slot.size())) {
        return slot[static_cast<std::size_t>(offset)];
      }
      offset -= static_cast<int>(slot.size());
    }
    fail(errc::invalid_input, "field index out of range");
  };

  CMatrix m(zs.size(), 3 * fields);
  parallel_for(zs.size(), [&](std::size_t r) {
    const cplx z = zs[r];
    std::array<cplx, 3> dz;
    CMatrix du(3, fields);
    for (int t = 0; t < 3; ++t) {
      dz[t] = finite_diff(
          [&](cplx w) { return potential_g0(w, resolved[t], cfg, def).value; },
          z, cfg.tol.fd_step);
      for (int l = 0; l < fields; ++l) {
        du(t, l) = finite_diff(
            [&](cplx w) { return eval_at(l, w, z, t); }, field_value(l),
            cfg.tol.fd_step);
      }
    }
    int col = 0;
    for (const auto& [ta, tb] : triple_pairs()) {
      for (int l = 0; l < fields; ++l) {
        m(static_cast<Eigen::Index>(r), col++) =
            dz[ta] * du(tb, l) - dz[tb] * du(ta, l);
      }
    }
  });
  return rank_of_columns(std::move(m), cfg.tol.rank_rel_tol);
}

cplx hyp2f1_oracle(cplx a, cplx b, cplx c, cplx x) {
  if (std::abs(x) >= 1.0) fail(errc::invalid_input, "series needs |x| < 1");
  cplx term = 1.0, sum = 1.0;
  int quiet = 0;
  for (int k = 0; k < 10000; ++k) {
    const double kk = static_cast<double>(k);
    if (std::abs(c + kk) < 1e-14) {
      fail(errc::invalid_input, "lower parameter is a non-positive integer");
    }
    term *= (a + kk) * (b + kk) / ((c + kk) * (kk + 1.0)) * x;
    sum += term;
    if (std::abs(term) <= 1e-15 * std::abs(sum)) {
      if (++quiet >= 2) return sum;
    } else {
      quiet = 0;
    }
  }
  throw convergence_error("series tail did not reach the relative target", sum,
                          std::abs(term));
}

}  // namespace whitlab
