#include "whitlab/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace whitlab {
namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kNearEnd = 0.02;  // param band handled through endpoint offsets

cplx plog(cplx v) { return std::log(v); }

struct Rule {
  std::vector<double> x, w;
};

Rule legendre_rule(int n) {
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p1 = 0.0, pp = 0.0;
    for (int it = 0; it < 64; ++it) {
      double pm = 1.0;
      p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * pm) / j;
        pm = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - pm) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return r;
}

const Rule& rule15() {
  static const Rule r = legendre_rule(15);
  return r;
}
const Rule& rule31() {
  static const Rule r = legendre_rule(31);
  return r;
}

double point_segment_distance(cplx z, cplx a, cplx b) {
  const cplx d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(z - a);
  const double t =
      std::clamp(std::real((z - a) * std::conj(d)) / len2, 0.0, 1.0);
  return std::abs(z - (a + t * d));
}

}  // namespace

PathSegment PathSegment::line(cplx a, cplx b) {
  PathSegment s;
  s.kind = Kind::line;
  s.a = a;
  s.b = b;
  return s;
}

PathSegment PathSegment::arc(cplx center, double radius, double ang0,
                             double ang1) {
  PathSegment s;
  s.kind = Kind::arc;
  s.center = center;
  s.radius = radius;
  s.ang0 = ang0;
  s.ang1 = ang1;
  return s;
}

cplx PathSegment::point(double s) const {
  if (kind == Kind::line) return a + s * (b - a);
  return center + radius * std::exp(kI * (ang0 + s * (ang1 - ang0)));
}

cplx PathSegment::velocity(double s) const {
  if (kind == Kind::line) return b - a;
  return radius * kI * (ang1 - ang0) * std::exp(kI * (ang0 + s * (ang1 - ang0)));
}

double PathSegment::length_estimate() const {
  if (kind == Kind::line) return std::abs(b - a);
  return radius * std::abs(ang1 - ang0);
}

Contour Contour::line(cplx a, cplx b) {
  Contour c;
  c.segments.push_back(PathSegment::line(a, b));
  return c;
}

Contour Contour::loop(cplx center, double radius) {
  Contour c;
  c.segments.push_back(PathSegment::arc(center, radius, 0.0, M_PI));
  c.segments.push_back(PathSegment::arc(center, radius, M_PI, 2.0 * M_PI));
  return c;
}

Contour Contour::polyline(const std::vector<cplx>& pts) {
  if (pts.size() < 2) fail(errc::invalid_input, "polyline needs two points");
  Contour c;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    c.segments.push_back(PathSegment::line(pts[i], pts[i + 1]));
  }
  return c;
}

cplx Contour::start() const {
  if (segments.empty()) fail(errc::invalid_input, "empty contour");
  return segments.front().start();
}

cplx Contour::end() const {
  if (segments.empty()) fail(errc::invalid_input, "empty contour");
  return segments.back().end();
}

bool Contour::closed(double tol) const { return std::abs(end() - start()) < tol; }

void Contour::validate() const {
  if (segments.empty()) fail(errc::invalid_input, "empty contour");
  for (const PathSegment& s : segments) {
    if (s.kind == PathSegment::Kind::line) {
      if (std::abs(s.b - s.a) < 1e-12) {
        fail(errc::invalid_input, "degenerate line segment");
      }
    } else {
      if (s.radius < 1e-12 || std::abs(s.ang1 - s.ang0) < 1e-12) {
        fail(errc::invalid_input, "degenerate arc segment");
      }
    }
  }
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    if (std::abs(segments[i].end() - segments[i + 1].start()) > 1e-9) {
      fail(errc::invalid_input, "contour segments are not connected");
    }
  }
}

Contour reversed(const Contour& c) {
  Contour out;
  for (auto it = c.segments.rbegin(); it != c.segments.rend(); ++it) {
    PathSegment s = *it;
    if (s.kind == PathSegment::Kind::line) {
      std::swap(s.a, s.b);
    } else {
      std::swap(s.ang0, s.ang1);
    }
    out.segments.push_back(s);
  }
  return out;
}

double contour_distance(const Contour& c, cplx z) {
  double best = std::numeric_limits<double>::infinity();
  for (const PathSegment& s : c.segments) {
    if (s.kind == PathSegment::Kind::line) {
      best = std::min(best, point_segment_distance(z, s.a, s.b));
    } else {
      const cplx d = z - s.center;
      const double lo = std::min(s.ang0, s.ang1);
      const double hi = std::max(s.ang0, s.ang1);
      double ang = std::arg(d);
      ang += 2.0 * M_PI * std::ceil((lo - ang) / (2.0 * M_PI));
      if (ang <= hi) {
        best = std::min(best, std::abs(std::abs(d) - s.radius));
      } else {
        best = std::min(best, std::abs(z - s.point(0.0)));
        best = std::min(best, std::abs(z - s.point(1.0)));
      }
    }
  }
  return best;
}

WeightFactor WeightFactor::linear(cplx p, double s) {
  WeightFactor f;
  f.kind = Kind::linear;
  f.p = p;
  f.s = s;
  return f;
}

WeightFactor WeightFactor::theta_fn(cplx p, double s) {
  WeightFactor f;
  f.kind = Kind::theta_fn;
  f.p = p;
  f.s = s;
  return f;
}

void BranchedWeight::validate() const {
  for (const WeightFactor& f : factors) {
    if (!std::isfinite(f.s) || std::abs(f.s) > 100.0) {
      fail(errc::invalid_input, "weight exponent out of range");
    }
    if (f.kind == WeightFactor::Kind::theta_fn && !lat) {
      fail(errc::invalid_input, "theta weight factor without lattice parameter");
    }
  }
  if (lat) lat->validate();
}

cplx WeightOnContour::factor_value(std::size_t f, cplx t) const {
  const WeightFactor& wf = weight_.factors[f];
  if (wf.kind == WeightFactor::Kind::linear) return t - wf.p;
  return theta(t - wf.p, *weight_.lat);
}

cplx WeightOnContour::ratio_near(std::size_t f, const PathSegment& seg,
                                 const FactorSeg& fs, bool at_start,
                                 double u) const {
  const cplx dir = seg.b - seg.a;
  const cplx delta = at_start ? u * dir : -u * dir;
  const WeightFactor& wf = weight_.factors[f];
  if (wf.kind == WeightFactor::Kind::linear) return at_start ? dir : -dir;
  const cplx lrep = at_start ? fs.lat_start : fs.lat_end;
  const LatticeParam& lat = *weight_.lat;
  const double n = std::round((lrep.imag()) / lat.tau.imag());
  const double m = std::round((lrep - n * lat.tau).real());
  const cplx fac = (std::lround(m + n) % 2 ? -1.0 : 1.0) *
                   std::exp(-2.0 * M_PI * kI * n * delta -
                            M_PI * kI * n * n * lat.tau);
  const cplx th = theta(delta, lat);
  return fac * th / u;
}

WeightOnContour::WeightOnContour(BranchedWeight weight, Contour contour)
    : weight_(std::move(weight)), contour_(std::move(contour)) {
  weight_.validate();
  contour_.validate();
  const std::size_t nf = weight_.factors.size();
  const std::size_t ns = contour_.segments.size();
  tables_.assign(ns, std::vector<FactorSeg>(nf));

  const cplx c_start = contour_.start();
  const cplx c_end = contour_.end();
  const bool is_closed = contour_.closed();

  auto zero_distance = [&](std::size_t f, cplx t) {
    const WeightFactor& wf = weight_.factors[f];
    if (wf.kind == WeightFactor::Kind::linear) return std::abs(t - wf.p);
    return lattice_distance(t, wf.p, *weight_.lat);
  };
  auto lattice_rep = [&](std::size_t f, cplx t) -> cplx {
    const WeightFactor& wf = weight_.factors[f];
    if (wf.kind == WeightFactor::Kind::linear) return cplx{0.0};
    int m = 0, n = 0;
    lattice_reduce(t - wf.p, *weight_.lat, &m, &n);
    return static_cast<double>(m) + static_cast<double>(n) * weight_.lat->tau;
  };

  for (std::size_t f = 0; f < nf; ++f) {
    const double scale = std::max(1.0, std::abs(weight_.factors[f].p));
    const double d0 = zero_distance(f, c_start);
    const double d1 = zero_distance(f, c_end);
    FactorSeg& first = tables_.front()[f];
    FactorSeg& last = tables_.back()[f];
    if (d0 < 1e-10) {
      first.sing_start = true;
      first.lat_start = lattice_rep(f, c_start);
      sing_start_ = true;
    } else if (d0 < 1e-4 * scale) {
      fail(errc::geometry, "weight zero too close to the contour start");
    }
    if (d1 < 1e-10) {
      last.sing_end = true;
      last.lat_end = lattice_rep(f, c_end);
      sing_end_ = true;
    } else if (d1 < 1e-4 * scale) {
      fail(errc::geometry, "weight zero too close to the contour end");
    }
  }

  if ((sing_start_ || sing_end_) && is_closed) {
    fail(errc::geometry, "closed contour passes through a weight zero");
  }
  if (sing_start_ &&
      contour_.segments.front().kind != PathSegment::Kind::line) {
    fail(errc::geometry, "weight zero at the endpoint of an arc segment");
  }
  if (sing_end_ && contour_.segments.back().kind != PathSegment::Kind::line) {
    fail(errc::geometry, "weight zero at the endpoint of an arc segment");
  }

  // Interior clearance: no factor may vanish along the path away from the
  // flagged endpoints.
  for (std::size_t f = 0; f < nf; ++f) {
    const double scale = std::max(1.0, std::abs(weight_.factors[f].p));
    for (std::size_t k = 0; k < ns; ++k) {
      const PathSegment& seg = contour_.segments[k];
      const bool skip_lo = k == 0 && tables_.front()[f].sing_start;
      const bool skip_hi = k + 1 == ns && tables_.back()[f].sing_end;
      for (int j = 0; j <= 64; ++j) {
        const double s = j / 64.0;
        if (skip_lo && s < 0.05) continue;
        if (skip_hi && s > 0.95) continue;
        if (zero_distance(f, seg.point(s)) <
            1e-5 * std::max(scale, seg.length_estimate())) {
          fail(errc::geometry, "weight zero on or too close to the contour");
        }
      }
    }
  }

  for (std::size_t f = 0; f < nf; ++f) {
    cplx carry_log{0.0}, carry_v{0.0};
    bool have_carry = false;
    for (std::size_t k = 0; k < ns; ++k) {
      const PathSegment& seg = contour_.segments[k];
      FactorSeg& fs = tables_[k][f];
      if (k > 0) {
        fs.sing_start = false;
        fs.sing_end = false;
      }
      const bool slo = k == 0 && tables_[0][f].sing_start;
      const bool shi = k + 1 == ns && tables_[ns - 1][f].sing_end;
      const double lo = slo ? kNearEnd : 0.0;
      const double hi = shi ? 1.0 - kNearEnd : 1.0;

      fs.node_s.clear();
      fs.node_v.clear();
      for (int j = 0; j <= 16; ++j) {
        const double s = lo + (hi - lo) * j / 16.0;
        fs.node_s.push_back(s);
        fs.node_v.push_back(factor_value(f, seg.point(s)));
      }
      std::size_t i = 0;
      while (i + 1 < fs.node_s.size()) {
        const cplx ratio = fs.node_v[i + 1] / fs.node_v[i];
        if (std::abs(std::imag(plog(ratio))) < 1.0 &&
            std::isfinite(std::abs(ratio))) {
          ++i;
          continue;
        }
        if (fs.node_s.size() > 4000) {
          fail(errc::geometry, "weight branch cannot be tracked; zero near path");
        }
        const double sm = 0.5 * (fs.node_s[i] + fs.node_s[i + 1]);
        fs.node_s.insert(fs.node_s.begin() + static_cast<long>(i) + 1, sm);
        fs.node_v.insert(fs.node_v.begin() + static_cast<long>(i) + 1,
                         factor_value(f, seg.point(sm)));
      }
      for (const cplx& v : fs.node_v) {
        if (!(std::abs(v) > 1e-10)) {
          fail(errc::geometry, "weight vanishes along the contour");
        }
      }

      fs.node_log.resize(fs.node_s.size());
      if (have_carry) {
        fs.node_log[0] = carry_log + plog(fs.node_v[0] / carry_v);
      } else if (slo) {
        const cplx rho0 = ratio_near(f, seg, fs, true, 1e-8);
        const cplx rho_m = fs.node_v[0] / kNearEnd;
        fs.node_log[0] =
            plog(rho0) + std::log(kNearEnd) + plog(rho_m / rho0);
      } else {
        fs.node_log[0] = plog(fs.node_v[0]);
      }
      for (std::size_t j = 0; j + 1 < fs.node_log.size(); ++j) {
        fs.node_log[j + 1] =
            fs.node_log[j] + plog(fs.node_v[j + 1] / fs.node_v[j]);
      }
      carry_log = fs.node_log.back();
      carry_v = fs.node_v.back();
      have_carry = !shi;
    }
  }
}

ParamPoint WeightOnContour::at(int segment, double s) const {
  if (segment < 0 || segment >= static_cast<int>(contour_.segments.size())) {
    fail(errc::invalid_input, "segment index out of range");
  }
  ParamPoint p;
  p.segment = segment;
  p.s = s;
  p.dist0 = s;
  p.dist1 = 1.0 - s;
  p.t = contour_.segments[static_cast<std::size_t>(segment)].point(s);
  return p;
}

cplx WeightOnContour::log_factor(const ParamPoint& p, std::size_t factor) const {
  const auto& seg = contour_.segments[static_cast<std::size_t>(p.segment)];
  const FactorSeg& fs = tables_[static_cast<std::size_t>(p.segment)][factor];
  if (fs.sing_start && p.segment == 0 && p.dist0 <= kNearEnd + 1e-12) {
    const double u = std::max(p.dist0, 1e-300);
    const cplx rho = ratio_near(factor, seg, fs, true, u);
    const cplx rho_m = fs.node_v.front() / kNearEnd;
    return fs.node_log.front() + std::log(u / kNearEnd) + plog(rho / rho_m);
  }
  const bool last = static_cast<std::size_t>(p.segment) + 1 == tables_.size();
  if (fs.sing_end && last && p.dist1 <= kNearEnd + 1e-12) {
    const double u = std::max(p.dist1, 1e-300);
    const cplx rho = ratio_near(factor, seg, fs, false, u);
    const cplx rho_m = fs.node_v.back() / kNearEnd;
    return fs.node_log.back() + std::log(u / kNearEnd) + plog(rho / rho_m);
  }
  const auto it = std::upper_bound(fs.node_s.begin(), fs.node_s.end(), p.s);
  std::size_t i = it == fs.node_s.begin()
                      ? 0
                      : static_cast<std::size_t>(it - fs.node_s.begin()) - 1;
  i = std::min(i, fs.node_s.size() - 1);
  const cplx v = factor_value(factor, p.t);
  return fs.node_log[i] + plog(v / fs.node_v[i]);
}

cplx WeightOnContour::log_weight(const ParamPoint& p) const {
  cplx acc = weight_.exp_coeff * p.t;
  if (weight_.omega) acc += weight_.omega(p.t);
  for (std::size_t f = 0; f < weight_.factors.size(); ++f) {
    acc += weight_.factors[f].s * log_factor(p, f);
  }
  return acc;
}

cplx WeightOnContour::monodromy_factor() const {
  if (sing_start_ || sing_end_) {
    fail(errc::geometry, "monodromy undefined through a weight zero");
  }
  const ParamPoint p0 = at(0, 0.0);
  const ParamPoint p1 = at(static_cast<int>(contour_.segments.size()) - 1, 1.0);
  return std::exp(log_weight(p1) - log_weight(p0));
}

namespace {

struct SegNodeFn {
  const WeightOnContour* w;
  const std::function<cplx(const ParamPoint&)>* f;
  int seg;
};

cplx eval_at(const SegNodeFn& ctx, double s, double u0, double u1) {
  const auto& seg =
      ctx.w->contour().segments[static_cast<std::size_t>(ctx.seg)];
  ParamPoint p;
  p.segment = ctx.seg;
  p.s = s;
  p.dist0 = u0;
  p.dist1 = u1;
  p.t = seg.point(s);
  return (*ctx.f)(p) * seg.velocity(s);
}

IntegralResult de_segment(const SegNodeFn& ctx, double tol) {
  const double wmax = 6.0;
  cplx total{0.0};
  double h = 0.5;
  long evals = 0;
  cplx prev{0.0};
  double err = std::numeric_limits<double>::infinity();

  auto node_term = [&](double wv) -> cplx {
    const double g = 0.5 * M_PI * std::sinh(wv);
    const double e = std::exp(-2.0 * std::abs(g));
    const double unear = e / (1.0 + e);
    const double ufar = 1.0 / (1.0 + e);
    const double u0 = g >= 0.0 ? ufar : unear;
    const double u1 = g >= 0.0 ? unear : ufar;
    if (u0 < 1e-305 || u1 < 1e-305) return cplx{0.0};
    const double jac = M_PI * std::cosh(wv) * u0 * u1;
    if (jac < 1e-305) return cplx{0.0};
    ++evals;
    return eval_at(ctx, u0, u0, u1) * jac;
  };

  cplx sum{0.0};
  const int k0 = static_cast<int>(wmax / h);
  for (int k = -k0; k <= k0; ++k) sum += node_term(k * h);
  total = sum * h;
  for (int level = 1; level <= 8; ++level) {
    h *= 0.5;
    cplx add{0.0};
    const int kk = static_cast<int>(wmax / h);
    for (int k = -kk + 1; k <= kk; k += 2) add += node_term(k * h);
    prev = total;
    total = 0.5 * prev + add * h;
    err = std::abs(total - prev);
    if (level >= 2 && err <= tol) {
      return {total, err, evals};
    }
  }
  throw convergence_error("double-exponential rule did not reach tolerance",
                          total, err);
}

IntegralResult gauss_segment(const SegNodeFn& ctx, double tol) {
  struct Iv {
    double s0, s1;
    cplx val;
    double err;
  };
  long evals = 0;
  auto eval_iv = [&](double s0, double s1) -> Iv {
    const double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
    cplx i15{0.0}, i31{0.0};
    for (std::size_t j = 0; j < rule15().x.size(); ++j) {
      const double s = mid + half * rule15().x[j];
      i15 += rule15().w[j] * eval_at(ctx, s, s, 1.0 - s);
    }
    for (std::size_t j = 0; j < rule31().x.size(); ++j) {
      const double s = mid + half * rule31().x[j];
      i31 += rule31().w[j] * eval_at(ctx, s, s, 1.0 - s);
    }
    evals += 46;
    i15 *= half;
    i31 *= half;
    return {s0, s1, i31, std::abs(i31 - i15)};
  };

  std::vector<Iv> work{eval_iv(0.0, 1.0)};
  cplx accepted{0.0};
  double accepted_err = 0.0;
  int intervals = 1;
  while (!work.empty()) {
    const Iv iv = work.back();
    work.pop_back();
    const double width = iv.s1 - iv.s0;
    if (iv.err <= tol * std::max(width, 1e-3)) {
      accepted += iv.val;
      accepted_err += iv.err;
      continue;
    }
    if (width < 1e-7 || intervals > 800) {
      cplx best = accepted + iv.val;
      for (const Iv& r : work) best += r.val;
      throw convergence_error("adaptive quadrature did not reach tolerance",
                              best, iv.err);
    }
    const double sm = 0.5 * (iv.s0 + iv.s1);
    work.push_back(eval_iv(iv.s0, sm));
    work.push_back(eval_iv(sm, iv.s1));
    intervals += 2;
  }
  return {accepted, accepted_err, evals};
}

}  // namespace

IntegralResult integrate(const WeightOnContour& w,
                         const std::function<cplx(const ParamPoint&)>& f,
                         double abs_tol) {
  if (!(abs_tol > 0.0)) fail(errc::invalid_input, "quadrature tolerance");
  const std::size_t ns = w.contour().segments.size();
  const double tol_seg = abs_tol / static_cast<double>(ns);
  IntegralResult out;
  for (std::size_t k = 0; k < ns; ++k) {
    SegNodeFn ctx{&w, &f, static_cast<int>(k)};
    const bool de = (k == 0 && w.singular_start()) ||
                    (k + 1 == ns && w.singular_end());
    const IntegralResult part =
        de ? de_segment(ctx, tol_seg) : gauss_segment(ctx, tol_seg);
    out.value += part.value;
    out.err += part.err;
    out.evals += part.evals;
  }
  return out;
}

IntegralResult integrate(const Contour& c,
                         const std::function<cplx(cplx)>& f, double abs_tol) {
  WeightOnContour w(BranchedWeight{}, c);
  return integrate(
      w, [&](const ParamPoint& p) { return f(p.t); }, abs_tol);
}

cplx continued_log_weight(const BranchedWeight& w, cplx from, cplx to) {
  if (std::abs(to - from) < 1e-13 * std::max(1.0, std::abs(from))) {
    // Principal branch at the reference point, matching the anchor a
    // continuation path starting there would use.
    cplx acc = w.exp_coeff * to;
    if (w.omega) acc += w.omega(to);
    for (const WeightFactor& f : w.factors) {
      const cplx v = f.kind == WeightFactor::Kind::linear
                         ? to - f.p
                         : theta(to - f.p, *w.lat);
      if (std::abs(v) == 0.0) fail(errc::geometry, "weight continuation hits a zero");
      acc += f.s * plog(v);
    }
    return acc;
  }
  WeightOnContour woc(w, Contour::line(from, to));
  if (woc.singular_start() || woc.singular_end()) {
    fail(errc::geometry, "weight continuation hits a zero");
  }
  return woc.log_weight(woc.at(0, 1.0));
}

Anchor Anchor::fixed(cplx v) {
  Anchor a;
  a.kind = Kind::fixed;
  a.value = v;
  return a;
}

Anchor Anchor::ref_point(int index, cplx offset, int tau_mult) {
  Anchor a;
  a.kind = Kind::ref;
  a.ref = index;
  a.offset = offset;
  a.tau_mult = tau_mult;
  return a;
}

Anchor Anchor::centroid_point(cplx offset, int tau_mult) {
  Anchor a;
  a.kind = Kind::centroid;
  a.offset = offset;
  a.tau_mult = tau_mult;
  return a;
}

cplx ResolveContext::centroid() const {
  if (points.empty()) fail(errc::invalid_input, "centroid of empty point table");
  cplx acc{};
  for (cplx p : points) acc += p;
  return acc / static_cast<double>(points.size());
}

ContourSpec ContourSpec::segment(Anchor from, Anchor to) {
  ContourSpec c;
  c.kind = Kind::segment;
  c.anchors = {from, to};
  return c;
}

ContourSpec ContourSpec::polyline(std::vector<Anchor> pts) {
  ContourSpec c;
  c.kind = Kind::polyline;
  c.anchors = std::move(pts);
  return c;
}

ContourSpec ContourSpec::circle(Anchor center, double radius, bool positive) {
  ContourSpec c;
  c.kind = Kind::circle;
  c.anchors = {center};
  c.radius = radius;
  c.positive = positive;
  return c;
}

void ContourSpec::validate() const {
  switch (kind) {
    case Kind::segment:
      if (anchors.size() != 2) fail(errc::invalid_input, "segment needs two anchors");
      break;
    case Kind::polyline:
      if (anchors.size() < 2) fail(errc::invalid_input, "polyline needs two or more anchors");
      break;
    case Kind::circle:
      if (anchors.size() != 1) fail(errc::invalid_input, "circle needs one center anchor");
      if (!(radius > 0.0)) fail(errc::invalid_input, "circle needs positive radius");
      break;
  }
}

cplx resolve_anchor(const Anchor& a, const ResolveContext& ctx) {
  cplx base;
  switch (a.kind) {
    case Anchor::Kind::fixed:
      base = a.value;
      break;
    case Anchor::Kind::ref:
      if (a.ref < 0 || a.ref >= static_cast<int>(ctx.points.size())) {
        fail(errc::invalid_input, "anchor reference out of range");
      }
      base = ctx.points[static_cast<std::size_t>(a.ref)];
      break;
    case Anchor::Kind::centroid:
      base = ctx.centroid();
      break;
    default:
      fail(errc::invalid_input, "unknown anchor kind");
  }
  return base + a.offset + static_cast<double>(a.tau_mult) * ctx.tau;
}

Contour resolve_contour(const ContourSpec& spec, const ResolveContext& ctx) {
  spec.validate();
  switch (spec.kind) {
    case ContourSpec::Kind::segment:
      return Contour::line(resolve_anchor(spec.anchors[0], ctx),
                           resolve_anchor(spec.anchors[1], ctx));
    case ContourSpec::Kind::polyline: {
      std::vector<cplx> pts;
      pts.reserve(spec.anchors.size());
      for (const Anchor& a : spec.anchors) pts.push_back(resolve_anchor(a, ctx));
      return Contour::polyline(pts);
    }
    case ContourSpec::Kind::circle: {
      Contour loop = Contour::loop(resolve_anchor(spec.anchors[0], ctx), spec.radius);
      return spec.positive ? loop : reversed(loop);
    }
  }
  fail(errc::invalid_input, "unknown contour kind");
}

}  // namespace whitlab
