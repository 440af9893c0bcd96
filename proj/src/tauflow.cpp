#include "whitlab/tauflow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "whitlab/error.hpp"

namespace whitlab {

namespace {

constexpr double kZeroGuard = 1e-12;

cplx ipow(cplx z, int k) {
  cplx r = 1.0;
  for (int m = 0; m < k; ++m) r *= z;
  return r;
}

// h_0..h_M from  m h_m = sum_{k <= min(m, K)} k t_k h_{m-k}.
std::vector<cplx> homogeneous_components(const CVector& t, int M) {
  std::vector<cplx> h(static_cast<std::size_t>(M) + 1);
  h[0] = 1.0;
  const int K = static_cast<int>(t.size());
  for (int m = 1; m <= M; ++m) {
    cplx acc{};
    for (int k = 1; k <= std::min(m, K); ++k) {
      acc += static_cast<double>(k) * t(k - 1) * h[static_cast<std::size_t>(m - k)];
    }
    h[static_cast<std::size_t>(m)] = acc / static_cast<double>(m);
  }
  return h;
}

cplx h_at(const std::vector<cplx>& h, int idx) {
  if (idx < 0) return {};
  return h[static_cast<std::size_t>(idx)];
}

void check_schur_args(const Partition& lambda, const CVector& t) {
  lambda.validate();
  if (static_cast<int>(t.size()) < lambda.weight()) {
    fail(errc::invalid_input, "needs at least |lambda| time variables");
  }
}

double max_term(cplx t1, cplx t2, cplx t3) {
  return std::max({std::abs(t1), std::abs(t2), std::abs(t3)});
}

cplx disc_draw(Rng& rng, double r_max) {
  const double r = r_max * std::sqrt(rng.uniform());
  const double ang = 2.0 * M_PI * rng.uniform();
  return std::polar(r, ang);
}

void require_fay(const GeometryData& geom) {
  if (fay_residual(geom, 50, 0) >= 1e-9) {
    fail(errc::invalid_input,
         "geometry fails the Fay identity entrance check: " + geom.name);
  }
}

// Connection matrices over explicit puncture data, so finite differences can
// shift one puncture without rebuilding a config.  Entries follow the rows
// d f_j / d u_i of the puncture system; each z sample appends the row for the
// section value at that point, with coefficient
//   -(s_i - 1) d_y E(z, u_i) / E(z, u_i)                        on f(z) and
//   -theta(q(z) - q(u_i) + eta) prod_{m != i} E(z, u_m) / theta(eta) * G_i(z)
// on f_i, where G_i collects the b.q', sum_m s_m d_z E / E, -d_z E / E and
// theta-gradient pieces.
std::vector<CMatrix> assemble_system(const GeometryData& geom,
                                     const std::vector<cplx>& u,
                                     const std::vector<double>& s,
                                     const CVector& a, const CVector& b,
                                     const std::vector<cplx>& zs) {
  const int n = static_cast<int>(u.size());
  const int Z = static_cast<int>(zs.size());
  const int dim = n + Z;

  std::vector<CVector> qv(static_cast<std::size_t>(n));
  CVector eta = a;
  for (int i = 0; i < n; ++i) {
    qv[static_cast<std::size_t>(i)] = geom.q_vec(u[static_cast<std::size_t>(i)]);
    eta += s[static_cast<std::size_t>(i)] * qv[static_cast<std::size_t>(i)];
  }
  const cplx th_eta = geom.theta(eta);
  if (std::abs(th_eta) < kZeroGuard) {
    fail(errc::invalid_input, "theta vanishes at eta");
  }

  std::vector<CMatrix> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    CMatrix A = CMatrix::Zero(dim, dim);
    const cplx ui = u[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const cplx uj = u[static_cast<std::size_t>(j)];
      const cplx Eij = geom.E(ui, uj);
      if (std::abs(Eij) < kZeroGuard) {
        fail(errc::invalid_input, "E vanishes at a puncture pair");
      }
      A(j, j) = -s[static_cast<std::size_t>(i)] * geom.dE_dx(ui, uj) / Eij;
      const cplx th = geom.theta(qv[static_cast<std::size_t>(j)] -
                                 qv[static_cast<std::size_t>(i)] + eta);
      A(j, i) = s[static_cast<std::size_t>(j)] * th / (th_eta * Eij);
    }
    for (int k = 0; k < Z; ++k) {
      const cplx z = zs[static_cast<std::size_t>(k)];
      const cplx Ezi = geom.E(z, ui);
      if (std::abs(Ezi) < kZeroGuard) {
        fail(errc::invalid_input, "E vanishes between a sample point and a puncture");
      }
      const int row = n + k;
      A(row, row) = -(s[static_cast<std::size_t>(i)] - 1.0) * geom.dE_dy(z, ui) / Ezi;

      const CVector arg = geom.q_vec(z) - qv[static_cast<std::size_t>(i)] + eta;
      const cplx th = geom.theta(arg);
      if (std::abs(th) < kZeroGuard) {
        fail(errc::invalid_input, "theta vanishes at a sample shift");
      }
      const CVector dqz = geom.dq_vec(z);
      cplx G{};
      for (int al = 0; al < geom.g; ++al) G += b(al) * dqz(al);
      cplx prod = 1.0;
      for (int m = 0; m < n; ++m) {
        const cplx Ezm = geom.E(z, u[static_cast<std::size_t>(m)]);
        if (std::abs(Ezm) < kZeroGuard) {
          fail(errc::invalid_input, "E vanishes between a sample point and a puncture");
        }
        G += s[static_cast<std::size_t>(m)] *
             geom.dE_dx(z, u[static_cast<std::size_t>(m)]) / Ezm;
        if (m != i) prod *= Ezm;
      }
      G -= geom.dE_dx(z, ui) / Ezi;
      const CVector grad = geom.theta_grad(arg);
      cplx dot{};
      for (int al = 0; al < geom.g; ++al) dot += dqz(al) * grad(al);
      G += dot / th;
      A(row, i) = -(th * prod / th_eta) * G;
    }
    out[static_cast<std::size_t>(i)] = std::move(A);
  }
  return out;
}

}  // namespace

int Partition::weight() const {
  int w = 0;
  for (int r : rows) w += r;
  return w;
}

void Partition::validate() const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 1) fail(errc::invalid_input, "partition rows must be positive");
    if (i > 0 && rows[i] > rows[i - 1]) {
      fail(errc::invalid_input, "partition rows must be weakly decreasing");
    }
  }
}

std::string Partition::label() const {
  std::string out = "(";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(rows[i]);
  }
  return out + ")";
}

CVector miwa(cplx a, int K) {
  if (K < 0) fail(errc::invalid_input, "negative component count");
  CVector v(K);
  cplx pw = 1.0;
  for (int k = 1; k <= K; ++k) {
    pw *= a;
    v(k - 1) = pw / static_cast<double>(k);
  }
  return v;
}

cplx schur_tau(const Partition& lambda, const CVector& t) {
  check_schur_args(lambda, t);
  const int l = lambda.length();
  if (l == 0) return 1.0;
  const std::vector<cplx> h = homogeneous_components(t, lambda.rows[0] + l - 1);
  CMatrix m(l, l);
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < l; ++j) {
      m(i, j) = h_at(h, lambda.rows[static_cast<std::size_t>(i)] - i + j);
    }
  }
  return m.determinant();
}

cplx schur_tau_dt(const Partition& lambda, const CVector& t, int r) {
  check_schur_args(lambda, t);
  if (r < 1 || r > static_cast<int>(t.size())) {
    fail(errc::invalid_input, "time index out of range");
  }
  const int l = lambda.length();
  if (l == 0) return {};
  const std::vector<cplx> h = homogeneous_components(t, lambda.rows[0] + l - 1);
  cplx acc{};
  for (int shifted = 0; shifted < l; ++shifted) {
    CMatrix m(l, l);
    for (int i = 0; i < l; ++i) {
      const int drop = i == shifted ? r : 0;
      for (int j = 0; j < l; ++j) {
        m(i, j) = h_at(h, lambda.rows[static_cast<std::size_t>(i)] - i + j - drop);
      }
    }
    acc += m.determinant();
  }
  return acc;
}

void TauFunction::validate() const {
  lambda.validate();
  if (K < lambda.weight()) fail(errc::invalid_input, "needs K >= |lambda|");
}

double tau_fay_residual(const TauFunction& tau, const CVector& t, cplx a,
                        cplx b, cplx c, cplx d) {
  tau.validate();
  if (static_cast<int>(t.size()) != tau.K) {
    fail(errc::invalid_input, "time vector length must equal K");
  }
  const CVector ma = miwa(a, tau.K);
  const CVector mb = miwa(b, tau.K);
  const CVector mc = miwa(c, tau.K);
  const CVector md = miwa(d, tau.K);
  const cplx t1 = (a - b) * (c - d) * tau(t + ma + mb) * tau(t + mc + md);
  const cplx t2 = (b - c) * (a - d) * tau(t + mb + mc) * tau(t + ma + md);
  const cplx t3 = (c - a) * (b - d) * tau(t + mc + ma) * tau(t + mb + md);
  const double scale = max_term(t1, t2, t3);
  if (scale == 0.0) return 0.0;
  return std::abs(t1 + t2 + t3) / scale;
}

double tau_fay_residual(const TauFunction& tau, std::size_t count,
                        std::uint64_t seed) {
  tau.validate();
  Rng rng = seeded_stream(seed, "tauflow.taufay");
  double worst = 0.0;
  for (std::size_t sample = 0; sample < count; ++sample) {
    CVector t(tau.K);
    for (int k = 0; k < tau.K; ++k) t(k) = rng.box(0.5);
    const cplx a = disc_draw(rng, 0.5);
    const cplx b = disc_draw(rng, 0.5);
    const cplx c = disc_draw(rng, 0.5);
    const cplx d = disc_draw(rng, 0.5);
    worst = std::max(worst, tau_fay_residual(tau, t, a, b, c, d));
  }
  return worst;
}

void GeometryData::validate() const {
  if (g < 1) fail(errc::invalid_input, "geometry needs at least one coordinate function");
  if (!q || !dq) fail(errc::invalid_input, "geometry evaluator missing: q");
  if (!E || !dE_dx || !dE_dy) fail(errc::invalid_input, "geometry evaluator missing: E");
  if (!theta || !theta_grad) fail(errc::invalid_input, "geometry evaluator missing: theta");
}

CVector GeometryData::q_vec(cplx z) const {
  CVector v(g);
  for (int al = 0; al < g; ++al) v(al) = q(al, z);
  return v;
}

CVector GeometryData::dq_vec(cplx z) const {
  CVector v(g);
  for (int al = 0; al < g; ++al) v(al) = dq(al, z);
  return v;
}

GeometryData genus1_geometry(const LatticeParam& lat) {
  lat.validate();
  const cplx d0 = theta_dz_at_zero(lat);
  GeometryData g;
  g.name = "genus1";
  g.g = 1;
  g.q = [](int, cplx z) { return z; };
  g.dq = [](int, cplx) { return cplx{1.0}; };
  g.E = [lat](cplx x, cplx y) { return prime_form_g1(x, y, lat); };
  g.dE_dx = [lat, d0](cplx x, cplx y) { return theta_dz(x - y, lat) / d0; };
  g.dE_dy = [lat, d0](cplx x, cplx y) { return -theta_dz(x - y, lat) / d0; };
  g.theta = [lat](const CVector& v) { return theta(v(0), lat); };
  g.theta_grad = [lat](const CVector& v) {
    CVector r(1);
    r(0) = theta_dz(v(0), lat);
    return r;
  };
  return g;
}

GeometryData rational_geometry() {
  GeometryData g;
  g.name = "rational";
  g.g = 1;
  g.q = [](int, cplx z) { return z; };
  g.dq = [](int, cplx) { return cplx{1.0}; };
  g.E = [](cplx x, cplx y) { return x - y; };
  g.dE_dx = [](cplx, cplx) { return cplx{1.0}; };
  g.dE_dy = [](cplx, cplx) { return cplx{-1.0}; };
  g.theta = [](const CVector& v) { return v(0); };
  g.theta_grad = [](const CVector&) {
    CVector r(1);
    r(0) = 1.0;
    return r;
  };
  return g;
}

GeometryData schur_tau_geometry(const Partition& lambda, int K) {
  lambda.validate();
  if (K < lambda.weight()) fail(errc::invalid_input, "needs K >= |lambda|");
  GeometryData g;
  g.name = "tau" + lambda.label();
  g.g = K;
  g.tau_mode = true;
  g.q = [](int alpha, cplx z) { return ipow(z, alpha + 1) / static_cast<double>(alpha + 1); };
  g.dq = [](int alpha, cplx z) { return ipow(z, alpha); };
  g.E = [](cplx x, cplx y) { return x - y; };
  g.dE_dx = [](cplx, cplx) { return cplx{1.0}; };
  g.dE_dy = [](cplx, cplx) { return cplx{-1.0}; };
  g.theta = [lambda](const CVector& v) { return schur_tau(lambda, v); };
  g.theta_grad = [lambda, K](const CVector& v) {
    CVector r(K);
    for (int k = 1; k <= K; ++k) r(k - 1) = schur_tau_dt(lambda, v, k);
    return r;
  };
  return g;
}

double fay_residual_at(const GeometryData& geom, const CVector& z_vec, cplx u,
                       cplx v, cplx w, cplx t) {
  geom.validate();
  if (static_cast<int>(z_vec.size()) != geom.g) {
    fail(errc::invalid_input, "shift vector dimension must match the geometry");
  }
  const auto th2 = [&](cplx x, cplx y) {
    return geom.theta(z_vec + geom.q_vec(x) + geom.q_vec(y));
  };
  const cplx t1 = geom.E(u, v) * geom.E(w, t) * th2(u, v) * th2(w, t);
  const cplx t2 = geom.E(v, w) * geom.E(u, t) * th2(v, w) * th2(u, t);
  const cplx t3 = geom.E(w, u) * geom.E(v, t) * th2(w, u) * th2(v, t);
  const double scale = max_term(t1, t2, t3);
  if (scale == 0.0) return 0.0;
  return std::abs(t1 + t2 + t3) / scale;
}

double fay_residual(const GeometryData& geom, std::size_t count,
                    std::uint64_t seed) {
  geom.validate();
  Rng rng = seeded_stream(seed, "tauflow.fay");
  double worst = 0.0;
  for (std::size_t sample = 0; sample < count; ++sample) {
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      CVector zv(geom.g);
      for (int al = 0; al < geom.g; ++al) zv(al) = rng.box(0.5);
      const cplx u = rng.box(0.5);
      const cplx v = rng.box(0.5);
      const cplx w = rng.box(0.5);
      const cplx t = rng.box(0.5);
      const std::array<std::pair<cplx, cplx>, 6> shifts = {
          {{u, v}, {w, t}, {v, w}, {u, t}, {w, u}, {v, t}}};
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& [x, y] : shifts) {
        nearest = std::min(
            nearest, std::abs(geom.theta(zv + geom.q_vec(x) + geom.q_vec(y))));
      }
      if (nearest < 1e-6) continue;
      worst = std::max(worst, fay_residual_at(geom, zv, u, v, w, t));
      placed = true;
    }
    if (!placed) {
      fail(errc::geometry, "could not sample the Fay identity away from theta zeros");
    }
  }
  return worst;
}

CVector AbstractConfig::eta() const {
  CVector e = a;
  for (std::size_t i = 0; i < u.size(); ++i) e += s[i] * geom.q_vec(u[i]);
  return e;
}

ResolveContext AbstractConfig::context() const {
  ResolveContext ctx;
  ctx.points = u;
  return ctx;
}

cplx AbstractConfig::z_ref() const { return context().centroid() + 2.0; }

const ContourSpec& AbstractConfig::contour(const std::string& name) const {
  for (const auto& [key, spec] : contours) {
    if (key == name) return spec;
  }
  fail(errc::invalid_input, "unknown contour: " + name);
}

void AbstractConfig::validate(bool require_unit_sum) const {
  geom.validate();
  if (u.empty()) fail(errc::invalid_input, "needs at least one puncture");
  if (s.size() != u.size()) fail(errc::invalid_input, "needs one exponent per puncture");
  double sum = 0.0;
  for (double e : s) {
    if (!std::isfinite(e)) fail(errc::invalid_input, "non-finite exponent");
    sum += e;
  }
  if (require_unit_sum && std::abs(sum - 1.0) > 1e-12) {
    fail(errc::invalid_input, "exponents must sum to 1");
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i].real()) || !std::isfinite(u[i].imag())) {
      fail(errc::invalid_input, "non-finite puncture");
    }
    for (std::size_t j = i + 1; j < u.size(); ++j) {
      if (std::abs(u[i] - u[j]) < 1e-9) {
        fail(errc::invalid_input, "punctures must be pairwise distinct");
      }
    }
  }
  if (static_cast<int>(a.size()) != geom.g || static_cast<int>(b.size()) != geom.g) {
    fail(errc::invalid_input, "constant vector dimension must match the geometry");
  }
  for (const CVector* vec : {&a, &b}) {
    for (int k = 0; k < vec->size(); ++k) {
      const cplx c = (*vec)(k);
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
        fail(errc::invalid_input, "non-finite constant vector entry");
      }
    }
  }
  tol.validate();
  if (std::abs(geom.theta(eta())) < kZeroGuard) {
    fail(errc::invalid_input, "theta vanishes at eta");
  }
  for (std::size_t i = 0; i < contours.size(); ++i) {
    if (contours[i].first.empty()) fail(errc::invalid_input, "unnamed contour");
    contours[i].second.validate();
    for (std::size_t j = i + 1; j < contours.size(); ++j) {
      if (contours[i].first == contours[j].first) {
        fail(errc::invalid_input, "duplicate contour name: " + contours[i].first);
      }
    }
  }
}

std::vector<CMatrix> comp_system_matrices(const AbstractConfig& cfg,
                                          const std::vector<cplx>& z_samples) {
  cfg.validate(false);
  require_fay(cfg.geom);
  return assemble_system(cfg.geom, cfg.u, cfg.s, cfg.a, cfg.b, z_samples);
}

double zero_curvature_residual(const AbstractConfig& cfg, int i, int j,
                               double fd_step,
                               const std::vector<cplx>& z_samples) {
  cfg.validate(false);
  const int n = cfg.n();
  if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
    fail(errc::invalid_input, "needs two distinct puncture indices");
  }
  if (!(fd_step > 0.0)) fail(errc::invalid_input, "step must be positive");
  if (n <= 2 && z_samples.empty()) {
    fail(errc::invalid_input,
         "pair leaves no assessable rows; supply sample points");
  }
  require_fay(cfg.geom);

  const auto shifted = [&](int idx, double delta) {
    std::vector<cplx> u = cfg.u;
    u[static_cast<std::size_t>(idx)] += delta;
    return assemble_system(cfg.geom, u, cfg.s, cfg.a, cfg.b, z_samples);
  };
  const double hi = fd_step * std::max(1.0, std::abs(cfg.u[static_cast<std::size_t>(i)]));
  const double hj = fd_step * std::max(1.0, std::abs(cfg.u[static_cast<std::size_t>(j)]));
  const auto base = assemble_system(cfg.geom, cfg.u, cfg.s, cfg.a, cfg.b, z_samples);
  const auto jp = shifted(j, hj);
  const auto jm = shifted(j, -hj);
  const auto ip = shifted(i, hi);
  const auto im = shifted(i, -hi);

  const std::size_t ii = static_cast<std::size_t>(i);
  const std::size_t jj = static_cast<std::size_t>(j);
  const CMatrix dAi = (jp[ii] - jm[ii]) / (2.0 * hj);
  const CMatrix dAj = (ip[jj] - im[jj]) / (2.0 * hi);
  const CMatrix curv = dAi - dAj + base[ii] * base[jj] - base[jj] * base[ii];

  double worst = 0.0;
  for (int r = 0; r < curv.rows(); ++r) {
    if (r == i || r == j) continue;
    worst = std::max(worst, curv.row(r).cwiseAbs().maxCoeff());
  }
  return worst;
}

IntegralResult potential_tau(cplx z, const Contour& c, const AbstractConfig& cfg) {
  cfg.validate();
  if (!cfg.geom.tau_mode) {
    fail(errc::invalid_input, "potential needs a tau-mode geometry");
  }
  if (contour_distance(c, z) < 1e-6) {
    fail(errc::geometry, "spectral point sits on the contour");
  }
  const int K = cfg.geom.g;
  const CVector eta = cfg.eta();
  const cplx tau_eta = cfg.geom.theta(eta);

  BranchedWeight w;
  for (std::size_t i = 0; i < cfg.u.size(); ++i) {
    if (cfg.s[i] == 0.0) continue;
    w.factors.push_back(WeightFactor::linear(cfg.u[i], cfg.s[i]));
  }
  if (!cfg.b.isZero(0.0)) {
    const CVector b = cfg.b;
    w.omega = [b](cplx p) {
      cplx acc{};
      cplx pw = 1.0;
      for (int k = 0; k < b.size(); ++k) {
        pw *= p;
        acc += b(k) * pw / static_cast<double>(k + 1);
      }
      return acc;
    };
  }
  const WeightOnContour wic(w, c);
  const cplx log_wz = continued_log_weight(w, cfg.z_ref(), z);
  const CVector mz = miwa(z, K);
  return integrate(
      wic,
      [&](const ParamPoint& p) {
        const cplx kernel =
            cfg.geom.theta(eta + mz - miwa(p.t, K)) / ((z - p.t) * tau_eta);
        return kernel * std::exp(log_wz - wic.log_weight(p));
      },
      cfg.tol.quad_tol);
}

IntegralResult potential_tau(cplx z, const std::string& contour_name,
                             const AbstractConfig& cfg) {
  return potential_tau(z, resolve_contour(cfg.contour(contour_name), cfg.context()),
                       cfg);
}

}  // namespace whitlab
