#include "whitlab/hydro.hpp"

#include "whitlab/error.hpp"

namespace whitlab {

void HydroSystem::validate() const {
  if (fields < 1 || rows < 1) fail(errc::invalid_input, "empty hydro system");
  const auto shape_ok = [&](const CMatrix& m) {
    return m.rows() == rows && m.cols() == fields;
  };
  if (!shape_ok(a) || !shape_ok(b) || !shape_ok(c)) {
    fail(errc::invalid_input, "hydro coefficient matrix shape mismatch");
  }
  for (const std::string& t : times) {
    if (t.empty()) fail(errc::invalid_input, "hydro system has an unnamed time");
  }
  if (static_cast<int>(basis.size()) != rows) {
    fail(errc::invalid_input, "hydro basis description size mismatch");
  }
}

ConsistencyDraw draw_consistent_rates(const HydroSystem& sys, Rng& rng) {
  sys.validate();
  ConsistencyDraw d;
  d.p = CVector(sys.fields);
  d.q = CVector(sys.fields);
  for (int l = 0; l < sys.fields; ++l) d.p[l] = rng.box(1.0);
  for (int l = 0; l < sys.fields; ++l) d.q[l] = rng.box(1.0);

  if (numerical_rank(sys.a, 1e-10) < std::min(sys.rows, sys.fields)) {
    fail(errc::degenerate, "rank-deficient leading matrix in hydro solve");
  }
  const CVector rhs = -(sys.b * d.p + sys.c * d.q);
  d.x = sys.a.colPivHouseholderQr().solve(rhs);
  const double mismatch = (sys.a * d.x - rhs).norm();
  if (mismatch > 1e-8 * (rhs.norm() + 1.0)) {
    fail(errc::degenerate, "inconsistent overdetermined hydro solve");
  }
  return d;
}

}  // namespace whitlab
