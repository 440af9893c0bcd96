#pragma once

#include <array>
#include <string>
#include <vector>

#include "whitlab/numerics.hpp"

namespace whitlab {

// Coefficient form of m first-order equations
//   sum_l ( a_rl du_l/dt_i + b_rl du_l/dt_j + c_rl du_l/dt_k ) = 0
// over `fields` dependent variables, relative to the span functions named in
// `basis`.  `times` holds the contour names standing in for t_i, t_j, t_k.
struct HydroSystem {
  int fields = 0;
  int rows = 0;
  std::array<std::string, 3> times;
  CMatrix a, b, c;  // rows x fields
  std::vector<std::string> basis;
  double fit_residual = 0.0;

  void validate() const;
};

// One admissible rate triple: p = du/dt_j and q = du/dt_k are random draws,
// x = du/dt_i solves the rows.  Throws a degenerate-configuration error when
// the leading matrix is rank-deficient or the overdetermined solve is
// inconsistent.
struct ConsistencyDraw {
  CVector x, p, q;
};

ConsistencyDraw draw_consistent_rates(const HydroSystem& sys, Rng& rng);

}  // namespace whitlab
