#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "whitlab/numerics.hpp"
#include "whitlab/theta.hpp"

namespace whitlab {

struct PathSegment {
  enum class Kind { line, arc };
  Kind kind = Kind::line;
  cplx a, b;  // line endpoints
  cplx center;
  double radius = 0.0, ang0 = 0.0, ang1 = 0.0;  // arc, ccw when ang1 > ang0

  static PathSegment line(cplx a, cplx b);
  static PathSegment arc(cplx center, double radius, double ang0, double ang1);

  cplx point(double s) const;     // s in [0, 1]
  cplx velocity(double s) const;  // d point / d s
  cplx start() const { return point(0.0); }
  cplx end() const { return point(1.0); }
  double length_estimate() const;
};

struct Contour {
  std::vector<PathSegment> segments;

  static Contour line(cplx a, cplx b);
  static Contour loop(cplx center, double radius);  // one ccw circle
  static Contour polyline(const std::vector<cplx>& pts);

  cplx start() const;
  cplx end() const;
  bool closed(double tol = 1e-9) const;
  void validate() const;  // connectivity and nondegeneracy
};

Contour reversed(const Contour& c);
double contour_distance(const Contour& c, cplx z);

struct WeightFactor {
  enum class Kind { linear, theta_fn };
  Kind kind = Kind::linear;
  cplx p;         // zero at p (theta_fn: zeros on p + lattice)
  double s = 0.0; // exponent

  static WeightFactor linear(cplx p, double s);
  static WeightFactor theta_fn(cplx p, double s);
};

// W(t) = exp(exp_coeff * t + omega(t)) * prod_f base_f(t)^{s_f}, with base
// either (t - p) or theta(t - p).  omega must be single-valued where the
// weight is evaluated; it carries no branch data.
struct BranchedWeight {
  std::vector<WeightFactor> factors;
  cplx exp_coeff{0.0};
  std::function<cplx(cplx)> omega;
  std::optional<LatticeParam> lat;

  void validate() const;
};

struct ParamPoint {
  int segment = 0;
  double s = 0.0;     // parameter in [0, 1] on that segment
  double dist0 = 0.0; // parameter offset from segment start, exact when tiny
  double dist1 = 0.0; // parameter offset from segment end, exact when tiny
  cplx t;
};

// A weight pinned to a single branch along a contour.  Factor logs are
// anchored to principal values at the contour start (factors vanishing there
// anchor the principal log of their linearisation along the outgoing
// direction) and continued node-to-node along the path.  Endpoints sitting on
// a factor zero are detected and handled through the stable parameter
// offsets, so integrands stay finite-precision all the way into the endpoint.
class WeightOnContour {
 public:
  WeightOnContour(BranchedWeight weight, Contour contour);

  const Contour& contour() const { return contour_; }
  const BranchedWeight& weight_spec() const { return weight_; }

  bool singular_start() const { return sing_start_; }
  bool singular_end() const { return sing_end_; }

  ParamPoint at(int segment, double s) const;

  // Continuous log of the factor base (exponent not applied).
  cplx log_factor(const ParamPoint& p, std::size_t factor) const;
  cplx log_weight(const ParamPoint& p) const;
  cplx weight(const ParamPoint& p) const { return std::exp(log_weight(p)); }

  // exp(log W at end - log W at start); meaningful for closed contours.
  cplx monodromy_factor() const;

 private:
  struct FactorSeg {
    bool sing_start = false, sing_end = false;
    cplx lat_start, lat_end;  // lattice translate at the flagged endpoint
    std::vector<double> node_s;
    std::vector<cplx> node_v;
    std::vector<cplx> node_log;
  };

  cplx factor_value(std::size_t f, cplx t) const;
  cplx ratio_near(std::size_t f, const PathSegment& seg, const FactorSeg& fs,
                  bool at_start, double u) const;
  void build_segment_table(int seg_index, std::size_t f, cplx* carry_log);

  BranchedWeight weight_;
  Contour contour_;
  std::vector<std::vector<FactorSeg>> tables_;  // [segment][factor]
  bool sing_start_ = false, sing_end_ = false;
};

struct IntegralResult {
  cplx value{0.0};
  double err = 0.0;
  long evals = 0;
};

// Integral of f(t) dt along the weighted contour.  f receives the stable
// parametrisation record; segments whose flagged endpoints carry weight zeros
// (or that callers mark through the weight) use a double-exponential rule,
// the rest use an adaptive Gauss rule.  Throws convergence_error (carrying
// the best estimate) when the tolerance is out of reach.
IntegralResult integrate(const WeightOnContour& w,
                         const std::function<cplx(const ParamPoint&)>& f,
                         double abs_tol);

// Plain contour integral of f(t) dt, no endpoint singularities.
IntegralResult integrate(const Contour& c,
                         const std::function<cplx(cplx)>& f, double abs_tol);

// log W continued from `from` (principal anchor there) to `to` along the
// straight segment; the branch is consistent for all `to` reachable without
// the segment meeting a factor zero.
cplx continued_log_weight(const BranchedWeight& w, cplx from, cplx to);

// Symbolic contour descriptors.  Anchors name a reference point (puncture
// table entry or their centroid) plus an offset, so a contour re-resolves
// consistently after the reference points move.
struct Anchor {
  enum class Kind { fixed, ref, centroid };
  Kind kind = Kind::fixed;
  cplx value{};      // fixed base
  int ref = -1;      // index into ResolveContext::points
  cplx offset{};
  int tau_mult = 0;  // adds tau_mult * ctx.tau to the offset

  static Anchor fixed(cplx v);
  static Anchor ref_point(int index, cplx offset = cplx{}, int tau_mult = 0);
  static Anchor centroid_point(cplx offset = cplx{}, int tau_mult = 0);
};

struct ResolveContext {
  std::vector<cplx> points;
  cplx tau{};

  cplx centroid() const;
};

struct ContourSpec {
  enum class Kind { segment, polyline, circle };
  Kind kind = Kind::segment;
  std::vector<Anchor> anchors;  // segment: 2, polyline: >= 2, circle: center
  double radius = 0.0;
  bool positive = true;

  static ContourSpec segment(Anchor from, Anchor to);
  static ContourSpec polyline(std::vector<Anchor> pts);
  static ContourSpec circle(Anchor center, double radius, bool positive = true);
  void validate() const;
};

cplx resolve_anchor(const Anchor& a, const ResolveContext& ctx);
Contour resolve_contour(const ContourSpec& spec, const ResolveContext& ctx);

}  // namespace whitlab
