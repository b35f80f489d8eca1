#pragma once

// Curve-shortening flow on the flat torus R^2 / Z^2, for single closed curves and
// for whole fiberings of flat-t2. Explicit Euler on the discrete curvature vector,
// with uniform-arclength resampling.

#include <Eigen/Core>
#include <array>
#include <vector>

#include "fiberlab/moduli.hpp"

namespace fiberlab::csf {

using Vec2 = Eigen::Vector2d;

/// Closed polygon on the torus, stored lifted to the plane: point m (the successor of
/// point m-1) is point 0 + winding.
class CurveState {
 public:
  CurveState() = default;
  /// Errors: InvalidInput (fewer than 4 points, non-finite coordinates).
  CurveState(std::vector<Vec2> lifted, Eigen::Vector2i winding);

  /// Lifts a flat-t2 fiber shape by min-image increments.
  static CurveState from_shape(const moduli::FiberShape& S);
  /// Samples wrapped into [0,1)^2.
  moduli::FiberShape to_shape() const;

  int size() const { return static_cast<int>(pts_.size()); }
  const std::vector<Vec2>& points() const { return pts_; }
  const Eigen::Vector2i& winding() const { return winding_; }
  /// Point with cyclic index, i in [-m, 2m).
  Vec2 at(int i) const;

  std::vector<double> spacings() const;
  double length() const;
  double min_spacing() const;
  double spacing_ratio() const;

 private:
  std::vector<Vec2> pts_;
  Eigen::Vector2i winding_ = Eigen::Vector2i::Zero();
};

struct FlowParams {
  double cfl = 0.2;           // dt = cfl * min spacing^2, cfl in (0, 0.5]
  double kappa_tol = 1e-3;    // stop once max |kappa| drops below this
  double t_max = 1.0;         // TimeBudgetExceeded beyond this
  int resample_period = 1000; // steps between forced resamples
  double resample_ratio = 2.0;
  int trace_stride = 100;     // steps between trace rows
  int grid = 16;              // cells per side for the distance and crossing hashes
};

/// Geodesic of the given winding through `offset`, m points at equal parameter.
CurveState line(const Eigen::Vector2i& slope, int m, const Vec2& offset = Vec2::Zero());
/// Line displaced along its unit normal by amp * sin(2 pi mode u + phase), u in [0, 1).
CurveState perturbed_line(const Eigen::Vector2i& slope, int m, const Vec2& offset, double amp,
                          double phase, int mode = 1);
/// Counterclockwise circle (contractible).
CurveState circle(const Vec2& center, double radius, int m);

/// Signed curvature from the circle through three consecutive samples.
/// Errors: DegenerateSpacing.
std::vector<double> curvature(const CurveState& C);
double max_abs_curvature(const CurveState& C);

/// Largest stable step, cfl * min spacing^2. Errors: CFLViolation if cfl is outside (0, 0.5].
double stable_dt(const CurveState& C, double cfl);

/// One explicit Euler step p += dt * (second arclength derivative). No resampling.
/// Errors: CFLViolation when dt exceeds 0.5 min spacing^2; DegenerateSpacing.
CurveState csf_step(const CurveState& C, double dt);

/// Piecewise-linear resampling to m points at equal arclength, keeping point 0.
CurveState resample_uniform(const CurveState& C);

/// True when two non-adjacent segments cross (sample resolution).
bool self_intersects(const CurveState& C, int grid = 16);
/// True when segments of two different curves cross.
bool curves_cross(const std::vector<CurveState>& curves, int grid = 16);

/// Smallest torus distance between samples of different curves. With a single curve,
/// samples at least m/8 apart along the curve are compared instead. Exact when the
/// result is below 1/grid; otherwise 1/grid is returned as a lower bound.
double min_pair_distance(const std::vector<CurveState>& curves, int grid = 16);

struct TraceRow {
  double t = 0.0;
  double length = 0.0;  // total over all curves
  double max_kappa = 0.0;
  double min_pair_dist = 0.0;
};

struct FlowResult {
  std::vector<CurveState> curves;
  std::vector<TraceRow> trace;
  double t = 0.0;
  long steps = 0;
  long resamples = 0;
  double max_kappa = 0.0;
  double min_pair_dist = 0.0;  // smallest certified value over the run
  long min_pair_step = 0;
};

/// Flows until max |kappa| < kappa_tol. Errors: propagated; SelfIntersection;
/// TimeBudgetExceeded past t_max.
FlowResult flow_until(const CurveState& C, const FlowParams& params);
/// Flows to exactly time t (the last step is shortened), ignoring kappa_tol.
FlowResult flow_for(const CurveState& C, double t, const FlowParams& params);

/// Evolves all curves with a shared dt (minimum over curves). The smallest inter-curve
/// sample distance is certified at every step by a lower bound refreshed from exact
/// recomputation. Errors: DisjointnessLost (with step index), SelfIntersection,
/// TimeBudgetExceeded, propagated.
FlowResult flow_curves(const std::vector<CurveState>& curves, const FlowParams& params);
/// Same on a flat-t2 fibering. Errors: UnsupportedBase for other models.
std::pair<moduli::Fibering, FlowResult> flow_fibering(const moduli::Fibering& F,
                                                      const FlowParams& params);

/// n parallel geodesics of the given slope, evenly spaced across the torus.
std::vector<CurveState> linear_curves(const Eigen::Vector2i& slope, int n, int m);
/// Phases phase0 + 2 pi (k . s) i / n for fiber i, where k . slope = 1 and s is the offset
/// step between fibers. Displacing by amp * sin(2 pi u + phase) then samples one smooth
/// function on the torus, so adjacent fibers (including the wrap from n-1 to 0) stay in step.
std::vector<double> coherent_phases(const Eigen::Vector2i& slope, int n, double phase0);
/// phases.size() parallel geodesics as above, fiber i displaced by amp * sin(2 pi u + phases[i]).
std::vector<CurveState> perturbed_linear_curves(const Eigen::Vector2i& slope, int m, double amp,
                                                const std::vector<double>& phases);

/// Flat-t2 fibering from curves; labels are the projections of the first samples.
moduli::Fibering to_fibering(const std::vector<CurveState>& curves);

}  // namespace fiberlab::csf
