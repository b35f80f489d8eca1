#pragma once

// Fiberings as families of sampled fiber shapes: center-of-mass labels,
// normal-graph correspondences, the straightening retraction and its
// iterative refinement, slopes on flat tori and core membership tests.

#include <Eigen/Core>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "fiberlab/fields.hpp"
#include "fiberlab/geometry.hpp"

namespace fiberlab::moduli {

using geometry::BasePoint;
using geometry::BaseVector;
using geometry::FibrationModel;
using geometry::TotalPoint;
using geometry::TotalVector;

/// A closed sampled curve; sample m-1 is followed by sample 0.
struct FiberShape {
  FibrationModel model = FibrationModel::hopf();
  std::vector<TotalPoint> samples;
};

struct Fibering {
  FibrationModel model = FibrationModel::hopf();
  /// Label of each fiber: its base node (model fiberings) or its center (after straightening).
  std::vector<BasePoint> base;
  std::vector<FiberShape> fibers;

  int nb() const { return static_cast<int>(fibers.size()); }
};

FiberShape model_fiber_shape(const FibrationModel& model, const BasePoint& x, int m);
/// Fiber i over base_grid(model, nb)[i], m samples each (same layout as a FieldGrid).
Fibering model_fibering(const FibrationModel& model, int nb, int m);

// ---------------------------------------------------------------------------
// Centers

enum class FiberMeasure {
  Arclength,  // normalized arclength of the sampled curve
  Intrinsic,  // pulled back from the model fiber through the normal graph
};

struct KarcherOptions {
  FiberMeasure measure = FiberMeasure::Arclength;
  double tol = 1e-12;
  int max_iter = 200;
  /// Outer tolerance for the intrinsic-measure iteration (center movement, base metric).
  double intrinsic_tol = 1e-11;
  int intrinsic_max_iter = 100;
};

/// Projection ball guards: 0.45 pi (unit-sphere angle) on S^2, 0.25 on flat bases.
double center_ball_guard(const FibrationModel& model);

/// Normalized arclength weights (trapezoid rule on the closed polygon).
std::vector<double> arclength_weights(const FiberShape& S);

/// Weighted Riemannian center of base points. Starts at the extrinsic mean (sphere) or
/// the min-image mean (tori), checks the ball guard, then iterates
/// x <- exp_x(sum w log_x(y)) until the step is below tol.
/// Errors: OutsideConvexBall, Nonconvergence.
BasePoint weighted_center(const FibrationModel& model, const std::vector<BasePoint>& ys,
                          const std::vector<double>& w, const KarcherOptions& opts = {});
/// As above, starting from a given point (the ball guard is checked around it).
BasePoint weighted_center_from(const FibrationModel& model, const std::vector<BasePoint>& ys,
                               const std::vector<double>& w, const BasePoint& start,
                               const KarcherOptions& opts = {});

BasePoint karcher_center(const FiberShape& S, const KarcherOptions& opts = {});

struct BruteCenter {
  BasePoint center;
  BasePoint origin;                 // ball center (initial guess of the iteration)
  std::vector<BaseVector> frame;    // orthonormal frame of normal coordinates at origin
  double radius = 0.0;              // ball radius in normal coordinates
  double cell = 0.0;                // grid spacing
  Eigen::Vector2d coords = Eigen::Vector2d::Zero();  // normal coordinates of the argmin
};

/// Grid argmin of P_S(x) = 1/2 sum w d(x, pi(a))^2 over the smallest ball around the
/// initial guess that contains pi(S), on a resolution x resolution grid in normal
/// coordinates (resolution nodes on one-dimensional bases). Ties go to the first index.
BruteCenter brute_center(const FiberShape& S, int resolution);

/// Normal coordinates of x in the frame of a BruteCenter.
Eigen::Vector2d normal_coordinates(const FibrationModel& model, const BruteCenter& b,
                                   const BasePoint& x);

// ---------------------------------------------------------------------------
// Normal graphs

struct NormalGraph {
  BasePoint x;
  std::vector<double> params;       // fiber_curve parameter of each image
  std::vector<TotalPoint> images;   // canonical points of E_x
  double max_distance = 0.0;        // largest sample-to-image distance
};

/// Tube radius guard for normal graphs: 0.25 on tori, pi/4 on sphere models.
double tube_guard(const FibrationModel& model);

/// Nearest-point projection of every sample onto the model fiber over x: coarse scan
/// along the fiber, golden-section refinement, Newton polish.
/// Errors: TubeRadiusExceeded; NonInjectiveProjection when the images do not wind
/// once monotonically around E_x.
NormalGraph normal_graph(const FiberShape& S, const BasePoint& x);

/// Weights of the samples pulled back from the uniform measure of E_x.
std::vector<double> intrinsic_weights(const FibrationModel& model, const NormalGraph& G);

// ---------------------------------------------------------------------------
// Straightening

struct StraightenOptions {
  FiberMeasure measure = FiberMeasure::Arclength;
  KarcherOptions karcher{};
};

struct FiberDiagnostics {
  BasePoint center;
  double residual = 0.0;  // largest distance from a sample of S to its model fiber
  int iterations = 0;     // intrinsic-measure iterations (0 for arclength)
};

struct StraightenReport {
  std::vector<FiberDiagnostics> fibers;
  double max_residual = 0.0;
  double min_center_separation = 0.0;  // base metric
  double collision_threshold = 0.0;
  bool injective = true;
};

/// Half the smallest base distance between nodes of base_grid(model, nb).
double collision_threshold(const FibrationModel& model, int nb);

/// Replaces each fiber by the model fiber over its center, with samples matched through
/// the normal graph. Errors: propagated; BaseCollision.
std::pair<Fibering, StraightenReport> straighten(const Fibering& F,
                                                 const StraightenOptions& opts = {});

struct RefineReport {
  std::vector<double> residuals;  // residual[n] = largest sample move of pass n+1
  bool converged = false;
  StraightenReport last;
};

/// Pass 1 is straighten with the arclength measure. Pass n > 1 recomputes every center
/// with the measure pulled back from the previous pass's model fiber, then rebuilds the
/// normal graphs. Stops once a residual drops below tol. Errors: DivergingResiduals when
/// the residual grows two passes in a row.
std::pair<Fibering, RefineReport> refine(const Fibering& F, int passes, double tol = 1e-10);

/// Largest distance between corresponding samples. GridMismatch on shape mismatch.
double sample_distance(const Fibering& a, const Fibering& b);

// ---------------------------------------------------------------------------
// Perturbation and symmetries

/// Smallest distance between samples of different fibers.
double min_interfiber_distance(const Fibering& F);

/// Moves sample (i, j) to adapted_exp(p, eps X(i, j)); X must share the fibering's
/// layout and be tangent at the samples. Errors: GridMismatch, NotTangent, DisjointnessLost.
Fibering perturb(const Fibering& F, const fields::FieldGrid& X, double eps);
/// Same with a field given as a function of the sample.
Fibering perturb(const Fibering& F, const std::function<TotalVector(const TotalPoint&)>& X,
                 double eps);

/// Pushes every sample through an isometry. Labels follow apply_base for automorphisms
/// and are reset to the projection of the first sample otherwise.
Fibering push(const Fibering& F, const geometry::ModelIsometry& h);

// ---------------------------------------------------------------------------
// Slopes and cores

struct Slope {
  std::vector<long> v;
  std::string str() const;
  bool operator==(const Slope&) const = default;
};

/// Lifted coordinates of a torus curve (min-image increments), plus the closing step.
std::vector<Eigen::Vector3d> lift_curve(const FiberShape& S, Eigen::Vector3d* closing = nullptr);

/// Winding vector of a closed torus curve, asserted primitive. Unless oriented, the
/// first nonzero entry is made positive. Errors: UnsupportedBase, UndersampledPath,
/// NonPrimitive.
Slope slope(const FiberShape& S, bool oriented = false);

struct CoreDescriptor {
  enum class Kind { Slope, SphereDirection, NotInCore };
  Kind kind = Kind::NotInCore;
  Slope slope;
  Eigen::Vector3d direction = Eigen::Vector3d::Zero();
  int chirality = 0;
  double residual = 0.0;
  std::string describe() const;
};

/// Tori: the common slope when every fiber is a straight closed geodesic of that slope.
/// Sphere models: the common direction u and chirality when every fiber is a coset
/// p exp(theta u) (chirality +) or exp(theta u) p (chirality -).
CoreDescriptor core_membership(const Fibering& F, double tol = 1e-8);

}  // namespace fiberlab::moduli
