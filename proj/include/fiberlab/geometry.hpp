#pragma once

// Closed-form Riemannian fibration models:
//
//   FlatT2   T^2 -> S^1,  (x, y)    -> x         flat product metric
//   FlatT3   T^3 -> T^2,  (x, y, z) -> (x, y)    flat product metric
//   Hopf     S^3 -> S^2,  q -> q i q^-1          round unit S^3
//   Lens(e)  L(e,1) = S^3 / <exp(2 pi i / e)> -> S^2, same projection
//
// Conventions:
//  * Points are stored in fixed-size ambient coordinates: tori use the first
//    2 or 3 entries (reduced mod 1), sphere models use a unit quaternion
//    [w, i, j, k]. Lens points are canonical representatives of their deck orbit.
//  * The fiber through q is the coset q * exp(i theta); the vertical unit
//    vector at q is q * i. The deck group of Lens(e) acts by right
//    multiplication with exp(2 pi i k / e), so it preserves fibers.
//  * Base points of the sphere models are unit vectors of R^3, and base tangent
//    vectors are written in the ambient coordinates of the unit sphere. The
//    base metric is the round sphere of radius 1/2 (so the projection is a
//    Riemannian submersion): |v|_B = |v| / 2. Geodesic formulas and the
//    injectivity guards are stated in unit-sphere angles.

#include <Eigen/Core>
#include <string>
#include <string_view>
#include <vector>

#include "fiberlab/quaternion.hpp"

namespace fiberlab::geometry {

enum class ModelKind { FlatT2, FlatT3, Hopf, Lens };

class FibrationModel {
 public:
  static FibrationModel flat_t2() { return FibrationModel(ModelKind::FlatT2, 0); }
  static FibrationModel flat_t3() { return FibrationModel(ModelKind::FlatT3, 0); }
  static FibrationModel hopf() { return FibrationModel(ModelKind::Hopf, 1); }
  /// e >= 2; Lens(1) is the Hopf model.
  static FibrationModel lens(int e);
  /// Ids: "flat-t2", "flat-t3", "hopf", "lens-<e>" (also "lens<e>", "lens:<e>").
  static FibrationModel parse(std::string_view id);

  std::string id() const;
  ModelKind kind() const { return kind_; }
  /// Euler number of the model bundle (0 for the flat products).
  int euler() const { return e_; }
  bool spherical() const { return kind_ == ModelKind::Hopf || kind_ == ModelKind::Lens; }
  /// Order of the deck group acting on the S^3 lift (1 unless Lens).
  int deck_order() const { return kind_ == ModelKind::Lens ? e_ : 1; }

  int total_coords() const;
  int base_coords() const;
  /// Intrinsic dimension of the base.
  int base_dim() const;
  double fiber_length() const;
  double base_volume() const;

  bool operator==(const FibrationModel&) const = default;

 private:
  FibrationModel(ModelKind k, int e) : kind_(k), e_(e) {}
  ModelKind kind_;
  int e_;
};

struct TotalPoint {
  Eigen::Vector4d c = Eigen::Vector4d::Zero();
};

struct BasePoint {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
};

using TotalVector = Eigen::Vector4d;
using BaseVector = Eigen::Vector3d;

/// A tangent vector with its orthogonal vertical/horizontal split.
struct TangentTotal {
  TotalPoint p;
  TotalVector w = TotalVector::Zero();
  TotalVector vert = TotalVector::Zero();
  TotalVector horiz = TotalVector::Zero();
};

/// Transport and adapted exponential refuse base displacements at or beyond this angle.
inline constexpr double kSphereInjectivityGuard = 0.9 * 3.14159265358979323846;
inline constexpr double kTangentTol = 1e-10;

Quat as_quat(const TotalPoint& p);
TotalPoint from_quat(const Quat& q);

TotalPoint make_point(const FibrationModel& model, const Eigen::VectorXd& coords);
BasePoint make_base_point(const FibrationModel& model, const Eigen::VectorXd& coords);

TotalPoint canonicalize(const FibrationModel& model, const TotalPoint& p);
BasePoint canonicalize(const FibrationModel& model, const BasePoint& x);

BasePoint project(const FibrationModel& model, const TotalPoint& p);
/// Differential of the projection at p applied to w.
BaseVector d_project(const FibrationModel& model, const TotalPoint& p, const TotalVector& w);
TotalVector vertical_unit(const FibrationModel& model, const TotalPoint& p);

bool is_tangent(const FibrationModel& model, const TotalPoint& p, const TotalVector& w,
                double tol = kTangentTol);
/// Throws NotTangent when w is not tangent at p.
TangentTotal split_tangent(const FibrationModel& model, const TotalPoint& p, const TotalVector& w);

double total_inner(const FibrationModel& model, const TotalVector& a, const TotalVector& b);
double total_norm(const FibrationModel& model, const TotalVector& a);
double base_inner(const FibrationModel& model, const BaseVector& a, const BaseVector& b);
double base_norm(const FibrationModel& model, const BaseVector& a);

/// Riemannian distance in the total space (minimum over deck images for Lens).
double total_distance(const FibrationModel& model, const TotalPoint& p, const TotalPoint& q);
/// Riemannian distance in the base metric.
double base_distance(const FibrationModel& model, const BasePoint& x, const BasePoint& y);
/// Flat: distance; sphere models: unit-sphere angle (twice the base distance).
double base_angle(const FibrationModel& model, const BasePoint& x, const BasePoint& y);

/// exp_x(t v). Sphere models throw BeyondInjectivityRadius when |v| t >= pi.
BasePoint base_geodesic(const FibrationModel& model, const BasePoint& x, const BaseVector& v,
                        double t);
/// Minimal v with base_geodesic(x, v, 1) = y (min-image for tori).
BaseVector base_log(const FibrationModel& model, const BasePoint& x, const BasePoint& y);
/// Removes the component of v normal to the base at x (sphere models only).
BaseVector base_tangent_project(const FibrationModel& model, const BasePoint& x,
                                const BaseVector& v);
/// Orthonormal frame of T_x B in ambient coordinates (unit Euclidean length).
std::vector<BaseVector> base_tangent_basis(const FibrationModel& model, const BasePoint& x);
/// Orthonormal frame of T_p E.
std::vector<TotalVector> tangent_basis(const FibrationModel& model, const TotalPoint& p);

/// Horizontal lift of a base tangent vector v at project(p). Throws BaseMismatch
/// when v is not tangent to the base at project(p).
TangentTotal horizontal_lift_vec(const FibrationModel& model, const TotalPoint& p,
                                 const BaseVector& v);

/// Unit-speed fiber geodesic: moves p a distance a along its fiber.
TotalPoint fiber_geodesic(const FibrationModel& model, const TotalPoint& p, double a);

struct TransportOptions {
  int initial_steps = 64;
  double projection_tol = 1e-9;
  double richardson_tol = 1e-12;
  int max_steps = 1 << 16;
};

struct TransportResult {
  TotalPoint point;
  int steps = 0;
  double projection_error = 0.0;
};

/// Endpoint of the horizontal lift through q of the minimizing base geodesic
/// from project(q) to x_target. Flat models use the closed form; sphere models
/// integrate with RK4, doubling the step count until successive endpoints agree.
TransportResult horizontal_transport_ex(const FibrationModel& model, const TotalPoint& q,
                                        const BasePoint& x_target,
                                        const TransportOptions& opts = {});
TotalPoint horizontal_transport(const FibrationModel& model, const TotalPoint& q,
                                const BasePoint& x_target);

/// exp_xi(w): fiber geodesic with the vertical part of w, then horizontal
/// transport along the base geodesic with initial velocity d_project(w).
TotalPoint adapted_exp(const FibrationModel& model, const TotalPoint& p, const TotalVector& w);

/// A fixed point of the fiber over x (the parameter origin of model fibers).
TotalPoint section(const FibrationModel& model, const BasePoint& x);
/// Point of the fiber over x at parameter s (turns; period 1 covers the fiber once).
TotalPoint fiber_point(const FibrationModel& model, const BasePoint& x, double s);
/// Lifted fiber curve used for nearest-point searches: for the sphere models this is
/// the full S^3 great circle section(x) exp(2 pi i s), s in [0, 1), which meets every
/// deck image; for tori it is the unwrapped line.
TotalVector fiber_curve(const FibrationModel& model, const BasePoint& x, double s);
/// d/ds of fiber_curve.
TotalVector fiber_curve_tangent(const FibrationModel& model, const BasePoint& x, double s);
/// Number of fiber_curve periods (in s) that cover the model fiber once: 1 for tori,
/// 1/e of the great circle for Lens(e).
double fiber_curve_period(const FibrationModel& model);
/// Ambient difference p - c used for chord distances (min-image on tori).
TotalVector chord(const FibrationModel& model, const TotalVector& p, const TotalVector& c);

/// m equally spaced samples of the model fiber over x.
std::vector<TotalPoint> model_fiber(const FibrationModel& model, const BasePoint& x, int m);

/// Base sample grid: uniform on S^1, a sqrt(nb) x sqrt(nb) lattice on T^2
/// (nb must be a perfect square), a Fibonacci lattice on S^2.
std::vector<BasePoint> base_grid(const FibrationModel& model, int nb);

/// Isometries of the model. Sphere models: p -> left * p^eps * right^-1, an
/// automorphism of the fibration when eps = +1 and right is a unit complex
/// number. Tori: p -> sign * p + shift (every such map is an automorphism).
struct ModelIsometry {
  Quat left{};
  Quat right{};
  int eps = 1;
  int sign = 1;
  Eigen::Vector3d shift = Eigen::Vector3d::Zero();
};

bool is_automorphism(const FibrationModel& model, const ModelIsometry& iso);
TotalPoint apply(const FibrationModel& model, const ModelIsometry& iso, const TotalPoint& p);
/// Induced base map; only meaningful for automorphisms.
BasePoint apply_base(const FibrationModel& model, const ModelIsometry& iso, const BasePoint& x);

}  // namespace fiberlab::geometry
