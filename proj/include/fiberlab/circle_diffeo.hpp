#pragma once

// Orientation-preserving circle diffeomorphisms, represented by the periodic
// displacement u(x) = f(x) - x of their lift to the real line, and the
// spectral heat-flow deformation retraction of that group onto rotations.
//
// Circle coordinates are in turns: the circle is R/Z, angles live in [0, 1).

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fiberlab::circle {

/// Reduces x modulo 1 into [0, 1).
double wrap01(double x);

/// Signed minimal increment b - a modulo 1, in [-1/2, 1/2).
double signed_increment(double a, double b);

/// Circle distance min(|a-b|, 1-|a-b|) of the residues of a and b.
double circle_distance(double a, double b);

/// A point of the circle R/Z. Stored value is always in [0, 1).
class Angle {
 public:
  Angle() = default;
  explicit Angle(double v) : value_(wrap01(v)) {}

  double value() const { return value_; }
  Angle operator+(Angle o) const { return Angle(value_ + o.value_); }
  Angle operator-(Angle o) const { return Angle(value_ - o.value_); }
  Angle operator-() const { return Angle(-value_); }

 private:
  double value_ = 0.0;
};

inline double distance(Angle a, Angle b) { return circle_distance(a.value(), b.value()); }

/// n samples of a 1-periodic function at x_k = k/n; n is a power of two >= 16.
class PeriodicSamples {
 public:
  explicit PeriodicSamples(std::vector<double> values);

  static PeriodicSamples from_function(std::size_t n, const std::function<double(double)>& f);
  static PeriodicSamples constant(std::size_t n, double c);

  std::size_t size() const { return values_.size(); }
  double node(std::size_t k) const { return static_cast<double>(k) / static_cast<double>(size()); }
  double operator[](std::size_t k) const { return values_[k]; }
  std::span<const double> values() const { return values_; }

  /// Grid quadrature of the mean (exact for trigonometric polynomials of degree < n).
  double mean() const;
  /// Discrete derivative at the nodes, computed spectrally (Nyquist mode dropped).
  std::vector<double> derivative() const;
  double min_derivative() const;
  /// Half the peak-to-peak range.
  double amplitude() const;

 private:
  std::vector<double> values_;
};

/// Periodic C2 cubic spline through the samples. Evaluation is translation
/// equivariant on the grid, so sampled shifts commute with Fourier multipliers.
class PeriodicSpline {
 public:
  explicit PeriodicSpline(const PeriodicSamples& samples);

  double operator()(double x) const;
  double derivative(double x) const;

 private:
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the nodes
  double h_;
};

class CircleDiffeo {
 public:
  /// Throws OrientationViolation if the discrete derivative of disp is <= -1 somewhere.
  explicit CircleDiffeo(PeriodicSamples disp);

  static CircleDiffeo identity(std::size_t n);
  static CircleDiffeo rotation(std::size_t n, Angle theta);

  const PeriodicSamples& disp() const { return disp_; }
  std::size_t grid_size() const { return disp_.size(); }

  /// Lift to R: x + u(x), with u evaluated by periodic cubic interpolation.
  double eval(double x) const { return x + spline_(x); }
  double eval_derivative(double x) const { return 1.0 + spline_.derivative(x); }

 private:
  PeriodicSamples disp_;
  PeriodicSpline spline_;
};

/// Oscillation guard for compose and invert; beyond it cubic resampling is not trusted.
inline constexpr double kAmplitudeGuard = 0.4;

/// (f o g) sampled at the grid nodes.
CircleDiffeo compose(const CircleDiffeo& f, const CircleDiffeo& g);

/// Inverse by safeguarded Newton root-finding of f(x) = y at each node.
CircleDiffeo invert(const CircleDiffeo& f);

/// Exact spectral heat flow for time s: mode k is damped by exp(-4 pi^2 k^2 s).
PeriodicSamples heat_step(const PeriodicSamples& u, double s);

/// Heat time used by retract: s(t) = t / (1 - t) on [0, 1).
double heat_time(double t);

/// Deformation retraction H_t of Diff+(S^1) onto the rotations. H_0 = f,
/// H_1 = rotation by the grid mean of the displacement.
CircleDiffeo retract(const CircleDiffeo& f, double t);

/// Sup over nodes of the circle distance between the two displacements.
double sup_distance(const CircleDiffeo& f, const CircleDiffeo& g);

/// Winding number of a sampled path of angles (the path is not closed
/// implicitly). Throws UndersampledPath when a step is ambiguous (|increment|
/// >= max_gap) or when the total is farther than 0.25 from an integer.
long winding_number(std::span<const double> path, double max_gap = 0.25);

}  // namespace fiberlab::circle
