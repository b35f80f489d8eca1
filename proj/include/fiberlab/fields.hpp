#pragma once

// Sampled vector fields on the total space of a model fibration.
//
// A FieldGrid lives on nb base nodes (geometry::base_grid) times nf fiber
// nodes; node (i, j) is fiber_point(base[i], j / nf). Vectors are stored in
// ambient components and must be tangent at their node.
//
// Taxonomy: vertical (kernel of d_project), projectable (d_project constant
// along each fiber), basic (horizontal lift of a base field), fair
// (horizontal with zero fiberwise mean of d_project).

#include <functional>
#include <optional>
#include <vector>

#include "fiberlab/geometry.hpp"

namespace fiberlab::fields {

using geometry::BasePoint;
using geometry::BaseVector;
using geometry::FibrationModel;
using geometry::TotalPoint;
using geometry::TotalVector;

class BaseFieldGrid {
 public:
  BaseFieldGrid(FibrationModel model, int nb);

  const FibrationModel& model() const { return model_; }
  int nb() const { return static_cast<int>(nodes_.size()); }
  const std::vector<BasePoint>& nodes() const { return nodes_; }
  const BaseVector& at(int i) const { return vectors_[i]; }
  /// Throws NotTangent when v is not tangent to the base at node i.
  void set(int i, const BaseVector& v);

 private:
  FibrationModel model_;
  std::vector<BasePoint> nodes_;
  std::vector<BaseVector> vectors_;
};

class FieldGrid {
 public:
  /// Zero field.
  FieldGrid(FibrationModel model, int nb, int nf);

  static FieldGrid from_function(
      FibrationModel model, int nb, int nf,
      const std::function<TotalVector(const TotalPoint&, int i, int j)>& f);

  const FibrationModel& model() const { return model_; }
  int nb() const { return nb_; }
  int nf() const { return nf_; }
  const std::vector<BasePoint>& base_nodes() const { return base_; }
  const TotalPoint& node(int i, int j) const { return nodes_[index(i, j)]; }
  const TotalVector& at(int i, int j) const { return vectors_[index(i, j)]; }
  /// Throws NotTangent.
  void set(int i, int j, const TotalVector& v);

  bool same_layout(const FieldGrid& o) const {
    return model_ == o.model_ && nb_ == o.nb_ && nf_ == o.nf_;
  }

  /// Base-node quadrature weight times fiber-node weight (uniform).
  double cell_weight() const;

  FieldGrid operator+(const FieldGrid& o) const;
  FieldGrid operator-(const FieldGrid& o) const;
  FieldGrid operator*(double s) const;

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * nf_ + j; }

  FibrationModel model_;
  int nb_, nf_;
  std::vector<BasePoint> base_;
  std::vector<TotalPoint> nodes_;
  std::vector<TotalVector> vectors_;
};

inline FieldGrid operator*(double s, const FieldGrid& X) { return X * s; }

struct Projectability {
  bool projectable = false;
  /// Largest base-metric deviation of d_project(X) from its fiber mean.
  double spread = 0.0;
  std::optional<BaseFieldGrid> projection;
};

Projectability is_projectable(const FieldGrid& X, double tol);

/// Fiber mean of d_project(X) (uniform quadrature on the periodic fiber grid).
BaseFieldGrid horizontal_center(const FieldGrid& X);
/// Node-wise horizontal lift; nf fiber samples per base node.
FieldGrid horizontal_lift_field(const BaseFieldGrid& Y, int nf);
FieldGrid vertical_part(const FieldGrid& X);
FieldGrid horizontal_part(const FieldGrid& X);
/// r'(X) = X_vert + lift(center(X)).
FieldGrid horizontal_average(const FieldGrid& X);
/// X - r'(X).
FieldGrid fair_part(const FieldGrid& X);

/// Quadrature of the pointwise metric inner product over fiber then base. GridMismatch.
double l2_inner(const FieldGrid& X, const FieldGrid& Y);
double l2_norm(const FieldGrid& X);

/// Max pointwise norm.
double sup_norm(const FieldGrid& X);
double sup_norm(const BaseFieldGrid& Y);

/// Lie bracket [X, Y] = DY.X - DX.Y on FlatT2 with second-order central differences
/// on the periodic node lattice. Throws UnsupportedBase for other models.
FieldGrid lie_bracket_flat_t2(const FieldGrid& X, const FieldGrid& Y);

}  // namespace fiberlab::fields
