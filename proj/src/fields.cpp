#include "fiberlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fiberlab/error.hpp"

namespace fiberlab::fields {

namespace g = fiberlab::geometry;

BaseFieldGrid::BaseFieldGrid(FibrationModel model, int nb)
    : model_(model), nodes_(g::base_grid(model, nb)), vectors_(nb, BaseVector::Zero()) {}

void BaseFieldGrid::set(int i, const BaseVector& v) {
  const BaseVector t = g::base_tangent_project(model_, nodes_[i], v);
  if (!v.allFinite() || (v - t).norm() > g::kTangentTol * std::max(1.0, v.norm())) {
    throw Error(ErrorCode::NotTangent, "base vector not tangent at node " + std::to_string(i));
  }
  vectors_[i] = v;
}

// ---------------------------------------------------------------------------

FieldGrid::FieldGrid(FibrationModel model, int nb, int nf)
    : model_(model), nb_(nb), nf_(nf), base_(g::base_grid(model, nb)) {
  if (nf < 2) throw Error(ErrorCode::BadConfig, "field grid needs nf >= 2");
  nodes_.reserve(static_cast<std::size_t>(nb) * nf);
  for (int i = 0; i < nb; ++i) {
    for (int j = 0; j < nf; ++j) {
      nodes_.push_back(g::fiber_point(model, base_[i], static_cast<double>(j) / nf));
    }
  }
  vectors_.assign(nodes_.size(), TotalVector::Zero());
}

FieldGrid FieldGrid::from_function(
    FibrationModel model, int nb, int nf,
    const std::function<TotalVector(const TotalPoint&, int, int)>& f) {
  FieldGrid X(model, nb, nf);
  for (int i = 0; i < nb; ++i) {
    for (int j = 0; j < nf; ++j) X.set(i, j, f(X.node(i, j), i, j));
  }
  return X;
}

void FieldGrid::set(int i, int j, const TotalVector& v) {
  if (!g::is_tangent(model_, node(i, j), v)) {
    throw Error(ErrorCode::NotTangent, "field vector not tangent at node (" + std::to_string(i) +
                                           ", " + std::to_string(j) + ")");
  }
  vectors_[index(i, j)] = v;
}

double FieldGrid::cell_weight() const {
  return model_.base_volume() / nb_ * model_.fiber_length() / nf_;
}

FieldGrid FieldGrid::operator+(const FieldGrid& o) const {
  if (!same_layout(o)) throw Error(ErrorCode::GridMismatch, "field layouts differ");
  FieldGrid r = *this;
  for (std::size_t k = 0; k < r.vectors_.size(); ++k) r.vectors_[k] += o.vectors_[k];
  return r;
}

FieldGrid FieldGrid::operator-(const FieldGrid& o) const { return *this + o * -1.0; }

FieldGrid FieldGrid::operator*(double s) const {
  FieldGrid r = *this;
  for (auto& v : r.vectors_) v *= s;
  return r;
}

// ---------------------------------------------------------------------------

BaseFieldGrid horizontal_center(const FieldGrid& X) {
  BaseFieldGrid Y(X.model(), X.nb());
  for (int i = 0; i < X.nb(); ++i) {
    BaseVector acc = BaseVector::Zero();
    for (int j = 0; j < X.nf(); ++j) acc += g::d_project(X.model(), X.node(i, j), X.at(i, j));
    acc /= X.nf();
    // Strip rounding-level normal drift before the tangency check.
    Y.set(i, g::base_tangent_project(X.model(), Y.nodes()[i], acc));
  }
  return Y;
}

Projectability is_projectable(const FieldGrid& X, double tol) {
  Projectability r;
  BaseFieldGrid Y = horizontal_center(X);
  for (int i = 0; i < X.nb(); ++i) {
    for (int j = 0; j < X.nf(); ++j) {
      const BaseVector d = g::d_project(X.model(), X.node(i, j), X.at(i, j)) - Y.at(i);
      r.spread = std::max(r.spread, g::base_norm(X.model(), d));
    }
  }
  r.projectable = r.spread < tol;
  if (r.projectable) r.projection = std::move(Y);
  return r;
}

FieldGrid horizontal_lift_field(const BaseFieldGrid& Y, int nf) {
  FieldGrid X(Y.model(), Y.nb(), nf);
  for (int i = 0; i < Y.nb(); ++i) {
    for (int j = 0; j < nf; ++j) {
      X.set(i, j, g::horizontal_lift_vec(Y.model(), X.node(i, j), Y.at(i)).w);
    }
  }
  return X;
}

FieldGrid vertical_part(const FieldGrid& X) {
  FieldGrid V(X.model(), X.nb(), X.nf());
  for (int i = 0; i < X.nb(); ++i) {
    for (int j = 0; j < X.nf(); ++j) {
      V.set(i, j, g::split_tangent(X.model(), X.node(i, j), X.at(i, j)).vert);
    }
  }
  return V;
}

FieldGrid horizontal_part(const FieldGrid& X) { return X - vertical_part(X); }

FieldGrid horizontal_average(const FieldGrid& X) {
  return vertical_part(X) + horizontal_lift_field(horizontal_center(X), X.nf());
}

FieldGrid fair_part(const FieldGrid& X) { return X - horizontal_average(X); }

double l2_inner(const FieldGrid& X, const FieldGrid& Y) {
  if (!X.same_layout(Y)) throw Error(ErrorCode::GridMismatch, "l2_inner: field layouts differ");
  double acc = 0.0;
  for (int i = 0; i < X.nb(); ++i) {
    double fiber = 0.0;
    for (int j = 0; j < X.nf(); ++j) fiber += g::total_inner(X.model(), X.at(i, j), Y.at(i, j));
    acc += fiber;
  }
  return acc * X.cell_weight();
}

double l2_norm(const FieldGrid& X) { return std::sqrt(std::max(0.0, l2_inner(X, X))); }

double sup_norm(const FieldGrid& X) {
  double s = 0.0;
  for (int i = 0; i < X.nb(); ++i) {
    for (int j = 0; j < X.nf(); ++j) s = std::max(s, g::total_norm(X.model(), X.at(i, j)));
  }
  return s;
}

double sup_norm(const BaseFieldGrid& Y) {
  double s = 0.0;
  for (int i = 0; i < Y.nb(); ++i) s = std::max(s, g::base_norm(Y.model(), Y.at(i)));
  return s;
}

FieldGrid lie_bracket_flat_t2(const FieldGrid& X, const FieldGrid& Y) {
  if (X.model().kind() != g::ModelKind::FlatT2) {
    throw Error(ErrorCode::UnsupportedBase, "grid Lie bracket is implemented on flat-t2 only");
  }
  if (!X.same_layout(Y)) throw Error(ErrorCode::GridMismatch, "bracket: field layouts differ");
  const int nb = X.nb(), nf = X.nf();
  const double hx = 1.0 / nb, hy = 1.0 / nf;
  auto dx = [&](const FieldGrid& F, int i, int j) {
    return (F.at((i + 1) % nb, j) - F.at((i + nb - 1) % nb, j)) / (2.0 * hx);
  };
  auto dy = [&](const FieldGrid& F, int i, int j) {
    return (F.at(i, (j + 1) % nf) - F.at(i, (j + nf - 1) % nf)) / (2.0 * hy);
  };
  FieldGrid B(X.model(), nb, nf);
  for (int i = 0; i < nb; ++i) {
    for (int j = 0; j < nf; ++j) {
      const TotalVector& a = X.at(i, j);
      const TotalVector& b = Y.at(i, j);
      B.set(i, j, a[0] * dx(Y, i, j) + a[1] * dy(Y, i, j) - b[0] * dx(X, i, j) -
                      b[1] * dy(X, i, j));
    }
  }
  return B;
}

}  // namespace fiberlab::fields
