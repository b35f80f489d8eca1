#include "fiberlab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fiberlab::sampling {

namespace g = fiberlab::geometry;
using std::numbers::pi;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

circle::CircleDiffeo random_diffeo(Rng& rng, std::size_t n, double amplitude) {
  constexpr int kModes = 4;
  double a[kModes + 1], b[kModes + 1];
  for (int k = 1; k <= kModes; ++k) {
    a[k] = normal(rng) / (k * k);
    b[k] = normal(rng) / (k * k);
  }
  auto shape = circle::PeriodicSamples::from_function(n, [&](double x) {
    double s = 0.0;
    for (int k = 1; k <= kModes; ++k) {
      s += a[k] * std::cos(2 * pi * k * x) + b[k] * std::sin(2 * pi * k * x);
    }
    return s;
  });
  double scale = amplitude * uniform(rng, 0.3, 1.0) / std::max(shape.amplitude(), 1e-300);
  const double md = shape.min_derivative() * scale;
  if (md < -0.9) scale *= 0.9 / -md;
  const double c = uniform(rng);
  std::vector<double> v(shape.values().begin(), shape.values().end());
  for (double& x : v) x = c + scale * x;
  return circle::CircleDiffeo(circle::PeriodicSamples(std::move(v)));
}

Quat random_unit_quat(Rng& rng) {
  Quat q;
  do {
    q = Quat(normal(rng), normal(rng), normal(rng), normal(rng));
  } while (q.norm() < 1e-6);
  return q.normalized();
}

g::BasePoint random_base_point(Rng& rng, const g::FibrationModel& model) {
  g::BasePoint x;
  if (model.spherical()) {
    do {
      x.c = g::BaseVector(normal(rng), normal(rng), normal(rng));
    } while (x.c.norm() < 1e-6);
    x.c.normalize();
    return x;
  }
  for (int k = 0; k < model.base_coords(); ++k) x.c[k] = uniform(rng);
  return x;
}

g::TotalPoint random_point(Rng& rng, const g::FibrationModel& model) {
  if (model.spherical()) return g::canonicalize(model, g::from_quat(random_unit_quat(rng)));
  g::TotalPoint p;
  for (int k = 0; k < model.total_coords(); ++k) p.c[k] = uniform(rng);
  return p;
}

g::TotalVector random_tangent(Rng& rng, const g::FibrationModel& model, const g::TotalPoint& p) {
  g::TotalVector w = g::TotalVector::Zero();
  for (int k = 0; k < model.total_coords(); ++k) w[k] = normal(rng);
  if (model.spherical()) w -= p.c.dot(w) * p.c;
  return w;
}

g::BaseVector random_base_tangent(Rng& rng, const g::FibrationModel& model,
                                  const g::BasePoint& x) {
  g::BaseVector v = g::BaseVector::Zero();
  for (int k = 0; k < model.base_coords(); ++k) v[k] = normal(rng);
  return g::base_tangent_project(model, x, v);
}

namespace {

// A few random Fourier modes on the unit torus of dimension d.
struct TorusModes {
  struct Mode {
    Eigen::Vector3d k;
    double phase;
    Eigen::Vector3d amp;
  };
  std::vector<Mode> modes;

  TorusModes(Rng& rng, int d, int count) {
    for (int c = 0; c < count; ++c) {
      Mode m{Eigen::Vector3d::Zero(), uniform(rng, 0.0, 2 * pi), Eigen::Vector3d::Zero()};
      for (int k = 0; k < d; ++k) {
        m.k[k] = std::floor(uniform(rng, -2.0, 3.0));
        m.amp[k] = normal(rng);
      }
      modes.push_back(m);
    }
  }

  Eigen::Vector3d operator()(const Eigen::Vector3d& x) const {
    Eigen::Vector3d out = Eigen::Vector3d::Zero();
    for (const auto& m : modes) out += m.amp * std::sin(2 * pi * m.k.dot(x) + m.phase);
    return out;
  }
};

fields::FieldGrid rescaled(const fields::FieldGrid& X, double amplitude) {
  const double s = fields::sup_norm(X);
  return s > 0.0 ? X * (amplitude / s) : X;
}

}  // namespace

fields::FieldGrid random_field(Rng& rng, const g::FibrationModel& model, int nb, int nf,
                               double amplitude) {
  if (!model.spherical()) {
    const int d = model.total_coords();
    const TorusModes modes(rng, d, 6);
    auto X = fields::FieldGrid::from_function(model, nb, nf, [&](const g::TotalPoint& p, int, int) {
      g::TotalVector w = g::TotalVector::Zero();
      w.head(3) = modes(p.c.head(3));
      for (int k = d; k < 4; ++k) w[k] = 0.0;
      return w;
    });
    return rescaled(X, amplitude);
  }
  // Deck-equivariant construction: coefficient functions that are invariant under
  // right multiplication by e-th roots of exp(i .), times lifted base fields and p i.
  const int e = model.deck_order();
  Eigen::Matrix3d M1, M2;
  Eigen::Vector3d b1, b2;
  for (int r = 0; r < 3; ++r) {
    b1[r] = normal(rng);
    b2[r] = normal(rng);
    for (int c = 0; c < 3; ++c) {
      M1(r, c) = normal(rng);
      M2(r, c) = normal(rng);
    }
  }
  double cf[2][5];
  for (auto& row : cf) {
    for (double& v : row) v = normal(rng);
  }
  auto invariant = [&](const g::TotalPoint& p, const double* c) {
    const std::complex<double> a(p.c[0], p.c[1]);
    const std::complex<double> b(p.c[2], p.c[3]);
    const std::complex<double> ae = std::pow(a, e), be = std::pow(b, e);
    return c[0] + c[1] * std::norm(a) + c[2] * ae.real() + c[3] * ae.imag() + c[4] * be.real();
  };
  auto X = fields::FieldGrid::from_function(model, nb, nf, [&](const g::TotalPoint& p, int, int) {
    const g::BasePoint x = g::project(model, p);
    const g::BaseVector y1 = g::base_tangent_project(model, x, M1 * x.c + b1);
    const g::BaseVector y2 = g::base_tangent_project(model, x, M2 * x.c + b2);
    g::TotalVector w = invariant(p, cf[0]) * g::horizontal_lift_vec(model, p, y1).w +
                       g::horizontal_lift_vec(model, p, y2).w +
                       invariant(p, cf[1]) * g::vertical_unit(model, p);
    w -= p.c.dot(w) * p.c;
    return w;
  });
  return rescaled(X, amplitude);
}

fields::FieldGrid random_fair_field(Rng& rng, const g::FibrationModel& model, int nb, int nf,
                                    double amplitude) {
  return rescaled(fields::fair_part(random_field(rng, model, nb, nf, 1.0)), amplitude);
}

moduli::FiberShape random_shape(Rng& rng, const g::FibrationModel& model, int m, double radius) {
  const g::BasePoint x0 = random_base_point(rng, model);
  const auto frame = g::base_tangent_basis(model, x0);
  constexpr int kModes = 3;
  std::vector<Eigen::Vector2d> ca(kModes), cb(kModes);
  for (int k = 0; k < kModes; ++k) {
    ca[k] = Eigen::Vector2d(normal(rng), normal(rng)) / (k + 1);
    cb[k] = Eigen::Vector2d(normal(rng), normal(rng)) / (k + 1);
  }
  const double twist = uniform(rng, -0.1, 0.1);
  std::vector<Eigen::Vector2d> coords(m);
  double vmax = 0.0;
  for (int j = 0; j < m; ++j) {
    const double t = static_cast<double>(j) / m;
    Eigen::Vector2d v = Eigen::Vector2d::Zero();
    for (int k = 0; k < kModes; ++k) {
      v += ca[k] * std::cos(2 * pi * k * t) + cb[k] * std::sin(2 * pi * k * t);
    }
    if (frame.size() == 1) v[1] = 0.0;
    coords[j] = v;
    vmax = std::max(vmax, v.norm());
  }
  const double scale = radius * uniform(rng, 0.3, 1.0) / std::max(vmax, 1e-300);
  moduli::FiberShape S{model, {}};
  for (int j = 0; j < m; ++j) {
    const double t = static_cast<double>(j) / m;
    g::BaseVector v = scale * coords[j][0] * frame[0];
    if (frame.size() > 1) v += scale * coords[j][1] * frame[1];
    const g::BasePoint y = g::base_geodesic(model, x0, v, 1.0);
    S.samples.push_back(g::fiber_point(model, y, t + twist * std::sin(2 * pi * t)));
  }
  return S;
}

g::ModelIsometry random_isometry(Rng& rng, const g::FibrationModel& model, bool automorphism) {
  g::ModelIsometry h;
  if (model.spherical()) {
    h.left = random_unit_quat(rng);
    if (automorphism) {
      h.right = Quat::exp_pure(g::BaseVector::UnitX(), uniform(rng, 0.0, 2 * pi));
      h.eps = 1;
    } else {
      h.right = random_unit_quat(rng);
      h.eps = uniform(rng) < 0.5 ? 1 : -1;
    }
    return h;
  }
  h.sign = uniform(rng) < 0.5 ? 1 : -1;
  for (int k = 0; k < model.total_coords(); ++k) h.shift[k] = uniform(rng);
  return h;
}

}  // namespace fiberlab::sampling
