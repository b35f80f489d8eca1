#include "fiberlab/geometry.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>

#include "fiberlab/circle_diffeo.hpp"
#include "fiberlab/error.hpp"

namespace fiberlab::geometry {

using std::numbers::pi;
using circle::wrap01;

namespace {

// Component-wise min-image difference on the unit torus.
double min_image(double d) { return d - std::round(d); }

Quat pure_q(const BaseVector& v) { return Quat::pure(v); }

int flat_total(const FibrationModel& m) { return m.kind() == ModelKind::FlatT2 ? 2 : 3; }
int flat_base(const FibrationModel& m) { return m.kind() == ModelKind::FlatT2 ? 1 : 2; }

// Rotation quaternion taking unit a to unit b (a != -b).
Quat rot_between(const BaseVector& a, const BaseVector& b) {
  const BaseVector c = a.cross(b);
  return Quat(1.0 + a.dot(b), c[0], c[1], c[2]).normalized();
}

}  // namespace

FibrationModel FibrationModel::lens(int e) {
  if (e < 2) throw Error(ErrorCode::InvalidInput, "lens model needs e >= 2 (e = 1 is hopf)");
  return FibrationModel(ModelKind::Lens, e);
}

FibrationModel FibrationModel::parse(std::string_view id) {
  std::string s;
  for (char c : id) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "flat-t2" || s == "flatt2" || s == "t2") return flat_t2();
  if (s == "flat-t3" || s == "flatt3" || s == "t3") return flat_t3();
  if (s == "hopf" || s == "lens-1") return hopf();
  if (s.rfind("lens", 0) == 0) {
    std::string_view rest(s);
    rest.remove_prefix(4);
    if (!rest.empty() && (rest.front() == '-' || rest.front() == ':')) rest.remove_prefix(1);
    int e = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), e);
    if (ec == std::errc() && ptr == rest.data() + rest.size() && !rest.empty()) {
      return e == 1 ? hopf() : lens(e);
    }
  }
  throw Error(ErrorCode::BadConfig, "unknown model id '" + std::string(id) + "'");
}

std::string FibrationModel::id() const {
  switch (kind_) {
    case ModelKind::FlatT2: return "flat-t2";
    case ModelKind::FlatT3: return "flat-t3";
    case ModelKind::Hopf: return "hopf";
    case ModelKind::Lens: return "lens-" + std::to_string(e_);
  }
  return "?";
}

int FibrationModel::total_coords() const {
  return spherical() ? 4 : (kind_ == ModelKind::FlatT2 ? 2 : 3);
}
int FibrationModel::base_coords() const {
  return spherical() ? 3 : (kind_ == ModelKind::FlatT2 ? 1 : 2);
}
int FibrationModel::base_dim() const { return kind_ == ModelKind::FlatT2 ? 1 : 2; }

double FibrationModel::fiber_length() const {
  if (!spherical()) return 1.0;
  return 2.0 * pi / deck_order();
}

// Radius-1/2 sphere has area pi.
double FibrationModel::base_volume() const { return spherical() ? pi : 1.0; }

// ---------------------------------------------------------------------------

Quat as_quat(const TotalPoint& p) { return Quat::from_vec4(p.c); }
TotalPoint from_quat(const Quat& q) { return TotalPoint{q.vec4()}; }

TotalPoint make_point(const FibrationModel& model, const Eigen::VectorXd& coords) {
  if (coords.size() != model.total_coords()) {
    throw Error(ErrorCode::InvalidInput, "point for " + model.id() + " needs " +
                                             std::to_string(model.total_coords()) + " coordinates");
  }
  TotalPoint p;
  p.c.head(coords.size()) = coords;
  if (!p.c.allFinite()) throw Error(ErrorCode::InvalidInput, "non-finite point coordinate");
  if (model.spherical() && p.c.norm() < 1e-12) {
    throw Error(ErrorCode::InvalidInput, "zero quaternion");
  }
  return canonicalize(model, p);
}

BasePoint make_base_point(const FibrationModel& model, const Eigen::VectorXd& coords) {
  if (coords.size() != model.base_coords()) {
    throw Error(ErrorCode::InvalidInput, "base point for " + model.id() + " needs " +
                                             std::to_string(model.base_coords()) + " coordinates");
  }
  BasePoint x;
  x.c.head(coords.size()) = coords;
  if (!x.c.allFinite()) throw Error(ErrorCode::InvalidInput, "non-finite base coordinate");
  if (model.spherical() && x.c.norm() < 1e-12) {
    throw Error(ErrorCode::InvalidInput, "zero base vector");
  }
  return canonicalize(model, x);
}

TotalPoint canonicalize(const FibrationModel& model, const TotalPoint& p) {
  TotalPoint out;
  if (!model.spherical()) {
    for (int k = 0; k < flat_total(model); ++k) out.c[k] = wrap01(p.c[k]);
    return out;
  }
  out.c = p.c.normalized();
  if (model.kind() == ModelKind::Hopf) return out;
  // q = a + b j with a = w + x i, b = y + z i. Right multiplication by g = exp(i phi)
  // sends a -> a g and b -> b conj(g). Pick the deck element that puts the phase of the
  // dominant part in [-pi/e, pi/e).
  const int e = model.deck_order();
  const double na = std::hypot(out.c[0], out.c[1]);
  const double nb = std::hypot(out.c[2], out.c[3]);
  const double step = 2.0 * pi / e;
  double phi;
  if (na >= nb) {
    const double arg = std::atan2(out.c[1], out.c[0]);
    phi = -step * std::round(arg / step);
  } else {
    const double arg = std::atan2(out.c[3], out.c[2]);
    phi = step * std::round(arg / step);
  }
  const Quat g = Quat::exp_pure(BaseVector::UnitX(), phi);
  out.c = (as_quat(out) * g).vec4();
  return out;
}

BasePoint canonicalize(const FibrationModel& model, const BasePoint& x) {
  BasePoint out;
  if (!model.spherical()) {
    for (int k = 0; k < flat_base(model); ++k) out.c[k] = wrap01(x.c[k]);
    return out;
  }
  out.c = x.c.normalized();
  return out;
}

BasePoint project(const FibrationModel& model, const TotalPoint& p) {
  BasePoint x;
  if (!model.spherical()) {
    x.c.head(flat_base(model)) = p.c.head(flat_base(model));
    return x;
  }
  const Quat q = as_quat(p);
  x.c = rotate(q, BaseVector::UnitX());
  return x;
}

BaseVector d_project(const FibrationModel& model, const TotalPoint& p, const TotalVector& w) {
  BaseVector v = BaseVector::Zero();
  if (!model.spherical()) {
    v.head(flat_base(model)) = w.head(flat_base(model));
    return v;
  }
  const Quat q = as_quat(p);
  const Quat dw = Quat::from_vec4(w);
  return (dw * kQuatI * q.conj() + q * kQuatI * dw.conj()).imag();
}

TotalVector vertical_unit(const FibrationModel& model, const TotalPoint& p) {
  TotalVector u = TotalVector::Zero();
  if (!model.spherical()) {
    u[flat_base(model)] = 1.0;
    return u;
  }
  return (as_quat(p) * kQuatI).vec4();
}

bool is_tangent(const FibrationModel& model, const TotalPoint& p, const TotalVector& w,
                double tol) {
  if (!w.allFinite()) return false;
  if (model.spherical()) return std::abs(p.c.dot(w)) <= tol * std::max(1.0, w.norm());
  // Unused trailing coordinates must vanish.
  for (int k = flat_total(model); k < 4; ++k) {
    if (std::abs(w[k]) > tol) return false;
  }
  return true;
}

TangentTotal split_tangent(const FibrationModel& model, const TotalPoint& p,
                           const TotalVector& w) {
  if (!is_tangent(model, p, w)) {
    throw Error(ErrorCode::NotTangent, "vector is not tangent to the total space at the point");
  }
  TangentTotal t;
  t.p = p;
  t.w = w;
  const TotalVector u = vertical_unit(model, p);
  t.vert = u.dot(w) * u;
  t.horiz = w - t.vert;
  return t;
}

double total_inner(const FibrationModel&, const TotalVector& a, const TotalVector& b) {
  return a.dot(b);
}
double total_norm(const FibrationModel& model, const TotalVector& a) {
  return std::sqrt(total_inner(model, a, a));
}

double base_inner(const FibrationModel& model, const BaseVector& a, const BaseVector& b) {
  return model.spherical() ? 0.25 * a.dot(b) : a.dot(b);
}
double base_norm(const FibrationModel& model, const BaseVector& a) {
  return std::sqrt(base_inner(model, a, a));
}

TotalVector chord(const FibrationModel& model, const TotalVector& p, const TotalVector& c) {
  TotalVector d = p - c;
  if (!model.spherical()) {
    for (int k = 0; k < flat_total(model); ++k) d[k] = min_image(d[k]);
  }
  return d;
}

double total_distance(const FibrationModel& model, const TotalPoint& p, const TotalPoint& q) {
  if (!model.spherical()) return chord(model, p.c, q.c).norm();
  const Quat qp = as_quat(p);
  const Quat qq = as_quat(q);
  // Chord form 2 asin(c/2) stays accurate for nearby points, unlike acos.
  double best = 4.0;
  const int e = model.deck_order();
  for (int k = 0; k < e; ++k) {
    const Quat g = Quat::exp_pure(BaseVector::UnitX(), 2.0 * pi * k / e);
    best = std::min(best, (qp.vec4() - (qq * g).vec4()).norm());
  }
  return 2.0 * std::asin(std::min(1.0, 0.5 * best));
}

double base_angle(const FibrationModel& model, const BasePoint& x, const BasePoint& y) {
  if (!model.spherical()) {
    BaseVector d = BaseVector::Zero();
    for (int k = 0; k < flat_base(model); ++k) d[k] = min_image(y.c[k] - x.c[k]);
    return d.norm();
  }
  // atan2 form is accurate at every separation.
  return std::atan2(x.c.cross(y.c).norm(), x.c.dot(y.c));
}

double base_distance(const FibrationModel& model, const BasePoint& x, const BasePoint& y) {
  const double a = base_angle(model, x, y);
  return model.spherical() ? 0.5 * a : a;
}

BasePoint base_geodesic(const FibrationModel& model, const BasePoint& x, const BaseVector& v,
                        double t) {
  if (!model.spherical()) {
    BasePoint y;
    for (int k = 0; k < flat_base(model); ++k) y.c[k] = wrap01(x.c[k] + t * v[k]);
    return y;
  }
  const double speed = v.norm();
  const double theta = speed * std::abs(t);
  if (theta >= pi) {
    throw Error(ErrorCode::BeyondInjectivityRadius,
                "base geodesic of angle " + std::to_string(theta) + " reaches the cut locus");
  }
  if (theta == 0.0) return x;
  const BaseVector dir = (t >= 0 ? 1.0 : -1.0) * v / speed;
  BasePoint y;
  y.c = (std::cos(theta) * x.c + std::sin(theta) * dir).normalized();
  return y;
}

BaseVector base_log(const FibrationModel& model, const BasePoint& x, const BasePoint& y) {
  BaseVector v = BaseVector::Zero();
  if (!model.spherical()) {
    for (int k = 0; k < flat_base(model); ++k) v[k] = min_image(y.c[k] - x.c[k]);
    return v;
  }
  const BaseVector perp = y.c - x.c.dot(y.c) * x.c;
  const double s = perp.norm();
  const double theta = std::atan2(s, x.c.dot(y.c));
  if (s < 1e-300) {
    if (theta > 1.0) {
      throw Error(ErrorCode::BeyondInjectivityRadius, "base_log of antipodal points");
    }
    return v;
  }
  return theta / s * perp;
}

BaseVector base_tangent_project(const FibrationModel& model, const BasePoint& x,
                                const BaseVector& v) {
  if (!model.spherical()) {
    BaseVector out = BaseVector::Zero();
    out.head(flat_base(model)) = v.head(flat_base(model));
    return out;
  }
  return v - x.c.dot(v) * x.c;
}

std::vector<BaseVector> base_tangent_basis(const FibrationModel& model, const BasePoint& x) {
  if (!model.spherical()) {
    std::vector<BaseVector> b;
    for (int k = 0; k < flat_base(model); ++k) b.push_back(BaseVector::Unit(k));
    return b;
  }
  // Axis least aligned with x gives a well-conditioned first vector.
  Eigen::Index axis;
  x.c.cwiseAbs().minCoeff(&axis);
  BaseVector e1 = BaseVector::Unit(axis) - x.c[axis] * x.c;
  e1.normalize();
  BaseVector e2 = x.c.cross(e1);
  return {e1, e2};
}

std::vector<TotalVector> tangent_basis(const FibrationModel& model, const TotalPoint& p) {
  std::vector<TotalVector> b;
  if (!model.spherical()) {
    for (int k = 0; k < flat_total(model); ++k) b.push_back(TotalVector::Unit(k));
    return b;
  }
  const Quat q = as_quat(p);
  b.push_back((q * Quat(0, 1, 0, 0)).vec4());
  b.push_back((q * Quat(0, 0, 1, 0)).vec4());
  b.push_back((q * Quat(0, 0, 0, 1)).vec4());
  return b;
}

TangentTotal horizontal_lift_vec(const FibrationModel& model, const TotalPoint& p,
                                 const BaseVector& v) {
  TangentTotal t;
  t.p = p;
  if (!v.allFinite()) throw Error(ErrorCode::BaseMismatch, "non-finite base vector");
  if (!model.spherical()) {
    for (int k = flat_base(model); k < 3; ++k) {
      if (std::abs(v[k]) > kTangentTol) {
        throw Error(ErrorCode::BaseMismatch, "base vector has components outside the base");
      }
    }
    t.w.head(flat_base(model)) = v.head(flat_base(model));
    t.horiz = t.w;
    return t;
  }
  const BasePoint x = project(model, p);
  if (std::abs(x.c.dot(v)) > kTangentTol * std::max(1.0, v.norm())) {
    throw Error(ErrorCode::BaseMismatch, "base vector is not tangent at the projected point");
  }
  // h = 1/2 x v q: horizontal, and d_project(h) = x v x = v for v orthogonal to x.
  const Quat q = as_quat(p);
  t.w = (0.5 * (pure_q(x.c) * pure_q(v) * q)).vec4();
  t.horiz = t.w;
  return t;
}

TotalPoint fiber_geodesic(const FibrationModel& model, const TotalPoint& p, double a) {
  if (!model.spherical()) {
    TotalPoint out = p;
    const int f = flat_base(model);
    out.c[f] = wrap01(p.c[f] + a);
    return out;
  }
  const Quat q = as_quat(p) * Quat::exp_pure(BaseVector::UnitX(), a);
  return canonicalize(model, from_quat(q));
}

// ---------------------------------------------------------------------------

namespace {

// dq/dt = 1/2 gamma(t) gamma'(t) q along the great circle gamma(t) = cos(t th) x0 + sin(t th) u.
Quat rk4_lift(const Quat& q0, const BaseVector& x0, const BaseVector& u, double th, int steps) {
  auto rhs = [&](double t, const Quat& q) {
    const double c = std::cos(t * th), s = std::sin(t * th);
    const BaseVector g = c * x0 + s * u;
    const BaseVector gd = th * (-s * x0 + c * u);
    return 0.5 * (pure_q(g) * pure_q(gd) * q);
  };
  const double h = 1.0 / steps;
  Quat q = q0;
  for (int n = 0; n < steps; ++n) {
    const double t = n * h;
    const Quat k1 = rhs(t, q);
    const Quat k2 = rhs(t + 0.5 * h, q + (0.5 * h) * k1);
    const Quat k3 = rhs(t + 0.5 * h, q + (0.5 * h) * k2);
    const Quat k4 = rhs(t + h, q + h * k3);
    q = q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return q;
}

}  // namespace

TransportResult horizontal_transport_ex(const FibrationModel& model, const TotalPoint& q,
                                        const BasePoint& x_target, const TransportOptions& opts) {
  TransportResult r;
  if (!model.spherical()) {
    r.point = q;
    for (int k = 0; k < flat_base(model); ++k) r.point.c[k] = wrap01(x_target.c[k]);
    return r;
  }
  const BasePoint x0 = project(model, q);
  const BasePoint xt = canonicalize(model, x_target);
  const double th = base_angle(model, x0, xt);
  if (th >= kSphereInjectivityGuard) {
    throw Error(ErrorCode::BeyondInjectivityRadius,
                "transport across angle " + std::to_string(th) + " exceeds the 0.9 pi guard");
  }
  if (th == 0.0) {
    r.point = canonicalize(model, q);
    return r;
  }
  const BaseVector u = (xt.c - x0.c.dot(xt.c) * x0.c).normalized();
  const Quat q0 = as_quat(q).normalized();

  int n = opts.initial_steps;
  Quat prev = rk4_lift(q0, x0.c, u, th, n);
  while (true) {
    const int n2 = 2 * n;
    if (n2 > opts.max_steps) {
      throw Error(ErrorCode::NonconvergedODE, "horizontal transport did not converge within " +
                                                  std::to_string(opts.max_steps) + " steps");
    }
    const Quat cur = rk4_lift(q0, x0.c, u, th, n2);
    const double diff = (cur - prev).norm();
    const Quat qn = cur.normalized();
    const double perr = (rotate(qn, BaseVector::UnitX()) - xt.c).norm();
    if (diff < opts.richardson_tol && perr < opts.projection_tol) {
      r.point = canonicalize(model, from_quat(qn));
      r.steps = n2;
      r.projection_error = perr;
      return r;
    }
    prev = cur;
    n = n2;
  }
}

TotalPoint horizontal_transport(const FibrationModel& model, const TotalPoint& q,
                                const BasePoint& x_target) {
  return horizontal_transport_ex(model, q, x_target).point;
}

TotalPoint adapted_exp(const FibrationModel& model, const TotalPoint& p, const TotalVector& w) {
  split_tangent(model, p, w);  // tangency check
  if (!model.spherical()) {
    TotalPoint out;
    for (int k = 0; k < flat_total(model); ++k) out.c[k] = wrap01(p.c[k] + w[k]);
    return out;
  }
  const double a = vertical_unit(model, p).dot(w);
  const BaseVector wb = d_project(model, p, w);
  if (wb.norm() >= kSphereInjectivityGuard) {
    throw Error(ErrorCode::BeyondInjectivityRadius,
                "adapted_exp: base displacement exceeds the 0.9 pi guard");
  }
  const BasePoint x = project(model, p);
  const BasePoint target = base_geodesic(model, x, wb, 1.0);
  // Keep the uncanonicalized representative so that w stays attached to it.
  const Quat q1 = as_quat(p) * Quat::exp_pure(BaseVector::UnitX(), a);
  return horizontal_transport(model, from_quat(q1), target);
}

// ---------------------------------------------------------------------------

TotalPoint section(const FibrationModel& model, const BasePoint& x) {
  if (!model.spherical()) {
    TotalPoint p;
    p.c.head(flat_base(model)) = x.c.head(flat_base(model));
    return p;
  }
  const BaseVector xc = x.c.normalized();
  const BaseVector ei = BaseVector::UnitX();
  Quat q;
  if (xc[0] >= 0.0) {
    q = rot_between(ei, xc);
  } else {
    // j sends i to -i; rotating -i onto x stays well conditioned on this half.
    q = rot_between(-ei, xc) * Quat(0, 0, 1, 0);
  }
  return from_quat(q);
}

TotalVector fiber_curve(const FibrationModel& model, const BasePoint& x, double s) {
  if (!model.spherical()) {
    TotalVector c = TotalVector::Zero();
    c.head(flat_base(model)) = x.c.head(flat_base(model));
    c[flat_base(model)] = s;
    return c;
  }
  return (as_quat(section(model, x)) * Quat::exp_pure(BaseVector::UnitX(), 2.0 * pi * s)).vec4();
}

TotalVector fiber_curve_tangent(const FibrationModel& model, const BasePoint& x, double s) {
  if (!model.spherical()) {
    TotalVector c = TotalVector::Zero();
    c[flat_base(model)] = 1.0;
    return c;
  }
  const Quat q = as_quat(section(model, x)) * Quat::exp_pure(BaseVector::UnitX(), 2.0 * pi * s);
  return (2.0 * pi) * (q * kQuatI).vec4();
}

double fiber_curve_period(const FibrationModel& model) {
  return model.spherical() ? 1.0 / model.deck_order() : 1.0;
}

TotalPoint fiber_point(const FibrationModel& model, const BasePoint& x, double s) {
  TotalPoint p;
  p.c = fiber_curve(model, x, s * fiber_curve_period(model));
  return canonicalize(model, p);
}

std::vector<TotalPoint> model_fiber(const FibrationModel& model, const BasePoint& x, int m) {
  if (m < 1) throw Error(ErrorCode::InvalidInput, "model_fiber needs m >= 1");
  std::vector<TotalPoint> out;
  out.reserve(m);
  for (int k = 0; k < m; ++k) out.push_back(fiber_point(model, x, static_cast<double>(k) / m));
  return out;
}

std::vector<BasePoint> base_grid(const FibrationModel& model, int nb) {
  if (nb < 1) throw Error(ErrorCode::BadConfig, "base grid needs nb >= 1");
  std::vector<BasePoint> g;
  g.reserve(nb);
  switch (model.kind()) {
    case ModelKind::FlatT2:
      for (int i = 0; i < nb; ++i) {
        BasePoint x;
        x.c[0] = static_cast<double>(i) / nb;
        g.push_back(x);
      }
      break;
    case ModelKind::FlatT3: {
      const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(nb))));
      if (s * s != nb) {
        throw Error(ErrorCode::BadConfig, "flat-t3 base grid needs a square nb, got " +
                                              std::to_string(nb));
      }
      for (int b = 0; b < s; ++b) {
        for (int a = 0; a < s; ++a) {
          BasePoint x;
          x.c[0] = static_cast<double>(a) / s;
          x.c[1] = static_cast<double>(b) / s;
          g.push_back(x);
        }
      }
      break;
    }
    case ModelKind::Hopf:
    case ModelKind::Lens: {
      const double golden = pi * (3.0 - std::sqrt(5.0));
      for (int k = 0; k < nb; ++k) {
        const double z = 1.0 - (2.0 * k + 1.0) / nb;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * k;
        BasePoint x;
        x.c = BaseVector(r * std::cos(phi), r * std::sin(phi), z);
        g.push_back(x);
      }
      break;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

bool is_automorphism(const FibrationModel& model, const ModelIsometry& iso) {
  if (!model.spherical()) return true;
  return iso.eps == 1 && std::hypot(iso.right.y, iso.right.z) < 1e-12;
}

TotalPoint apply(const FibrationModel& model, const ModelIsometry& iso, const TotalPoint& p) {
  if (!model.spherical()) {
    TotalPoint out;
    for (int k = 0; k < flat_total(model); ++k) out.c[k] = wrap01(iso.sign * p.c[k] + iso.shift[k]);
    return out;
  }
  Quat q = as_quat(p);
  if (iso.eps < 0) q = q.conj();
  return canonicalize(model, from_quat(iso.left * q * iso.right.conj()));
}

BasePoint apply_base(const FibrationModel& model, const ModelIsometry& iso, const BasePoint& x) {
  if (!model.spherical()) {
    BasePoint out;
    for (int k = 0; k < flat_base(model); ++k) out.c[k] = wrap01(iso.sign * x.c[k] + iso.shift[k]);
    return out;
  }
  BasePoint out;
  out.c = rotate(iso.left, x.c);
  return out;
}

}  // namespace fiberlab::geometry
