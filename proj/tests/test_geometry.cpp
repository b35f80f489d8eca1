#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fiberlab/error.hpp"
#include "fiberlab/geometry.hpp"
#include "fiberlab/sampling.hpp"

using namespace fiberlab;
using namespace fiberlab::geometry;
constexpr double kPi = std::numbers::pi;

namespace {

TotalPoint tp(const FibrationModel& m, std::initializer_list<double> v) {
  Eigen::VectorXd c(v.size());
  int k = 0;
  for (double x : v) c[k++] = x;
  return make_point(m, c);
}

BasePoint bp(const FibrationModel& m, std::initializer_list<double> v) {
  Eigen::VectorXd c(v.size());
  int k = 0;
  for (double x : v) c[k++] = x;
  return make_base_point(m, c);
}

// Hand-written Hopf map q i q^-1 as a rotation of (1,0,0).
Eigen::Vector3d hopf_oracle(const Eigen::Vector4d& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  return {w * w + x * x - y * y - z * z, 2 * (x * y + w * z), 2 * (x * z - w * y)};
}

// Central difference of the projection along a curve p + t w, renormalized on spheres.
BaseVector fd_project(const FibrationModel& m, const TotalPoint& p, const TotalVector& w, double h = 1e-6) {
  auto move = [&](double t) {
    TotalPoint q;
    q.c = p.c + t * w;
    if (m.spherical()) q.c.normalize();
    return project(m, q).c;
  };
  BaseVector d = (move(h) - move(-h)) / (2 * h);
  return d;
}

}  // namespace

TEST_CASE("model ids") {
  CHECK(FibrationModel::parse("hopf") == FibrationModel::hopf());
  CHECK(FibrationModel::parse("lens-3").deck_order() == 3);
  CHECK(FibrationModel::parse("flat-t3").kind() == ModelKind::FlatT3);
  CHECK_THROWS_AS(FibrationModel::parse("klein"), Error);
  CHECK_THROWS_AS(FibrationModel::lens(1), Error);
}

TEST_CASE("project") {
  const auto t2 = FibrationModel::flat_t2();
  CHECK(project(t2, tp(t2, {0.3, 0.7})).c[0] == doctest::Approx(0.3));
  const auto h = FibrationModel::hopf();
  CHECK((project(h, tp(h, {1, 0, 0, 0})).c - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);
  for (double th : {0.1, 0.5, 2.0}) {
    const auto q = tp(h, {std::cos(th), std::sin(th), 0, 0});
    CHECK((project(h, q).c - Eigen::Vector3d(1, 0, 0)).norm() < 1e-14);
  }
  sampling::Rng rng(4);
  for (int k = 0; k < 50; ++k) {
    const auto q = sampling::random_point(rng, h);
    CHECK((project(h, q).c - hopf_oracle(q.c)).norm() < 1e-13);
  }
}

TEST_CASE("split_tangent") {
  const auto t2 = FibrationModel::flat_t2();
  const auto p = tp(t2, {0.2, 0.4});
  auto s = split_tangent(t2, p, TotalVector(0, 1, 0, 0));
  CHECK(s.vert.isApprox(TotalVector(0, 1, 0, 0)));
  CHECK(s.horiz.norm() == 0.0);
  s = split_tangent(t2, p, TotalVector(1, 0, 0, 0));
  CHECK(s.vert.norm() == 0.0);
  CHECK(s.horiz.isApprox(TotalVector(1, 0, 0, 0)));

  const auto h = FibrationModel::hopf();
  const auto one = tp(h, {1, 0, 0, 0});
  const TotalVector wj(0, 0, 0.3, 0);
  s = split_tangent(h, one, wj);
  CHECK(s.vert.norm() < 1e-15);
  const BaseVector d = d_project(h, one, wj);
  CHECK(d.norm() == doctest::Approx(2 * 0.3).epsilon(1e-12));
  CHECK(base_norm(h, d) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK((d - fd_project(h, one, wj)).norm() < 1e-6);

  sampling::Rng rng(5);
  for (const auto& m : {h, FibrationModel::lens(2), FibrationModel::flat_t3()}) {
    for (int k = 0; k < 20; ++k) {
      const auto q = sampling::random_point(rng, m);
      const auto w = sampling::random_tangent(rng, m, q);
      const auto sp = split_tangent(m, q, w);
      CHECK((sp.vert + sp.horiz - w).norm() < 1e-14);
      CHECK(std::abs(total_inner(m, sp.vert, sp.horiz)) < 1e-12);
      CHECK(d_project(m, q, sp.vert).norm() < 1e-10);
      CHECK((fd_project(m, q, sp.vert)).norm() < 1e-8);
    }
  }
  CHECK_THROWS_AS(split_tangent(h, one, TotalVector(1, 0, 0, 0)), Error);
}

TEST_CASE("base_geodesic") {
  const auto t2 = FibrationModel::flat_t2();
  const auto h = FibrationModel::hopf();
  const auto x = bp(t2, {0.9});
  CHECK(base_geodesic(t2, x, BaseVector(0.3, 0, 0), 1.0).c[0] == doctest::Approx(0.2));
  CHECK(base_geodesic(t2, x, BaseVector::Zero(), 5.0).c[0] == doctest::Approx(0.9));
  const auto e1 = bp(h, {1, 0, 0});
  const auto y = base_geodesic(h, e1, BaseVector(0, kPi / 2, 0), 1.0);
  CHECK((y.c - Eigen::Vector3d(0, 1, 0)).norm() < 1e-12);
  CHECK_THROWS_AS(base_geodesic(h, e1, BaseVector(0, kPi, 0), 1.0), Error);
  const auto v = base_log(h, e1, y);
  CHECK((v - BaseVector(0, kPi / 2, 0)).norm() < 1e-12);
  CHECK(base_distance(h, e1, y) == doctest::Approx(kPi / 4));
}

TEST_CASE("horizontal_lift_vec") {
  const auto t2 = FibrationModel::flat_t2();
  for (double yy : {0.0, 0.3, 0.8}) {
    const auto l = horizontal_lift_vec(t2, tp(t2, {0.4, yy}), BaseVector(0.7, 0, 0));
    CHECK(l.w.isApprox(TotalVector(0.7, 0, 0, 0)));
  }
  const auto h = FibrationModel::hopf();
  const auto one = tp(h, {1, 0, 0, 0});
  CHECK(horizontal_lift_vec(h, one, BaseVector::Zero()).w.norm() == 0.0);
  // base direction along j at project(1) = i
  const auto l = horizontal_lift_vec(h, one, BaseVector(0, 0.5, 0));
  CHECK(std::abs(l.w[0]) + std::abs(l.w[1]) < 1e-14);
  CHECK((fd_project(h, one, l.w) - BaseVector(0, 0.5, 0)).norm() < 1e-8);
  CHECK_THROWS_AS(horizontal_lift_vec(h, one, BaseVector(1, 0, 0)), Error);

  // submersion: |d pi (h)| = |h| on random points
  sampling::Rng rng(6);
  for (const auto& m : {h, FibrationModel::lens(3), t2, FibrationModel::flat_t3()}) {
    for (int k = 0; k < 50; ++k) {
      const auto q = sampling::random_point(rng, m);
      const auto v = sampling::random_base_tangent(rng, m, project(m, q));
      const auto lv = horizontal_lift_vec(m, q, v);
      CHECK(total_norm(m, split_tangent(m, q, lv.w).vert) < 1e-12);
      CHECK(total_norm(m, lv.w) == doctest::Approx(base_norm(m, v)).epsilon(1e-10));
      CHECK((fd_project(m, q, lv.w) - v).norm() < 1e-6);
    }
  }
}

TEST_CASE("horizontal_transport") {
  const auto t2 = FibrationModel::flat_t2();
  const auto q = tp(t2, {0.1, 0.6});
  const auto r = horizontal_transport(t2, q, bp(t2, {0.75}));
  CHECK(r.c[0] == doctest::Approx(0.75));
  CHECK(r.c[1] == doctest::Approx(0.6));

  const auto h = FibrationModel::hopf();
  sampling::Rng rng(7);
  for (int k = 0; k < 10; ++k) {
    const auto p = sampling::random_point(rng, h);
    CHECK(total_distance(h, horizontal_transport(h, p, project(h, p)), p) < 1e-14);
    BaseVector v = sampling::random_base_tangent(rng, h, project(h, p));
    v *= 1.5 / v.norm();
    const auto x = base_geodesic(h, project(h, p), v, 1.0);
    const auto res = horizontal_transport_ex(h, p, x);
    CHECK(base_angle(h, project(h, res.point), x) < 1e-9);

    // same-fiber distances
    const auto p2 = fiber_geodesic(h, p, 0.9);
    const double d0 = total_distance(h, p, p2);
    const double d1 = total_distance(h, res.point, horizontal_transport(h, p2, x));
    CHECK(std::abs(d0 - d1) < 1e-7);

    // composition along one geodesic
    const auto xm = base_geodesic(h, project(h, p), v, 0.4);
    const auto two = horizontal_transport(h, horizontal_transport(h, p, xm), x);
    CHECK(total_distance(h, two, res.point) < 1e-7);
  }
  const auto far = bp(h, {-1, 0.01, 0});
  CHECK_THROWS_AS(horizontal_transport(h, tp(h, {1, 0, 0, 0}), far), Error);
}

TEST_CASE("adapted_exp") {
  const auto t2 = FibrationModel::flat_t2();
  const auto p = tp(t2, {0.8, 0.9});
  CHECK(total_distance(t2, adapted_exp(t2, p, TotalVector::Zero()), p) == 0.0);
  const auto r = adapted_exp(t2, p, TotalVector(0.3, 0.25, 0, 0));
  CHECK(r.c[0] == doctest::Approx(0.1));
  CHECK(r.c[1] == doctest::Approx(0.15));

  const auto h = FibrationModel::hopf();
  sampling::Rng rng(8);
  for (int k = 0; k < 20; ++k) {
    const auto q = sampling::random_point(rng, h);
    const TotalVector vert = 1.3 * vertical_unit(h, q);
    CHECK(base_angle(h, project(h, adapted_exp(h, q, vert)), project(h, q)) < 1e-10);
  }
}

TEST_CASE("lens deck invariance") {
  const auto l3 = FibrationModel::lens(3);
  sampling::Rng rng(9);
  for (int k = 0; k < 20; ++k) {
    const auto q = sampling::random_point(rng, l3);
    // deck generator: right multiplication by exp(2 pi i / 3)
    const Quat g = Quat::exp_pure(Eigen::Vector3d::UnitX(), 2 * kPi / 3);
    TotalPoint q2 = from_quat(as_quat(q) * g);
    q2 = canonicalize(l3, q2);
    CHECK((q2.c - q.c).norm() < 1e-12);
    CHECK((project(l3, q2).c - project(l3, q).c).norm() < 1e-12);
  }
}
