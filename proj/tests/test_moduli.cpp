#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fiberlab/circle_diffeo.hpp"
#include "fiberlab/error.hpp"
#include "fiberlab/quaternion.hpp"
#include "fiberlab/moduli.hpp"
#include "fiberlab/sampling.hpp"

using namespace fiberlab;
using namespace fiberlab::moduli;
namespace g = fiberlab::geometry;
using g::BasePoint;
using g::BaseVector;
constexpr double kPi = std::numbers::pi;

namespace {

const auto kT2 = FibrationModel::flat_t2();
const auto kT3 = FibrationModel::flat_t3();
const auto kHopf = FibrationModel::hopf();

FiberShape flat_curve(int m, double (*x)(double), double (*y)(double)) {
  FiberShape S{kT2, {}};
  for (int k = 0; k < m; ++k) {
    const double t = static_cast<double>(k) / m;
    Eigen::VectorXd c(2);
    c << x(t), y(t);
    S.samples.push_back(g::make_point(kT2, c));
  }
  return S;
}

BasePoint unit(const Eigen::Vector3d& v) {
  BasePoint x;
  x.c = v.normalized();
  return x;
}

}  // namespace

TEST_CASE("weighted and karcher centers") {
  const auto x0 = unit({1, 0.2, -0.3});
  // a shape projecting to a single point
  const auto S = model_fiber_shape(kHopf, x0, 32);
  CHECK(g::base_angle(kHopf, karcher_center(S), x0) < 1e-12);

  // symmetric pair about x0 along a great circle
  const auto basis = g::base_tangent_basis(kHopf, x0);
  const auto a = g::base_geodesic(kHopf, x0, 0.4 * basis[0], 1.0);
  const auto b = g::base_geodesic(kHopf, x0, -0.4 * basis[0], 1.0);
  CHECK(g::base_angle(kHopf, weighted_center(kHopf, {a, b}, {0.5, 0.5}), x0) < 1e-12);
  // unequal weights move the center along the geodesic in proportion
  const auto c = weighted_center(kHopf, {a, b}, {0.75, 0.25});
  CHECK(g::base_angle(kHopf, c, g::base_geodesic(kHopf, x0, 0.2 * basis[0], 1.0)) < 1e-10);

  const auto far = unit(-x0.c + Eigen::Vector3d(0, 0.05, 0));
  CHECK_THROWS_AS(weighted_center(kHopf, {x0, far}, {0.5, 0.5}), Error);
}

TEST_CASE("brute_center agrees with karcher_center") {
  sampling::Rng rng(21);
  const auto x0 = unit({0.3, -1, 0.4});
  const auto bs = brute_center(model_fiber_shape(kHopf, x0, 16), 41);
  CHECK(g::base_angle(kHopf, bs.center, x0) < 1e-12);

  for (const auto& m : {kHopf, kT2, kT3}) {
    for (int s = 0; s < 5; ++s) {
      const auto S = sampling::random_shape(rng, m, 32, m.spherical() ? 0.3 : 0.2);
      const auto k = karcher_center(S);
      const auto b = brute_center(S, 200);
      const Eigen::Vector2d d = normal_coordinates(m, b, k) - b.coords;
      CHECK(d.cwiseAbs().maxCoeff() <= b.cell * (1 + 1e-9));
    }
  }
}

TEST_CASE("karcher_center is isometry equivariant") {
  sampling::Rng rng(22);
  for (const auto& m : {kHopf, kT2, kT3}) {
    for (int s = 0; s < 5; ++s) {
      const auto S = sampling::random_shape(rng, m, 32, 0.2);
      const auto h = sampling::random_isometry(rng, m, true);
      FiberShape hS{m, {}};
      for (const auto& p : S.samples) hS.samples.push_back(g::apply(m, h, p));
      CHECK(g::base_angle(m, karcher_center(hS), g::apply_base(m, h, karcher_center(S))) < 1e-9);
    }
  }
}

TEST_CASE("normal_graph") {
  const auto x0 = unit({0, 0.6, 0.8});
  const auto E = model_fiber_shape(kHopf, x0, 48);
  const auto G = normal_graph(E, x0);
  for (std::size_t k = 0; k < E.samples.size(); ++k) {
    CHECK(g::total_distance(kHopf, G.images[k], E.samples[k]) < 1e-10);
  }

  const auto S = flat_curve(64, [](double t) { return 0.4 + 0.05 * std::sin(2 * kPi * t); },
                            [](double t) { return t; });
  Eigen::VectorXd c(1);
  c << 0.4;
  const auto x = g::make_base_point(kT2, c);
  const auto Gf = normal_graph(S, x);
  for (int k = 0; k < 64; ++k) {
    CHECK(std::abs(Gf.images[k].c[0] - 0.4) < 1e-12);
    CHECK(circle::circle_distance(Gf.images[k].c[1], k / 64.0) < 1e-9);
  }

  sampling::Rng rng(23);
  FiberShape D{kHopf, {}};
  for (const auto& p : E.samples) {
    g::TotalVector w = sampling::random_tangent(rng, kHopf, p);
    w *= 0.05 / w.norm();
    D.samples.push_back(g::adapted_exp(kHopf, p, w));
  }
  const auto GD = normal_graph(D, x0);
  CHECK(GD.max_distance < 0.08);
  double direct = 0.0;
  for (std::size_t k = 0; k < D.samples.size(); ++k)
    direct = std::max(direct, g::total_distance(kHopf, D.samples[k], GD.images[k]));
  CHECK(direct == doctest::Approx(GD.max_distance).epsilon(1e-9));

  // a fiber far from E_x is outside the tube
  CHECK_THROWS_AS(normal_graph(model_fiber_shape(kHopf, unit({0, -0.6, -0.8}), 16), x0), Error);
}

TEST_CASE("straighten") {
  for (const auto& m : {kT2, kT3, kHopf, FibrationModel::lens(2)}) {
    const auto F = model_fibering(m, m.kind() == g::ModelKind::FlatT3 ? 16 : 32, 32);
    const auto [S, rep] = straighten(F);
    CHECK(sample_distance(F, S) < 1e-12);
    CHECK(rep.max_residual < 1e-12);
    CHECK(rep.injective);
    const auto [S2, rep2] = straighten(S);
    CHECK(sample_distance(S2, S) < 1e-14);  // recomputed centers agree to rounding
  }

  sampling::Rng rng(24);
  for (const auto& m : {kT2, kHopf}) {
    const auto F = model_fibering(m, 32, 64);
    // equivariance under automorphisms
    const auto X = sampling::random_field(rng, m, 32, 64, 1.0);
    const auto P = perturb(F, X, 0.02);
    const auto h = sampling::random_isometry(rng, m, true);
    const auto a = straighten(push(P, h)).first;
    const auto b = push(straighten(P).first, h);
    CHECK(sample_distance(a, b) < 1e-6);

    // fair perturbations straighten back to the model
    const auto Xf = sampling::random_fair_field(rng, m, 32, 64, 1.0);
    StraightenOptions o;
    o.measure = FiberMeasure::Intrinsic;
    const auto R = straighten(perturb(F, Xf, 0.02), o).first;
    CHECK(sample_distance(R, F) < 1e-6);
  }
}

TEST_CASE("refine") {
  const auto F = model_fibering(kHopf, 32, 32);
  const auto [R0, rep0] = refine(F, 4);
  CHECK(sample_distance(R0, F) < 1e-12);
  CHECK(rep0.converged);

  sampling::Rng rng(25);
  const auto X = sampling::random_field(rng, kHopf, 32, 32, 1.0);
  const auto P = perturb(F, X, 0.05);
  const auto [R, rep] = refine(P, 5);
  REQUIRE(rep.residuals.size() >= 2);
  CHECK(rep.residuals[1] < 0.5 * rep.residuals[0]);
  for (std::size_t k = 1; k < rep.residuals.size(); ++k) CHECK(rep.residuals[k] <= rep.residuals[k - 1]);

  const auto P2 = perturb(F, X, 0.02);
  CHECK(sample_distance(refine(P2, 1).first, straighten(P2).first) < 1e-9);
}

TEST_CASE("slope") {
  const auto mer = flat_curve(32, [](double) { return 0.3; }, [](double t) { return t; });
  CHECK(slope(mer).str() == "(0,1)");
  const auto l12 = flat_curve(64, [](double t) { return t; }, [](double t) { return 2 * t; });
  CHECK(slope(l12).v == std::vector<long>{1, 2});
  const auto p12 = flat_curve(128, [](double t) { return t; },
                              [](double t) { return 2 * t + 0.3 * std::sin(2 * kPi * t); });
  CHECK(slope(p12).v == std::vector<long>{1, 2});
  // reversed traversal
  FiberShape rev = l12;
  std::reverse(rev.samples.begin(), rev.samples.end());
  CHECK(slope(rev).v == std::vector<long>{1, 2});
  CHECK(slope(rev, true).v == std::vector<long>{-1, -2});
  const auto l24 = flat_curve(128, [](double t) { return 2 * t; }, [](double t) { return 4 * t; });
  CHECK_THROWS_AS(slope(l24), Error);
  const auto coarse = flat_curve(4, [](double t) { return t; }, [](double t) { return 3 * t; });
  CHECK_THROWS_AS(slope(coarse), Error);
  CHECK_THROWS_AS(slope(model_fiber_shape(kHopf, unit({1, 0, 0}), 8)), Error);

  // flat-t3 fibers are the z circles
  const auto F3 = model_fibering(kT3, 16, 16);
  CHECK(slope(F3.fibers[3]).v == std::vector<long>{0, 0, 1});

  // invariance under perturbation
  sampling::Rng rng(26);
  const auto F = perturb(model_fibering(kT2, 16, 32), sampling::random_field(rng, kT2, 16, 32, 1.0), 0.02);
  for (const auto& S : F.fibers) CHECK(slope(S).v == std::vector<long>{0, 1});
}

TEST_CASE("core_membership") {
  const auto F = model_fibering(kT2, 16, 32);
  const auto c = core_membership(F);
  CHECK(c.kind == CoreDescriptor::Kind::Slope);
  CHECK(c.slope.str() == "(0,1)");

  sampling::Rng rng(27);
  const auto H = model_fibering(kHopf, 32, 32);
  for (int s = 0; s < 10; ++s) {
    const auto iso = sampling::random_isometry(rng, kHopf, false);
    const auto d = core_membership(push(H, iso));
    REQUIRE(d.kind == CoreDescriptor::Kind::SphereDirection);
    CHECK(d.chirality == iso.eps);
    if (iso.eps == 1) {
      // q2 i q2^-1 by hand
      const Quat r = iso.right;
      const Quat u = r * kQuatI * r.conj();
      CHECK((d.direction - Eigen::Vector3d(u.x, u.y, u.z)).norm() < 1e-8);
    }
  }
  const auto P = perturb(H, sampling::random_field(rng, kHopf, 32, 32, 1.0), 0.05);
  CHECK(core_membership(P).kind == CoreDescriptor::Kind::NotInCore);
  const auto PT = perturb(F, sampling::random_field(rng, kT2, 16, 32, 1.0), 0.05);
  CHECK(core_membership(PT).kind == CoreDescriptor::Kind::NotInCore);
}

TEST_CASE("perturb") {
  sampling::Rng rng(28);
  const auto F = model_fibering(kT2, 16, 32);
  const auto X = sampling::random_field(rng, kT2, 16, 32, 1.0);
  CHECK(sample_distance(perturb(F, X, 0.0), F) == 0.0);
  const auto V = fields::vertical_part(X);
  const auto PV = perturb(F, V, 0.1);
  for (int i = 0; i < 16; ++i)
    for (const auto& p : PV.fibers[i].samples) CHECK(g::base_angle(kT2, g::project(kT2, p), F.base[i]) < 1e-14);
  // large fields merge neighbouring fibers
  const auto Xh = fields::horizontal_part(sampling::random_field(rng, kT2, 16, 32, 1.0));
  CHECK_THROWS_AS(perturb(F, Xh, 5.0), Error);
  CHECK_THROWS_AS(perturb(F, sampling::random_field(rng, kT2, 8, 32, 1.0), 0.01), Error);
}
