#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fiberlab/error.hpp"
#include "fiberlab/fields.hpp"
#include "fiberlab/sampling.hpp"

using namespace fiberlab;
using namespace fiberlab::fields;
namespace g = fiberlab::geometry;
constexpr double kPi = std::numbers::pi;

namespace {

const auto kT2 = FibrationModel::flat_t2();

FieldGrid flat(int nb, int nf, double (*a)(double, double), double (*b)(double, double)) {
  return FieldGrid::from_function(kT2, nb, nf, [=](const TotalPoint& p, int, int) {
    return TotalVector(a(p.c[0], p.c[1]), b(p.c[0], p.c[1]), 0, 0);
  });
}

double max_diff(const FieldGrid& X, const FieldGrid& Y) { return sup_norm(X - Y); }

BaseFieldGrid random_base_field(sampling::Rng& rng, const FibrationModel& m, int nb) {
  BaseFieldGrid Y(m, nb);
  for (int i = 0; i < nb; ++i) Y.set(i, sampling::random_base_tangent(rng, m, Y.nodes()[i]));
  return Y;
}

}  // namespace

TEST_CASE("grid layout") {
  const auto X = flat(8, 4, [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
  CHECK(X.node(3, 1).c[0] == doctest::Approx(3.0 / 8));
  CHECK(X.node(3, 1).c[1] == doctest::Approx(1.0 / 4));
  FieldGrid Z(FibrationModel::hopf(), 4, 4);
  CHECK_THROWS_AS(Z.set(0, 0, Z.node(0, 0).c), Error);
}

TEST_CASE("is_projectable") {
  sampling::Rng rng(1);
  for (const auto& m : {kT2, FibrationModel::hopf(), FibrationModel::lens(2)}) {
    const auto Y = random_base_field(rng, m, 16);
    const auto P = is_projectable(horizontal_lift_field(Y, 16), 1e-9);
    REQUIRE(P.projectable);
    for (int i = 0; i < 16; ++i) CHECK((P.projection->at(i) - Y.at(i)).norm() < 1e-9);

    const auto V = FieldGrid::from_function(m, 16, 8, [&](const TotalPoint& p, int i, int j) {
      return TotalVector((1.0 + 0.1 * i + 0.3 * std::sin(j)) * g::vertical_unit(m, p));
    });
    const auto PV = is_projectable(V, 1e-12);
    CHECK(PV.projectable);
    CHECK(sup_norm(*PV.projection) < 1e-12);
  }
  const auto A = flat(16, 16, [](double x, double y) { return std::cos(2 * kPi * x) * std::sin(2 * kPi * y); },
                      [](double, double) { return 0.0; });
  const auto PA = is_projectable(A, 1e-6);
  CHECK_FALSE(PA.projectable);
  // direct spread: a varies across each fiber by up to |cos(2 pi x)|
  double spread = 0.0;
  for (int i = 0; i < 16; ++i) {
    double mean = 0.0;
    for (int j = 0; j < 16; ++j) mean += A.at(i, j)[0] / 16;
    for (int j = 0; j < 16; ++j) spread = std::max(spread, std::abs(A.at(i, j)[0] - mean));
  }
  CHECK(PA.spread == doctest::Approx(spread).epsilon(1e-12));
}

TEST_CASE("horizontal_center") {
  const auto V = flat(8, 8, [](double, double) { return 0.0; }, [](double x, double y) { return x + y; });
  CHECK(sup_norm(horizontal_center(V)) == 0.0);
  const auto C = flat(8, 8, [](double, double) { return 0.4; }, [](double, double) { return 0.0; });
  const auto cc = horizontal_center(C);
  for (int i = 0; i < 8; ++i) CHECK(cc.at(i)[0] == doctest::Approx(0.4));
  const auto S = flat(8, 32, [](double, double y) { return std::sin(2 * kPi * y); }, [](double, double) { return 0.0; });
  CHECK(sup_norm(horizontal_center(S)) < 1e-10);
}

TEST_CASE("horizontal_lift_field") {
  BaseFieldGrid Y0(kT2, 8);
  CHECK(sup_norm(horizontal_lift_field(Y0, 8)) == 0.0);
  BaseFieldGrid Y(kT2, 8);
  for (int i = 0; i < 8; ++i) Y.set(i, BaseVector(0.25, 0, 0));
  const auto L = horizontal_lift_field(Y, 4);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 4; ++j) CHECK(L.at(i, j).isApprox(TotalVector(0.25, 0, 0, 0)));

  sampling::Rng rng(2);
  const auto m = FibrationModel::hopf();
  const auto Yh = random_base_field(rng, m, 32);
  const auto P = is_projectable(horizontal_lift_field(Yh, 16), 1e-8);
  REQUIRE(P.projectable);
  for (int i = 0; i < 32; ++i) CHECK((P.projection->at(i) - Yh.at(i)).norm() < 1e-8);
}

TEST_CASE("horizontal_average and splitting") {
  sampling::Rng rng(3);
  for (const auto& m : {kT2, FibrationModel::flat_t3(), FibrationModel::hopf()}) {
    const int nb = m.kind() == g::ModelKind::FlatT3 ? 16 : 32;
    const auto X = sampling::random_field(rng, m, nb, 32, 1.0);
    const auto R = horizontal_average(X);
    CHECK(max_diff(horizontal_average(R), R) < 1e-10);
    CHECK(is_projectable(R, 1e-9).projectable);
    const auto F = fair_part(X);
    CHECK(max_diff(F + R, X) < 1e-12);
    CHECK(sup_norm(vertical_part(F)) < 1e-10);
    CHECK(sup_norm(horizontal_center(F)) < 1e-10);
    CHECK(sup_norm(horizontal_average(F)) < 1e-10);
    CHECK(std::abs(l2_inner(F, R)) / (l2_norm(F) * l2_norm(R)) < 1e-8);

    // basic fields are orthogonal to vertical ones pointwise
    const auto B = horizontal_lift_field(horizontal_center(X), 32);
    const auto V = vertical_part(X);
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < 32; ++j) CHECK(std::abs(g::total_inner(m, B.at(i, j), V.at(i, j))) < 1e-12);

    // linearity
    const auto Z = sampling::random_field(rng, m, nb, 32, 1.0);
    CHECK(max_diff(horizontal_average(0.3 * X + (-1.7) * Z),
                   0.3 * horizontal_average(X) + (-1.7) * horizontal_average(Z)) < 1e-10);
  }
}

TEST_CASE("flat-t2 split against a closed form") {
  // X = (a, b): fair part is (a - mean_y a, 0)
  const auto X = flat(64, 64,
                      [](double x, double y) { return std::sin(2 * kPi * (x + y)) + 0.3 * std::cos(2 * kPi * x); },
                      [](double x, double y) { return std::cos(2 * kPi * x * 3) * std::sin(2 * kPi * y); });
  const auto F = fair_part(X);
  double err = 0.0;
  for (int i = 0; i < 64; ++i) {
    const double x = i / 64.0;
    for (int j = 0; j < 64; ++j) {
      const double y = j / 64.0;
      err = std::max(err, std::abs(F.at(i, j)[0] - std::sin(2 * kPi * (x + y))));
      err = std::max(err, std::abs(F.at(i, j)[1]));
    }
  }
  CHECK(err < 1e-12);
}

TEST_CASE("l2_inner") {
  sampling::Rng rng(4);
  const auto X = sampling::random_field(rng, kT2, 16, 16, 1.0);
  CHECK(l2_inner(X, FieldGrid(kT2, 16, 16)) == 0.0);
  CHECK(std::abs(l2_inner(vertical_part(X), horizontal_part(X))) < 1e-12);
  // constant unit field on the unit-volume torus has squared norm 1
  const auto U = flat(16, 16, [](double, double) { return 1.0; }, [](double, double) { return 0.0; });
  CHECK(l2_norm(U) == doctest::Approx(1.0));
  CHECK_THROWS_AS(l2_inner(X, FieldGrid(kT2, 16, 8)), Error);
}

TEST_CASE("bracket of projectable fields is projectable") {
  auto P1 = flat(128, 128, [](double x, double) { return 0.2 * std::sin(2 * kPi * x); },
                 [](double x, double y) { return std::cos(2 * kPi * (x + 2 * y)); });
  auto P2 = flat(128, 128, [](double x, double) { return 0.1 + 0.3 * std::cos(4 * kPi * x); },
                 [](double x, double y) { return std::sin(2 * kPi * y) * std::sin(2 * kPi * x); });
  CHECK(is_projectable(P1, 1e-12).projectable);
  const auto Br = lie_bracket_flat_t2(P1, P2);
  CHECK(is_projectable(Br, 1e-4).projectable);
  CHECK_THROWS_AS(lie_bracket_flat_t2(FieldGrid(FibrationModel::hopf(), 4, 4), FieldGrid(FibrationModel::hopf(), 4, 4)),
                  Error);
}
