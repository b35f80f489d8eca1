#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fiberlab/csf.hpp"
#include "fiberlab/error.hpp"
#include "fiberlab/sampling.hpp"

using namespace fiberlab;
using namespace fiberlab::csf;
constexpr double kPi = std::numbers::pi;

namespace {

const Eigen::Vector2i k12(1, 2);

double max_move(const CurveState& a, const CurveState& b) {
  double d = 0.0;
  for (int i = 0; i < a.size(); ++i) d = std::max(d, (a.points()[i] - b.points()[i]).norm());
  return d;
}

// Brute min-image distance between samples of different curves.
double brute_pair_distance(const std::vector<CurveState>& cs) {
  double best = 1e9;
  for (std::size_t a = 0; a < cs.size(); ++a)
    for (std::size_t b = a + 1; b < cs.size(); ++b)
      for (const auto& p : cs[a].points())
        for (const auto& q : cs[b].points()) {
          Vec2 d = p - q;
          d = d.unaryExpr([](double v) { return v - std::round(v); });
          best = std::min(best, d.norm());
        }
  return best;
}

// Offset of each sample from the best-fit straight line of the given slope.
double line_fit_error(const CurveState& C, const Eigen::Vector2i& s) {
  const Vec2 n = Vec2(-s[1], s[0]).normalized();
  double mean = 0.0;
  for (const auto& p : C.points()) mean += n.dot(p) / C.size();
  double e = 0.0;
  for (const auto& p : C.points()) e = std::max(e, std::abs(n.dot(p) - mean));
  return e;
}

}  // namespace

TEST_CASE("curve state") {
  const auto L = line(k12, 64);
  CHECK(L.size() == 64);
  CHECK(L.winding() == k12);
  CHECK(L.length() == doctest::Approx(std::sqrt(5.0)));
  CHECK(L.spacing_ratio() == doctest::Approx(1.0));
  CHECK((L.at(64) - (L.at(0) + Vec2(1, 2))).norm() < 1e-14);
  CHECK((L.at(-1) - (L.at(63) - Vec2(1, 2))).norm() < 1e-14);
  CHECK_THROWS_AS(CurveState({Vec2(0, 0), Vec2(0.1, 0)}, Eigen::Vector2i(1, 0)), Error);
  // shape round trip recovers the winding from the samples alone
  const auto P = perturbed_line(Eigen::Vector2i(2, -1), 128, Vec2(0.1, 0.3), 0.05, 0.4);
  const auto Q = CurveState::from_shape(P.to_shape());
  CHECK(Q.winding() == Eigen::Vector2i(2, -1));
  CHECK(max_move(P, Q) < 1e-12);
}

TEST_CASE("curvature") {
  for (double k : curvature(line(k12, 100))) CHECK(std::abs(k) < 1e-10);

  for (double R : {0.05, 0.1, 0.2}) {
    const auto kap = curvature(csf::circle(Vec2(0.5, 0.5), R, 512));
    for (double k : kap) CHECK(std::abs(k - 1.0 / R) < 1e-3 / R);
  }

  // graph y = x + 0.1 sin(2 pi x), analytic curvature scanned densely
  const int m = 1024;
  std::vector<Vec2> pts;
  for (int i = 0; i < m; ++i) {
    const double x = static_cast<double>(i) / m;
    pts.emplace_back(x, x + 0.1 * std::sin(2 * kPi * x));
  }
  const CurveState G(pts, Eigen::Vector2i(1, 1));
  double kmax = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = i / 100000.0;
    const double y1 = 1 + 0.2 * kPi * std::cos(2 * kPi * x);
    const double y2 = -0.4 * kPi * kPi * std::sin(2 * kPi * x);
    kmax = std::max(kmax, std::abs(y2) / std::pow(1 + y1 * y1, 1.5));
  }
  CHECK(std::abs(max_abs_curvature(G) - kmax) < 1e-3 * kmax);

  std::vector<Vec2> dup = {Vec2(0, 0), Vec2(0, 0), Vec2(0.5, 0), Vec2(0.7, 0.2)};
  CHECK_THROWS_AS(curvature(CurveState(dup, Eigen::Vector2i(1, 0))), Error);
}

TEST_CASE("csf_step") {
  const auto L = line(k12, 256, Vec2(0.2, 0.1));
  const double dt = stable_dt(L, 0.2);
  auto C = L;
  for (int s = 0; s < 100; ++s) C = csf_step(C, dt);
  CHECK(max_move(C, L) < 1e-12);
  CHECK_THROWS_AS(csf_step(L, 0.6 * L.min_spacing() * L.min_spacing()), Error);
  CHECK_THROWS_AS(stable_dt(L, 0.6), Error);
  CHECK_THROWS_AS(stable_dt(L, 0.0), Error);

  // length audit on random smooth curves
  sampling::Rng rng(31);
  int grew = 0;
  for (int s = 0; s < 100; ++s) {
    const int mode = 1 + s % 3;
    auto P = perturbed_line(Eigen::Vector2i(1, s % 2), 128, Vec2(sampling::uniform(rng), 0),
                            sampling::uniform(rng, 0.01, 0.08) / mode, sampling::uniform(rng, 0, 6.28), mode);
    const double before = P.length();
    const auto Q = csf_step(P, stable_dt(P, 0.5));
    grew += Q.length() > before + 1e-12;
  }
  CHECK(grew == 0);
}

TEST_CASE("shrinking circle") {
  const double R0 = 0.2;
  FlowParams prm;
  prm.t_max = 1.0;
  for (int k = 1; k <= 4; ++k) {
    const double T = 0.12 * k * R0 * R0;
    const auto r = flow_for(csf::circle(Vec2(0.5, 0.5), R0, 512), T, prm);
    const auto& C = r.curves.front();
    double R2 = 0.0;
    Vec2 c = Vec2::Zero();
    for (const auto& p : C.points()) c += p / C.size();
    for (const auto& p : C.points()) R2 += (p - c).squaredNorm() / C.size();
    CHECK(std::abs(R2 + 2 * T - R0 * R0) / (R0 * R0) < 1e-2);
    CHECK(r.t == doctest::Approx(T).epsilon(1e-12));
  }
}

TEST_CASE("resample and intersections") {
  const auto P = perturbed_line(k12, 256, Vec2::Zero(), 0.08, 0.0, 2);
  const auto U = resample_uniform(P);
  // oracle: point k of U sits on the old polygon at arclength k L / m
  {
    const int m = P.size();
    std::vector<double> cum(m + 1, 0.0);
    for (int i = 0; i < m; ++i) cum[i + 1] = cum[i] + (P.at(i + 1) - P.at(i)).norm();
    double err = 0.0;
    for (int k = 0; k < m; ++k) {
      const double s = cum[m] * k / m;
      int i = 0;
      while (i < m - 1 && cum[i + 1] < s) ++i;
      const Vec2 want = P.at(i) + (s - cum[i]) / (cum[i + 1] - cum[i]) * (P.at(i + 1) - P.at(i));
      err = std::max(err, (U.points()[k] - want).norm());
    }
    CHECK(err < 1e-12);
  }
  CHECK(U.spacing_ratio() < 1.001);
  CHECK(U.length() <= P.length() + 1e-14);
  CHECK((U.points()[0] - P.points()[0]).norm() == 0.0);
  CHECK(U.winding() == P.winding());
  CHECK_FALSE(self_intersects(P));

  // a bow tie crosses itself
  std::vector<Vec2> bow = {Vec2(0.2, 0.2), Vec2(0.4, 0.4), Vec2(0.4, 0.2), Vec2(0.2, 0.4)};
  CHECK(self_intersects(CurveState(bow, Eigen::Vector2i(0, 0))));

  const auto A = line(Eigen::Vector2i(0, 1), 64, Vec2(0.25, 0));
  const auto B = line(Eigen::Vector2i(1, 0), 64, Vec2(0, 0.25));
  CHECK(curves_cross({A, B}));  // they meet at a shared sample
  const auto B2 = line(Eigen::Vector2i(1, 0), 64, Vec2(0.003, 0.2517));
  CHECK(curves_cross({A, B2}));  // transversal, away from samples
  CHECK_FALSE(curves_cross(linear_curves(k12, 8, 64)));
}

TEST_CASE("min_pair_distance") {
  sampling::Rng rng(32);
  for (int s = 0; s < 10; ++s) {
    const auto phases = coherent_phases(k12, 8, sampling::uniform(rng, 0, 6.28));
    const auto cs = perturbed_linear_curves(k12, 64, 0.02, phases);
    const double brute = brute_pair_distance(cs);
    const double got = min_pair_distance(cs);
    if (brute < 1.0 / 16) {
      CHECK(got == doctest::Approx(brute).epsilon(1e-12));
    } else {
      CHECK(got <= brute);
    }
  }
}

TEST_CASE("coherent phases") {
  const auto ph = coherent_phases(k12, 4, 0.3);
  REQUIRE(ph.size() == 4);
  // equal increments; over all n fibers the phase advances by 2 pi k.(2,-1)/5 for any k
  // with k.(1,2) = 1, and that is 2/5 of a turn modulo whole turns
  const double step = ph[1] - ph[0];
  CHECK(ph[0] == doctest::Approx(0.3));
  for (int i = 1; i < 4; ++i) CHECK(ph[i] - ph[i - 1] == doctest::Approx(step));
  const double turns = 4 * step / (2 * kPi);
  CHECK(std::abs((turns - 0.4) - std::round(turns - 0.4)) < 1e-12);
  CHECK_THROWS_AS(coherent_phases(Eigen::Vector2i(2, 4), 4, 0.0), Error);
}

TEST_CASE("flow_until") {
  FlowParams prm;
  const auto r0 = flow_until(line(k12, 128), prm);
  CHECK(r0.steps == 0);
  CHECK(r0.t == 0.0);

  prm.t_max = 1.0;
  const auto r = flow_until(perturbed_line(k12, 256, Vec2(0.1, 0.0), 0.1, 0.7), prm);
  CHECK(r.max_kappa < 1e-3);
  CHECK(r.t <= 1.0);
  const auto& C = r.curves.front();
  CHECK(C.winding() == k12);
  CHECK(CurveState::from_shape(C.to_shape()).winding() == k12);
  CHECK(line_fit_error(C, k12) < 5e-3);
  // trace: length non-increasing, rows every stride
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].length <= r.trace[i - 1].length + 1e-12);

  FlowParams tight = prm;
  tight.t_max = 0.01;
  CHECK_THROWS_AS(flow_until(perturbed_line(k12, 128, Vec2::Zero(), 0.1, 0.0), tight), Error);

  // winding survives short flows of random perturbations
  sampling::Rng rng(33);
  for (int s = 0; s < 50; ++s) {
    const Eigen::Vector2i w(1 + s % 3, 1);
    const auto P = perturbed_line(w, 96, Vec2(sampling::uniform(rng), 0), sampling::uniform(rng, 0.01, 0.06),
                                  sampling::uniform(rng, 0, 6.28), 1 + s % 2);
    const auto f = flow_for(P, 0.002, prm);
    CHECK(CurveState::from_shape(f.curves.front().to_shape()).winding() == w);
  }
}

TEST_CASE("flow_fibering") {
  FlowParams prm;
  const auto lin = to_fibering(linear_curves(k12, 8, 64));
  const auto [S, r] = flow_fibering(lin, prm);
  CHECK(r.steps == 0);
  CHECK(moduli::sample_distance(S, lin) < 1e-12);
  CHECK_THROWS_AS(flow_fibering(moduli::model_fibering(geometry::FibrationModel::hopf(), 8, 16), prm), Error);

  sampling::Rng rng(34);
  prm.t_max = 2.0;
  for (int s = 0; s < 20; ++s) {
    auto ph = coherent_phases(k12, 4, sampling::uniform(rng, 0, 6.28));
    for (auto& p : ph) p += sampling::uniform(rng, -0.1, 0.1);
    const auto cs = perturbed_linear_curves(k12, 64, 0.05, ph);
    const auto [T, rr] = flow_fibering(to_fibering(cs), prm);
    CHECK(rr.min_pair_dist > 0.0);
    CHECK(rr.min_pair_dist <= brute_pair_distance(cs) + 1e-12);
    const auto core = moduli::core_membership(T, 5e-3);
    CHECK(core.kind == moduli::CoreDescriptor::Kind::Slope);
    CHECK(core.slope.str() == "(1,2)");
  }


  {
    auto ph = coherent_phases(k12, 8, 1.0);
    for (auto& p : ph) p += sampling::uniform(rng, -0.1, 0.1);
    const auto cs = perturbed_linear_curves(k12, 128, 0.05, ph);
    const auto rr = flow_curves(cs, prm);
    CHECK(rr.max_kappa < 1e-3);
    const auto core = moduli::core_membership(to_fibering(rr.curves), 5e-3);
    CHECK(core.slope.str() == "(1,2)");
  }

  // crossing families are rejected
  const auto A = line(Eigen::Vector2i(0, 1), 64, Vec2(0.25, 0));
  const auto B = line(Eigen::Vector2i(1, 0), 64, Vec2(0, 0.25));
  try {
    flow_curves({A, B}, prm);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DisjointnessLost);
  }
}
