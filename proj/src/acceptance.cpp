#include "fiberlab/acceptance.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "fiberlab/cech.hpp"
#include "fiberlab/circle_diffeo.hpp"
#include "fiberlab/csf.hpp"
#include "fiberlab/error.hpp"
#include "fiberlab/fields.hpp"
#include "fiberlab/geometry.hpp"
#include "fiberlab/moduli.hpp"
#include "fiberlab/sampling.hpp"

namespace fiberlab::acceptance {

namespace g = fiberlab::geometry;
using sampling::Rng;
using std::numbers::pi;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

// Collects measured worst cases and their thresholds.
class Audit {
 public:
  // Passes when value < limit.
  void below(const std::string& what, double value, double limit) {
    add(what, value, "<", limit, value < limit);
  }
  void above(const std::string& what, double value, double limit) {
    add(what, value, ">", limit, value > limit);
  }
  void require(const std::string& what, bool ok) {
    sep();
    os_ << what << (ok ? " ok" : " FAILED");
    ok_ = ok_ && ok;
  }
  void note(const std::string& text) {
    sep();
    os_ << text;
  }
  bool ok() const { return ok_; }
  std::string str() const { return os_.str(); }

 private:
  void sep() {
    if (!first_) os_ << "; ";
    first_ = false;
  }
  void add(const std::string& what, double v, const char* rel, double limit, bool ok) {
    sep();
    os_ << what << " " << sci(v) << " " << rel << " " << sci(limit) << (ok ? "" : " FAILED");
    ok_ = ok_ && ok;
  }
  std::ostringstream os_;
  bool ok_ = true;
  bool first_ = true;
};

Rng rng_for(const Options& o, int id) { return Rng(o.seed * 1000003ULL + static_cast<unsigned>(id)); }

// ---------------------------------------------------------------------------
// 1. Heat-flow retraction

void heat_flow(Audit& a, Rng& rng) {
  constexpr std::size_t n = 256;
  double h1 = 0.0, equiv = 0.0, min_fd = kInf, min_spectral = kInf;
  for (int s = 0; s < 50; ++s) {
    const auto f = sampling::random_diffeo(rng, n, 0.3);
    double mean = 0.0;
    for (std::size_t k = 0; k < n; ++k) mean += f.disp()[k];
    mean /= n;
    const auto H1 = circle::retract(f, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
      h1 = std::max(h1, circle::circle_distance(H1.disp()[k], mean));
    }

    const double theta = sampling::uniform(rng);
    const auto R = circle::CircleDiffeo::rotation(n, circle::Angle(theta));
    const auto Rinv = circle::CircleDiffeo::rotation(n, circle::Angle(-theta));
    const auto conj = circle::compose(circle::compose(R, f), Rinv);
    for (int ti = 0; ti <= 10; ++ti) {
      const double t = ti / 10.0;
      const auto Ht = circle::retract(f, t);
      const auto lhs = circle::retract(conj, t);
      const auto rhs = circle::compose(circle::compose(R, Ht), Rinv);
      equiv = std::max(equiv, circle::sup_distance(lhs, rhs));
      // Orientation: the lift x_k + u_k must increase from node to node.
      for (std::size_t k = 0; k < n; ++k) {
        const double next = Ht.disp()[(k + 1) % n];
        min_fd = std::min(min_fd, (next - Ht.disp()[k]) * static_cast<double>(n));
      }
      min_spectral = std::min(min_spectral, Ht.disp().min_derivative());
    }
  }
  a.below("H1 vs rotation by mean", h1, 1e-10);
  a.below("equivariance", equiv, 1e-8);
  a.above("min forward-difference u'", min_fd, -1.0);
  a.above("min spectral u'", min_spectral, -1.0);
}

// ---------------------------------------------------------------------------
// 2. Cech

double random_wave(Rng& rng, double amp, int kmax, std::vector<double>& coef) {
  coef.clear();
  for (int k = 1; k <= kmax; ++k) {
    coef.push_back(amp * sampling::normal(rng) / k);
    coef.push_back(sampling::uniform(rng, 0.0, 2 * pi));
  }
  return sampling::uniform(rng);
}

double eval_wave(const std::vector<double>& coef, double c, double x, double y = 0.0) {
  double v = c;
  for (std::size_t k = 0; k < coef.size() / 2; ++k) {
    v += coef[2 * k] * std::sin(2 * pi * (k + 1) * (x + 0.37 * y) + coef[2 * k + 1]);
  }
  return v;
}

void cech_suite(Audit& a, Rng& rng) {
  using namespace cech;
  // Residual of the coboundary action on the four-chart torus cover.
  const auto t2 = ModelCover::make(Base::T2, 16);
  double worst_gain = -kInf, min_input = kInf;
  for (int s = 0; s < 100; ++s) {
    std::vector<std::vector<double>> tc(6), kc(4);
    std::vector<double> tconst(6), kconst(4);
    for (int o = 0; o < 6; ++o) tconst[o] = random_wave(rng, 0.2, 2, tc[o]);
    for (int c = 0; c < 4; ++c) kconst[c] = random_wave(rng, 0.5, 3, kc[c]);
    const auto tau = Cocycle1::from_function(t2, [&](int i, int j, const CoverPoint& p) {
      const int o = t2->overlap_index(i, j);
      return eval_wave(tc[o], tconst[o], p[0], p[1]);
    });
    const auto kappa = Cochain0::from_function(t2, [&](int c, const CoverPoint& p) {
      return eval_wave(kc[c], kconst[c], p[1], p[0]);
    });
    const double r0 = cocycle_check(tau);
    const double r1 = cocycle_check(coboundary_act(tau, kappa));
    worst_gain = std::max(worst_gain, r1 - r0);
    min_input = std::min(min_input, r0);
  }
  a.below("residual gain under coboundary", worst_gain, 1e-12);
  a.note("min input residual " + sci(min_input));

  // Euler class: clutching degree d with a null-homotopic wiggle, then random coboundaries.
  const auto s2 = ModelCover::make(Base::S2, 256);
  int wrong_degree = 0, changed = 0, total = 0;
  for (int d = -3; d <= 3; ++d) {
    for (int variant = 0; variant < 3; ++variant) {
      std::vector<double> wc;
      random_wave(rng, variant == 0 ? 0.0 : 0.04, 3, wc);
      const auto tau = Cocycle1::from_function(s2, [&](int, int, const CoverPoint& p) {
        return circle::wrap01(d * p[0] + eval_wave(wc, 0.0, p[0]));
      });
      const long e0 = euler_class(tau);
      wrong_degree += e0 != d;
      const int reps = (d == 3 && variant == 2) ? 20 : 4;  // 100 coboundaries in total
      for (int r = 0; r < reps; ++r) {
        std::vector<std::vector<double>> kc(2);
        std::vector<double> kconst(2);
        for (int c = 0; c < 2; ++c) kconst[c] = random_wave(rng, 0.4, 3, kc[c]);
        const auto kappa = Cochain0::from_function(s2, [&](int c, const CoverPoint& p) {
          return eval_wave(kc[c], kconst[c], p[0]);
        });
        changed += euler_class(coboundary_act(tau, kappa)) != e0;
        ++total;
      }
    }
  }
  a.require("euler_class = clutching degree for d in [-3,3] (21 clutchings)", wrong_degree == 0);
  a.require("euler class invariant under " + std::to_string(total) + " coboundaries", changed == 0);

  // Classification table.
  struct Row {
    Base base;
    long e;
    const char* total;
    const char* core;
  };
  const Row rows[] = {
      {Base::S1, 0, "T2", "Zprim2"},
      {Base::T2, 0, "T3", "Zprim3"},
      {Base::T2, 1, "MT(T2,1)", "S0"},
      {Base::T2, 2, "MT(T2,2)", "S0"},
      {Base::T2, 5, "MT(T2,5)", "S0"},
      {Base::S2, 0, "S2xS1", "non-finite-dimensional"},
      {Base::S2, 1, "L(1,1)", "S2 ⊔ S2"},
      {Base::S2, -1, "L(1,1)", "S2 ⊔ S2"},
      {Base::S2, 2, "L(2,1)", "S2 ⊔ S2"},
      {Base::S2, -2, "L(2,1)", "S2 ⊔ S2"},
      {Base::S2, 3, "L(3,1)", "S0"},
      {Base::S2, 5, "L(5,1)", "S0"},
      {Base::S2, -7, "L(7,1)", "S0"},
  };
  int bad_rows = 0;
  for (const auto& r : rows) {
    const auto rec = classify(r.base, r.e);
    bad_rows += rec.total_space != r.total || rec.core != r.core;
  }
  for (long e : {1L, -1L, 3L}) {
    try {
      classify(Base::S1, e);
      ++bad_rows;
    } catch (const Error& err) {
      bad_rows += err.code() != ErrorCode::InvalidEuler;
    }
  }
  a.require("classification table (16 rows)", bad_rows == 0);
}

// ---------------------------------------------------------------------------
// 3. Geometry

// d_project oracle: central difference of the projection along a normalized path.
double projected_norm_fd(const g::FibrationModel& model, const g::TotalPoint& p,
                         const g::TotalVector& h) {
  constexpr double t = 1e-5;
  if (model.spherical()) {
    const Quat qp = Quat::from_vec4((p.c + t * h).normalized());
    const Quat qm = Quat::from_vec4((p.c - t * h).normalized());
    const Eigen::Vector3d xp = rotate(qp, Eigen::Vector3d::UnitX());
    const Eigen::Vector3d xm = rotate(qm, Eigen::Vector3d::UnitX());
    return 0.5 * (xp - xm).norm() / (2 * t);  // base sphere has radius 1/2
  }
  // Flat projection is linear: the difference quotient is exact.
  return h.head(model.base_coords()).norm();
}

void geometry_suite(Audit& a, Rng& rng) {
  const g::FibrationModel models[] = {g::FibrationModel::flat_t2(), g::FibrationModel::flat_t3(),
                                      g::FibrationModel::hopf(), g::FibrationModel::lens(3)};
  double sub = 0.0;
  for (const auto& model : models) {
    for (int s = 0; s < 1000; ++s) {
      const auto p = sampling::random_point(rng, model);
      const auto w = sampling::random_tangent(rng, model, p);
      g::TotalVector h = g::split_tangent(model, p, w).horiz;
      if (h.norm() < 1e-6) continue;
      h /= h.norm();
      const double base = projected_norm_fd(model, p, h);
      const double lib = g::base_norm(model, g::d_project(model, p, h));
      sub = std::max({sub, std::abs(base - 1.0), std::abs(lib - 1.0)});
    }
  }
  a.below("submersion norm rel. error (4000 pts)", sub, 1e-8);

  const auto hopf = g::FibrationModel::hopf();
  auto chord_dist = [](const g::TotalPoint& p, const g::TotalPoint& q) {
    return 2.0 * std::asin(std::min(1.0, 0.5 * (p.c - q.c).norm()));
  };
  double proj_err = 0.0, fiber_err = 0.0;
  for (int s = 0; s < 200; ++s) {
    const auto p = sampling::random_point(rng, hopf);
    const auto x0 = g::project(hopf, p);
    g::BasePoint x;
    do {
      x = sampling::random_base_point(rng, hopf);
    } while (std::acos(std::clamp(x.c.dot(x0.c), -1.0, 1.0)) > 0.85 * pi);
    const auto r = g::horizontal_transport_ex(hopf, p, x);
    proj_err = std::max(proj_err, (rotate(g::as_quat(r.point), Eigen::Vector3d::UnitX()) - x.c).norm());
    const auto p2 = g::fiber_geodesic(hopf, p, sampling::uniform(rng, 0.1, 3.0));
    const auto r2 = g::horizontal_transport(hopf, p2, x);
    fiber_err = std::max(fiber_err, std::abs(chord_dist(r.point, r2) - chord_dist(p, p2)));
  }
  a.below("transport endpoint projection error", proj_err, 1e-9);
  a.below("fiber distance drift", fiber_err, 1e-7);

  double min_det = kInf;
  constexpr double fd = 1e-6;
  for (int s = 0; s < 100; ++s) {
    const auto p = sampling::random_point(rng, hopf);
    g::TotalVector w0 = sampling::random_tangent(rng, hopf, p);
    w0 *= sampling::uniform(rng, 0.05, 0.6) / w0.norm();
    const auto basis = g::tangent_basis(hopf, p);
    const auto out = g::adapted_exp(hopf, p, w0);
    const auto out_basis = g::tangent_basis(hopf, out);
    Eigen::Matrix3d J;
    for (int k = 0; k < 3; ++k) {
      const auto plus = g::adapted_exp(hopf, p, w0 + fd * basis[k]);
      const auto minus = g::adapted_exp(hopf, p, w0 - fd * basis[k]);
      const g::TotalVector col = (plus.c - minus.c) / (2 * fd);
      for (int r = 0; r < 3; ++r) J(r, k) = out_basis[r].dot(col);
    }
    min_det = std::min(min_det, std::abs(J.determinant()));
  }
  a.above("min |det d adapted_exp| (100 pts)", min_det, 0.1);
}

// ---------------------------------------------------------------------------
// 4. Splitting

void splitting_suite(Audit& a, Rng& rng) {
  const auto flat = g::FibrationModel::flat_t2();
  double cross = 0.0, closed_form = 0.0, idem = 0.0, recon = 0.0;
  for (int s = 0; s < 20; ++s) {
    const auto X = sampling::random_field(rng, flat, 64, 64, 1.0);
    const auto P = fields::horizontal_average(X);
    const auto F = fields::fair_part(X);
    double ip = 0.0, nf = 0.0, np = 0.0;
    for (int i = 0; i < 64; ++i) {
      double mean_a = 0.0;
      for (int j = 0; j < 64; ++j) mean_a += X.at(i, j)[0];
      mean_a /= 64;
      for (int j = 0; j < 64; ++j) {
        const auto& x = X.at(i, j);
        closed_form = std::max({closed_form, std::abs(P.at(i, j)[0] - mean_a),
                                std::abs(P.at(i, j)[1] - x[1]),
                                std::abs(F.at(i, j)[0] - (x[0] - mean_a)), std::abs(F.at(i, j)[1])});
        ip += F.at(i, j).dot(P.at(i, j));
        nf += F.at(i, j).squaredNorm();
        np += P.at(i, j).squaredNorm();
        recon = std::max(recon, (F.at(i, j) + P.at(i, j) - x).norm());
      }
    }
    cross = std::max(cross, std::abs(ip) / std::sqrt(nf * np));
    idem = std::max(idem, fields::sup_norm(fields::horizontal_average(P) - P));
  }
  a.below("flat-t2 normalized <fair, projectable>", cross, 1e-8);
  a.below("fair + projectable - X", recon, 1e-12);
  a.below("closed-form split deviation", closed_form, 1e-12);
  a.below("r' idempotence", idem, 1e-10);

  // sigma' round trip on flat-t2 and on the Hopf model.
  double trip = 0.0, hopf_cross = 0.0;
  for (const auto& model : {flat, g::FibrationModel::hopf()}) {
    const int nb = 64, nf = model.spherical() ? 32 : 64;
    for (int s = 0; s < 5; ++s) {
      fields::BaseFieldGrid Y(model, nb);
      for (int i = 0; i < nb; ++i) Y.set(i, sampling::random_base_tangent(rng, model, Y.nodes()[i]));
      const auto L = fields::horizontal_lift_field(Y, nf);
      const auto pr = fields::is_projectable(L, 1e-8);
      if (!pr.projectable) {
        trip = kInf;
        continue;
      }
      for (int i = 0; i < nb; ++i) {
        trip = std::max(trip, g::base_norm(model, pr.projection->at(i) - Y.at(i)));
      }
      if (model.spherical()) {
        const auto X = sampling::random_field(rng, model, nb, nf, 1.0);
        const auto P = fields::horizontal_average(X);
        const auto F = fields::fair_part(X);
        hopf_cross = std::max(hopf_cross, std::abs(fields::l2_inner(F, P)) /
                                              (fields::l2_norm(F) * fields::l2_norm(P)));
      }
    }
  }
  a.below("sigma' round trip", trip, 1e-8);
  a.below("hopf normalized <fair, projectable>", hopf_cross, 1e-8);
}

// ---------------------------------------------------------------------------
// 5. Karcher

struct GridArgmin {
  Eigen::Vector2d coords;
  double cell;
};

// Independent brute force: P_S on a res x res grid of normal coordinates around the
// extrinsic (or min-image) mean, with arclength weights recomputed here.
GridArgmin brute_argmin(const moduli::FiberShape& S, int res, Eigen::Vector2d* karcher_coords,
                        const g::BasePoint& karcher) {
  const auto& model = S.model;
  const std::size_t m = S.samples.size();
  std::vector<double> seg(m), w(m);
  auto total_dist = [&](const g::TotalPoint& p, const g::TotalPoint& q) {
    if (model.spherical()) {
      double best = kInf;
      for (int k = 0; k < model.deck_order(); ++k) {
        const Quat gq = Quat::exp_pure(Eigen::Vector3d::UnitX(), 2 * pi * k / model.deck_order());
        const Quat qq = g::as_quat(q) * gq;
        best = std::min(best, 2 * std::asin(std::min(1.0, 0.5 * (p.c - qq.vec4()).norm())));
      }
      return best;
    }
    Eigen::Vector4d d = p.c - q.c;
    for (int c = 0; c < 4; ++c) d[c] -= std::round(d[c]);
    return d.norm();
  };
  double L = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    seg[k] = total_dist(S.samples[k], S.samples[(k + 1) % m]);
    L += seg[k];
  }
  for (std::size_t k = 0; k < m; ++k) w[k] = 0.5 * (seg[(k + m - 1) % m] + seg[k]) / L;

  std::vector<Eigen::Vector3d> ys;
  for (const auto& p : S.samples) ys.push_back(g::project(model, p).c);

  GridArgmin out{};
  if (model.spherical()) {
    Eigen::Vector3d o = Eigen::Vector3d::Zero();
    for (const auto& y : ys) o += y;
    o.normalize();
    Eigen::Vector3d e1 = (std::abs(o.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY());
    e1 = (e1 - e1.dot(o) * o).normalized();
    const Eigen::Vector3d e2 = o.cross(e1);
    double r = 0.0;
    for (const auto& y : ys) r = std::max(r, std::acos(std::clamp(o.dot(y), -1.0, 1.0)));
    out.cell = 2 * r / (res - 1);
    double best = kInf;
    for (int a = 0; a < res; ++a) {
      for (int b = 0; b < res; ++b) {
        const Eigen::Vector2d v(-r + a * out.cell, -r + b * out.cell);
        const double nv = v.norm();
        const Eigen::Vector3d x = nv < 1e-300 ? o : Eigen::Vector3d(std::cos(nv) * o + std::sin(nv) / nv * (v.x() * e1 + v.y() * e2));
        double P = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          const double ang = std::acos(std::clamp(x.dot(ys[k]), -1.0, 1.0));
          P += w[k] * ang * ang;
        }
        if (P < best) {
          best = P;
          out.coords = v;
        }
      }
    }
    const double c = std::clamp(o.dot(karcher.c), -1.0, 1.0);
    const Eigen::Vector3d t = karcher.c - c * o;
    const double ang = std::acos(c);
    const Eigen::Vector3d v = t.norm() < 1e-300 ? Eigen::Vector3d::Zero() : Eigen::Vector3d(ang * t / t.norm());
    *karcher_coords = Eigen::Vector2d(v.dot(e1), v.dot(e2));
    return out;
  }

  const int d = model.base_coords();
  auto mi = [](double x) { return x - std::round(x); };
  Eigen::Vector2d o = Eigen::Vector2d::Zero();
  for (int c = 0; c < d; ++c) {
    double acc = 0.0;
    for (const auto& y : ys) acc += mi(y[c] - ys[0][c]);
    o[c] = ys[0][c] + acc / m;
  }
  double r = 0.0;
  for (const auto& y : ys) {
    for (int c = 0; c < d; ++c) r = std::max(r, std::abs(mi(y[c] - o[c])));
  }
  out.cell = 2 * r / (res - 1);
  double best = kInf;
  for (int a = 0; a < res; ++a) {
    for (int b = 0; b < (d == 2 ? res : 1); ++b) {
      Eigen::Vector2d v(-r + a * out.cell, d == 2 ? -r + b * out.cell : 0.0);
      double P = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        double dd = 0.0;
        for (int c = 0; c < d; ++c) dd += std::pow(mi(o[c] + v[c] - ys[k][c]), 2);
        P += w[k] * dd;
      }
      if (P < best) {
        best = P;
        out.coords = v;
      }
    }
  }
  *karcher_coords = Eigen::Vector2d::Zero();
  for (int c = 0; c < d; ++c) (*karcher_coords)[c] = mi(karcher.c[c] - o[c]);
  return out;
}

void karcher_suite(Audit& a, Rng& rng) {
  for (const auto& model :
       {g::FibrationModel::hopf(), g::FibrationModel::flat_t2(), g::FibrationModel::flat_t3()}) {
    double cells = 0.0, equiv = 0.0;
    for (int s = 0; s < 50; ++s) {
      const auto S = sampling::random_shape(rng, model, 32, model.spherical() ? 0.3 : 0.2);
      const auto c = moduli::karcher_center(S);
      Eigen::Vector2d kc;
      const auto b = brute_argmin(S, 400, &kc, c);
      cells = std::max(cells, (kc - b.coords).cwiseAbs().maxCoeff() / b.cell);

      const auto h = sampling::random_isometry(rng, model, true);
      moduli::FiberShape hS{model, {}};
      for (const auto& p : S.samples) hS.samples.push_back(g::apply(model, h, p));
      const auto hc = moduli::karcher_center(hS);
      equiv = std::max(equiv, g::base_distance(model, hc, g::apply_base(model, h, c)));
    }
    a.below(model.id() + " center vs grid argmin (cells)", cells, 1.0 + 1e-9);
    a.below(model.id() + " isometry equivariance", equiv, 1e-9);
  }
}

// ---------------------------------------------------------------------------
// 6. Straightening

void straightening_suite(Audit& a, Rng& rng) {
  struct Setup {
    g::FibrationModel model;
    int nb, m;
  };
  const Setup fixed[] = {{g::FibrationModel::flat_t2(), 32, 128},
                         {g::FibrationModel::flat_t3(), 16, 64},
                         {g::FibrationModel::hopf(), 64, 128},
                         {g::FibrationModel::lens(2), 64, 64}};
  double fixed_err = 0.0;
  for (const auto& s : fixed) {
    const auto F = moduli::model_fibering(s.model, s.nb, s.m);
    const auto [S, rep] = moduli::straighten(F);
    fixed_err = std::max({fixed_err, moduli::sample_distance(S, F), rep.max_residual});
  }
  a.below("model fibering fixed point", fixed_err, 1e-12);

  double equiv = 0.0;
  for (const auto& s : {Setup{g::FibrationModel::flat_t2(), 32, 64}, Setup{g::FibrationModel::hopf(), 64, 64}}) {
    const auto F = moduli::model_fibering(s.model, s.nb, s.m);
    const auto X = sampling::random_field(rng, s.model, s.nb, s.m, 1.0);
    const auto P = moduli::perturb(F, X, 0.02);
    const auto SP = moduli::straighten(P).first;
    for (int k = 0; k < 10; ++k) {
      const auto h = sampling::random_isometry(rng, s.model, true);
      const auto lhs = moduli::straighten(moduli::push(P, h)).first;
      equiv = std::max(equiv, moduli::sample_distance(lhs, moduli::push(SP, h)));
    }
  }
  a.below("equivariance (20 automorphisms)", equiv, 1e-6);

  double recover = 0.0, moved = kInf;
  moduli::StraightenOptions intrinsic;
  intrinsic.measure = moduli::FiberMeasure::Intrinsic;
  for (const auto& s : {Setup{g::FibrationModel::flat_t2(), 32, 128}, Setup{g::FibrationModel::hopf(), 64, 128}}) {
    const auto F = moduli::model_fibering(s.model, s.nb, s.m);
    for (int k = 0; k < 4; ++k) {
      const auto X = sampling::random_fair_field(rng, s.model, s.nb, s.m, 1.0);
      const auto P = moduli::perturb(F, X, 0.02);
      moved = std::min(moved, moduli::sample_distance(P, F));
      recover = std::max(recover, moduli::sample_distance(moduli::straighten(P, intrinsic).first, F));
    }
  }
  a.below("fair-field recovery at eps 0.02", recover, 1e-6);
  a.note("smallest perturbation " + sci(moved));

  double worst_ratio = 0.0;
  bool all_converged = true;
  // flat-t2 fibers 1/32 apart cannot absorb a 0.05 displacement, so the flat case uses 8 fibers
  for (const auto& s : {Setup{g::FibrationModel::flat_t2(), 8, 64}, Setup{g::FibrationModel::hopf(), 64, 64}}) {
    const auto F = moduli::model_fibering(s.model, s.nb, s.m);
    for (int k = 0; k < 3; ++k) {
      const auto X = sampling::random_field(rng, s.model, s.nb, s.m, 1.0);
      const auto [R, rep] = moduli::refine(moduli::perturb(F, X, 0.05), 10);
      all_converged = all_converged && rep.converged;
      for (std::size_t n = 1; n < rep.residuals.size(); ++n) {
        if (rep.residuals[n - 1] < 1e-12) break;  // below the rounding floor
        worst_ratio = std::max(worst_ratio, rep.residuals[n] / rep.residuals[n - 1]);
      }
    }
  }
  a.below("refine contraction ratio at eps 0.05", worst_ratio, 0.8);
  a.require("refine converged", all_converged);
}

// ---------------------------------------------------------------------------
// 7. Curve-shortening flow

void csf_suite(Audit& a, Rng& rng) {
  const Eigen::Vector2i slope(1, 2);
  csf::FlowParams P;

  // Geodesic fibering: per-step displacement with the shared dt.
  auto lines = csf::linear_curves(slope, 16, 512);
  double dt = kInf;
  for (const auto& c : lines) dt = std::min(dt, csf::stable_dt(c, P.cfl));
  double still = 0.0;
  for (int step = 0; step < 100; ++step) {
    for (auto& c : lines) {
      const auto next = csf::csf_step(c, dt);
      for (int i = 0; i < c.size(); ++i) {
        still = std::max(still, (next.points()[i] - c.points()[i]).norm());
      }
      c = next;
    }
  }
  a.below("geodesic fibering displacement per step", still, 1e-12);
  const auto idle = csf::flow_curves(csf::linear_curves(slope, 16, 512), P);
  a.require("geodesic fibering flow stops at t = 0", idle.steps == 0);

  // Shrinking circle: R(t)^2 + 2t = R0^2.
  const double R0 = 0.2;
  double circ = 0.0;
  for (int k = 1; k <= 4; ++k) {
    const double T = 0.12 * k * R0 * R0;  // k = 4 ends at R = 0.2 R0
    const auto R = csf::flow_for(csf::circle({0.5, 0.5}, R0, 512), T, P);
    const auto& pts = R.curves.front().points();
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (const auto& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    double r = 0.0;
    for (const auto& p : pts) r += (p - c).norm();
    r /= static_cast<double>(pts.size());
    circ = std::max(circ, std::abs(r * r + 2 * T - R0 * R0) / (R0 * R0));
  }
  a.below("shrinking circle rel. error", circ, 1e-2);

  // Perturbed slope-(1,2) fibering.
  auto phases = csf::coherent_phases(slope, 16, sampling::uniform(rng, 0.0, 2 * pi));
  for (auto& ph : phases) ph += sampling::uniform(rng, -0.1, 0.1);
  const auto curves = csf::perturbed_linear_curves(slope, 512, 0.05, phases);
  P.t_max = 1.0;
  const auto R = csf::flow_curves(curves, P);
  const auto core = moduli::core_membership(csf::to_fibering(R.curves), 5e-3);
  a.below("terminal max |kappa|", R.max_kappa, 1e-3);
  a.below("flow time", R.t, 1.0 + 1e-12);
  a.above("min certified pair distance", R.min_pair_dist, 0.0);
  bool winding = true;
  for (const auto& c : R.curves) winding = winding && c.winding() == slope;
  a.require("winding conserved", winding);
  a.require("terminal core " + core.describe(),
            core.kind == moduli::CoreDescriptor::Kind::Slope && core.slope.v == std::vector<long>{1, 2});
  a.note("t " + sci(R.t) + ", " + std::to_string(R.steps) + " steps");
}

// ---------------------------------------------------------------------------
// 8. Core orbit check

void core_orbit_suite(Audit& a, Rng& rng) {
  double dir_err = 0.0;
  int plus = 0, minus = 0, wrong_kind = 0, wrong_chirality = 0;
  for (const auto& model : {g::FibrationModel::hopf(), g::FibrationModel::lens(2)}) {
    const auto F = moduli::model_fibering(model, 32, 32);
    for (int s = 0; s < 100; ++s) {
      const auto h = sampling::random_isometry(rng, model, false);
      const auto core = moduli::core_membership(moduli::push(F, h), 1e-8);
      if (core.kind != moduli::CoreDescriptor::Kind::SphereDirection) {
        ++wrong_kind;
        continue;
      }
      // p exp(t i) -> q1 p exp(t i) q2^-1 = (q1 p q2^-1) exp(t q2 i q2^-1) for eps = +1;
      // q1 exp(-t i) p^-1 q2^-1 = exp(-t q1 i q1^-1) (q1 p^-1 q2^-1) for eps = -1.
      const Eigen::Vector3d expect = h.eps == 1
                                         ? (h.right * kQuatI * h.right.conj()).imag()
                                         : Eigen::Vector3d(-(h.left * kQuatI * h.left.conj()).imag());
      dir_err = std::max(dir_err, (core.direction - expect).norm());
      wrong_chirality += core.chirality != h.eps;
      (core.chirality > 0 ? plus : minus) += 1;
    }
  }
  a.require("all 200 pushes in the core", wrong_kind == 0);
  a.below("direction error", dir_err, 1e-8);
  a.require("chirality matches eps", wrong_chirality == 0);
  a.require("both chiralities (" + std::to_string(plus) + " +, " + std::to_string(minus) + " -)",
            plus > 0 && minus > 0);
}

struct CriterionDef {
  int id;
  const char* name;
  double limit;
  void (*run)(Audit&, Rng&);
};

const CriterionDef kCriteria[] = {
    {1, "heat-flow retraction", 5.0, heat_flow},
    {2, "cech cocycles", 2.0, cech_suite},
    {3, "geometry", 10.0, geometry_suite},
    {4, "field splitting", 5.0, splitting_suite},
    {5, "karcher centers", 30.0, karcher_suite},
    {6, "straightening", 60.0, straightening_suite},
    {7, "curve-shortening flow", 120.0, csf_suite},
    {8, "core orbits", 10.0, core_orbit_suite},
};

}  // namespace

std::vector<int> criterion_ids() {
  std::vector<int> ids;
  for (const auto& s : kCriteria) ids.push_back(s.id);
  return ids;
}

CriterionResult run_criterion(int id, const Options& opts) {
  const CriterionDef* def = nullptr;
  for (const auto& s : kCriteria) {
    if (s.id == id) def = &s;
  }
  if (!def) throw Error(ErrorCode::BadConfig, "no acceptance criterion " + std::to_string(id));
  CriterionResult r;
  r.id = id;
  r.name = def->name;
  r.time_limit = def->limit;
  Audit audit;
  Rng rng = rng_for(opts, id);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    def->run(audit, rng);
    r.passed = audit.ok();
    r.detail = audit.str();
  } catch (const Error& e) {
    r.passed = false;
    r.detail = audit.str() + (audit.str().empty() ? "" : "; ") + std::string(code_name(e.code())) +
               ": " + e.what();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.seconds >= r.time_limit) r.passed = false;
  return r;
}

std::vector<CriterionResult> run_all(const Options& opts) {
  std::vector<CriterionResult> out;
  for (int id : criterion_ids()) out.push_back(run_criterion(id, opts));
  return out;
}

std::string format_line(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "%s %d %-22s (%.2f s / %g s) ", r.passed ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.seconds, r.time_limit);
  return head + r.detail;
}

}  // namespace fiberlab::acceptance
