#include "fiberlab/moduli.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

#include "fiberlab/circle_diffeo.hpp"
#include "fiberlab/error.hpp"
#include "fiberlab/parallel.hpp"

namespace fiberlab::moduli {

namespace g = fiberlab::geometry;
using std::numbers::pi;

namespace {

double min_image(double d) { return d - std::round(d); }

int flat_base_dims(const FibrationModel& m) { return m.base_coords(); }

std::vector<BasePoint> projections(const FiberShape& S) {
  std::vector<BasePoint> ys;
  ys.reserve(S.samples.size());
  for (const auto& p : S.samples) ys.push_back(g::project(S.model, p));
  return ys;
}

std::vector<double> normalized(std::vector<double> w) {
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(s > 0.0)) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
    return w;
  }
  for (double& v : w) v /= s;
  return w;
}

BasePoint initial_center(const FibrationModel& model, const std::vector<BasePoint>& ys,
                         const std::vector<double>& w) {
  BasePoint x;
  if (model.spherical()) {
    BaseVector acc = BaseVector::Zero();
    for (std::size_t k = 0; k < ys.size(); ++k) acc += w[k] * ys[k].c;
    if (acc.norm() < 1e-9) {
      throw Error(ErrorCode::OutsideConvexBall, "projected samples have no extrinsic mean");
    }
    x.c = acc.normalized();
    return x;
  }
  const int d = flat_base_dims(model);
  for (int c = 0; c < d; ++c) {
    double acc = 0.0;
    for (std::size_t k = 0; k < ys.size(); ++k) acc += w[k] * min_image(ys[k].c[c] - ys[0].c[c]);
    x.c[c] = circle::wrap01(ys[0].c[c] + acc);
  }
  return x;
}

void check_ball(const FibrationModel& model, const std::vector<BasePoint>& ys,
                const BasePoint& x) {
  const double guard = center_ball_guard(model);
  for (const auto& y : ys) {
    const double a = g::base_angle(model, x, y);
    if (!(a < guard)) {
      throw Error(ErrorCode::OutsideConvexBall,
                  "projected sample at distance " + std::to_string(a) +
                      " leaves the convex ball guard " + std::to_string(guard));
    }
  }
}

// Nearest point search along one model fiber, with the section cached.
class FiberSearch {
 public:
  FiberSearch(const FibrationModel& model, const BasePoint& x)
      : model_(model), x_(x), q_(g::as_quat(g::section(model, x))) {}

  TotalVector curve(double s) const {
    if (!model_.spherical()) return g::fiber_curve(model_, x_, s);
    return (q_ * Quat::exp_pure(BaseVector::UnitX(), 2.0 * pi * s)).vec4();
  }
  TotalVector tangent(double s) const {
    if (!model_.spherical()) return g::fiber_curve_tangent(model_, x_, s);
    return (2.0 * pi) * (q_ * Quat::exp_pure(BaseVector::UnitX(), 2.0 * pi * s) * kQuatI).vec4();
  }
  double sq(const TotalVector& p, double s) const {
    return g::chord(model_, p, curve(s)).squaredNorm();
  }

  // Minimizer of the squared chord distance over one turn of the lifted fiber curve.
  double nearest(const TotalVector& p) const {
    constexpr int kScan = 64;
    int best = 0;
    double fbest = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kScan; ++k) {
      const double f = sq(p, static_cast<double>(k) / kScan);
      if (f < fbest) {
        fbest = f;
        best = k;
      }
    }
    // Golden section on the bracketing cells.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = (best - 1.0) / kScan, b = (best + 1.0) / kScan;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = sq(p, c), fd = sq(p, d);
    while (b - a > 1e-9) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = sq(p, c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = sq(p, d);
      }
    }
    double s = 0.5 * (a + b);
    // Newton on the derivative of the squared distance.
    for (int it = 0; it < 20; ++it) {
      const TotalVector delta = g::chord(model_, p, curve(s));
      const TotalVector t = tangent(s);
      const double d1 = -2.0 * delta.dot(t);
      double d2 = 2.0 * t.squaredNorm();
      if (model_.spherical()) d2 -= 2.0 * delta.dot(-4.0 * pi * pi * curve(s));
      if (!(d2 > 0.0)) break;
      const double step = d1 / d2;
      s -= step;
      if (std::abs(step) < 1e-16) break;
    }
    return s;
  }

  TotalPoint point(double s) const {
    TotalPoint p;
    p.c = curve(s);
    return g::canonicalize(model_, p);
  }

 private:
  FibrationModel model_;
  BasePoint x_;
  Quat q_;
};

double wrap_period(double s, double P) {
  double r = s - P * std::floor(s / P);
  if (r >= P) r = 0.0;
  return r;
}

double signed_period_increment(double a, double b, double P) {
  double d = wrap_period(b - a, P);
  if (d >= 0.5 * P) d -= P;
  return d;
}

struct FiberResult {
  BasePoint center;
  NormalGraph graph;
  int iterations = 0;
};

FiberResult straighten_fiber(const FiberShape& S, const StraightenOptions& opts) {
  FiberResult r;
  const auto ys = projections(S);
  const auto w = arclength_weights(S);
  r.center = weighted_center(S.model, ys, w, opts.karcher);
  r.graph = normal_graph(S, r.center);
  if (opts.measure == FiberMeasure::Intrinsic) {
    const auto& ko = opts.karcher;
    bool done = false;
    for (int it = 1; it <= ko.intrinsic_max_iter; ++it) {
      const auto wi = intrinsic_weights(S.model, r.graph);
      const BasePoint next = weighted_center_from(S.model, ys, wi, r.center, ko);
      const double move = g::base_distance(S.model, r.center, next);
      r.center = next;
      r.graph = normal_graph(S, r.center);
      r.iterations = it;
      if (move < ko.intrinsic_tol) {
        done = true;
        break;
      }
    }
    if (!done) {
      throw Error(ErrorCode::Nonconvergence, "intrinsic center iteration did not settle");
    }
  }
  return r;
}

// Assembles a straightened fibering and checks that centers stay apart.
std::pair<Fibering, StraightenReport> assemble(const Fibering& F,
                                               const std::vector<FiberResult>& res) {
  Fibering out;
  out.model = F.model;
  StraightenReport rep;
  for (std::size_t i = 0; i < res.size(); ++i) {
    out.base.push_back(res[i].center);
    out.fibers.push_back(FiberShape{F.model, res[i].graph.images});
    rep.fibers.push_back({res[i].center, res[i].graph.max_distance, res[i].iterations});
    rep.max_residual = std::max(rep.max_residual, res[i].graph.max_distance);
  }
  rep.min_center_separation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < res.size(); ++i) {
    for (std::size_t j = i + 1; j < res.size(); ++j) {
      rep.min_center_separation =
          std::min(rep.min_center_separation,
                   g::base_distance(F.model, res[i].center, res[j].center));
    }
  }
  if (res.size() > 1) {
    rep.collision_threshold = collision_threshold(F.model, static_cast<int>(res.size()));
    rep.injective = rep.min_center_separation > rep.collision_threshold;
    if (!rep.injective) {
      throw Error(ErrorCode::BaseCollision,
                  "two fibers straighten to base points " +
                      std::to_string(rep.min_center_separation) + " apart (threshold " +
                      std::to_string(rep.collision_threshold) + ")");
    }
  }
  return {std::move(out), std::move(rep)};
}

void check_fibering(const Fibering& F) {
  if (F.fibers.empty()) throw Error(ErrorCode::InvalidInput, "empty fibering");
  for (const auto& S : F.fibers) {
    if (S.samples.size() < 3) throw Error(ErrorCode::InvalidInput, "fiber needs >= 3 samples");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

FiberShape model_fiber_shape(const FibrationModel& model, const BasePoint& x, int m) {
  return FiberShape{model, g::model_fiber(model, x, m)};
}

Fibering model_fibering(const FibrationModel& model, int nb, int m) {
  Fibering F;
  F.model = model;
  F.base = g::base_grid(model, nb);
  for (const auto& x : F.base) F.fibers.push_back(model_fiber_shape(model, x, m));
  return F;
}

double center_ball_guard(const FibrationModel& model) {
  return model.spherical() ? 0.45 * pi : 0.25;
}

std::vector<double> arclength_weights(const FiberShape& S) {
  const std::size_t m = S.samples.size();
  std::vector<double> seg(m);
  for (std::size_t k = 0; k < m; ++k) {
    seg[k] = g::total_distance(S.model, S.samples[k], S.samples[(k + 1) % m]);
  }
  std::vector<double> w(m);
  for (std::size_t k = 0; k < m; ++k) w[k] = 0.5 * (seg[(k + m - 1) % m] + seg[k]);
  return normalized(std::move(w));
}

BasePoint weighted_center(const FibrationModel& model, const std::vector<BasePoint>& ys,
                          const std::vector<double>& w, const KarcherOptions& opts) {
  if (ys.empty() || ys.size() != w.size()) {
    throw Error(ErrorCode::InvalidInput, "weighted_center: sizes differ or empty");
  }
  const auto wn = normalized(w);
  return weighted_center_from(model, ys, wn, initial_center(model, ys, wn), opts);
}

BasePoint weighted_center_from(const FibrationModel& model, const std::vector<BasePoint>& ys,
                               const std::vector<double>& w, const BasePoint& start,
                               const KarcherOptions& opts) {
  const auto wn = normalized(w);
  check_ball(model, ys, start);
  if (!model.spherical()) {
    // The flat Karcher functional is quadratic in a lifted chart: one step is exact.
    BaseVector v = BaseVector::Zero();
    for (std::size_t k = 0; k < ys.size(); ++k) v += wn[k] * g::base_log(model, start, ys[k]);
    return g::base_geodesic(model, start, v, 1.0);
  }
  BasePoint x = start;
  for (int it = 0; it < opts.max_iter; ++it) {
    BaseVector v = BaseVector::Zero();
    for (std::size_t k = 0; k < ys.size(); ++k) v += wn[k] * g::base_log(model, x, ys[k]);
    x = g::base_geodesic(model, x, v, 1.0);
    if (v.norm() < opts.tol) return x;
  }
  throw Error(ErrorCode::Nonconvergence, "Karcher iteration exceeded " +
                                             std::to_string(opts.max_iter) + " steps");
}

BasePoint karcher_center(const FiberShape& S, const KarcherOptions& opts) {
  if (S.samples.empty()) throw Error(ErrorCode::InvalidInput, "karcher_center: empty shape");
  if (opts.measure == FiberMeasure::Arclength) {
    return weighted_center(S.model, projections(S), arclength_weights(S), opts);
  }
  StraightenOptions so;
  so.measure = FiberMeasure::Intrinsic;
  so.karcher = opts;
  return straighten_fiber(S, so).center;
}

BruteCenter brute_center(const FiberShape& S, int resolution) {
  if (resolution < 2) throw Error(ErrorCode::BadConfig, "brute_center needs resolution >= 2");
  const FibrationModel& model = S.model;
  const auto ys = projections(S);
  const auto w = arclength_weights(S);
  BruteCenter b;
  b.origin = initial_center(model, ys, w);
  check_ball(model, ys, b.origin);
  b.frame = g::base_tangent_basis(model, b.origin);
  for (const auto& y : ys) b.radius = std::max(b.radius, g::base_log(model, b.origin, y).norm());
  b.center = b.origin;
  if (b.radius == 0.0) return b;
  b.cell = 2.0 * b.radius / (resolution - 1);

  auto cost = [&](const BasePoint& x) {
    double acc = 0.0;
    if (model.spherical()) {
      for (std::size_t k = 0; k < ys.size(); ++k) {
        const double a = std::acos(std::clamp(x.c.dot(ys[k].c), -1.0, 1.0));
        acc += w[k] * a * a;
      }
    } else {
      for (std::size_t k = 0; k < ys.size(); ++k) {
        acc += w[k] * g::base_log(model, x, ys[k]).squaredNorm();
      }
    }
    return 0.5 * acc;
  };

  const int dims = static_cast<int>(b.frame.size());
  const int n2 = dims == 2 ? resolution : 1;
  double best = std::numeric_limits<double>::infinity();
  const double r2 = b.radius * b.radius * (1.0 + 1e-12);
  for (int i = 0; i < resolution; ++i) {
    const double a0 = -b.radius + b.cell * i;
    for (int j = 0; j < n2; ++j) {
      const double a1 = dims == 2 ? -b.radius + b.cell * j : 0.0;
      if (a0 * a0 + a1 * a1 > r2) continue;
      BaseVector v = a0 * b.frame[0];
      if (dims == 2) v += a1 * b.frame[1];
      const BasePoint x = g::base_geodesic(model, b.origin, v, 1.0);
      const double c = cost(x);
      if (c < best) {
        best = c;
        b.center = x;
        b.coords = Eigen::Vector2d(a0, a1);
      }
    }
  }
  return b;
}

Eigen::Vector2d normal_coordinates(const FibrationModel& model, const BruteCenter& b,
                                   const BasePoint& x) {
  const BaseVector v = g::base_log(model, b.origin, x);
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  for (std::size_t k = 0; k < b.frame.size() && k < 2; ++k) out[k] = v.dot(b.frame[k]);
  return out;
}

// ---------------------------------------------------------------------------

double tube_guard(const FibrationModel& model) { return model.spherical() ? 0.25 * pi : 0.25; }

NormalGraph normal_graph(const FiberShape& S, const BasePoint& x) {
  const FibrationModel& model = S.model;
  const std::size_t m = S.samples.size();
  if (m < 3) throw Error(ErrorCode::InvalidInput, "normal_graph needs >= 3 samples");
  NormalGraph G;
  G.x = g::canonicalize(model, x);
  const FiberSearch search(model, G.x);
  const double P = g::fiber_curve_period(model);
  G.params.resize(m);
  G.images.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const TotalVector& p = S.samples[k].c;
    const double s = search.nearest(p);
    const double chord = std::sqrt(search.sq(p, s));
    const double dist = model.spherical() ? 2.0 * std::asin(std::min(1.0, 0.5 * chord)) : chord;
    if (!(dist < tube_guard(model))) {
      throw Error(ErrorCode::TubeRadiusExceeded,
                  "sample " + std::to_string(k) + " lies " + std::to_string(dist) +
                      " from the model fiber (guard " + std::to_string(tube_guard(model)) + ")");
    }
    G.max_distance = std::max(G.max_distance, dist);
    G.params[k] = wrap_period(s, P);
    G.images[k] = search.point(G.params[k]);
  }
  // Images must run once around E_x, monotonically.
  double total = 0.0;
  int sign = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const double inc = signed_period_increment(G.params[k], G.params[(k + 1) % m], P);
    const int sg = inc > 0.0 ? 1 : (inc < 0.0 ? -1 : 0);
    if (sg == 0 || (sign != 0 && sg != sign)) {
      throw Error(ErrorCode::NonInjectiveProjection,
                  "normal graph folds at sample " + std::to_string(k));
    }
    sign = sg;
    total += inc;
  }
  if (std::abs(std::abs(total) - P) > 0.25 * P) {
    throw Error(ErrorCode::NonInjectiveProjection, "normal graph does not wind once");
  }
  return G;
}

std::vector<double> intrinsic_weights(const FibrationModel& model, const NormalGraph& G) {
  const double P = g::fiber_curve_period(model);
  const std::size_t m = G.params.size();
  std::vector<double> gap(m), w(m);
  for (std::size_t k = 0; k < m; ++k) {
    gap[k] = std::abs(signed_period_increment(G.params[k], G.params[(k + 1) % m], P));
  }
  for (std::size_t k = 0; k < m; ++k) w[k] = 0.5 * (gap[(k + m - 1) % m] + gap[k]);
  return normalized(std::move(w));
}

// ---------------------------------------------------------------------------

double collision_threshold(const FibrationModel& model, int nb) {
  const auto nodes = g::base_grid(model, nb);
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      dmin = std::min(dmin, g::base_distance(model, nodes[i], nodes[j]));
    }
  }
  return std::isfinite(dmin) ? 0.5 * dmin : 0.0;
}

std::pair<Fibering, StraightenReport> straighten(const Fibering& F,
                                                 const StraightenOptions& opts) {
  check_fibering(F);
  std::vector<FiberResult> res(F.fibers.size());
  parallel_for(F.fibers.size(), [&](std::size_t i) { res[i] = straighten_fiber(F.fibers[i], opts); });
  return assemble(F, res);
}

double sample_distance(const Fibering& a, const Fibering& b) {
  if (a.fibers.size() != b.fibers.size()) {
    throw Error(ErrorCode::GridMismatch, "fiberings have different fiber counts");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.fibers.size(); ++i) {
    const auto& sa = a.fibers[i].samples;
    const auto& sb = b.fibers[i].samples;
    if (sa.size() != sb.size()) throw Error(ErrorCode::GridMismatch, "fiber sample counts differ");
    for (std::size_t k = 0; k < sa.size(); ++k) {
      worst = std::max(worst, g::total_distance(a.model, sa[k], sb[k]));
    }
  }
  return worst;
}

std::pair<Fibering, RefineReport> refine(const Fibering& F, int passes, double tol) {
  if (passes < 1) throw Error(ErrorCode::BadConfig, "refine needs at least one pass");
  check_fibering(F);
  const std::size_t nb = F.fibers.size();
  std::vector<std::vector<BasePoint>> ys(nb);
  for (std::size_t i = 0; i < nb; ++i) ys[i] = projections(F.fibers[i]);

  RefineReport rep;
  std::vector<FiberResult> res(nb);
  StraightenOptions first;
  parallel_for(nb, [&](std::size_t i) { res[i] = straighten_fiber(F.fibers[i], first); });
  auto [cur, srep] = assemble(F, res);
  rep.residuals.push_back(sample_distance(F, cur));
  rep.last = srep;

  KarcherOptions ko;
  for (int pass = 2; pass <= passes && rep.residuals.back() >= tol; ++pass) {
    std::vector<FiberResult> next(nb);
    parallel_for(nb, [&](std::size_t i) {
      const auto wi = intrinsic_weights(F.model, res[i].graph);
      next[i].center = weighted_center_from(F.model, ys[i], wi, res[i].center, ko);
      next[i].graph = normal_graph(F.fibers[i], next[i].center);
      next[i].iterations = pass - 1;
    });
    auto [nf, nrep] = assemble(F, next);
    rep.residuals.push_back(sample_distance(cur, nf));
    cur = std::move(nf);
    rep.last = std::move(nrep);
    res = std::move(next);
    const std::size_t n = rep.residuals.size();
    if (n >= 3 && rep.residuals[n - 1] > rep.residuals[n - 2] &&
        rep.residuals[n - 2] > rep.residuals[n - 3]) {
      throw Error(ErrorCode::DivergingResiduals,
                  "refine residuals grew on passes " + std::to_string(pass - 1) + " and " +
                      std::to_string(pass));
    }
  }
  rep.converged = rep.residuals.back() < tol;
  return {std::move(cur), std::move(rep)};
}

// ---------------------------------------------------------------------------

double min_interfiber_distance(const Fibering& F) {
  const FibrationModel& model = F.model;
  const std::size_t nb = F.fibers.size();
  double best = std::numeric_limits<double>::infinity();
  if (model.spherical()) {
    using Mat = Eigen::Matrix<double, Eigen::Dynamic, 4, Eigen::RowMajor>;
    const int e = model.deck_order();
    std::vector<Mat> plain(nb), deck(nb);
    for (std::size_t i = 0; i < nb; ++i) {
      const auto& s = F.fibers[i].samples;
      plain[i].resize(static_cast<Eigen::Index>(s.size()), 4);
      deck[i].resize(static_cast<Eigen::Index>(s.size() * e), 4);
      for (std::size_t k = 0; k < s.size(); ++k) {
        plain[i].row(static_cast<Eigen::Index>(k)) = s[k].c.transpose();
        for (int d = 0; d < e; ++d) {
          const Quat gk = Quat::exp_pure(BaseVector::UnitX(), 2.0 * pi * d / e);
          deck[i].row(static_cast<Eigen::Index>(k * e + d)) =
              (g::as_quat(s[k]) * gk).vec4().transpose();
        }
      }
    }
    double dot = -1.0;
    for (std::size_t i = 0; i < nb; ++i) {
      for (std::size_t j = i + 1; j < nb; ++j) {
        dot = std::max(dot, (plain[i] * deck[j].transpose()).maxCoeff());
      }
    }
    if (nb < 2) return best;
    const double chord = std::sqrt(std::max(0.0, 2.0 - 2.0 * std::min(1.0, dot)));
    return 2.0 * std::asin(std::min(1.0, 0.5 * chord));
  }
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = i + 1; j < nb; ++j) {
      for (const auto& p : F.fibers[i].samples) {
        for (const auto& q : F.fibers[j].samples) {
          best = std::min(best, g::chord(model, p.c, q.c).squaredNorm());
        }
      }
    }
  }
  return std::sqrt(best);
}

namespace {

Fibering validated(Fibering out, const Fibering& F) {
  if (out.fibers.size() > 1) {
    const double thr = collision_threshold(F.model, static_cast<int>(F.fibers.size()));
    const double d = min_interfiber_distance(out);
    if (!(d > thr)) {
      throw Error(ErrorCode::DisjointnessLost,
                  "perturbed fibers come within " + std::to_string(d) + " (threshold " +
                      std::to_string(thr) + ")");
    }
  }
  return out;
}

}  // namespace

Fibering perturb(const Fibering& F, const fields::FieldGrid& X, double eps) {
  check_fibering(F);
  if (!(X.model() == F.model) || X.nb() != F.nb()) {
    throw Error(ErrorCode::GridMismatch, "field and fibering layouts differ");
  }
  for (const auto& S : F.fibers) {
    if (static_cast<int>(S.samples.size()) != X.nf()) {
      throw Error(ErrorCode::GridMismatch, "field fiber resolution differs from the fibering");
    }
  }
  Fibering out = F;
  if (eps == 0.0) return out;
  parallel_for(F.fibers.size(), [&](std::size_t i) {
    auto& s = out.fibers[i].samples;
    for (std::size_t k = 0; k < s.size(); ++k) {
      s[k] = g::adapted_exp(F.model, F.fibers[i].samples[k],
                            eps * X.at(static_cast<int>(i), static_cast<int>(k)));
    }
  });
  return validated(std::move(out), F);
}

Fibering perturb(const Fibering& F, const std::function<TotalVector(const TotalPoint&)>& X,
                 double eps) {
  check_fibering(F);
  Fibering out = F;
  if (eps == 0.0) return out;
  for (std::size_t i = 0; i < F.fibers.size(); ++i) {
    auto& s = out.fibers[i].samples;
    for (std::size_t k = 0; k < s.size(); ++k) {
      const TotalPoint& p = F.fibers[i].samples[k];
      s[k] = g::adapted_exp(F.model, p, eps * X(p));
    }
  }
  return validated(std::move(out), F);
}

Fibering push(const Fibering& F, const g::ModelIsometry& h) {
  Fibering out;
  out.model = F.model;
  const bool aut = g::is_automorphism(F.model, h);
  for (std::size_t i = 0; i < F.fibers.size(); ++i) {
    FiberShape S{F.model, {}};
    for (const auto& p : F.fibers[i].samples) S.samples.push_back(g::apply(F.model, h, p));
    if (aut && i < F.base.size()) {
      out.base.push_back(g::apply_base(F.model, h, F.base[i]));
    } else {
      out.base.push_back(g::project(F.model, S.samples.front()));
    }
    out.fibers.push_back(std::move(S));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string Slope::str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << v[k];
  os << ')';
  return os.str();
}

std::vector<Eigen::Vector3d> lift_curve(const FiberShape& S, Eigen::Vector3d* closing) {
  if (S.model.spherical()) {
    throw Error(ErrorCode::UnsupportedBase, "curve lifting is defined on flat tori");
  }
  const int d = S.model.total_coords();
  const std::size_t m = S.samples.size();
  std::vector<Eigen::Vector3d> L(m, Eigen::Vector3d::Zero());
  if (m == 0) return L;
  for (int c = 0; c < d; ++c) L[0][c] = S.samples[0].c[c];
  for (std::size_t k = 1; k < m; ++k) {
    for (int c = 0; c < d; ++c) {
      L[k][c] = L[k - 1][c] + circle::signed_increment(S.samples[k - 1].c[c], S.samples[k].c[c]);
    }
  }
  if (closing) {
    closing->setZero();
    for (int c = 0; c < d; ++c) {
      (*closing)[c] = circle::signed_increment(S.samples[m - 1].c[c], S.samples[0].c[c]);
    }
  }
  return L;
}

Slope slope(const FiberShape& S, bool oriented) {
  if (S.model.spherical()) throw Error(ErrorCode::UnsupportedBase, "slope needs a flat torus");
  if (S.samples.size() < 2) throw Error(ErrorCode::InvalidInput, "slope needs >= 2 samples");
  const int d = S.model.total_coords();
  Slope s;
  for (int c = 0; c < d; ++c) {
    std::vector<double> path;
    path.reserve(S.samples.size() + 1);
    for (const auto& p : S.samples) path.push_back(p.c[c]);
    path.push_back(path.front());
    s.v.push_back(circle::winding_number(path));
  }
  long gcd = 0;
  for (long x : s.v) gcd = std::gcd(gcd, std::labs(x));
  if (gcd != 1) {
    throw Error(ErrorCode::NonPrimitive, "winding vector " + s.str() + " is not primitive");
  }
  if (!oriented) {
    for (long x : s.v) {
      if (x == 0) continue;
      if (x < 0) {
        for (long& y : s.v) y = -y;
      }
      break;
    }
  }
  return s;
}

std::string CoreDescriptor::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Slope: os << "slope " << slope.str(); break;
    case Kind::SphereDirection:
      os << "direction [" << direction[0] << ", " << direction[1] << ", " << direction[2]
         << "] chirality " << (chirality > 0 ? '+' : '-');
      break;
    case Kind::NotInCore: os << "NotInCore"; break;
  }
  return os.str();
}

namespace {

CoreDescriptor flat_core(const Fibering& F, double tol) {
  CoreDescriptor out;
  double residual = 0.0;
  Slope common;
  for (std::size_t i = 0; i < F.fibers.size(); ++i) {
    Slope s, so;
    try {
      s = slope(F.fibers[i]);
      so = slope(F.fibers[i], true);
    } catch (const Error&) {
      out.residual = std::numeric_limits<double>::infinity();
      return out;
    }
    if (i == 0) common = s;
    if (!(s == common)) {
      out.residual = std::numeric_limits<double>::infinity();
      return out;
    }
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (std::size_t c = 0; c < so.v.size(); ++c) v[c] = static_cast<double>(so.v[c]);
    v.normalize();
    const auto L = lift_curve(F.fibers[i]);
    for (const auto& p : L) {
      const Eigen::Vector3d d = p - L[0];
      residual = std::max(residual, (d - d.dot(v) * v).norm());
    }
  }
  out.residual = residual;
  out.slope = common;
  if (residual <= tol) out.kind = CoreDescriptor::Kind::Slope;
  return out;
}

// Continuous lift of a sphere-model fiber to S^3 (deck images chosen for continuity).
std::vector<Quat> lift_s3(const FiberShape& S) {
  const int e = S.model.deck_order();
  std::vector<Quat> out;
  for (const auto& p : S.samples) {
    Quat q = g::as_quat(p);
    if (!out.empty() && e > 1) {
      double best = -2.0;
      Quat pick = q;
      for (int d = 0; d < e; ++d) {
        const Quat c = q * Quat::exp_pure(BaseVector::UnitX(), 2.0 * pi * d / e);
        const double dot = c.vec4().dot(out.back().vec4());
        if (dot > best) {
          best = dot;
          pick = c;
        }
      }
      q = pick;
    }
    out.push_back(q);
  }
  return out;
}

struct CosetFit {
  Eigen::Vector3d u = Eigen::Vector3d::Zero();
  double residual = std::numeric_limits<double>::infinity();
};

CosetFit fit_coset(const std::vector<Quat>& q, bool right) {
  CosetFit f;
  auto rel = [&](std::size_t k) {
    return (right ? q[0].conj() * q[k] : q[k] * q[0].conj()).imag();
  };
  const Eigen::Vector3d d1 = rel(1);
  if (d1.norm() < 1e-14) return f;
  f.u = d1.normalized();
  f.residual = 0.0;
  for (std::size_t k = 1; k < q.size(); ++k) f.residual = std::max(f.residual, rel(k).cross(f.u).norm());
  return f;
}

CoreDescriptor sphere_core(const Fibering& F, double tol) {
  CoreDescriptor out;
  double res[2] = {0.0, 0.0};
  Eigen::Vector3d dir[2];
  for (std::size_t i = 0; i < F.fibers.size(); ++i) {
    const auto q = lift_s3(F.fibers[i]);
    for (int side = 0; side < 2; ++side) {
      const CosetFit fit = fit_coset(q, side == 0);
      if (i == 0) dir[side] = fit.u;
      res[side] = std::max({res[side], fit.residual, (fit.u - dir[side]).norm()});
    }
  }
  const int side = res[0] <= res[1] ? 0 : 1;
  out.residual = res[side];
  if (res[side] <= tol) {
    out.kind = CoreDescriptor::Kind::SphereDirection;
    out.direction = dir[side];
    out.chirality = side == 0 ? 1 : -1;
  }
  return out;
}

}  // namespace

CoreDescriptor core_membership(const Fibering& F, double tol) {
  check_fibering(F);
  return F.model.spherical() ? sphere_core(F, tol) : flat_core(F, tol);
}

}  // namespace fiberlab::moduli
