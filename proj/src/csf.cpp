#include "fiberlab/csf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>
#include <utility>

#include "fiberlab/error.hpp"
#include "fiberlab/parallel.hpp"

namespace fiberlab::csf {

namespace g = fiberlab::geometry;
using std::numbers::pi;

namespace {

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline Vec2 wrap(const Vec2& p) { return Vec2(p.x() - std::floor(p.x()), p.y() - std::floor(p.y())); }

inline Vec2 min_image(const Vec2& d) { return Vec2(d.x() - std::round(d.x()), d.y() - std::round(d.y())); }

inline int cell_of(double x, int G) {
  const int c = static_cast<int>(std::floor(x * G)) % G;
  return c < 0 ? c + G : c;
}

void check_cfl(double cfl) {
  if (!(cfl > 0.0 && cfl <= 0.5)) {
    throw Error(ErrorCode::CFLViolation, "cfl factor must lie in (0, 0.5], got " + std::to_string(cfl));
  }
}

// Per-curve scratch for the two-phase step: analyze() fills the unit tangents and
// spacings, advance() applies the update with the shared dt.
struct Work {
  std::vector<Vec2> tan;
  std::vector<double> h;
  double hmin = 0.0, hmax = 0.0, length = 0.0, kmax = 0.0;
};

void analyze(const CurveState& C, Work& w) {
  const int m = C.size();
  const auto& p = C.points();
  w.tan.resize(m);
  w.h.resize(m);
  w.hmin = std::numeric_limits<double>::infinity();
  w.hmax = 0.0;
  w.length = 0.0;
  for (int i = 0; i < m; ++i) {
    const Vec2 d = (i + 1 < m ? p[i + 1] : p[0] + C.winding().cast<double>()) - p[i];
    const double h = d.norm();
    if (!(h > 1e-14) || !std::isfinite(h)) {
      throw Error(ErrorCode::DegenerateSpacing, "coincident samples at index " + std::to_string(i));
    }
    w.h[i] = h;
    w.tan[i] = d / h;
    w.hmin = std::min(w.hmin, h);
    w.hmax = std::max(w.hmax, h);
    w.length += h;
  }
  double k2 = 0.0;
  for (int i = 0; i < m; ++i) {
    const int im = i == 0 ? m - 1 : i - 1;
    // Circle through three samples: kappa = 2 sin(angle) / |chord|.
    const Vec2 chord = w.tan[im] * w.h[im] + w.tan[i] * w.h[i];
    const double s = cross(w.tan[im], w.tan[i]);
    k2 = std::max(k2, 4.0 * s * s / chord.squaredNorm());
  }
  w.kmax = std::sqrt(k2);
}

// Returns the largest displacement.
double advance(CurveState& C, const Work& w, double dt, std::vector<Vec2>& out) {
  const int m = C.size();
  const auto& p = C.points();
  out.resize(m);
  double disp = 0.0;
  for (int i = 0; i < m; ++i) {
    const int im = i == 0 ? m - 1 : i - 1;
    const Vec2 kv = (w.tan[i] - w.tan[im]) * (2.0 / (w.h[im] + w.h[i]));
    out[i] = p[i] + dt * kv;
    disp = std::max(disp, dt * kv.norm());
  }
  C = CurveState(out, C.winding());
  return disp;
}

struct SegmentRef {
  int curve;
  int index;
};

bool segments_cross(const CurveState& A, int i, const CurveState& B, int j) {
  const Vec2 a = A.at(i), da = A.at(i + 1) - a;
  Vec2 b = B.at(j);
  const Vec2 db = B.at(j + 1) - b;
  const Vec2 shift = (a + 0.5 * da) - (b + 0.5 * db);
  b += Vec2(std::round(shift.x()), std::round(shift.y()));
  const double o1 = cross(da, b - a), o2 = cross(da, b + db - a);
  const double o3 = cross(db, a - b), o4 = cross(db, a + da - b);
  if (o1 == 0.0 && o2 == 0.0) {
    // collinear: overlap of the parameter intervals along da
    const double L2 = da.squaredNorm();
    if (L2 == 0.0) return false;
    const double t0 = da.dot(b - a) / L2, t1 = da.dot(b + db - a) / L2;
    return std::max(t0, t1) >= 0.0 && std::min(t0, t1) <= 1.0;
  }
  // closed segments: touching counts
  return o1 * o2 <= 0.0 && o3 * o4 <= 0.0;
}

// Buckets every segment into the torus cells its bounding box touches, then tests
// pairs sharing a cell. `want` decides which pairs count.
template <class Want>
bool any_crossing(const std::vector<CurveState>& curves, int G, Want want) {
  if (G < 3) throw Error(ErrorCode::BadConfig, "hash grid needs at least 3 cells per side");
  std::vector<std::vector<SegmentRef>> cells(static_cast<std::size_t>(G) * G);
  for (int c = 0; c < static_cast<int>(curves.size()); ++c) {
    const CurveState& C = curves[c];
    for (int i = 0; i < C.size(); ++i) {
      const Vec2 a = wrap(C.at(i));
      const Vec2 b = a + (C.at(i + 1) - C.at(i));
      const int x0 = static_cast<int>(std::floor(std::min(a.x(), b.x()) * G));
      const int x1 = static_cast<int>(std::floor(std::max(a.x(), b.x()) * G));
      const int y0 = static_cast<int>(std::floor(std::min(a.y(), b.y()) * G));
      const int y1 = static_cast<int>(std::floor(std::max(a.y(), b.y()) * G));
      for (int x = x0; x <= std::min(x1, x0 + G - 1); ++x) {
        for (int y = y0; y <= std::min(y1, y0 + G - 1); ++y) {
          const int cx = ((x % G) + G) % G, cy = ((y % G) + G) % G;
          cells[static_cast<std::size_t>(cx) * G + cy].push_back({c, i});
        }
      }
    }
  }
  for (const auto& cell : cells) {
    for (std::size_t u = 0; u < cell.size(); ++u) {
      for (std::size_t v = u + 1; v < cell.size(); ++v) {
        const SegmentRef s = cell[u], t = cell[v];
        if (!want(s, t)) continue;
        if (segments_cross(curves[s.curve], s.index, curves[t.curve], t.index)) return true;
      }
    }
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------

CurveState::CurveState(std::vector<Vec2> lifted, Eigen::Vector2i winding)
    : pts_(std::move(lifted)), winding_(winding) {
  if (pts_.size() < 4) throw Error(ErrorCode::InvalidInput, "curve needs at least 4 samples");
  for (const auto& p : pts_) {
    if (!p.allFinite()) throw Error(ErrorCode::InvalidInput, "non-finite curve sample");
  }
}

CurveState CurveState::from_shape(const moduli::FiberShape& S) {
  if (S.model.kind() != g::ModelKind::FlatT2) {
    throw Error(ErrorCode::UnsupportedBase, "curve-shortening flow runs on flat-t2");
  }
  Eigen::Vector3d closing;
  const auto L = moduli::lift_curve(S, &closing);
  std::vector<Vec2> pts;
  pts.reserve(L.size());
  for (const auto& p : L) pts.emplace_back(p.x(), p.y());
  if (pts.empty()) throw Error(ErrorCode::InvalidInput, "empty fiber");
  const Eigen::Vector3d w = L.back() + closing - L.front();
  return CurveState(std::move(pts), Eigen::Vector2i(static_cast<int>(std::lround(w.x())),
                                                    static_cast<int>(std::lround(w.y()))));
}

moduli::FiberShape CurveState::to_shape() const {
  moduli::FiberShape S{g::FibrationModel::flat_t2(), {}};
  S.samples.reserve(pts_.size());
  for (const auto& p : pts_) {
    g::TotalPoint q;
    q.c.setZero();
    q.c.head<2>() = wrap(p);
    S.samples.push_back(q);
  }
  return S;
}

Vec2 CurveState::at(int i) const {
  const int m = size();
  if (i < 0) return pts_[i + m] - winding_.cast<double>();
  if (i >= m) return pts_[i - m] + winding_.cast<double>();
  return pts_[i];
}

std::vector<double> CurveState::spacings() const {
  std::vector<double> h(pts_.size());
  for (int i = 0; i < size(); ++i) h[i] = (at(i + 1) - at(i)).norm();
  return h;
}

double CurveState::length() const {
  double L = 0.0;
  for (double h : spacings()) L += h;
  return L;
}

double CurveState::min_spacing() const {
  const auto h = spacings();
  return *std::min_element(h.begin(), h.end());
}

double CurveState::spacing_ratio() const {
  const auto h = spacings();
  const auto [lo, hi] = std::minmax_element(h.begin(), h.end());
  return *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------

CurveState line(const Eigen::Vector2i& slope, int m, const Vec2& offset) {
  return perturbed_line(slope, m, offset, 0.0, 0.0);
}

CurveState perturbed_line(const Eigen::Vector2i& slope, int m, const Vec2& offset, double amp,
                          double phase, int mode) {
  if (slope.isZero()) throw Error(ErrorCode::InvalidInput, "line needs a nonzero slope");
  const Vec2 w = slope.cast<double>();
  const Vec2 n = Vec2(-w.y(), w.x()) / w.norm();
  std::vector<Vec2> pts(m);
  for (int k = 0; k < m; ++k) {
    const double u = static_cast<double>(k) / m;
    pts[k] = offset + u * w + amp * std::sin(2.0 * pi * mode * u + phase) * n;
  }
  return CurveState(std::move(pts), slope);
}

CurveState circle(const Vec2& center, double radius, int m) {
  std::vector<Vec2> pts(m);
  for (int k = 0; k < m; ++k) {
    const double a = 2.0 * pi * k / m;
    pts[k] = center + radius * Vec2(std::cos(a), std::sin(a));
  }
  return CurveState(std::move(pts), Eigen::Vector2i::Zero());
}

std::vector<double> curvature(const CurveState& C) {
  Work w;
  analyze(C, w);
  const int m = C.size();
  std::vector<double> k(m);
  for (int i = 0; i < m; ++i) {
    const int im = i == 0 ? m - 1 : i - 1;
    const Vec2 chord = w.tan[im] * w.h[im] + w.tan[i] * w.h[i];
    k[i] = 2.0 * cross(w.tan[im], w.tan[i]) / chord.norm();
  }
  return k;
}

double max_abs_curvature(const CurveState& C) {
  Work w;
  analyze(C, w);
  return w.kmax;
}

double stable_dt(const CurveState& C, double cfl) {
  check_cfl(cfl);
  const double h = C.min_spacing();
  return cfl * h * h;
}

CurveState csf_step(const CurveState& C, double dt) {
  Work w;
  analyze(C, w);
  if (!(dt >= 0.0) || dt > 0.5 * w.hmin * w.hmin * (1.0 + 1e-12)) {
    throw Error(ErrorCode::CFLViolation, "dt exceeds 0.5 * min spacing^2");
  }
  CurveState out = C;
  std::vector<Vec2> buf;
  advance(out, w, dt, buf);
  return out;
}

CurveState resample_uniform(const CurveState& C) {
  const int m = C.size();
  const auto h = C.spacings();
  double L = 0.0;
  for (double x : h) L += x;
  std::vector<Vec2> out(m);
  out[0] = C.at(0);
  int seg = 0;
  double seg_start = 0.0;
  for (int j = 1; j < m; ++j) {
    const double target = L * j / m;
    while (seg < m - 1 && seg_start + h[seg] < target) {
      seg_start += h[seg];
      ++seg;
    }
    const double f = h[seg] > 0.0 ? std::clamp((target - seg_start) / h[seg], 0.0, 1.0) : 0.0;
    out[j] = C.at(seg) + f * (C.at(seg + 1) - C.at(seg));
  }
  return CurveState(std::move(out), C.winding());
}

bool self_intersects(const CurveState& C, int grid) {
  const int m = C.size();
  return any_crossing({C}, grid, [m](const SegmentRef& s, const SegmentRef& t) {
    const int gap = std::abs(s.index - t.index);
    return gap > 1 && gap < m - 1;
  });
}

bool curves_cross(const std::vector<CurveState>& curves, int grid) {
  return any_crossing(curves, grid,
                      [](const SegmentRef& s, const SegmentRef& t) { return s.curve != t.curve; });
}

double min_pair_distance(const std::vector<CurveState>& curves, int G) {
  if (G < 3) throw Error(ErrorCode::BadConfig, "hash grid needs at least 3 cells per side");
  const bool single = curves.size() == 1;
  struct Item {
    Vec2 p;
    int curve;
    int index;
  };
  std::vector<std::vector<Item>> cells(static_cast<std::size_t>(G) * G);
  for (int c = 0; c < static_cast<int>(curves.size()); ++c) {
    for (int i = 0; i < curves[c].size(); ++i) {
      const Vec2 p = wrap(curves[c].points()[i]);
      cells[static_cast<std::size_t>(cell_of(p.x(), G)) * G + cell_of(p.y(), G)].push_back({p, c, i});
    }
  }
  double best2 = 1.0 / (static_cast<double>(G) * G);
  for (int cx = 0; cx < G; ++cx) {
    for (int cy = 0; cy < G; ++cy) {
      for (const Item& a : cells[static_cast<std::size_t>(cx) * G + cy]) {
        const int m = curves[a.curve].size();
        for (int dx = -1; dx <= 1; ++dx) {
          for (int dy = -1; dy <= 1; ++dy) {
            const int nx = (cx + dx + G) % G, ny = (cy + dy + G) % G;
            for (const Item& b : cells[static_cast<std::size_t>(nx) * G + ny]) {
              if (single) {
                const int gap = std::abs(a.index - b.index);
                if (std::min(gap, m - gap) < m / 8) continue;
              } else if (a.curve == b.curve) {
                continue;
              }
              best2 = std::min(best2, min_image(a.p - b.p).squaredNorm());
            }
          }
        }
      }
    }
  }
  return std::sqrt(best2);
}

// ---------------------------------------------------------------------------

namespace {

FlowResult run_flow(std::vector<CurveState> cur, const FlowParams& P, bool fixed, double t_end) {
  check_cfl(P.cfl);
  const int n = static_cast<int>(cur.size());
  if (n == 0) throw Error(ErrorCode::InvalidInput, "nothing to flow");
  for (int c = 0; c < n; ++c) {
    if (self_intersects(cur[c], P.grid)) {
      throw Error(ErrorCode::SelfIntersection, "curve " + std::to_string(c) + " is not simple");
    }
  }
  if (n > 1 && curves_cross(cur, P.grid)) {
    throw Error(ErrorCode::DisjointnessLost, "curves cross at step 0");
  }

  FlowResult R;
  std::vector<Work> work(n);
  std::vector<std::vector<Vec2>> bufs(n);
  std::vector<double> disp(n, 0.0);
  std::vector<int> since(n, 0);
  double exact = min_pair_distance(cur, P.grid);
  double bound = exact;
  R.min_pair_dist = exact;
  const int stride = std::max(1, P.trace_stride);
  long last_row = -1;

  for (;;) {
    parallel_for(n, [&](std::size_t c) { analyze(cur[c], work[c]); });
    double kmax = 0.0, hmin = std::numeric_limits<double>::infinity(), hmax = 0.0, length = 0.0;
    for (const auto& w : work) {
      kmax = std::max(kmax, w.kmax);
      hmin = std::min(hmin, w.hmin);
      hmax = std::max(hmax, w.hmax);
      length += w.length;
    }
    R.max_kappa = kmax;
    const bool done = fixed ? R.t >= t_end : kmax < P.kappa_tol;
    if (R.steps % stride == 0 || done) {
      R.trace.push_back({R.t, length, kmax, bound});
      last_row = R.steps;
    }
    if (done) break;
    if (!fixed && R.t >= P.t_max) {
      throw Error(ErrorCode::TimeBudgetExceeded,
                  "max |kappa| = " + std::to_string(kmax) + " at t_max = " + std::to_string(P.t_max));
    }
    double dt = P.cfl * hmin * hmin;
    dt = std::min(dt, (fixed ? t_end : P.t_max) - R.t);

    parallel_for(n, [&](std::size_t c) { disp[c] = advance(cur[c], work[c], dt, bufs[c]); });
    R.t += dt;
    ++R.steps;
    const double step_disp = *std::max_element(disp.begin(), disp.end());
    bound -= 2.0 * step_disp;

    bool resampled = false;
    for (int c = 0; c < n; ++c) {
      // Spacing ratio from the pre-step analysis; it moves by O(dt) per step.
      if (++since[c] >= P.resample_period || work[c].hmax > P.resample_ratio * work[c].hmin) {
        cur[c] = resample_uniform(cur[c]);
        since[c] = 0;
        resampled = true;
        ++R.resamples;
        if (self_intersects(cur[c], P.grid)) {
          throw Error(ErrorCode::SelfIntersection,
                      "curve " + std::to_string(c) + " self-intersects at step " +
                          std::to_string(R.steps));
        }
      }
    }
    // A crossing forces two samples within one spacing of each other, so a bound above
    // 1.5 hmax certifies disjointness between exact checks.
    if (resampled || (n > 1 && bound < std::max(1.5 * hmax, 0.5 * exact))) {
      exact = min_pair_distance(cur, P.grid);
      bound = exact;
      if (n > 1 && curves_cross(cur, P.grid)) {
        throw Error(ErrorCode::DisjointnessLost,
                    "curves cross at step " + std::to_string(R.steps));
      }
    }
    if (n > 1 && bound < R.min_pair_dist) {
      R.min_pair_dist = bound;
      R.min_pair_step = R.steps;
    }
  }
  if (last_row != R.steps) R.trace.push_back({R.t, R.trace.back().length, R.max_kappa, bound});
  R.curves = std::move(cur);
  return R;
}

}  // namespace

FlowResult flow_until(const CurveState& C, const FlowParams& params) {
  return run_flow({C}, params, false, 0.0);
}

FlowResult flow_for(const CurveState& C, double t, const FlowParams& params) {
  return run_flow({C}, params, true, t);
}

FlowResult flow_curves(const std::vector<CurveState>& curves, const FlowParams& params) {
  return run_flow(curves, params, false, 0.0);
}

std::pair<moduli::Fibering, FlowResult> flow_fibering(const moduli::Fibering& F,
                                                      const FlowParams& params) {
  if (F.model.kind() != g::ModelKind::FlatT2) {
    throw Error(ErrorCode::UnsupportedBase, "curve-shortening flow runs on flat-t2");
  }
  std::vector<CurveState> curves;
  curves.reserve(F.fibers.size());
  for (const auto& S : F.fibers) curves.push_back(CurveState::from_shape(S));
  FlowResult R = flow_curves(curves, params);
  return {to_fibering(R.curves), std::move(R)};
}

std::vector<CurveState> linear_curves(const Eigen::Vector2i& slope, int n, int m) {
  return perturbed_linear_curves(slope, m, 0.0, std::vector<double>(n, 0.0));
}

std::vector<CurveState> perturbed_linear_curves(const Eigen::Vector2i& slope, int m, double amp,
                                                const std::vector<double>& phases) {
  const Vec2 w = slope.cast<double>();
  // Offsets along (b, -a) / |w|^2 move the invariant b x - a y by exactly i / n.
  const Vec2 step = Vec2(w.y(), -w.x()) / w.squaredNorm();
  const int n = static_cast<int>(phases.size());
  std::vector<CurveState> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.push_back(perturbed_line(slope, m, step * (static_cast<double>(i) / n), amp, phases[i]));
  }
  return out;
}

std::vector<double> coherent_phases(const Eigen::Vector2i& slope, int n, double phase0) {
  // Extended Euclid: k . slope = gcd = 1 for primitive slopes.
  long a = slope.x(), b = slope.y();
  long x0 = 1, y0 = 0, x1 = 0, y1 = 1;
  while (b != 0) {
    const long q = a / b;
    std::tie(a, b) = std::make_pair(b, a - q * b);
    std::tie(x0, x1) = std::make_pair(x1, x0 - q * x1);
    std::tie(y0, y1) = std::make_pair(y1, y0 - q * y1);
  }
  if (std::abs(a) != 1) throw Error(ErrorCode::NonPrimitive, "slope must be primitive");
  const Vec2 k = Vec2(static_cast<double>(x0 * a), static_cast<double>(y0 * a));
  const Vec2 w = slope.cast<double>();
  const Vec2 step = Vec2(w.y(), -w.x()) / w.squaredNorm();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = phase0 + 2.0 * pi * k.dot(step) * i / n;
  return out;
}

moduli::Fibering to_fibering(const std::vector<CurveState>& curves) {
  moduli::Fibering F;
  F.model = g::FibrationModel::flat_t2();
  for (const auto& C : curves) {
    F.fibers.push_back(C.to_shape());
    F.base.push_back(g::project(F.model, F.fibers.back().samples.front()));
  }
  return F;
}

}  // namespace fiberlab::csf
