#include "fiberlab/cech.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "fiberlab/circle_diffeo.hpp"
#include "fiberlab/error.hpp"

namespace fiberlab::cech {

using circle::circle_distance;
using circle::wrap01;

std::string_view to_string(Base b) {
  switch (b) {
    case Base::S1: return "S1";
    case Base::S2: return "S2";
    case Base::T2: return "T2";
  }
  return "?";
}

Base parse_base(std::string_view s) {
  std::string up;
  for (char c : s) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (up == "S1") return Base::S1;
  if (up == "S2") return Base::S2;
  if (up == "T2") return Base::T2;
  throw Error(ErrorCode::UnsupportedBase, "unsupported base '" + std::string(s) + "'");
}

namespace {

// Open arc (lo, hi) of the circle, lo < hi, length < 1.
bool in_arc(double theta, double lo, double hi) {
  const double t = wrap01(theta - lo);
  return t > 0.0 && t < hi - lo;
}

constexpr double kWiden = 0.1;

bool in_half(double theta, int half) {
  return in_arc(theta, 0.5 * half - kWiden, 0.5 * half + 0.5 + kWiden);
}

}  // namespace

std::shared_ptr<const ModelCover> ModelCover::make(Base base, int m) {
  if (m < 4) throw Error(ErrorCode::InvalidInput, "model cover needs at least 4 samples");
  auto c = std::make_shared<ModelCover>();
  c->base_ = base;
  c->m_ = m;
  std::vector<std::function<bool(const CoverPoint&)>> member;

  switch (base) {
    case Base::S1: {
      const int first = (m + 1) / 2;
      for (int k = 0; k < m; ++k) {
        const bool near_zero = k < first;
        const int count = near_zero ? first : m - first;
        const int idx = near_zero ? k : k - first;
        const double centre = near_zero ? 0.0 : 0.5;
        const double theta =
            centre + 2.0 * kWiden * ((idx + 0.5) / static_cast<double>(count) - 0.5);
        c->points_.push_back({wrap01(theta), 0.0});
      }
      for (int h = 0; h < 2; ++h) {
        member.push_back([h](const CoverPoint& p) { return in_half(p[0], h); });
      }
      break;
    }
    case Base::S2: {
      // Equatorial annulus samples; both caps contain the whole equator.
      for (int k = 0; k < m; ++k) c->points_.push_back({static_cast<double>(k) / m, 0.0});
      member.push_back([](const CoverPoint&) { return true; });
      member.push_back([](const CoverPoint&) { return true; });
      break;
    }
    case Base::T2: {
      for (int b = 0; b < m; ++b) {
        for (int a = 0; a < m; ++a) {
          c->points_.push_back({(a + 0.5) / m, (b + 0.5) / m});
        }
      }
      for (int cy = 0; cy < 2; ++cy) {
        for (int cx = 0; cx < 2; ++cx) {
          member.push_back(
              [cx, cy](const CoverPoint& p) { return in_half(p[0], cx) && in_half(p[1], cy); });
        }
      }
      break;
    }
  }

  const int charts = static_cast<int>(member.size());
  const int npts = static_cast<int>(c->points_.size());
  c->chart_points_.resize(charts);
  c->chart_slot_.assign(charts, std::vector<int>(npts, -1));
  for (int ch = 0; ch < charts; ++ch) {
    for (int p = 0; p < npts; ++p) {
      if (member[ch](c->points_[p])) {
        c->chart_slot_[ch][p] = static_cast<int>(c->chart_points_[ch].size());
        c->chart_points_[ch].push_back(p);
      }
    }
  }
  auto in_chart = [&](int ch, int p) { return c->chart_slot_[ch][p] >= 0; };

  for (int i = 0; i < charts; ++i) {
    for (int j = i + 1; j < charts; ++j) {
      Overlap ov{i, j, {}};
      for (int p = 0; p < npts; ++p) {
        if (in_chart(i, p) && in_chart(j, p)) ov.points.push_back(p);
      }
      if (!ov.points.empty()) c->overlaps_.push_back(std::move(ov));
    }
  }
  c->overlap_slot_.assign(c->overlaps_.size(), std::vector<int>(npts, -1));
  for (std::size_t o = 0; o < c->overlaps_.size(); ++o) {
    const auto& pts = c->overlaps_[o].points;
    for (std::size_t s = 0; s < pts.size(); ++s) c->overlap_slot_[o][pts[s]] = static_cast<int>(s);
  }
  // Two-chart nerves have no triple overlaps; only T2 contributes here.
  for (int i = 0; i < charts; ++i) {
    for (int j = i + 1; j < charts; ++j) {
      for (int k = j + 1; k < charts; ++k) {
        TripleOverlap tr{i, j, k, {}};
        for (int p = 0; p < npts; ++p) {
          if (in_chart(i, p) && in_chart(j, p) && in_chart(k, p)) tr.points.push_back(p);
        }
        if (!tr.points.empty()) c->triples_.push_back(std::move(tr));
      }
    }
  }
  return c;
}

int ModelCover::overlap_index(int i, int j) const {
  for (std::size_t o = 0; o < overlaps_.size(); ++o) {
    if (overlaps_[o].i == i && overlaps_[o].j == j) return static_cast<int>(o);
  }
  return -1;
}

int ModelCover::chart_slot(int chart, int point) const { return chart_slot_[chart][point]; }

int ModelCover::overlap_slot(int overlap, int point) const {
  return overlap_slot_[overlap][point];
}

// ---------------------------------------------------------------------------

Cochain0 Cochain0::from_function(CoverPtr cover,
                                 const std::function<double(int, const CoverPoint&)>& f) {
  Cochain0 k{cover, {}};
  k.values.resize(cover->chart_count());
  for (int ch = 0; ch < cover->chart_count(); ++ch) {
    for (int p : cover->chart_points(ch)) k.values[ch].push_back(wrap01(f(ch, cover->points()[p])));
  }
  return k;
}

Cochain0 Cochain0::constant(CoverPtr cover, double c) {
  return from_function(cover, [c](int, const CoverPoint&) { return c; });
}

Cocycle1 Cocycle1::from_function(CoverPtr cover,
                                 const std::function<double(int, int, const CoverPoint&)>& f) {
  Cocycle1 t{cover, {}};
  for (const auto& ov : cover->overlaps()) {
    std::vector<double> v;
    v.reserve(ov.points.size());
    for (int p : ov.points) v.push_back(wrap01(f(ov.i, ov.j, cover->points()[p])));
    t.values.push_back(std::move(v));
  }
  return t;
}

Cocycle1 Cocycle1::zero(CoverPtr cover) {
  return from_function(cover, [](int, int, const CoverPoint&) { return 0.0; });
}

namespace {

void check_shape(const Cocycle1& tau) {
  if (!tau.cover) throw Error(ErrorCode::InvalidInput, "cocycle without cover");
  if (tau.values.size() != tau.cover->overlaps().size()) {
    throw Error(ErrorCode::GridMismatch, "cocycle overlap count does not match its cover");
  }
  for (std::size_t o = 0; o < tau.values.size(); ++o) {
    if (tau.values[o].size() != tau.cover->overlaps()[o].points.size()) {
      throw Error(ErrorCode::GridMismatch, "cocycle sample count does not match its cover");
    }
  }
}

void check_compatible(const Cocycle1& tau, const Cochain0& kappa) {
  check_shape(tau);
  if (!kappa.cover || !tau.cover->same_as(*kappa.cover) ||
      static_cast<int>(kappa.values.size()) != tau.cover->chart_count()) {
    throw Error(ErrorCode::GridMismatch, "cochain and cocycle live on different covers");
  }
  for (int ch = 0; ch < tau.cover->chart_count(); ++ch) {
    if (kappa.values[ch].size() != tau.cover->chart_points(ch).size()) {
      throw Error(ErrorCode::GridMismatch, "cochain sample count does not match its cover");
    }
  }
}

}  // namespace

double cocycle_check(const Cocycle1& tau) {
  check_shape(tau);
  const ModelCover& c = *tau.cover;
  double worst = 0.0;
  for (const auto& tr : c.triples()) {
    const int oij = c.overlap_index(tr.i, tr.j);
    const int ojk = c.overlap_index(tr.j, tr.k);
    const int oik = c.overlap_index(tr.i, tr.k);
    for (int p : tr.points) {
      const double r = tau.values[oij][c.overlap_slot(oij, p)] +
                       tau.values[ojk][c.overlap_slot(ojk, p)] -
                       tau.values[oik][c.overlap_slot(oik, p)];
      worst = std::max(worst, circle_distance(r, 0.0));
    }
  }
  return worst;
}

Cocycle1 coboundary_act(const Cocycle1& tau, const Cochain0& kappa) {
  check_compatible(tau, kappa);
  const ModelCover& c = *tau.cover;
  Cocycle1 out{tau.cover, tau.values};
  for (std::size_t o = 0; o < c.overlaps().size(); ++o) {
    const auto& ov = c.overlaps()[o];
    for (std::size_t s = 0; s < ov.points.size(); ++s) {
      const int p = ov.points[s];
      const double ki = kappa.values[ov.i][c.chart_slot(ov.i, p)];
      const double kj = kappa.values[ov.j][c.chart_slot(ov.j, p)];
      out.values[o][s] = wrap01(-ki + tau.values[o][s] + kj);
    }
  }
  return out;
}

double cocycle_distance(const Cocycle1& a, const Cocycle1& b) {
  check_shape(a);
  check_shape(b);
  if (!a.cover->same_as(*b.cover)) throw Error(ErrorCode::GridMismatch, "different covers");
  double worst = 0.0;
  for (std::size_t o = 0; o < a.values.size(); ++o) {
    for (std::size_t s = 0; s < a.values[o].size(); ++s) {
      worst = std::max(worst, circle_distance(a.values[o][s], b.values[o][s]));
    }
  }
  return worst;
}

bool stabilizes(const Cocycle1& tau, const Cochain0& kappa, double tol) {
  return cocycle_distance(coboundary_act(tau, kappa), tau) < tol;
}

long euler_class(const Cocycle1& tau) {
  check_shape(tau);
  if (tau.cover->base() != Base::S2) {
    throw Error(ErrorCode::UnsupportedBase, "euler_class is defined on the two-cap S2 cover");
  }
  // Equator samples are in increasing theta order; close the loop explicitly.
  std::vector<double> path = tau.values.at(0);
  path.push_back(path.front());
  return circle::winding_number(path);
}

FiberingClassRecord classify(Base base, long euler) {
  FiberingClassRecord r;
  r.base = base;
  r.euler = euler;
  const long e = std::labs(euler);
  switch (base) {
    case Base::S1:
      if (euler != 0) {
        throw Error(ErrorCode::InvalidEuler,
                    "circle bundles over S1 have vanishing Euler class (H^2(S1) = 0)");
      }
      r.total_space = "T2";
      r.core = "Zprim2";
      break;
    case Base::S2:
      if (e == 0) {
        r.total_space = "S2xS1";
        r.core = "non-finite-dimensional";
      } else {
        r.total_space = "L(" + std::to_string(e) + ",1)";
        if (e == 1) r.total_alias = "S3";
        if (e == 2) r.total_alias = "RP3";
        r.core = e <= 2 ? "S2 ⊔ S2" : "S0";
      }
      break;
    case Base::T2:
      if (e == 0) {
        r.total_space = "T3";
        r.core = "Zprim3";
      } else {
        r.total_space = "MT(T2," + std::to_string(e) + ")";
        r.core = "S0";
      }
      break;
  }
  return r;
}

}  // namespace fiberlab::cech
