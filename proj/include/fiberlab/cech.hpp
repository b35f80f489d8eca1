#pragma once

// Čech 1-cocycles with circle-group coefficients on fixed model covers of
// S^1, S^2 and T^2, the coboundary action of 0-cochains, Euler classes of
// circle bundles over S^2, and the classification table of oriented circle
// fiberings by base and Euler number.
//
// Coefficients are additive angles in turns; the group law is addition mod 1.

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace fiberlab::cech {

enum class Base { S1, S2, T2 };

std::string_view to_string(Base b);
/// Accepts "S1", "S2", "T2" (case-insensitive); anything else is UnsupportedBase.
Base parse_base(std::string_view s);

/// A sample point of the base in chart-independent coordinates:
/// S1 and S2 (equator) use {theta, 0}; T2 uses {x, y}. All in turns.
using CoverPoint = std::array<double, 2>;

struct Overlap {
  int i = 0;  // i < j
  int j = 0;
  std::vector<int> points;  // indices into ModelCover::points()
};

struct TripleOverlap {
  int i = 0, j = 0, k = 0;  // i < j < k
  std::vector<int> points;
};

/// Fixed nerve per base.
///  S1: two arcs (-0.1, 0.6) and (0.4, 1.1); m samples split over the two overlap components.
///  S2: north cap z > -0.2 and south cap z < 0.2; m samples on the equator.
///  T2: four squares (2x2 tiling widened by 0.1); an m x m grid of samples.
class ModelCover {
 public:
  static std::shared_ptr<const ModelCover> make(Base base, int m);

  Base base() const { return base_; }
  int resolution() const { return m_; }
  int chart_count() const { return static_cast<int>(chart_points_.size()); }
  const std::vector<CoverPoint>& points() const { return points_; }
  const std::vector<int>& chart_points(int chart) const { return chart_points_[chart]; }
  const std::vector<Overlap>& overlaps() const { return overlaps_; }
  const std::vector<TripleOverlap>& triples() const { return triples_; }

  /// Index into overlaps() of the (i, j) pair, i < j; -1 when absent.
  int overlap_index(int i, int j) const;
  /// Position of a point within chart_points(chart); -1 when the point is not in the chart.
  int chart_slot(int chart, int point) const;
  /// Position of a point within overlaps()[overlap].points; -1 when absent.
  int overlap_slot(int overlap, int point) const;

  bool same_as(const ModelCover& o) const { return base_ == o.base_ && m_ == o.m_; }

 private:
  Base base_ = Base::S2;
  int m_ = 0;
  std::vector<CoverPoint> points_;
  std::vector<std::vector<int>> chart_points_;
  std::vector<Overlap> overlaps_;
  std::vector<TripleOverlap> triples_;
  std::vector<std::vector<int>> chart_slot_;    // [chart][point] -> slot or -1
  std::vector<std::vector<int>> overlap_slot_;  // [overlap][point] -> slot or -1
};

using CoverPtr = std::shared_ptr<const ModelCover>;

/// Per chart, angle-valued samples at the chart's points.
struct Cochain0 {
  CoverPtr cover;
  std::vector<std::vector<double>> values;

  static Cochain0 from_function(CoverPtr cover,
                                const std::function<double(int chart, const CoverPoint&)>& f);
  static Cochain0 constant(CoverPtr cover, double c);
};

/// Per overlap (i < j), angle-valued samples tau_ij at the overlap's points.
struct Cocycle1 {
  CoverPtr cover;
  std::vector<std::vector<double>> values;

  static Cocycle1 from_function(CoverPtr cover,
                                const std::function<double(int i, int j, const CoverPoint&)>& f);
  static Cocycle1 zero(CoverPtr cover);
};

/// Max over triple overlaps of the circle distance of tau_ij + tau_jk - tau_ik from 0.
/// Covers without triple overlaps return 0.
double cocycle_check(const Cocycle1& tau);

/// tau'_ij = -kappa_i + tau_ij + kappa_j (mod 1).
Cocycle1 coboundary_act(const Cocycle1& tau, const Cochain0& kappa);

/// True iff coboundary_act(tau, kappa) is within tol of tau at every sample.
bool stabilizes(const Cocycle1& tau, const Cochain0& kappa, double tol);

/// Largest circle distance between two cocycles on the same cover.
double cocycle_distance(const Cocycle1& a, const Cocycle1& b);

/// Winding number of the clutching function tau_01 around the equator (S2 cover only).
long euler_class(const Cocycle1& tau);

struct FiberingClassRecord {
  Base base = Base::S2;
  long euler = 0;
  std::string total_space;  // e.g. "T2", "T3", "L(2,1)", "S2xS1", "MT(T2,3)"
  std::string total_alias;  // conventional name when one exists ("S3", "RP3"), else empty
  std::string core;         // "Zprim2", "Zprim3", "S2 ⊔ S2", "S0", "non-finite-dimensional"
};

/// Classification of oriented circle fiberings by base surface and Euler number.
FiberingClassRecord classify(Base base, long euler);

}  // namespace fiberlab::cech
