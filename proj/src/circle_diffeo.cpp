#include "fiberlab/circle_diffeo.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "fiberlab/error.hpp"
#include "fiberlab/spectral.hpp"

namespace fiberlab::circle {

using std::numbers::pi;

double wrap01(double x) {
  double r = x - std::floor(x);
  if (r >= 1.0) r = 0.0;  // x slightly below an integer can round up
  return r;
}

double signed_increment(double a, double b) {
  double d = wrap01(b - a);
  if (d >= 0.5) d -= 1.0;
  return d;
}

double circle_distance(double a, double b) { return std::abs(signed_increment(a, b)); }

// ---------------------------------------------------------------------------

PeriodicSamples::PeriodicSamples(std::vector<double> values) : values_(std::move(values)) {
  const std::size_t n = values_.size();
  if (n < 16 || (n & (n - 1)) != 0) {
    throw Error(ErrorCode::InvalidInput,
                "periodic grid size must be a power of two >= 16, got " + std::to_string(n));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "non-finite sample");
  }
}

PeriodicSamples PeriodicSamples::from_function(std::size_t n,
                                               const std::function<double(double)>& f) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = f(static_cast<double>(k) / static_cast<double>(n));
  return PeriodicSamples(std::move(v));
}

PeriodicSamples PeriodicSamples::constant(std::size_t n, double c) {
  return PeriodicSamples(std::vector<double>(n, c));
}

double PeriodicSamples::mean() const {
  // Mode 0 of the DFT; summed the same way so H_1 matches it bit for bit.
  return spectral::forward(values_)[0].real() / static_cast<double>(size());
}

std::vector<double> PeriodicSamples::derivative() const {
  const std::size_t n = size();
  auto c = spectral::forward(values_);
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k == n / 2) {
      c[k] = 0.0;
      continue;
    }
    c[k] *= std::complex<double>(0.0, 2.0 * pi * static_cast<double>(k));
  }
  return spectral::inverse(c, n);
}

double PeriodicSamples::min_derivative() const {
  const auto d = derivative();
  return *std::min_element(d.begin(), d.end());
}

double PeriodicSamples::amplitude() const {
  const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
  return 0.5 * (*hi - *lo);
}

// ---------------------------------------------------------------------------

PeriodicSpline::PeriodicSpline(const PeriodicSamples& samples)
    : y_(samples.values().begin(), samples.values().end()),
      h_(1.0 / static_cast<double>(samples.size())) {
  // The periodic spline system (M[k-1] + 4 M[k] + M[k+1]) / 6 = second difference / h^2
  // is circulant, so it is diagonal in the Fourier basis.
  const std::size_t n = y_.size();
  auto c = spectral::forward(y_);
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double cs = std::cos(2.0 * pi * static_cast<double>(k) / static_cast<double>(n));
    c[k] *= 6.0 * (2.0 * cs - 2.0) / (h_ * h_ * (4.0 + 2.0 * cs));
  }
  m_ = spectral::inverse(c, n);
}

double PeriodicSpline::operator()(double x) const {
  const std::size_t n = y_.size();
  const double s = wrap01(x) / h_;
  std::size_t k = static_cast<std::size_t>(std::floor(s));
  double t = s - static_cast<double>(k);
  if (k >= n) {
    k = n - 1;
    t = 1.0;
  }
  const std::size_t k1 = (k + 1) % n;
  const double a = 1.0 - t;
  return a * y_[k] + t * y_[k1] +
         h_ * h_ / 6.0 * ((a * a * a - a) * m_[k] + (t * t * t - t) * m_[k1]);
}

double PeriodicSpline::derivative(double x) const {
  const std::size_t n = y_.size();
  const double s = wrap01(x) / h_;
  std::size_t k = static_cast<std::size_t>(std::floor(s));
  double t = s - static_cast<double>(k);
  if (k >= n) {
    k = n - 1;
    t = 1.0;
  }
  const std::size_t k1 = (k + 1) % n;
  const double a = 1.0 - t;
  return (y_[k1] - y_[k]) / h_ +
         h_ / 6.0 * (-(3.0 * a * a - 1.0) * m_[k] + (3.0 * t * t - 1.0) * m_[k1]);
}

// ---------------------------------------------------------------------------

namespace {

void check_orientation(const PeriodicSamples& disp, const char* context) {
  const double md = disp.min_derivative();
  if (!(md > -1.0)) {
    throw Error(ErrorCode::OrientationViolation,
                std::string(context) + ": discrete derivative of displacement reaches " +
                    std::to_string(md) + " <= -1");
  }
}

void check_amplitude(const CircleDiffeo& f, const char* context) {
  if (f.disp().amplitude() > kAmplitudeGuard) {
    throw Error(ErrorCode::AmplitudeExceeded,
                std::string(context) + ": displacement oscillation exceeds " +
                    std::to_string(kAmplitudeGuard));
  }
}

}  // namespace

CircleDiffeo::CircleDiffeo(PeriodicSamples disp) : disp_(std::move(disp)), spline_(disp_) {
  check_orientation(disp_, "CircleDiffeo");
}

CircleDiffeo CircleDiffeo::identity(std::size_t n) {
  return CircleDiffeo(PeriodicSamples::constant(n, 0.0));
}

CircleDiffeo CircleDiffeo::rotation(std::size_t n, Angle theta) {
  return CircleDiffeo(PeriodicSamples::constant(n, theta.value()));
}

CircleDiffeo compose(const CircleDiffeo& f, const CircleDiffeo& g) {
  if (f.grid_size() != g.grid_size()) {
    throw Error(ErrorCode::GridMismatch, "compose: grid sizes differ");
  }
  check_amplitude(f, "compose");
  check_amplitude(g, "compose");
  const std::size_t n = f.grid_size();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = g.disp().node(k);
    out[k] = f.eval(x + g.disp()[k]) - x;
  }
  PeriodicSamples disp(std::move(out));
  check_orientation(disp, "compose");
  return CircleDiffeo(std::move(disp));
}

CircleDiffeo invert(const CircleDiffeo& f) {
  check_amplitude(f, "invert");
  const std::size_t n = f.grid_size();
  const auto vals = f.disp().values();
  const auto [umin, umax] = std::minmax_element(vals.begin(), vals.end());
  const double pad = 2.0 * kAmplitudeGuard;  // spline overshoot between nodes is far smaller

  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double y = f.disp().node(k);
    double lo = y - *umax - pad;
    double hi = y - *umin + pad;
    double x = y - f.disp()[k];
    for (int it = 0; it < 200; ++it) {
      const double r = f.eval(x) - y;
      if (r > 0) hi = std::min(hi, x);
      else lo = std::max(lo, x);
      if (std::abs(r) < 1e-15 || hi - lo < 1e-16) break;
      const double d = f.eval_derivative(x);
      double next = x - r / d;
      if (!(d > 0.0) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
      x = next;
    }
    out[k] = x - y;
  }
  PeriodicSamples disp(std::move(out));
  check_orientation(disp, "invert");
  return CircleDiffeo(std::move(disp));
}

PeriodicSamples heat_step(const PeriodicSamples& u, double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw Error(ErrorCode::InvalidInput, "heat_step: time must be finite and nonnegative");
  }
  if (s == 0.0) return u;
  auto c = spectral::forward(u.values());
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double kk = static_cast<double>(k);
    c[k] *= std::exp(-4.0 * pi * pi * kk * kk * s);
  }
  return PeriodicSamples(spectral::inverse(c, u.size()));
}

double heat_time(double t) { return t / (1.0 - t); }

CircleDiffeo retract(const CircleDiffeo& f, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorCode::InvalidInput, "retract: t must lie in [0, 1]");
  }
  if (t == 0.0) return f;
  if (t == 1.0) return CircleDiffeo(PeriodicSamples::constant(f.grid_size(), f.disp().mean()));
  return CircleDiffeo(heat_step(f.disp(), heat_time(t)));
}

double sup_distance(const CircleDiffeo& f, const CircleDiffeo& g) {
  if (f.grid_size() != g.grid_size()) {
    throw Error(ErrorCode::GridMismatch, "sup_distance: grid sizes differ");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < f.grid_size(); ++k) {
    worst = std::max(worst, circle_distance(f.disp()[k], g.disp()[k]));
  }
  return worst;
}

long winding_number(std::span<const double> path, double max_gap) {
  double total = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double inc = signed_increment(path[k - 1], path[k]);
    if (std::abs(inc) >= max_gap) {
      throw Error(ErrorCode::UndersampledPath,
                  "winding_number: step " + std::to_string(k) + " has angular gap " +
                      std::to_string(std::abs(inc)));
    }
    total += inc;
  }
  const double rounded = std::round(total);
  if (std::abs(total - rounded) >= 0.25) {
    throw Error(ErrorCode::UndersampledPath,
                "winding_number: total increment " + std::to_string(total) +
                    " is not near an integer (path not closed?)");
  }
  return static_cast<long>(rounded);
}

}  // namespace fiberlab::circle
