#pragma once

#include <Eigen/Core>
#include <cmath>

namespace fiberlab {

/// Hamilton quaternion w + x i + y j + z k. Unit quaternions are points of S^3;
/// pure imaginary ones double as vectors of R^3 = span{i, j, k}.
struct Quat {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  Quat() = default;
  constexpr Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

  static Quat from_vec4(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
  static Quat pure(const Eigen::Vector3d& v) { return {0.0, v[0], v[1], v[2]}; }
  /// exp(theta * u) for a unit pure quaternion u.
  static Quat exp_pure(const Eigen::Vector3d& u, double theta) {
    const double s = std::sin(theta);
    return {std::cos(theta), s * u[0], s * u[1], s * u[2]};
  }

  Eigen::Vector4d vec4() const { return {w, x, y, z}; }
  Eigen::Vector3d imag() const { return {x, y, z}; }

  Quat conj() const { return {w, -x, -y, -z}; }
  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  Quat normalized() const {
    const double n = norm();
    return {w / n, x / n, y / n, z / n};
  }

  Quat operator*(const Quat& q) const {
    return {w * q.w - x * q.x - y * q.y - z * q.z,
            w * q.x + x * q.w + y * q.z - z * q.y,
            w * q.y - x * q.z + y * q.w + z * q.x,
            w * q.z + x * q.y - y * q.x + z * q.w};
  }
  Quat operator+(const Quat& q) const { return {w + q.w, x + q.x, y + q.y, z + q.z}; }
  Quat operator-(const Quat& q) const { return {w - q.w, x - q.x, y - q.y, z - q.z}; }
  Quat operator*(double s) const { return {w * s, x * s, y * s, z * s}; }
  Quat operator-() const { return {-w, -x, -y, -z}; }
};

inline Quat operator*(double s, const Quat& q) { return q * s; }

inline constexpr Quat kQuatI{0.0, 1.0, 0.0, 0.0};

/// q v q^-1 for unit q and v in R^3.
inline Eigen::Vector3d rotate(const Quat& q, const Eigen::Vector3d& v) {
  return (q * Quat::pure(v) * q.conj()).imag();
}

}  // namespace fiberlab
