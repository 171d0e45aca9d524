#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "lpose/errors.hpp"

namespace lpose {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Triangle mesh. Vertices in mm; faces index into the vertex list.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  bool valid() const {
    if (vertices.empty()) return false;
    const int n = static_cast<int>(vertices.size());
    for (const auto& f : faces)
      for (int idx : f)
        if (idx < 0 || idx >= n) return false;
    return true;
  }
};

// Two unconstrained 3-vectors; the first two columns of a rotation encoding.
// Continuous (no wrap-around), hence regression-friendly.
struct Rot6D {
  Vec3 a1;
  Vec3 a2;
};

inline bool is_rotation_matrix(const Mat3& m, double tol = 1e-9) {
  const Mat3 err = m.transpose() * m - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() < tol && std::abs(m.determinant() - 1.0) < tol;
}

// Gram-Schmidt orthonormalization of the 6D encoding into a rotation matrix:
// e1 = a1/|a1|, e2 = normalize(a2 - (e1.a2) e1), e3 = e1 x e2.
inline Mat3 rot6d_to_matrix(const Rot6D& r) {
  const double n1 = r.a1.norm();
  if (n1 < 1e-12) throw DegenerateInput("rot6d_to_matrix: a1 is (near) zero");
  const Vec3 e1 = r.a1 / n1;
  const Vec3 u2 = r.a2 - e1.dot(r.a2) * e1;
  const double n2 = u2.norm();
  if (n2 < 1e-12) throw DegenerateInput("rot6d_to_matrix: a2 (near) parallel to a1");
  const Vec3 e2 = u2 / n2;
  const Vec3 e3 = e1.cross(e2);
  Mat3 m;
  m.col(0) = e1;
  m.col(1) = e2;
  m.col(2) = e3;
  return m;
}

// Inverse encoding: first two columns. Exact round trip through
// rot6d_to_matrix for any valid rotation.
inline Rot6D matrix_to_rot6d(const Mat3& m) {
  return Rot6D{m.col(0), m.col(1)};
}

// Rotation R plus translation t (mm). Maps p -> R*p + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    return RigidTransform{rotation.transpose(), -(rotation.transpose() * translation)};
  }
};

inline std::vector<Vec3> apply_transform(const RigidTransform& tf,
                                         const std::vector<Vec3>& points) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(tf.apply(p));
  return out;
}

// compose(a, b) applies b first, then a.
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return RigidTransform{a.rotation * b.rotation,
                        a.rotation * b.translation + a.translation};
}

// Geodesic distance on SO(3): arccos((trace(a^T b) - 1)/2), in degrees.
// The arccos argument is clamped to [-1, 1] to absorb floating-point drift
// at 0 and 180 degrees.
inline double rotation_geodesic_deg(const Mat3& a, const Mat3& b) {
  const double c = ((a.transpose() * b).trace() - 1.0) / 2.0;
  return rad2deg(std::acos(std::clamp(c, -1.0, 1.0)));
}

inline double rotation_angle_rad(const Mat3& r) {
  const double c = (r.trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

// Rotation by angle_rad about a (not necessarily unit) axis.
inline Mat3 axis_angle(const Vec3& axis, double angle_rad) {
  return Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
}

}  // namespace lpose
