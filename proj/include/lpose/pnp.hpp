#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lpose/camera.hpp"
#include "lpose/errors.hpp"
#include "lpose/geometry.hpp"

namespace lpose {

struct PnpResult {
  RigidTransform pose;
  double reprojection_rms_px = 0.0;  // sqrt(mean over points of |pred - obs|^2)
  int refine_iterations = 0;
  bool translation_only = false;
};

namespace detail {

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

inline double reprojection_rms(const Intrinsics& K, const std::vector<Vec3>& obj,
                               const std::vector<Vec2>& img, const RigidTransform& pose) {
  double sq = 0.0;
  for (std::size_t i = 0; i < obj.size(); ++i) {
    const Vec3 q = pose.apply(obj[i]);
    if (q.z() <= kMinDepth) return std::numeric_limits<double>::infinity();
    sq += (K.project(q) - img[i]).squaredNorm();
  }
  return std::sqrt(sq / static_cast<double>(obj.size()));
}

// Levenberg-Marquardt reprojection refinement. Rotation updates are applied
// as right-multiplied so(3) increments; when translation_only is set the
// rotation block is frozen.
inline RigidTransform refine_pose(const Intrinsics& K, const std::vector<Vec3>& obj,
                                  const std::vector<Vec2>& img, RigidTransform pose,
                                  bool translation_only, int max_iterations,
                                  int* iterations_out) {
  const int n = static_cast<int>(obj.size());
  const int dof = translation_only ? 3 : 6;

  auto residuals = [&](const RigidTransform& p, Eigen::VectorXd& r) -> bool {
    r.resize(2 * n);
    for (int i = 0; i < n; ++i) {
      const Vec3 q = p.apply(obj[i]);
      if (q.z() <= kMinDepth) return false;
      const Vec2 e = K.project(q) - img[i];
      r(2 * i) = e.x();
      r(2 * i + 1) = e.y();
    }
    return true;
  };

  Eigen::VectorXd r;
  if (!residuals(pose, r))
    throw BehindCamera("solve_pnp: initial pose puts points behind the camera", {});
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    Eigen::MatrixXd J(2 * n, dof);
    for (int i = 0; i < n; ++i) {
      const Vec3 q = pose.apply(obj[i]);
      Eigen::Matrix<double, 2, 3> proj;
      proj << K.fx / q.z(), 0, -K.fx * q.x() / (q.z() * q.z()), 0, K.fy / q.z(),
          -K.fy * q.y() / (q.z() * q.z());
      J.block<2, 3>(2 * i, 0) = proj;  // d/dt
      if (!translation_only)
        J.block<2, 3>(2 * i, 3) = proj * (-pose.rotation * skew(obj[i]));  // d/domega
    }
    const Eigen::VectorXd g = J.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() < 1e-14) break;
    const Eigen::MatrixXd JtJ = J.transpose() * J;

    bool accepted = false;
    while (lambda < 1e14) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-12);
      const Eigen::VectorXd step = A.ldlt().solve(-g);
      RigidTransform trial = pose;
      trial.translation += step.head<3>();
      if (!translation_only)
        trial.rotation = pose.rotation *
                         Eigen::AngleAxisd(step.tail<3>().norm(),
                                           step.tail<3>().norm() > 0
                                               ? Vec3(step.tail<3>().normalized())
                                               : Vec3::UnitX())
                             .toRotationMatrix();
      Eigen::VectorXd r_trial;
      if (residuals(trial, r_trial)) {
        const double trial_cost = r_trial.squaredNorm();
        if (trial_cost < cost) {
          const double rel = (cost - trial_cost) / std::max(cost, 1e-300);
          pose = trial;
          r = r_trial;
          cost = trial_cost;
          lambda = std::max(lambda * 0.1, 1e-12);
          accepted = true;
          if (rel < 1e-12) iter = max_iterations;  // converged: negligible gain
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!accepted) break;  // damping exhausted: local minimum
  }
  if (iterations_out) *iterations_out = std::min(iter, max_iterations);
  return pose;
}

// Closed-form EPnP: express world points in barycentric coordinates of four
// control points, recover the camera-frame control points from the null
// space of the projection constraints, then Kabsch the two frames together.
inline RigidTransform epnp_initialize(const Intrinsics& K, const std::vector<Vec3>& obj,
                                      const std::vector<Vec2>& img);

// Linear least-squares translation for a fixed rotation: each observation
// gives two equations linear in t,
//   fx*tx - (u-cx)*tz = (u-cx)*(r3.p) - fx*(r1.p).
inline Vec3 solve_translation_fixed_rotation(const Intrinsics& K,
                                             const std::vector<Vec3>& obj,
                                             const std::vector<Vec2>& img,
                                             const Mat3& rotation) {
  const int n = static_cast<int>(obj.size());
  Eigen::MatrixXd A(2 * n, 3);
  Eigen::VectorXd b(2 * n);
  for (int i = 0; i < n; ++i) {
    const Vec3 rp = rotation * obj[i];
    const double du = img[i].x() - K.cx;
    const double dv = img[i].y() - K.cy;
    A.row(2 * i) << K.fx, 0.0, -du;
    b(2 * i) = du * rp.z() - K.fx * rp.x();
    A.row(2 * i + 1) << 0.0, K.fy, -dv;
    b(2 * i + 1) = dv * rp.z() - K.fy * rp.y();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues()(2) < 1e-9 * svd.singularValues()(0))
    throw DegenerateConfiguration("solve_pnp: translation system is rank-deficient");
  return svd.solve(b);
}

}  // namespace detail

// Recovers the camera-frame pose of a 3D point set from 2D observations.
// Full mode (>= 6 non-coplanar correspondences): EPnP initialization followed
// by Levenberg-Marquardt reprojection refinement. With fixed_rotation
// (>= 3 correspondences), only the translation is estimated: a linear
// least-squares solve plus translation-only refinement.
inline PnpResult solve_pnp(const Intrinsics& K, const std::vector<Vec3>& points_obj,
                           const std::vector<Vec2>& points_img,
                           const std::optional<Mat3>& fixed_rotation = std::nullopt,
                           int max_iterations = 100) {
  if (points_obj.size() != points_img.size())
    throw LengthMismatch("solve_pnp: 3D/2D correspondence count mismatch");
  const int n = static_cast<int>(points_obj.size());

  PnpResult result;
  if (fixed_rotation) {
    if (n < 3)
      throw InsufficientPoints("solve_pnp: fixed-rotation mode needs >= 3 points, got " +
                               std::to_string(n));
    result.translation_only = true;
    result.pose.rotation = *fixed_rotation;
    result.pose.translation = detail::solve_translation_fixed_rotation(
        K, points_obj, points_img, *fixed_rotation);
  } else {
    if (n < 6)
      throw InsufficientPoints("solve_pnp: need >= 6 points without a fixed rotation, got " +
                               std::to_string(n));
    result.pose = detail::epnp_initialize(K, points_obj, points_img);
  }
  result.pose = detail::refine_pose(K, points_obj, points_img, result.pose,
                                    result.translation_only, max_iterations,
                                    &result.refine_iterations);
  result.reprojection_rms_px =
      detail::reprojection_rms(K, points_obj, points_img, result.pose);
  return result;
}

namespace detail {

inline RigidTransform epnp_initialize(const Intrinsics& K, const std::vector<Vec3>& obj,
                                      const std::vector<Vec2>& img) {
  const int n = static_cast<int>(obj.size());

  // Control points: centroid plus principal axes of the cloud.
  Vec3 c0 = Vec3::Zero();
  for (const auto& p : obj) c0 += p;
  c0 /= n;
  Mat3 scatter = Mat3::Zero();
  for (const auto& p : obj) scatter += (p - c0) * (p - c0).transpose();
  scatter /= n;
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
  const Vec3 evals = eig.eigenvalues();  // ascending
  if (evals(0) < 1e-9 * std::max(evals(2), 1e-300))
    throw DegenerateConfiguration("solve_pnp: points are (near) coplanar");

  std::array<Vec3, 4> cw;
  cw[0] = c0;
  for (int k = 0; k < 3; ++k)
    cw[k + 1] = c0 + std::sqrt(evals(2 - k)) * eig.eigenvectors().col(2 - k);

  // Barycentric coordinates of every point in the control-point frame.
  Mat3 basis;
  for (int k = 0; k < 3; ++k) basis.col(k) = cw[k + 1] - cw[0];
  const Mat3 basis_inv = basis.inverse();
  Eigen::MatrixXd alphas(n, 4);
  for (int i = 0; i < n; ++i) {
    const Vec3 a = basis_inv * (obj[i] - cw[0]);
    alphas(i, 1) = a(0);
    alphas(i, 2) = a(1);
    alphas(i, 3) = a(2);
    alphas(i, 0) = 1.0 - a.sum();
  }

  // M x = 0 where x stacks the four camera-frame control points.
  Eigen::MatrixXd M(2 * n, 12);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 4; ++j) {
      const double a = alphas(i, j);
      M.row(2 * i).segment<3>(3 * j) << a * K.fx, 0.0, a * (K.cx - img[i].x());
      M.row(2 * i + 1).segment<3>(3 * j) << 0.0, a * K.fy, a * (K.cy - img[i].y());
    }
  const Eigen::Matrix<double, 12, 12> MtM = M.transpose() * M;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 12, 12>> null_eig(MtM);

  // Four smallest-eigenvalue vectors, v[0] the smallest.
  std::array<std::array<Vec3, 4>, 4> v;
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 4; ++j)
      v[k][j] = null_eig.eigenvectors().col(k).segment<3>(3 * j);

  // Quadratic system on the betas from the six control-point distances.
  constexpr int pair_a[6] = {0, 0, 0, 1, 1, 2};
  constexpr int pair_b[6] = {1, 2, 3, 2, 3, 3};
  Eigen::Matrix<double, 6, 10> L;
  Eigen::Matrix<double, 6, 1> rho;
  for (int r = 0; r < 6; ++r) {
    std::array<Vec3, 4> dv;
    for (int k = 0; k < 4; ++k) dv[k] = v[k][pair_a[r]] - v[k][pair_b[r]];
    // columns: B11 B12 B22 B13 B23 B33 B14 B24 B34 B44
    L(r, 0) = dv[0].dot(dv[0]);
    L(r, 1) = 2.0 * dv[0].dot(dv[1]);
    L(r, 2) = dv[1].dot(dv[1]);
    L(r, 3) = 2.0 * dv[0].dot(dv[2]);
    L(r, 4) = 2.0 * dv[1].dot(dv[2]);
    L(r, 5) = dv[2].dot(dv[2]);
    L(r, 6) = 2.0 * dv[0].dot(dv[3]);
    L(r, 7) = 2.0 * dv[1].dot(dv[3]);
    L(r, 8) = 2.0 * dv[2].dot(dv[3]);
    L(r, 9) = dv[3].dot(dv[3]);
    rho(r) = (cw[pair_a[r]] - cw[pair_b[r]]).squaredNorm();
  }

  auto gauss_newton_betas = [&](Eigen::Vector4d betas) {
    for (int it = 0; it < 8; ++it) {
      Eigen::Matrix<double, 6, 4> J;
      Eigen::Matrix<double, 6, 1> res;
      for (int r = 0; r < 6; ++r) {
        std::array<Vec3, 4> dv;
        for (int k = 0; k < 4; ++k) dv[k] = v[k][pair_a[r]] - v[k][pair_b[r]];
        Vec3 d = Vec3::Zero();
        for (int k = 0; k < 4; ++k) d += betas(k) * dv[k];
        res(r) = d.squaredNorm() - rho(r);
        for (int k = 0; k < 4; ++k) J(r, k) = 2.0 * d.dot(dv[k]);
      }
      betas += J.colPivHouseholderQr().solve(-res);
    }
    return betas;
  };

  // Case-specific algebraic seeds (N = 1, 2, 3 assumed null-space dims).
  std::vector<Eigen::Vector4d> candidates;
  {
    Eigen::Matrix<double, 6, 4> L1;
    L1 << L.col(0), L.col(1), L.col(3), L.col(6);
    const Eigen::Vector4d b4 = L1.colPivHouseholderQr().solve(rho);
    Eigen::Vector4d betas = Eigen::Vector4d::Zero();
    if (b4(0) < 0) {
      betas(0) = std::sqrt(-b4(0));
      for (int k = 1; k < 4; ++k) betas(k) = -b4(k) / betas(0);
    } else {
      betas(0) = std::sqrt(b4(0));
      for (int k = 1; k < 4; ++k) betas(k) = b4(k) / betas(0);
    }
    candidates.push_back(betas);
  }
  {
    Eigen::Matrix<double, 6, 3> L2;
    L2 << L.col(0), L.col(1), L.col(2);
    const Eigen::Vector3d b3 = L2.colPivHouseholderQr().solve(rho);
    Eigen::Vector4d betas = Eigen::Vector4d::Zero();
    betas(0) = std::sqrt(std::abs(b3(0)));
    betas(1) = (b3(0) * b3(2) > 0) ? std::sqrt(std::abs(b3(2))) : 0.0;
    if (b3(1) < 0) betas(0) = -betas(0);
    candidates.push_back(betas);
  }
  {
    Eigen::Matrix<double, 6, 5> L3;
    L3 << L.col(0), L.col(1), L.col(2), L.col(3), L.col(4);
    const Eigen::Matrix<double, 5, 1> b5 = L3.colPivHouseholderQr().solve(rho);
    Eigen::Vector4d betas = Eigen::Vector4d::Zero();
    betas(0) = std::sqrt(std::abs(b5(0)));
    betas(1) = (b5(0) * b5(2) > 0) ? std::sqrt(std::abs(b5(2))) : 0.0;
    if (b5(1) < 0) betas(0) = -betas(0);
    if (betas(0) != 0.0) betas(2) = b5(3) / betas(0);
    candidates.push_back(betas);
  }

  RigidTransform best;
  double best_err = std::numeric_limits<double>::infinity();
  for (auto seed : candidates) {
    const Eigen::Vector4d betas = gauss_newton_betas(seed);
    std::vector<Vec3> cam(n);
    std::array<Vec3, 4> cc;
    for (int j = 0; j < 4; ++j) {
      cc[j] = Vec3::Zero();
      for (int k = 0; k < 4; ++k) cc[j] += betas(k) * v[k][j];
    }
    for (int i = 0; i < n; ++i) {
      cam[i] = Vec3::Zero();
      for (int j = 0; j < 4; ++j) cam[i] += alphas(i, j) * cc[j];
    }
    double mean_z = 0.0;
    for (const auto& q : cam) mean_z += q.z();
    if (mean_z < 0.0)
      for (auto& q : cam) q = -q;

    // Kabsch between world points and recovered camera points.
    Vec3 mw = Vec3::Zero(), mc = Vec3::Zero();
    for (int i = 0; i < n; ++i) {
      mw += obj[i];
      mc += cam[i];
    }
    mw /= n;
    mc /= n;
    Mat3 cov = Mat3::Zero();
    for (int i = 0; i < n; ++i) cov += (cam[i] - mc) * (obj[i] - mw).transpose();
    const Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vec3 sign = Vec3::Ones();
    if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) sign(2) = -1.0;
    RigidTransform pose;
    pose.rotation = svd.matrixU() * sign.asDiagonal() * svd.matrixV().transpose();
    pose.translation = mc - pose.rotation * mw;

    const double err = reprojection_rms(K, obj, img, pose);
    if (err < best_err) {
      best_err = err;
      best = pose;
    }
  }
  if (!std::isfinite(best_err))
    throw DegenerateConfiguration("solve_pnp: no valid EPnP candidate pose");
  return best;
}

}  // namespace detail

}  // namespace lpose
