#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "lpose/errors.hpp"
#include "lpose/ffd.hpp"
#include "lpose/geometry.hpp"
#include "lpose/nn.hpp"

namespace lpose {

struct UmeyamaResult {
  double s = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double rms_residual = 0.0;  // RMS of |s*R*src + t - dst| in mm

  RigidTransform rigid() const { return RigidTransform{rotation, translation}; }
};

// Least-squares similarity transform between corresponded point sets:
// minimizes sum |s*R*src_n + t - dst_n|^2 with det(R) = +1 enforced by the
// standard reflection sign fix. With fix_scale, s is pinned to exactly 1 and
// (R, t) are optimal under that constraint (R is scale-independent, so only
// t changes).
inline UmeyamaResult umeyama(const std::vector<Vec3>& src, const std::vector<Vec3>& dst,
                             bool fix_scale = true) {
  if (src.size() != dst.size())
    throw LengthMismatch("umeyama: src has " + std::to_string(src.size()) +
                         " points, dst has " + std::to_string(dst.size()));
  const int n = static_cast<int>(src.size());
  if (n < 3) throw InsufficientPoints("umeyama: need at least 3 points, got " +
                                      std::to_string(n));

  Vec3 mu_src = Vec3::Zero(), mu_dst = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    mu_src += src[i];
    mu_dst += dst[i];
  }
  mu_src /= n;
  mu_dst /= n;

  Mat3 cov = Mat3::Zero();  // E[(dst - mu_dst)(src - mu_src)^T]
  double var_src = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec3 ds = src[i] - mu_src;
    cov += (dst[i] - mu_dst) * ds.transpose();
    var_src += ds.squaredNorm();
  }
  cov /= n;
  var_src /= n;

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  // Rank <= 1 means the rotation about the dominant axis is unobservable.
  if (sv(1) <= 1e-12 * std::max(sv(0), 1e-300))
    throw DegenerateConfiguration(
        "umeyama: source configuration is (near) collinear or a single point");

  Vec3 sign = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) sign(2) = -1.0;
  const Mat3 rot = svd.matrixU() * sign.asDiagonal() * svd.matrixV().transpose();

  double scale = 1.0;
  if (!fix_scale) {
    if (var_src <= 0.0)
      throw DegenerateConfiguration("umeyama: zero source variance, scale undefined");
    scale = sv.dot(sign) / var_src;
  }

  UmeyamaResult result;
  result.s = scale;
  result.rotation = rot;
  result.translation = mu_dst - scale * rot * mu_src;
  double sq = 0.0;
  for (int i = 0; i < n; ++i)
    sq += (scale * rot * src[i] + result.translation - dst[i]).squaredNorm();
  result.rms_residual = std::sqrt(sq / n);
  return result;
}

struct IcpParams {
  int max_iterations = 50;
  double convergence_mm = 1e-9;  // threshold on RMS change between iterations
};

// Point-to-point ICP: nearest-neighbor correspondence (ties to the lowest
// index) alternated with a fixed-scale Umeyama solve. The returned transform
// maps src into dst's frame; the nearest-neighbor RMS is non-increasing
// across iterations.
inline RigidTransform icp_align(const std::vector<Vec3>& src, const std::vector<Vec3>& dst,
                                const IcpParams& params = {},
                                const RigidTransform& init = {}) {
  if (src.size() < 3 || dst.size() < 3)
    throw InsufficientPoints("icp_align: both clouds need at least 3 points");
  if (params.max_iterations < 1 || !(params.convergence_mm > 0.0))
    throw DegenerateInput("icp_align: invalid parameters");

  const NnIndex index(dst);
  RigidTransform current = init;
  double prev_rms = std::numeric_limits<double>::infinity();
  std::vector<Vec3> matched(src.size());
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    double sq = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) {
      const auto [j, dist] = index.nearest(current.apply(src[i]));
      matched[i] = dst[j];
      sq += dist * dist;
    }
    const double rms = std::sqrt(sq / static_cast<double>(src.size()));
    current = umeyama(src, matched, /*fix_scale=*/true).rigid();
    if (std::abs(prev_rms - rms) < params.convergence_mm) break;
    prev_rms = rms;
  }
  return current;
}

struct CanonicalizedDeformation {
  CornerOffsets corrected;
  RigidTransform removed;  // deform(offsets) ~= removed o deform(corrected)
};

// Removes the rigid-motion component a corner perturbation smuggles in, so
// annotations separate cleanly into pose and deformation. Each pass
// estimates the rigid drift of the deformed mesh with fixed-scale Umeyama
// and conjugates the corner targets by it:
//   corrected_c = R^T (corner_c + offset_c - t) - corner_c.
// The FFD is not exactly closed under this conjugation, so the pass repeats
// (at most five times) until the residual drift is below 1e-6 rad / 1e-6 mm.
inline CanonicalizedDeformation canonicalize_deformation(const TriMesh& mesh,
                                                         const LatticeBox& box,
                                                         const CornerOffsets& offsets) {
  constexpr int kMaxPasses = 5;
  constexpr double kRotTolRad = 1e-6;
  constexpr double kTransTolMm = 1e-6;

  CanonicalizedDeformation out;
  out.corrected = offsets;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    const TriMesh deformed = deform_mesh(mesh, box, out.corrected);
    const UmeyamaResult drift = umeyama(mesh.vertices, deformed.vertices, true);
    if (rotation_angle_rad(drift.rotation) < kRotTolRad &&
        drift.translation.norm() < kTransTolMm)
      break;
    CornerOffsets next;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
          const Vec3 corner = box.corner(i, j, k);
          const Vec3 target = corner + out.corrected.at(i, j, k);
          next.at(i, j, k) =
              drift.rotation.transpose() * (target - drift.translation) - corner;
        }
    out.corrected = next;
    out.removed = compose(out.removed, drift.rigid());
  }
  return out;
}

}  // namespace lpose
