#pragma once

#include <string>
#include <vector>

#include "lpose/errors.hpp"
#include "lpose/geometry.hpp"

namespace lpose {

// Pinhole camera, pixels. No distortion model; fx and fy are independent.
struct Intrinsics {
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;

  bool valid() const {
    return fx > 0.0 && fy > 0.0 && cx > 0.0 && cx < width && cy > 0.0 && cy < height;
  }

  Vec2 project(const Vec3& p) const {
    return Vec2(fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy);
  }
};

inline constexpr double kMinDepth = 1e-9;

// u = fx*x/z + cx, v = fy*y/z + cy for camera-frame points. Points at or
// behind the camera plane raise BehindCamera listing the offending indices.
inline std::vector<Vec2> project_points(const Intrinsics& K,
                                        const std::vector<Vec3>& points_cam) {
  std::vector<int> behind;
  for (int i = 0; i < static_cast<int>(points_cam.size()); ++i)
    if (points_cam[i].z() <= kMinDepth) behind.push_back(i);
  if (!behind.empty()) {
    std::string msg = "project_points: point(s) behind camera at indices";
    for (int i : behind) msg += " " + std::to_string(i);
    throw BehindCamera(msg, behind);
  }
  std::vector<Vec2> out;
  out.reserve(points_cam.size());
  for (const auto& p : points_cam) out.push_back(K.project(p));
  return out;
}

// Detector-crop bookkeeping: full-image pixel (u,v) maps to crop pixel
// ((u - x_min)*scale, (v - y_min)*scale).
struct CropTransform {
  double x_min = 0.0, y_min = 0.0;
  double scale = 1.0;

  bool valid() const { return scale > 0.0; }

  Vec2 full_to_crop(const Vec2& p) const {
    return Vec2((p.x() - x_min) * scale, (p.y() - y_min) * scale);
  }

  Vec2 crop_to_full(const Vec2& p) const {
    return Vec2(p.x() / scale + x_min, p.y() / scale + y_min);
  }
};

inline std::vector<Vec2> full_to_crop(const CropTransform& c, const std::vector<Vec2>& pts) {
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(c.full_to_crop(p));
  return out;
}

inline std::vector<Vec2> crop_to_full(const CropTransform& c, const std::vector<Vec2>& pts) {
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(c.crop_to_full(p));
  return out;
}

}  // namespace lpose
