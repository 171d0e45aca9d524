#pragma once

#include <array>
#include <cstdint>

#include "lpose/errors.hpp"
#include "lpose/geometry.hpp"
#include "lpose/rng.hpp"

namespace lpose {

// Axis-aligned lattice bounding box in object frame, strictly non-degenerate.
struct LatticeBox {
  Vec3 box_min;
  Vec3 box_max;

  bool valid() const { return (box_max.array() > box_min.array()).all(); }

  Vec3 extent() const { return box_max - box_min; }
  double diagonal() const { return extent().norm(); }

  // Corner position for (i,j,k) in {0,1}^3.
  Vec3 corner(int i, int j, int k) const {
    return Vec3(i ? box_max.x() : box_min.x(), j ? box_max.y() : box_min.y(),
                k ? box_max.z() : box_min.z());
  }
};

// Tight axis-aligned bounding box of a mesh.
inline LatticeBox tight_box(const TriMesh& mesh) {
  if (mesh.vertices.empty()) throw EmptyInput("tight_box: mesh has no vertices");
  Vec3 lo = mesh.vertices.front(), hi = mesh.vertices.front();
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return LatticeBox{lo, hi};
}

// The 24-parameter deformation: one 3D offset per bounding-box corner,
// indexed by (i,j,k) in {0,1}^3 with i slowest. The flat order (corner
// lexicographic, xyz within each corner) is normative for serialization.
struct CornerOffsets {
  std::array<Vec3, 8> offsets{};  // value-initialized to zero

  static constexpr int index(int i, int j, int k) { return i * 4 + j * 2 + k; }

  Vec3& at(int i, int j, int k) { return offsets[index(i, j, k)]; }
  const Vec3& at(int i, int j, int k) const { return offsets[index(i, j, k)]; }

  std::array<double, 24> flat() const {
    std::array<double, 24> out{};
    for (int c = 0; c < 8; ++c)
      for (int a = 0; a < 3; ++a) out[c * 3 + a] = offsets[c][a];
    return out;
  }

  static CornerOffsets from_flat(const std::array<double, 24>& flat) {
    CornerOffsets o;
    for (int c = 0; c < 8; ++c)
      for (int a = 0; a < 3; ++a) o.offsets[c][a] = flat[c * 3 + a];
    return o;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : offsets) m = std::max(m, v.cwiseAbs().maxCoeff());
    return m;
  }
};

inline CornerOffsets operator+(const CornerOffsets& a, const CornerOffsets& b) {
  CornerOffsets r;
  for (int c = 0; c < 8; ++c) r.offsets[c] = a.offsets[c] + b.offsets[c];
  return r;
}

inline CornerOffsets operator*(double s, const CornerOffsets& a) {
  CornerOffsets r;
  for (int c = 0; c < 8; ++c) r.offsets[c] = s * a.offsets[c];
  return r;
}

// Fractional position of a point inside the box; in [0,1]^3 for in-box
// points, clamped component-wise otherwise.
struct NormalizedCoord {
  double u, v, w;
};

inline NormalizedCoord normalize_point(const LatticeBox& box, const Vec3& p) {
  const Vec3 e = box.extent();
  auto frac = [](double x, double lo, double len) {
    return std::clamp((x - lo) / len, 0.0, 1.0);
  };
  return NormalizedCoord{frac(p.x(), box.box_min.x(), e.x()),
                         frac(p.y(), box.box_min.y(), e.y()),
                         frac(p.z(), box.box_min.z(), e.z())};
}

// Uniform cubic B-spline basis, single span over t in [0,1]:
//   W0 = (1 - 3t + 3t^2 - t^3)/6   W1 = (4 - 6t^2 + 3t^3)/6
//   W2 = (1 + 3t + 3t^2 - 3t^3)/6  W3 = t^3/6
// The four values sum to 1 for every t.
inline std::array<double, 4> bspline_weights(double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return {(1.0 - 3.0 * t + 3.0 * t2 - t3) / 6.0, (4.0 - 6.0 * t2 + 3.0 * t3) / 6.0,
          (1.0 + 3.0 * t + 3.0 * t2 - 3.0 * t3) / 6.0, t3 / 6.0};
}

// Replicates the 8 corner offsets into the 4x4x4 control grid the cubic
// basis needs: grid[m][n][q] = offsets[clamp(m-1)][clamp(n-1)][clamp(q-1)].
inline std::array<std::array<std::array<Vec3, 4>, 4>, 4> extend_grid(
    const CornerOffsets& offsets) {
  auto clamp01 = [](int m) { return std::clamp(m - 1, 0, 1); };
  std::array<std::array<std::array<Vec3, 4>, 4>, 4> grid;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      for (int q = 0; q < 4; ++q)
        grid[m][n][q] = offsets.at(clamp01(m), clamp01(n), clamp01(q));
  return grid;
}

// Per-corner scalar weight of the clamped-grid tensor-product spline at a
// normalized coordinate. Because grid cells {0,1} and {2,3} replicate the
// corner values, the 64-term sum collapses to 8 corner terms with axis
// weights (W0+W1) and (W2+W3). Exposed for the deformation Jacobian.
inline std::array<double, 8> corner_weights(const NormalizedCoord& c) {
  const auto wu = bspline_weights(c.u);
  const auto wv = bspline_weights(c.v);
  const auto ww = bspline_weights(c.w);
  const double su[2] = {wu[0] + wu[1], wu[2] + wu[3]};
  const double sv[2] = {wv[0] + wv[1], wv[2] + wv[3]};
  const double sw[2] = {ww[0] + ww[1], ww[2] + ww[3]};
  std::array<double, 8> w{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) w[CornerOffsets::index(i, j, k)] = su[i] * sv[j] * sw[k];
  return w;
}

// Displacement delta(u,v,w) = sum_{i,j,k=0..3} Wi(u) Wj(v) Wk(w) grid[i][j][k],
// evaluated axis by axis.
inline Vec3 displacement_at(const CornerOffsets& offsets, const NormalizedCoord& coord) {
  const auto w = corner_weights(coord);
  Vec3 d = Vec3::Zero();
  for (int c = 0; c < 8; ++c) d += w[c] * offsets.offsets[c];
  return d;
}

// Moves every vertex by the lattice displacement at its normalized
// coordinate; faces are untouched. Zero offsets reproduce the input
// bit-for-bit.
inline TriMesh deform_mesh(const TriMesh& mesh, const LatticeBox& box,
                           const CornerOffsets& offsets) {
  TriMesh out;
  out.faces = mesh.faces;
  out.vertices.reserve(mesh.vertices.size());
  for (const auto& p : mesh.vertices)
    out.vertices.push_back(p + displacement_at(offsets, normalize_point(box, p)));
  return out;
}

inline std::vector<Vec3> deform_points(const std::vector<Vec3>& points,
                                       const LatticeBox& box,
                                       const CornerOffsets& offsets) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points)
    out.push_back(p + displacement_at(offsets, normalize_point(box, p)));
  return out;
}

// All 24 scalars i.i.d. uniform in [-bound, +bound] from a deterministic
// generator; identical across runs and platforms for a fixed seed.
inline CornerOffsets sample_random_offsets(double bound, std::uint64_t seed) {
  if (!(bound > 0.0)) throw DegenerateInput("sample_random_offsets: bound must be > 0");
  Rng rng(seed);
  CornerOffsets o;
  for (int c = 0; c < 8; ++c)
    for (int a = 0; a < 3; ++a) o.offsets[c][a] = rng.uniform(-bound, bound);
  return o;
}

}  // namespace lpose
