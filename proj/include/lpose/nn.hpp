#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lpose/errors.hpp"
#include "lpose/geometry.hpp"

namespace lpose {

namespace detail {

// Exact scan. Ties on distance go to the lowest index.
inline std::pair<int, double> nearest_brute_force(const std::vector<Vec3>& pts,
                                                  const Vec3& q) {
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    const double d2 = (pts[i] - q).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return {best, std::sqrt(best_d2)};
}

// Uniform hash-grid accelerator for large clouds. Exact: ring expansion
// stops only once no unvisited cell can beat the current best, and distance
// ties resolve to the lowest point index independent of visit order.
class GridIndex {
 public:
  explicit GridIndex(const std::vector<Vec3>& pts) : pts_(pts) {
    Vec3 lo = pts.front(), hi = pts.front();
    for (const auto& p : pts) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    lo_ = lo;
    const Vec3 span = (hi - lo).cwiseMax(1e-9);
    const double target_cells = std::cbrt(static_cast<double>(pts.size()));
    cell_ = span.maxCoeff() / std::max(1.0, target_cells);
    for (int a = 0; a < 3; ++a)
      dims_[a] = static_cast<int>(std::floor(span[a] / cell_)) + 1;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i)
      cells_[key(coord(pts[i]))].push_back(i);
  }

  std::pair<int, double> nearest(const Vec3& q) const {
    std::array<int, 3> start = coord(q);
    for (int a = 0; a < 3; ++a) start[a] = std::clamp(start[a], 0, dims_[a] - 1);
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    const int max_ring = std::max({dims_[0], dims_[1], dims_[2]});
    for (int r = 0; r <= max_ring; ++r) {
      // Cells closer than (r-1)*cell cannot exist beyond ring r-1.
      if (best >= 0) {
        const double ring_min = (r - 1) * cell_;
        if (ring_min > 0.0 && ring_min * ring_min > best_d2) break;
      }
      visit_ring(start, r, q, best, best_d2);
    }
    return {best, std::sqrt(best_d2)};
  }

 private:
  std::array<int, 3> coord(const Vec3& p) const {
    std::array<int, 3> c;
    for (int a = 0; a < 3; ++a) c[a] = static_cast<int>(std::floor((p[a] - lo_[a]) / cell_));
    return c;
  }

  std::uint64_t key(const std::array<int, 3>& c) const {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c[0])) << 42) ^
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c[1])) << 21) ^
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(c[2]));
  }

  void scan_cell(const std::array<int, 3>& c, const Vec3& q, int& best,
                 double& best_d2) const {
    for (int a = 0; a < 3; ++a)
      if (c[a] < 0 || c[a] >= dims_[a]) return;
    const auto it = cells_.find(key(c));
    if (it == cells_.end()) return;
    for (int i : it->second) {
      const double d2 = (pts_[i] - q).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && i < best)) {
        best_d2 = d2;
        best = i;
      }
    }
  }

  void visit_ring(const std::array<int, 3>& start, int r, const Vec3& q, int& best,
                  double& best_d2) const {
    if (r == 0) {
      scan_cell(start, q, best, best_d2);
      return;
    }
    for (int dx = -r; dx <= r; ++dx)
      for (int dy = -r; dy <= r; ++dy)
        for (int dz = -r; dz <= r; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != r) continue;
          scan_cell({start[0] + dx, start[1] + dy, start[2] + dz}, q, best, best_d2);
        }
  }

  const std::vector<Vec3>& pts_;
  Vec3 lo_;
  double cell_ = 1.0;
  std::array<int, 3> dims_{};
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

}  // namespace detail

// Nearest-neighbor index over a fixed cloud. Brute force below the size
// threshold, hash grid above; both exact and deterministic.
class NnIndex {
 public:
  static constexpr std::size_t kBruteForceLimit = 10000;

  explicit NnIndex(std::vector<Vec3> pts) : pts_(std::move(pts)) {
    if (pts_.empty()) throw EmptyCloud("NnIndex: empty point cloud");
    if (pts_.size() >= kBruteForceLimit) grid_.emplace(pts_);
  }

  NnIndex(const NnIndex&) = delete;
  NnIndex& operator=(const NnIndex&) = delete;

  // Returns (index of nearest point, Euclidean distance).
  std::pair<int, double> nearest(const Vec3& q) const {
    return grid_ ? grid_->nearest(q) : detail::nearest_brute_force(pts_, q);
  }

  const std::vector<Vec3>& points() const { return pts_; }

 private:
  std::vector<Vec3> pts_;
  std::optional<detail::GridIndex> grid_;
};

}  // namespace lpose
