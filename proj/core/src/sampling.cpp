#include "tmatch/sampling.hpp"

#include <limits>

namespace tmatch {

PatchGrid build_patch_grid(const EdgeImage& e, int stride) {
  if (stride != 2 && stride != 8) {
    throw BadStride("stride must be 2 or 8");
  }
  if (stride > e.width || stride > e.height) {
    throw BadStride("stride exceeds image dimensions");
  }
  PatchGrid grid;
  grid.stride = stride;
  grid.cells_x = (e.width + stride - 1) / stride;
  grid.cells_y = (e.height + stride - 1) / stride;
  grid.cells.reserve(static_cast<std::size_t>(grid.cells_x) * grid.cells_y);
  const double half = stride / 2.0;
  for (int gy = 0; gy < grid.cells_y; ++gy) {
    for (int gx = 0; gx < grid.cells_x; ++gx) {
      PatchCell cell;
      cell.gx = gx;
      cell.gy = gy;
      cell.center = {gx * stride + half, gy * stride + half};
      const int x0 = gx * stride, y0 = gy * stride;
      const int x1 = std::min(x0 + stride, e.width);
      const int y1 = std::min(y0 + stride, e.height);
      for (int y = y0; y < y1 && !cell.contains_edge; ++y) {
        for (int x = x0; x < x1; ++x) {
          if (e.edge_at(x, y)) {
            cell.contains_edge = true;
            break;
          }
        }
      }
      grid.cells.push_back(cell);
    }
  }
  return grid;
}

std::vector<int> fps(std::span<const Eigen::Vector2d> points, int n, int seed_index) {
  std::vector<int> picked;
  if (points.empty() || n < 1) return picked;
  const int count = static_cast<int>(points.size());
  if (n >= count) {
    picked.resize(count);
    for (int i = 0; i < count; ++i) picked[i] = i;
    return picked;
  }

  std::vector<double> min_d2(points.size(), std::numeric_limits<double>::infinity());
  picked.reserve(n);
  int cur = seed_index;
  for (int step = 0; step < n; ++step) {
    picked.push_back(cur);
    min_d2[cur] = -1.0;  // never re-selected
    for (int i = 0; i < count; ++i) {
      if (min_d2[i] < 0.0) continue;
      const double d2 = (points[i] - points[cur]).squaredNorm();
      if (d2 < min_d2[i]) min_d2[i] = d2;
    }
    int best = -1;
    double best_d2 = -1.0;
    for (int i = 0; i < count; ++i) {
      if (min_d2[i] > best_d2) {  // strict: first (lowest) index wins ties
        best_d2 = min_d2[i];
        best = i;
      }
    }
    cur = best;
  }
  return picked;
}

int centroid_seed_index(std::span<const Eigen::Vector2d> points) {
  if (points.empty()) throw EmptyInput("no points");
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& p : points) c += p;
  c /= static_cast<double>(points.size());
  int best = 0;
  double best_d2 = (points[0] - c).squaredNorm();
  for (int i = 1; i < static_cast<int>(points.size()); ++i) {
    const double d2 = (points[i] - c).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

}  // namespace tmatch
