#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "tmatch/image.hpp"

namespace tmatch {

struct PatchCell {
  int gx = 0;
  int gy = 0;
  Eigen::Vector2d center;  // pixel coordinates, (g*stride + stride/2)
  bool contains_edge = false;
};

/// Regular grid over an edge image. Cell count is ceil(W/stride) * ceil(H/stride).
struct PatchGrid {
  int stride = 8;
  int cells_x = 0;
  int cells_y = 0;
  std::vector<PatchCell> cells;  // row-major

  const PatchCell& at(int gx, int gy) const {
    return cells[static_cast<std::size_t>(gy) * cells_x + gx];
  }
  int index(int gx, int gy) const { return gy * cells_x + gx; }
};

/// Flags each cell that contains at least one binary edge pixel.
/// Only strides 2 and 8 are supported.
PatchGrid build_patch_grid(const EdgeImage& e, int stride);

/// Greedy farthest point sampling. Returns all indices when n >= |points|.
/// Every later pick maximizes the minimum distance to the chosen set; ties
/// resolve to the lowest index. Deterministic for fixed inputs.
std::vector<int> fps(std::span<const Eigen::Vector2d> points, int n, int seed_index);

/// Index of the point nearest to the centroid (lowest index wins ties);
/// the default farthest-point seed.
int centroid_seed_index(std::span<const Eigen::Vector2d> points);

}  // namespace tmatch
