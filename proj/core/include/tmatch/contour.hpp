#pragma once

#include <Eigen/Core>
#include <vector>

#include "tmatch/image.hpp"

namespace tmatch {

/// Translates the mask so its foreground centroid sits at the center of a
/// width x height frame. Pixels shifted outside are dropped.
MaskImage center_mask(const MaskImage& mask, int width, int height);

/// Ordered outer boundary of the largest 8-connected foreground component
/// (Moore neighbor tracing, clockwise). A single pixel yields one point.
std::vector<Eigen::Vector2d> trace_contour(const MaskImage& mask);

/// n points at uniform arc length along the closed boundary polygon.
std::vector<Eigen::Vector2d> boundary_measure_points(const MaskImage& mask, int n = 20);

}  // namespace tmatch
