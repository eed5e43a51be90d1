#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tmatch/error.hpp"

namespace tmatch {

/// Planar projective transform in canonical form: unit Frobenius norm with a
/// non-negative bottom-right entry (falling back to the first non-zero entry
/// when that one vanishes). Canonical form makes homographies directly
/// comparable even though they are only defined up to scale.
struct Homography {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();

  static Homography identity();

  /// Canonicalizes an arbitrary 3x3. Throws SingularMatrix when the canonical
  /// matrix has |det| <= 1e-12.
  static Homography from_matrix(const Eigen::Matrix3d& raw);
};

/// One template/image correspondence, sub-pixel coordinates.
struct PointMatch {
  Eigen::Vector2d p_t;  // template pixels
  Eigen::Vector2d p_i;  // image pixels
};

/// Correspondences with per-match feature score s, consistency score e and
/// combined weight w = s*e.
struct WeightedMatchSet {
  std::vector<PointMatch> matches;
  std::vector<double> s;
  std::vector<double> e;
  std::vector<double> w;

  /// Builds the set and fills w = s*e; throws LengthMismatch on ragged input.
  static WeightedMatchSet make(std::vector<PointMatch> matches,
                               std::vector<double> s, std::vector<double> e);
  /// All scores and weights set to 1.
  static WeightedMatchSet uniform(std::vector<PointMatch> matches);

  std::size_t size() const { return matches.size(); }
};

/// Projective action h(p). Throws DegeneratePoint when the homogeneous
/// denominator vanishes (|z'| <= 1e-12).
Eigen::Vector2d apply_homography(const Homography& h, const Eigen::Vector2d& p);

Homography invert(const Homography& h);

/// Weighted direct linear transform mapping p_t -> p_i. Points are
/// Hartley-normalized before assembly (centroid at the origin, mean distance
/// sqrt(2)); rows are scaled by sqrt(w). Requires >= 4 matches with positive
/// weight; throws RankDeficient when the design matrix drops below rank 8.
Homography dlt_weighted(const WeightedMatchSet& ms);

/// Per-point Euclidean distance between h_est(p) and h_gt(p).
std::vector<double> reprojection_errors(const Homography& h_est,
                                        const Homography& h_gt,
                                        std::span<const Eigen::Vector2d> pts);

/// Area under the cumulative error curve up to `threshold`, in [0, 100].
/// Each sample contributes max(0, 1 - err/threshold); infinite errors count 0.
double auc(std::span<const double> errors, double threshold);

/// Random ground-truth transform generation: center-anchored scale and
/// rotation composed with a four-corner displacement homography.
struct PerturbationConfig {
  double width = 640.0;
  double height = 480.0;
  double scale_min = 0.8;
  double scale_max = 1.2;
  double rotation_deg = 15.0;  // rotation drawn in [-rotation_deg, +rotation_deg]
  double corner_px = 32.0;     // per-corner offsets drawn in [-corner_px, +corner_px]
};

/// Deterministic for a fixed seed. Throws InvalidRange on bad ranges.
Homography sample_gt_homography(std::uint64_t seed, const PerturbationConfig& cfg);

/// Frobenius distance between canonical forms.
double canonical_distance(const Homography& a, const Homography& b);

/// Serialization: 9 row-major decimals on one line, canonical form.
std::string to_line(const Homography& h);
Homography homography_from_line(const std::string& line);

}  // namespace tmatch
