#pragma once

#include <Eigen/Core>
#include <span>
#include <utility>
#include <vector>

#include "tmatch/geometry.hpp"
#include "tmatch/matching.hpp"
#include "tmatch/refine.hpp"

namespace tmatch {

/// Ground-truth coarse assignment built by reprojecting template cell centers
/// and snapping to the stride grid. Off-image cells land in `unmatched`.
struct GroundTruthCoarse {
  std::vector<std::pair<int, int>> pairs;  // (template token index, image cell index)
  std::vector<int> unmatched;              // template token indices
};

GroundTruthCoarse gt_coarse_matches(const Homography& h_gt,
                                    std::span<const Eigen::Vector2d> template_centers_px,
                                    int image_cells_x, int image_cells_y, int stride);

/// Negative log-likelihood over the confidence matrix: mean -log c at the
/// ground-truth pairs, plus (optimal transport only) mean -log of the row
/// dustbin mass over unmatched template cells. Log arguments clamp at 1e-12.
double coarse_loss(const AssignmentMatrix& a, const GroundTruthCoarse& gt);

/// Variance-weighted position error plus masked local-appearance term:
/// mean ||j' - j'_gt|| / max(var, 1e-6)  +  mean m_i * ||P_t - P_iw||_F.
double fine_loss(std::span<const FineMatch> fine,
                 std::span<const Eigen::Vector2d> gt_positions,
                 std::span<const Eigen::MatrixXd> template_windows,
                 std::span<const Eigen::MatrixXd> warped_windows,
                 std::span<const double> masks);

/// L = lambda * L_c + L_f.
double total_loss(double coarse, double fine, double lambda = 10.0);

}  // namespace tmatch
