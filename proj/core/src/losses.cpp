#include "tmatch/losses.hpp"

#include <cmath>

namespace tmatch {

GroundTruthCoarse gt_coarse_matches(const Homography& h_gt,
                                    std::span<const Eigen::Vector2d> template_centers_px,
                                    int image_cells_x, int image_cells_y, int stride) {
  GroundTruthCoarse gt;
  for (int t = 0; t < static_cast<int>(template_centers_px.size()); ++t) {
    Eigen::Vector2d p;
    try {
      p = apply_homography(h_gt, template_centers_px[t]);
    } catch (const DegeneratePoint&) {
      gt.unmatched.push_back(t);
      continue;
    }
    const int gx = static_cast<int>(std::floor(p.x() / stride));
    const int gy = static_cast<int>(std::floor(p.y() / stride));
    if (gx < 0 || gx >= image_cells_x || gy < 0 || gy >= image_cells_y) {
      gt.unmatched.push_back(t);
    } else {
      gt.pairs.emplace_back(t, gy * image_cells_x + gx);
    }
  }
  return gt;
}

namespace {
double safe_log(double v) { return std::log(std::max(v, 1e-12)); }
}  // namespace

double coarse_loss(const AssignmentMatrix& a, const GroundTruthCoarse& gt) {
  if (gt.pairs.empty()) throw EmptyGroundTruth("no ground-truth pairs");
  double loss = 0.0;
  for (const auto& [t, i] : gt.pairs) {
    loss -= safe_log(a.c(t, i));
  }
  loss /= static_cast<double>(gt.pairs.size());
  if (a.method == MatchMethod::OptimalTransport && !gt.unmatched.empty()) {
    double dust = 0.0;
    for (int t : gt.unmatched) dust -= safe_log(a.row_dustbin(t));
    loss += dust / static_cast<double>(gt.unmatched.size());
  }
  return loss;
}

double fine_loss(std::span<const FineMatch> fine,
                 std::span<const Eigen::Vector2d> gt_positions,
                 std::span<const Eigen::MatrixXd> template_windows,
                 std::span<const Eigen::MatrixXd> warped_windows,
                 std::span<const double> masks) {
  const std::size_t n = fine.size();
  if (gt_positions.size() != n || template_windows.size() != n ||
      warped_windows.size() != n || masks.size() != n) {
    throw LengthMismatch("fine loss inputs must align");
  }
  if (n == 0) throw EmptyInput("no fine matches");

  double pos = 0.0, app = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double var = std::max(fine[k].variance, 1e-6);
    pos += (fine[k].j_warped_px - gt_positions[k]).norm() / var;
    app += masks[k] * (template_windows[k] - warped_windows[k]).norm();
  }
  return pos / static_cast<double>(n) + app / static_cast<double>(n);
}

double total_loss(double coarse, double fine, double lambda) {
  return lambda * coarse + fine;
}

}  // namespace tmatch
