#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>

#include "tmatch/features.hpp"
#include "tmatch/geometry.hpp"

namespace tmatch {

/// Edge image resampled into another frame. `h` is the transform the warp
/// realizes (source frame -> output frame): each output pixel p samples the
/// source at h^-1(p) with bilinear interpolation, zero outside.
struct WarpedImage {
  EdgeImage image;
  Homography h;
};

/// Inverse-mapping warp. `binary_low` thresholds the interpolated strength
/// into the warped binary edge set. Output dimensions default to the input's.
WarpedImage warp_image(const EdgeImage& img, const Homography& h,
                       double binary_low = 0.1, int out_width = -1, int out_height = -1);

/// 2-layer fusion map reducing [coarse; fine] back to the fine dimension.
struct FusionWeights {
  Eigen::MatrixXd w1;  // hidden x (coarse_dim + fine_dim)
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // fine_dim x hidden
  Eigen::VectorXd b2;

  int coarse_dim() const { return static_cast<int>(w1.cols()) - fine_dim(); }
  int fine_dim() const { return static_cast<int>(w2.rows()); }

  static FusionWeights seeded(int coarse_dim, int fine_dim, std::uint64_t seed);
  /// Exact pass-through of the fine half: relu(f) - relu(-f) = f.
  static FusionWeights identity_fine(int coarse_dim, int fine_dim);
};

/// w2 * relu(w1 [coarse; fine] + b1) + b2, no normalization.
Eigen::VectorXd fuse_apply(const FusionWeights& w, const Eigen::VectorXd& coarse,
                           const Eigen::VectorXd& fine);

// Same header-plus-little-endian-float64 layout as the transformer weight
// files, magic "TMF1".
void save_fusion_weights(const std::string& path, const FusionWeights& w);
FusionWeights load_fusion_weights(const std::string& path);

/// Broadcasts each sampled coarse token over the fine cells its stride-8 cell
/// covers (a 4x4 block at stride 2), fuses with the local descriptor and
/// re-normalizes. Cells outside sampled patches keep their fine descriptor.
DescriptorGrid fuse_features(const TokenSet& coarse_tr, const DescriptorGrid& fine_map,
                             const FusionWeights& w, bool renormalize = true);

/// Sub-pixel correspondence for one template edge pixel.
struct FineMatch {
  Eigen::Vector2d i_px;        // template pixel (on an edge)
  Eigen::Vector2d j_warped_px; // sub-pixel position in the warped frame
  Eigen::Vector2d offset;      // heatmap expectation, window cell units
  double variance = 0.0;       // total heatmap variance, cell^2 units
};

/// First and second moments of a normalized heatmap whose cell (r, c) sits at
/// offset (lo + c, lo + r) from the window center. Variance is the trace of
/// the covariance.
struct HeatmapMoments {
  Eigen::Vector2d mean;
  double variance = 0.0;
};
HeatmapMoments heatmap_moments(const Eigen::MatrixXd& heatmap, int lo);

/// 2D softmax of a similarity window; sums to 1.
Eigen::MatrixXd softmax2d(const Eigen::MatrixXd& sims);

/// Center-vector correlation between two w x w token windows (row-major,
/// w*w rows). The heatmap is the 2D softmax of similarities / temperature;
/// the match offset is its expectation. `center_prior` subtracts
/// prior * |offset|^2 from the logits before the softmax; contour content is
/// locally self-similar, so exact correlation ties are common and the prior
/// resolves them toward the aligned position instead of letting the
/// expectation drift along the edge. Zero keeps the plain correlation.
FineMatch subpixel_from_windows(const Eigen::MatrixXd& t_window,
                                const Eigen::MatrixXd& i_window, int w,
                                double temperature, const Eigen::Vector2d& i_px,
                                int stride, double center_prior = 0.0);

/// Correlates the fused template descriptor at `i_px`'s cell against the
/// w x w warped-image window at the same location. Returns nothing when the
/// window does not fit the grids (border skip).
std::optional<FineMatch> subpixel_match(const DescriptorGrid& f_t,
                                        const DescriptorGrid& f_iw,
                                        const Eigen::Vector2i& i_px, int w,
                                        double temperature, double center_prior = 0.0);

/// Extracts the w x w descriptor window centered at the cell of `i_px`;
/// nullopt when it does not fit.
std::optional<Eigen::MatrixXd> crop_window(const DescriptorGrid& g,
                                           const Eigen::Vector2i& i_px, int w);

/// Maps every j' through h_align^-1 back into original image coordinates and
/// assigns uniform weight 1.
WeightedMatchSet finalize_matches(std::span<const FineMatch> fine, const Homography& h_align);

/// Weighted DLT over all fine matches.
Homography estimate_final_homography(const WeightedMatchSet& ms);

}  // namespace tmatch
