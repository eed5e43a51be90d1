#pragma once

#include "tmatch/image.hpp"

namespace tmatch {

/// Hysteresis thresholds on the max-normalized gradient magnitude.
struct EdgeConfig {
  double low = 0.1;
  double high = 0.2;
};

/// Classical edge detection: central-difference gradients, 4-direction
/// non-maximum suppression, hysteresis linking. Border pixels get zero
/// gradient so the image frame never produces edges. Strength is the
/// magnitude normalized by its maximum.
EdgeImage detect_edges(const GrayImage& img, const EdgeConfig& cfg = {});

/// Contour extraction: foreground pixels with at least one 4-neighbor outside
/// the mask (image border counts as outside). Strength 1 on the contour.
EdgeImage mask_to_edges(const MaskImage& mask);

}  // namespace tmatch
