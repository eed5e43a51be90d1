#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tmatch/attention.hpp"
#include "tmatch/config.hpp"
#include "tmatch/matching.hpp"
#include "tmatch/refine.hpp"

namespace tmatch {

struct RunOptions {
  bool use_consistency_weights = true;  // false: coarse DLT with uniform weights
  /// Additionally complete the pipeline with uniform DLT weights, reusing the
  /// shared coarse matching, and report that final homography too.
  bool also_unweighted = false;
};

struct PipelineResult {
  bool ok = false;
  std::string failure;

  Homography h_coarse;  // template -> image
  Homography h_final;   // template -> image
  bool fine_fallback = false;  // fine stage failed, h_final echoes h_coarse
  std::optional<Homography> h_final_unweighted;  // filled by also_unweighted

  CoarseMatchSet coarse;
  std::vector<Eigen::Vector2d> coarse_t_px;  // cell centers, template pixels
  std::vector<Eigen::Vector2d> coarse_i_px;  // cell centers, image pixels
  std::vector<double> s, e, w;

  std::vector<FineMatch> fine;
  WeightedMatchSet final_matches;  // fine matches mapped back to image coords

  int n_template_tokens = 0;
  int n_image_tokens = 0;
  double coarse_ms = 0.0;
  double fine_ms = 0.0;
  double total_ms = 0.0;
};

/// Full coarse-to-fine run: edge translation, patch sampling, descriptors,
/// optional transformer aggregation, differentiable matching, consistency
/// weighting, coarse DLT, warp, fusion, sub-pixel correlation, final DLT.
/// Degenerate inputs yield ok = false with a failure note instead of throwing.
PipelineResult run_pipeline(const MaskImage& tmpl, const EdgeImage& source_edges,
                            const PipelineConfig& cfg, const RunOptions& opts = {});

/// Convenience overload running edge detection on a grayscale source.
PipelineResult run_pipeline(const MaskImage& tmpl, const GrayImage& source_gray,
                            const PipelineConfig& cfg, const RunOptions& opts = {});

/// Loads the source per cfg.source_mode ("edge" reads the PGM as an edge
/// strength map, "gray" runs detection).
EdgeImage load_source_edges(const std::string& path, const PipelineConfig& cfg);

/// Writes homography.txt, coarse_matches.txt, fine_matches.txt and
/// overlay.pgm into out_dir.
void write_artifacts(const std::string& out_dir, const PipelineResult& result,
                     const MaskImage& tmpl, const EdgeImage& source_edges);

}  // namespace tmatch
