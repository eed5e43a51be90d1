#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tmatch/config.hpp"
#include "tmatch/contour.hpp"
#include "tmatch/geometry.hpp"
#include "tmatch/image.hpp"

namespace tmatch {

/// One synthetic sample: a centered template mask, a rendered source edge
/// image and the ground-truth transform between them.
struct SampleRecord {
  std::string id;
  std::string mask_path;
  std::string source_path;
  Homography h_gt;
  std::uint64_t seed = 0;
};

/// Warped-mask rendering used for the synthetic sources: foreground where the
/// bilinearly sampled mask under h^-1 exceeds 0.5.
MaskImage warp_mask(const MaskImage& mask, const Homography& h, int width, int height);

/// Generates n samples from the mask files (PGM) found in masks_dir, writing
/// PGMs and manifest.json into out_dir. Masks are centered, a ground-truth
/// homography is drawn per sample, and the source is the warped mask contour
/// (plus optional clutter segments and blur). Deterministic per seed.
std::vector<SampleRecord> synth_dataset(const std::string& masks_dir,
                                        const std::string& out_dir, int n,
                                        const PipelineConfig& cfg, std::uint64_t seed);

void write_manifest(const std::string& path, const std::vector<SampleRecord>& records,
                    std::uint64_t seed);
std::vector<SampleRecord> load_manifest(const std::string& path);

/// Built-in test shapes (bracket, gear, plate with holes, ...), rasterized at
/// the given size. Useful when no mask directory is at hand.
MaskImage builtin_mask(int index, int width, int height);
int builtin_mask_count();

}  // namespace tmatch
