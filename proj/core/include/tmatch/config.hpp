#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tmatch/consistency.hpp"
#include "tmatch/edges.hpp"
#include "tmatch/geometry.hpp"
#include "tmatch/matching.hpp"

namespace tmatch {

/// Every pipeline hyperparameter in one validated record. Serializes to flat
/// JSON; unknown keys are rejected on load. See docs/config.md for the key
/// reference.
struct PipelineConfig {
  // frame
  int width = 640;
  int height = 480;

  // coarse stage
  int n_patches = 128;        // maximum template patches fed to the transformer
  int n_coarse_layers = 4;    // self/cross transformer layers, coarse stage
  int coarse_dim = 128;
  std::vector<int> coarse_windows = {16, 48, 96, 144};  // context scales, pixels
  std::vector<double> coarse_scale_weights = {1.0, 1.3, 1.7, 2.2};
  double temperature = 0.05;  // score matrix sharpness
  std::string matching = "ot";  // "ot" | "ds"
  int sinkhorn_iters = 100;
  double dustbin_score = 1.0;
  double theta_c = 0.2;       // match confidence threshold

  // spatial consistency
  double sigma_d = 0.4;
  double sigma_alpha = 1.0;
  double lambda_c = 0.5;
  int k_nn = 3;

  // fine stage
  int n_fine_layers = 2;
  int fine_dim = 32;
  int fine_window = 6;        // descriptor window, pixels
  int fine_subdiv = 2;        // spatial subcells per axis in the descriptor
  int window = 8;             // correlation window, stride-2 cells
  double fine_temperature = 0.02;
  double center_prior = 0.1;   // quadratic tie-breaking prior on window offsets

  // losses
  double lambda_total = 10.0;

  // edge translation
  double edge_low = 0.1;
  double edge_high = 0.2;
  std::string source_mode = "edge";  // "edge": source PGM is an edge map; "gray": run detection

  // attention toggles and weights
  bool attention = true;
  std::string weights_file;   // optional transformer weight file
  std::string fusion_file;    // optional fusion weight file

  // synthetic data generation
  double scale_min = 0.8;
  double scale_max = 1.2;
  double rotation_deg = 15.0;
  double corner_px = 32.0;
  int noise_edges = 0;        // random clutter segments added to sources
  double blur_sigma = 0.0;

  std::uint64_t seed = 42;    // master seed; weights, lifts and data derive from it

  EdgeConfig edge_config() const { return {edge_low, edge_high}; }
  ConsistencyParams consistency_params() const { return {sigma_d, sigma_alpha, lambda_c, k_nn}; }
  PerturbationConfig perturbation() const {
    return {static_cast<double>(width), static_cast<double>(height),
            scale_min, scale_max, rotation_deg, corner_px};
  }
  MatchMethod match_method() const {
    return matching == "ds" ? MatchMethod::DualSoftmax : MatchMethod::OptimalTransport;
  }

  /// Throws ConfigError when any field is outside its documented range.
  void validate() const;

  std::string to_json() const;
  static PipelineConfig from_json(const std::string& text);
  static PipelineConfig load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace tmatch
