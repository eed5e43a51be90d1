#pragma once

#include <string>
#include <vector>

#include "tmatch/pipeline.hpp"
#include "tmatch/synth.hpp"

namespace tmatch {

struct SampleEval {
  std::string id;
  bool ok = false;
  std::string failure;
  std::vector<double> point_errors;  // 20 boundary measurement points
  double mean_err = 0.0;             // infinite for degenerate samples
  double max_err = 0.0;
  int n_coarse = 0;
  int n_fine = 0;
  double inlier_rate_3px = 0.0;  // fine matches within 3 px of ground truth
  double runtime_ms = 0.0;
  double mean_err_unweighted = 0.0;  // only with compare_unweighted
};

struct EvalReport {
  std::vector<SampleEval> samples;
  double auc3 = 0.0, auc5 = 0.0, auc10 = 0.0;
  double auc3_unweighted = 0.0, auc5_unweighted = 0.0, auc10_unweighted = 0.0;
  bool compared_unweighted = false;
  double total_ms = 0.0;
};

struct EvalOptions {
  /// Also estimate every homography with uniform DLT weights and report the
  /// parallel AUC numbers.
  bool compare_unweighted = false;
  /// Write per-sample overlay images and homography files.
  bool write_sample_artifacts = false;
  int threads = 1;
};

/// Runs the pipeline over every manifest sample. AUC is computed over
/// per-sample mean measurement-point errors at 3/5/10 px thresholds;
/// degenerate samples enter with an infinite error (zero AUC contribution).
/// Writes report.json and errors.csv (and timings.json, kept separate so the
/// canonical report stays byte-identical across reruns) into out_dir.
EvalReport evaluate(const std::vector<SampleRecord>& samples, const PipelineConfig& cfg,
                    const std::string& out_dir, const EvalOptions& opts = {});

}  // namespace tmatch
