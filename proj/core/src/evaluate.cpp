#include "tmatch/evaluate.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <atomic>
#include <future>
#include <limits>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace tmatch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SampleEval eval_one(const SampleRecord& rec, const PipelineConfig& cfg,
                    const EvalOptions& opts, const std::string& out_dir) {
  SampleEval ev;
  ev.id = rec.id;
  const auto t0 = std::chrono::steady_clock::now();

  ev.mean_err = kInf;
  ev.max_err = kInf;
  ev.mean_err_unweighted = kInf;

  MaskImage tmpl;
  EdgeImage source;
  try {
    tmpl = read_mask_pgm(rec.mask_path);
    source = load_source_edges(rec.source_path, cfg);
  } catch (const Error& e) {
    ev.failure = e.what();
    return ev;
  }

  RunOptions ro;
  ro.also_unweighted = opts.compare_unweighted;
  const PipelineResult run = run_pipeline(tmpl, source, cfg, ro);
  ev.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  ev.n_coarse = static_cast<int>(run.coarse.pairs.size());
  ev.n_fine = static_cast<int>(run.fine.size());

  std::vector<Eigen::Vector2d> measure_pts;
  try {
    measure_pts = boundary_measure_points(tmpl, 20);
  } catch (const Error& e) {
    ev.failure = e.what();
    return ev;
  }

  if (!run.ok) {
    ev.failure = run.failure;
    return ev;
  }
  ev.ok = true;
  ev.mean_err_unweighted = 0.0;

  ev.point_errors = reprojection_errors(run.h_final, rec.h_gt, measure_pts);
  double sum = 0.0, mx = 0.0;
  for (double e : ev.point_errors) {
    sum += e;
    mx = std::max(mx, e);
  }
  ev.mean_err = sum / static_cast<double>(ev.point_errors.size());
  ev.max_err = mx;

  if (!run.final_matches.matches.empty()) {
    int inliers = 0;
    for (const auto& m : run.final_matches.matches) {
      try {
        if ((apply_homography(rec.h_gt, m.p_t) - m.p_i).norm() < 3.0) ++inliers;
      } catch (const DegeneratePoint&) {
      }
    }
    ev.inlier_rate_3px =
        static_cast<double>(inliers) / static_cast<double>(run.final_matches.matches.size());
  }

  if (opts.compare_unweighted) {
    if (run.h_final_unweighted) {
      const auto errs = reprojection_errors(*run.h_final_unweighted, rec.h_gt, measure_pts);
      double s = 0.0;
      for (double e : errs) s += e;
      ev.mean_err_unweighted = s / static_cast<double>(errs.size());
    } else {
      ev.mean_err_unweighted = kInf;
    }
  }

  if (opts.write_sample_artifacts) {
    write_artifacts((fs::path(out_dir) / rec.id).string(), run, tmpl, source);
  }
  return ev;
}

std::string err_str(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json err_json(double v) {
  if (std::isinf(v)) return json("inf");
  return json(v);
}

}  // namespace

EvalReport evaluate(const std::vector<SampleRecord>& samples, const PipelineConfig& cfg,
                    const std::string& out_dir, const EvalOptions& opts) {
  if (samples.empty()) throw EmptyInput("manifest holds no samples");
  std::error_code ec;
  fs::create_directories(out_dir, ec);

  const auto t0 = std::chrono::steady_clock::now();
  EvalReport report;
  report.samples.resize(samples.size());
  report.compared_unweighted = opts.compare_unweighted;

  const int threads = std::max(1, opts.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      report.samples[i] = eval_one(samples[i], cfg, opts, out_dir);
    }
  } else {
    std::vector<std::future<void>> futs;
    std::atomic<std::size_t> next{0};
    for (int t = 0; t < threads; ++t) {
      futs.push_back(std::async(std::launch::async, [&]() {
        for (std::size_t i = next.fetch_add(1); i < samples.size(); i = next.fetch_add(1)) {
          report.samples[i] = eval_one(samples[i], cfg, opts, out_dir);
        }
      }));
    }
    for (auto& f : futs) f.get();
  }
  report.total_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  std::vector<double> mean_errs, mean_errs_uw;
  for (const auto& s : report.samples) {
    mean_errs.push_back(s.mean_err);
    if (opts.compare_unweighted) mean_errs_uw.push_back(s.mean_err_unweighted);
  }
  report.auc3 = auc(mean_errs, 3.0);
  report.auc5 = auc(mean_errs, 5.0);
  report.auc10 = auc(mean_errs, 10.0);
  if (opts.compare_unweighted) {
    report.auc3_unweighted = auc(mean_errs_uw, 3.0);
    report.auc5_unweighted = auc(mean_errs_uw, 5.0);
    report.auc10_unweighted = auc(mean_errs_uw, 10.0);
  }

  // Canonical report: everything except wall-clock times.
  json j;
  j["n_samples"] = report.samples.size();
  j["auc"] = {{"3px", report.auc3}, {"5px", report.auc5}, {"10px", report.auc10}};
  if (opts.compare_unweighted) {
    j["auc_unweighted"] = {{"3px", report.auc3_unweighted},
                           {"5px", report.auc5_unweighted},
                           {"10px", report.auc10_unweighted}};
  }
  j["samples"] = json::array();
  for (const auto& s : report.samples) {
    json js;
    js["id"] = s.id;
    js["ok"] = s.ok;
    if (!s.ok) js["failure"] = s.failure;
    js["mean_err"] = err_json(s.mean_err);
    js["max_err"] = err_json(s.max_err);
    js["n_coarse"] = s.n_coarse;
    js["n_fine"] = s.n_fine;
    js["inlier_rate_3px"] = s.inlier_rate_3px;
    if (opts.compare_unweighted) js["mean_err_unweighted"] = err_json(s.mean_err_unweighted);
    json pe = json::array();
    for (double e : s.point_errors) pe.push_back(e);
    js["point_errors"] = std::move(pe);
    j["samples"].push_back(std::move(js));
  }
  {
    std::ofstream out(fs::path(out_dir) / "report.json");
    if (!out) throw IoFailure("cannot write report.json");
    out << j.dump(2) << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / "errors.csv");
    if (!out) throw IoFailure("cannot write errors.csv");
    out << "sample_id,mean_err,max_err\n";
    for (const auto& s : report.samples) {
      out << s.id << "," << err_str(s.mean_err) << "," << err_str(s.max_err) << "\n";
    }
  }
  {
    json t;
    t["total_ms"] = report.total_ms;
    json per = json::array();
    for (const auto& s : report.samples) {
      per.push_back({{"id", s.id}, {"runtime_ms", s.runtime_ms}});
    }
    t["samples"] = std::move(per);
    std::ofstream out(fs::path(out_dir) / "timings.json");
    if (!out) throw IoFailure("cannot write timings.json");
    out << t.dump(2) << "\n";
  }
  return report;
}

}  // namespace tmatch
