// Acceptance suite: one test case per release criterion, each printing a
// single pass/fail line with the measured quantities.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tmatch/attention.hpp"
#include "tmatch/consistency.hpp"
#include "tmatch/evaluate.hpp"
#include "tmatch/losses.hpp"
#include "tmatch/pipeline.hpp"
#include "tmatch/refine.hpp"
#include "tmatch/rng.hpp"
#include "tmatch/selfcheck.hpp"
#include "tmatch/synth.hpp"

using namespace tmatch;
namespace fs = std::filesystem;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void verdict(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
}

double auroc(const Eigen::VectorXd& scores, int n_inliers) {
  const int n = static_cast<int>(scores.size());
  double pairs = 0.0, wins = 0.0;
  for (int i = 0; i < n_inliers; ++i) {
    for (int j = n_inliers; j < n; ++j) {
      pairs += 1.0;
      if (scores(i) > scores(j)) wins += 1.0;
      else if (scores(i) == scores(j)) wins += 0.5;
    }
  }
  return wins / pairs;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("tmatch_acceptance_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("criterion 1: rotary relative-position identity") {
  Timer timer;
  const RotaryEncoder enc(64);
  Rng rng(101);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Vector2d m(rng.uniform(-100, 100), rng.uniform(-100, 100));
    const Eigen::Vector2d n(rng.uniform(-100, 100), rng.uniform(-100, 100));
    Eigen::VectorXd f(64), g(64);
    for (int i = 0; i < 64; ++i) {
      f(i) = rng.normal();
      g(i) = rng.normal();
    }
    const double lhs = rope_apply(enc, m, f).dot(rope_apply(enc, n, g));
    const double rhs = f.dot(rope_apply(enc, n - m, g));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  const double elapsed = timer.seconds();
  const bool pass = worst < 1e-9 && elapsed < 1.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "rotary identity, max |lhs-rhs| = %.3g (< 1e-9), %.2fs (< 1s)",
                worst, elapsed);
  verdict(1, pass, buf);
  CHECK(worst < 1e-9);
  CHECK(elapsed < 1.0);
}

TEST_CASE("criterion 2: linear attention equals the O(N^2) double sum") {
  Timer timer;
  Rng rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int dims[] = {16, 32, 64};
    const int c = dims[trial % 3];
    const RotaryEncoder enc(c);
    const int nq = 1 + static_cast<int>(rng.next_u64() % 64);
    const int nk = 1 + static_cast<int>(rng.next_u64() % 64);
    Eigen::MatrixXd q(nq, c), k(nk, c), v(nk, c);
    std::vector<Eigen::Vector2d> pq, pk;
    for (int i = 0; i < nq; ++i) {
      pq.emplace_back(rng.uniform(-60, 60), rng.uniform(-60, 60));
      for (int d = 0; d < c; ++d) q(i, d) = rng.normal();
    }
    for (int i = 0; i < nk; ++i) {
      pk.emplace_back(rng.uniform(-60, 60), rng.uniform(-60, 60));
      for (int d = 0; d < c; ++d) {
        k(i, d) = rng.normal();
        v(i, d) = rng.normal();
      }
    }
    const Eigen::MatrixXd fast = linear_attention(q, k, v, pq, pk, enc);
    const Eigen::MatrixXd slow = oracle::linear_attention_bruteforce(q, k, v, pq, pk, enc);
    worst = std::max(worst, (fast - slow).cwiseAbs().maxCoeff());
  }
  const double elapsed = timer.seconds();
  const bool pass = worst < 1e-9 && elapsed < 5.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "linear attention vs brute force, max diff = %.3g (< 1e-9), %.2fs (< 5s)", worst,
                elapsed);
  verdict(2, pass, buf);
  CHECK(worst < 1e-9);
  CHECK(elapsed < 5.0);
}

TEST_CASE("criterion 3: sinkhorn marginals and shift invariance") {
  Timer timer;
  Rng rng(303);
  double worst_marginal = 0.0;
  double worst_shift = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd s(32, 48);
    for (int r = 0; r < 32; ++r)
      for (int c = 0; c < 48; ++c) s(r, c) = rng.normal();
    const AssignmentMatrix a = sinkhorn({s, 1.0}, 100, 1.0);
    for (int r = 0; r < 32; ++r) {
      worst_marginal = std::max(worst_marginal,
                                std::abs(a.c.row(r).sum() + a.row_dustbin(r) - 1.0));
    }
    for (int c = 0; c < 48; ++c) {
      worst_marginal = std::max(worst_marginal,
                                std::abs(a.c.col(c).sum() + a.col_dustbin(c) - 1.0));
    }
    const double shift = rng.uniform(-4.0, 4.0);
    const Eigen::MatrixXd shifted = s.array() + shift;
    const AssignmentMatrix b = sinkhorn({shifted, 1.0}, 100, 1.0 + shift);
    worst_shift = std::max(worst_shift, (a.c - b.c).cwiseAbs().maxCoeff());
  }
  const double elapsed = timer.seconds();
  const bool pass = worst_marginal < 1e-6 && worst_shift < 1e-8 && elapsed < 2.0;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "marginal violation = %.3g (< 1e-6), shift drift = %.3g (< 1e-8), %.2fs (< 2s)",
                worst_marginal, worst_shift, elapsed);
  verdict(3, pass, buf);
  CHECK(worst_marginal < 1e-6);
  CHECK(worst_shift < 1e-8);
  CHECK(elapsed < 2.0);
}

TEST_CASE("criterion 4: weighted DLT exact recovery and outlier masking") {
  Timer timer;
  Rng rng(404);
  double worst = 0.0, worst_masked = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Homography want = sample_gt_homography(rng.next_u64(), {});
    std::vector<PointMatch> pm;
    std::vector<double> s, e;
    for (int i = 0; i < 8; ++i) {
      Eigen::Vector2d p(rng.uniform(0, 640), rng.uniform(0, 480));
      pm.push_back({p, apply_homography(want, p)});
      s.push_back(1.0);
      e.push_back(1.0);
    }
    worst = std::max(worst, canonical_distance(
                                dlt_weighted(WeightedMatchSet::make(pm, s, e)), want));
    // two planted outliers carrying zero weight must not move the estimate
    for (int i = 0; i < 2; ++i) {
      pm.push_back({{rng.uniform(0, 640), rng.uniform(0, 480)},
                    {rng.uniform(0, 640), rng.uniform(0, 480)}});
      s.push_back(1.0);
      e.push_back(0.0);
    }
    worst_masked = std::max(worst_masked, canonical_distance(
                                              dlt_weighted(WeightedMatchSet::make(pm, s, e)),
                                              want));
  }
  const double elapsed = timer.seconds();
  const bool pass = worst < 1e-8 && worst_masked < 1e-8 && elapsed < 1.0;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "recovery = %.3g, masked recovery = %.3g (< 1e-8), %.2fs (< 1s)", worst,
                worst_masked, elapsed);
  verdict(4, pass, buf);
  CHECK(worst < 1e-8);
  CHECK(worst_masked < 1e-8);
  CHECK(elapsed < 1.0);
}

TEST_CASE("criterion 5: spectral consistency separates planted outliers") {
  Timer timer;
  ConsistencyParams params;
  int good_seeds = 0;
  double worst_cos = 1.0;
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(5000 + seed);
    std::vector<Eigen::Vector2d> t, i;
    const double ang = rng.uniform(-0.4, 0.4), sc = rng.uniform(0.8, 1.25);
    const double c = std::cos(ang) * sc, s = std::sin(ang) * sc;
    const Eigen::Vector2d off(rng.uniform(-40, 40), rng.uniform(-40, 40));
    for (int k = 0; k < 20; ++k) {
      Eigen::Vector2d p(rng.uniform(0, 300), rng.uniform(0, 300));
      t.push_back(p);
      i.emplace_back(c * p.x() - s * p.y() + off.x(), s * p.x() + c * p.y() + off.y());
    }
    for (int k = 0; k < 10; ++k) {
      t.emplace_back(rng.uniform(0, 300), rng.uniform(0, 300));
      i.emplace_back(rng.uniform(0, 300), rng.uniform(0, 300));
    }
    const Eigen::MatrixXd compat = build_compat_matrix(t, i, params);
    const Eigen::VectorXd e = leading_eigenvector(compat);
    if (auroc(e, 20) >= 0.95) ++good_seeds;

    Eigen::VectorXd dense = oracle::dominant_eigenvector_dense(compat).cwiseAbs();
    dense /= dense.maxCoeff();
    worst_cos = std::min(worst_cos, e.dot(dense) / (e.norm() * dense.norm()));
  }
  const double elapsed = timer.seconds();
  const bool pass = good_seeds >= 95 && worst_cos > 1.0 - 1e-8 && elapsed < 10.0;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "AUROC >= 0.95 in %d/100 seeds (need >= 95), eigensolver cosine = 1-%.3g, "
                "%.2fs (< 10s)",
                good_seeds, 1.0 - worst_cos, elapsed);
  verdict(5, pass, buf);
  CHECK(good_seeds >= 95);
  CHECK(worst_cos > 1.0 - 1e-8);
  CHECK(elapsed < 10.0);
}

TEST_CASE("criterion 6: sub-pixel expectation moments") {
  double worst = 0.0;
  {  // delta heatmap
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(5, 5);
    h(2, 2) = 1.0;
    const HeatmapMoments mm = heatmap_moments(h, -2);
    worst = std::max({worst, mm.mean.cwiseAbs().maxCoeff(), std::abs(mm.variance)});
  }
  {  // uniform 5x5: per-axis variance 2, total 4
    Eigen::MatrixXd h = Eigen::MatrixXd::Constant(5, 5, 1.0 / 25.0);
    const HeatmapMoments mm = heatmap_moments(h, -2);
    worst = std::max({worst, mm.mean.cwiseAbs().maxCoeff(), std::abs(mm.variance - 4.0)});
  }
  {  // two half spikes on the x axis
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 3);
    h(1, 0) = 0.5;
    h(1, 2) = 0.5;
    const HeatmapMoments mm = heatmap_moments(h, -1);
    worst = std::max({worst, mm.mean.cwiseAbs().maxCoeff(), std::abs(mm.variance - 1.0)});
  }
  {  // asymmetric two-cell map: mean 0.25 right of center, variance via König
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 3);
    h(1, 1) = 0.75;
    h(1, 2) = 0.25;
    const HeatmapMoments mm = heatmap_moments(h, -1);
    worst = std::max({worst, std::abs(mm.mean.x() - 0.25), std::abs(mm.mean.y()),
                      std::abs(mm.variance - (0.25 - 0.0625))});
  }
  const bool pass = worst < 1e-12;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "closed-form moment deviation = %.3g (< 1e-12)", worst);
  verdict(6, pass, buf);
  CHECK(worst < 1e-12);
}

TEST_CASE("criterion 7: desk-scale end-to-end accuracy") {
  const fs::path data_dir = fresh_dir("desk_data");
  const fs::path out_dir = fresh_dir("desk_out");

  PipelineConfig cfg;
  cfg.scale_min = 0.9;
  cfg.scale_max = 1.1;
  cfg.rotation_deg = 15.0;
  cfg.corner_px = 16.0;
  cfg.attention = false;  // descriptor-only mode
  cfg.seed = 7;

  const auto records = synth_dataset("builtin", data_dir.string(), 100, cfg, cfg.seed);

  Timer timer;
  EvalOptions opts;
  opts.compare_unweighted = true;
  const EvalReport report = evaluate(records, cfg, out_dir.string(), opts);
  const double elapsed = timer.seconds();

  const bool pass = report.auc3 >= 70.0 && report.auc10 >= 90.0 &&
                    report.auc3 > report.auc3_unweighted && elapsed < 120.0;
  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "AUC@3 = %.1f (>= 70), AUC@10 = %.1f (>= 90), weighted %.2f > unweighted %.2f "
                "at 3px, %.1fs (< 120s)",
                report.auc3, report.auc10, report.auc3, report.auc3_unweighted, elapsed);
  verdict(7, pass, buf);
  CHECK(report.auc3 >= 70.0);
  CHECK(report.auc10 >= 90.0);
  CHECK(report.auc3 > report.auc3_unweighted);
  CHECK(elapsed < 120.0);

  fs::remove_all(data_dir);
  fs::remove_all(out_dir);
}

TEST_CASE("criterion 8: loss sanity") {
  double worst = 0.0;

  GroundTruthCoarse gt;
  gt.pairs = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  gt.unmatched = {4};
  AssignmentMatrix a;
  a.method = MatchMethod::OptimalTransport;
  a.c = Eigen::MatrixXd::Zero(5, 5);
  for (const auto& [t, i] : gt.pairs) a.c(t, i) = 1.0;
  a.row_dustbin = Eigen::VectorXd::Ones(5);
  worst = std::max(worst, std::abs(coarse_loss(a, gt)));

  const int n = 7;
  GroundTruthCoarse gtu;
  AssignmentMatrix u;
  u.method = MatchMethod::DualSoftmax;
  u.c = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    gtu.pairs.emplace_back(i, i);
    u.c(i, i) = 1.0 / n;
  }
  worst = std::max(worst, std::abs(coarse_loss(u, gtu) - std::log(double(n))));

  std::vector<FineMatch> fine(3);
  std::vector<Eigen::Vector2d> gtp(3);
  std::vector<Eigen::MatrixXd> wt(3), wi(3);
  std::vector<double> masks(3, 1.0);
  for (int i = 0; i < 3; ++i) {
    fine[i].i_px = {4.0 * i, 1.0};
    fine[i].j_warped_px = fine[i].i_px;
    fine[i].variance = 0.7;
    gtp[i] = fine[i].j_warped_px;
    wt[i] = Eigen::MatrixXd::Constant(4, 4, 0.3);
    wi[i] = wt[i];
  }
  worst = std::max(worst, std::abs(fine_loss(fine, gtp, wt, wi, masks)));

  const bool pass = worst < 1e-10;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "ideal-configuration loss deviation = %.3g (< 1e-10)", worst);
  verdict(8, pass, buf);
  CHECK(worst < 1e-10);
}

TEST_CASE("criterion 9: byte-identical reports for identical seeds") {
  PipelineConfig cfg;
  cfg.width = 320;
  cfg.height = 240;
  cfg.n_patches = 64;
  cfg.attention = false;
  cfg.corner_px = 8.0;
  cfg.seed = 31;

  const fs::path d1 = fresh_dir("det_data1");
  const fs::path d2 = fresh_dir("det_data2");
  const auto r1 = synth_dataset("builtin", d1.string(), 5, cfg, cfg.seed);
  const auto r2 = synth_dataset("builtin", d2.string(), 5, cfg, cfg.seed);

  const fs::path o1 = fresh_dir("det_out1");
  const fs::path o2 = fresh_dir("det_out2");
  evaluate(r1, cfg, o1.string());
  evaluate(r2, cfg, o2.string());

  const bool manifests = slurp(d1 / "manifest.json") == slurp(d2 / "manifest.json");
  const bool reports = slurp(o1 / "report.json") == slurp(o2 / "report.json");
  const bool csvs = slurp(o1 / "errors.csv") == slurp(o2 / "errors.csv");
  const bool pass = manifests && reports && csvs;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "manifest match = %d, report match = %d, csv match = %d",
                manifests, reports, csvs);
  verdict(9, pass, buf);
  CHECK(manifests);
  CHECK(reports);
  CHECK(csvs);

  fs::remove_all(d1);
  fs::remove_all(d2);
  fs::remove_all(o1);
  fs::remove_all(o2);
}
