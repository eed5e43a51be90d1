#include "tmatch/geometry.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tmatch/rng.hpp"

namespace tmatch {

namespace {

Eigen::Matrix3d canonicalize(const Eigen::Matrix3d& raw) {
  const double frob = raw.norm();
  if (!(frob > 0.0) || !raw.allFinite()) {
    throw SingularMatrix("homography has zero or non-finite entries");
  }
  Eigen::Matrix3d c = raw / frob;
  double pivot = c(2, 2);
  if (pivot == 0.0) {
    for (int r = 0; r < 3 && pivot == 0.0; ++r)
      for (int col = 0; col < 3 && pivot == 0.0; ++col) pivot = c(r, col);
  }
  if (pivot < 0.0) c = -c;
  return c;
}

}  // namespace

Homography Homography::identity() {
  Homography h;
  h.m = Eigen::Matrix3d::Identity() / std::sqrt(3.0);
  return h;
}

Homography Homography::from_matrix(const Eigen::Matrix3d& raw) {
  Homography h;
  h.m = canonicalize(raw);
  if (std::abs(h.m.determinant()) <= 1e-12) {
    throw SingularMatrix("homography is singular");
  }
  return h;
}

WeightedMatchSet WeightedMatchSet::make(std::vector<PointMatch> matches,
                                        std::vector<double> s,
                                        std::vector<double> e) {
  if (matches.size() != s.size() || matches.size() != e.size()) {
    throw LengthMismatch("matches, s and e must have equal length");
  }
  WeightedMatchSet ms;
  ms.matches = std::move(matches);
  ms.s = std::move(s);
  ms.e = std::move(e);
  ms.w.resize(ms.s.size());
  for (std::size_t k = 0; k < ms.s.size(); ++k) ms.w[k] = ms.s[k] * ms.e[k];
  return ms;
}

WeightedMatchSet WeightedMatchSet::uniform(std::vector<PointMatch> matches) {
  const std::size_t n = matches.size();
  return make(std::move(matches), std::vector<double>(n, 1.0),
              std::vector<double>(n, 1.0));
}

Eigen::Vector2d apply_homography(const Homography& h, const Eigen::Vector2d& p) {
  const Eigen::Vector3d q = h.m * Eigen::Vector3d(p.x(), p.y(), 1.0);
  if (std::abs(q.z()) <= 1e-12) {
    throw DegeneratePoint("point maps to the line at infinity");
  }
  return {q.x() / q.z(), q.y() / q.z()};
}

Homography invert(const Homography& h) {
  if (std::abs(h.m.determinant()) <= 1e-12) {
    throw SingularMatrix("cannot invert a singular homography");
  }
  return Homography::from_matrix(h.m.inverse());
}

namespace {

// Similarity moving the centroid to the origin and the mean distance to sqrt(2).
Eigen::Matrix3d hartley_transform(const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - c).norm();
  mean_dist /= static_cast<double>(pts.size());
  if (mean_dist < 1e-12) {
    throw RankDeficient("all points coincide");
  }
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * c.x(), 0, s, -s * c.y(), 0, 0, 1;
  return t;
}

}  // namespace

Homography dlt_weighted(const WeightedMatchSet& ms) {
  std::vector<int> usable;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    if (ms.w[k] > 0.0 && ms.matches[k].p_t.allFinite() &&
        ms.matches[k].p_i.allFinite()) {
      usable.push_back(static_cast<int>(k));
    }
  }
  if (usable.size() < 4) {
    throw InsufficientMatches("need at least 4 matches with positive weight");
  }

  std::vector<Eigen::Vector2d> pt, pi;
  pt.reserve(usable.size());
  pi.reserve(usable.size());
  for (int k : usable) {
    pt.push_back(ms.matches[k].p_t);
    pi.push_back(ms.matches[k].p_i);
  }
  const Eigen::Matrix3d t_t = hartley_transform(pt);
  const Eigen::Matrix3d t_i = hartley_transform(pi);

  const auto n = static_cast<Eigen::Index>(usable.size());
  Eigen::MatrixXd a(2 * n, 9);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Vector3d x = t_t * Eigen::Vector3d(pt[r].x(), pt[r].y(), 1.0);
    const Eigen::Vector3d y = t_i * Eigen::Vector3d(pi[r].x(), pi[r].y(), 1.0);
    const double u = x.x() / x.z(), v = x.y() / x.z();
    const double up = y.x() / y.z(), vp = y.y() / y.z();
    const double sw = std::sqrt(ms.w[usable[r]]);
    a.row(2 * r) << 0, 0, 0, -u, -v, -1, vp * u, vp * v, vp;
    a.row(2 * r + 1) << u, v, 1, 0, 0, 0, -up * u, -up * v, -up;
    a.row(2 * r) *= sw;
    a.row(2 * r + 1) *= sw;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv.size() < 8 || sv(7) <= 1e-10 * sv(0)) {
    throw RankDeficient("design matrix has rank below 8");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

  const Eigen::Matrix3d out = t_i.inverse() * hn * t_t;
  try {
    return Homography::from_matrix(out);
  } catch (const SingularMatrix&) {
    throw RankDeficient("estimated homography is singular");
  }
}

std::vector<double> reprojection_errors(const Homography& h_est,
                                        const Homography& h_gt,
                                        std::span<const Eigen::Vector2d> pts) {
  if (pts.empty()) throw EmptyInput("no measurement points");
  std::vector<double> errs;
  errs.reserve(pts.size());
  for (const auto& p : pts) {
    errs.push_back((apply_homography(h_est, p) - apply_homography(h_gt, p)).norm());
  }
  return errs;
}

double auc(std::span<const double> errors, double threshold) {
  if (errors.empty()) throw EmptyInput("no errors given");
  if (!(threshold > 0.0)) throw InvalidRange("threshold must be positive");
  double acc = 0.0;
  for (double e : errors) {
    if (e < 0.0) throw InvalidRange("errors must be non-negative");
    if (std::isfinite(e)) acc += std::max(0.0, 1.0 - e / threshold);
  }
  return 100.0 * acc / static_cast<double>(errors.size());
}

Homography sample_gt_homography(std::uint64_t seed, const PerturbationConfig& cfg) {
  if (!(cfg.scale_min > 0.0) || cfg.scale_max < cfg.scale_min) {
    throw InvalidRange("scale range must be within (0, inf) and ordered");
  }
  if (cfg.corner_px < 0.0 || cfg.rotation_deg < 0.0) {
    throw InvalidRange("perturbation bounds must be non-negative");
  }
  Rng rng(seed);
  const double scale = rng.uniform(cfg.scale_min, cfg.scale_max);
  const double rot = rng.uniform(-cfg.rotation_deg, cfg.rotation_deg) * M_PI / 180.0;

  const double cx = cfg.width / 2.0, cy = cfg.height / 2.0;
  Eigen::Matrix3d sim = Eigen::Matrix3d::Identity();
  const double ca = std::cos(rot) * scale, sa = std::sin(rot) * scale;
  sim << ca, -sa, cx - ca * cx + sa * cy,
         sa,  ca, cy - sa * cx - ca * cy,
          0,   0, 1;

  const Eigen::Vector2d corners[4] = {{0.0, 0.0},
                                      {cfg.width - 1.0, 0.0},
                                      {cfg.width - 1.0, cfg.height - 1.0},
                                      {0.0, cfg.height - 1.0}};
  std::vector<PointMatch> pins;
  pins.reserve(4);
  for (const auto& c : corners) {
    const double dx = rng.uniform(-cfg.corner_px, cfg.corner_px);
    const double dy = rng.uniform(-cfg.corner_px, cfg.corner_px);
    pins.push_back({c, c + Eigen::Vector2d(dx, dy)});
  }
  const Homography corner_h = dlt_weighted(WeightedMatchSet::uniform(std::move(pins)));
  return Homography::from_matrix(corner_h.m * sim);
}

double canonical_distance(const Homography& a, const Homography& b) {
  return (a.m - b.m).norm();
}

std::string to_line(const Homography& h) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g",
                h.m(0, 0), h.m(0, 1), h.m(0, 2), h.m(1, 0), h.m(1, 1),
                h.m(1, 2), h.m(2, 0), h.m(2, 1), h.m(2, 2));
  return buf;
}

Homography homography_from_line(const std::string& line) {
  std::istringstream in(line);
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (!(in >> m(r, c))) throw IoFailure("expected 9 numbers on one line");
  return Homography::from_matrix(m);
}

}  // namespace tmatch
