#include "tmatch/consistency.hpp"

#include <algorithm>
#include <cmath>

namespace tmatch {

Eigen::MatrixXd normalize_pairwise_distances(std::span<const Eigen::Vector2d> points) {
  const int k = static_cast<int>(points.size());
  if (k < 2) throw DegenerateSet("need at least two points");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(k, k);
  double sum = 0.0;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      const double dist = (points[a] - points[b]).norm();
      d(a, b) = dist;
      d(b, a) = dist;
      sum += dist;
    }
  }
  const double mean = sum / (0.5 * k * (k - 1));
  if (mean < 1e-12) throw DegenerateSet("all points coincide");
  return d / mean;
}

double distance_compat(double d_t, double d_i, double sigma_d) {
  if (d_i <= 0.0) throw ZeroDenominator("image-side distance is zero");
  const double r = d_t / d_i - 1.0;
  return std::max(0.0, 1.0 - r * r / (sigma_d * sigma_d));
}

double angle_property(std::span<const Eigen::Vector2d> points, int i, int j, int k_nn) {
  const int n = static_cast<int>(points.size());
  if (k_nn < 1) throw InvalidRange("k_nn must be positive");
  if (n < k_nn + 2) throw TooFewMatches("not enough points for k nearest neighbors");

  const Eigen::Vector2d vj = points[i] - points[j];
  if (vj.norm() < 1e-12) throw DegenerateVector("pair points coincide");

  std::vector<std::pair<double, int>> cand;
  cand.reserve(n - 2);
  for (int x = 0; x < n; ++x) {
    if (x == i || x == j) continue;
    cand.emplace_back((points[x] - points[i]).squaredNorm(), x);
  }
  std::sort(cand.begin(), cand.end());

  double best = 0.0;
  for (int t = 0; t < k_nn; ++t) {
    const Eigen::Vector2d vx = points[i] - points[cand[t].second];
    if (vx.norm() < 1e-12) throw DegenerateVector("neighbor coincides with pair point");
    const double cross = vx.x() * vj.y() - vx.y() * vj.x();
    const double ang = std::atan2(std::abs(cross), vx.dot(vj));  // [0, pi]
    best = std::max(best, ang);
  }
  return best;
}

double angular_compat(double c_t, double c_i, double sigma_alpha) {
  const double d = c_t - c_i;
  return std::max(0.0, 1.0 - d * d / (sigma_alpha * sigma_alpha));
}

Eigen::MatrixXd build_compat_matrix(std::span<const Eigen::Vector2d> t_points,
                                    std::span<const Eigen::Vector2d> i_points,
                                    const ConsistencyParams& params) {
  if (t_points.size() != i_points.size()) {
    throw LengthMismatch("template and image point counts differ");
  }
  const int k = static_cast<int>(t_points.size());
  if (k < 2) throw TooFewMatches("need at least two matches");

  const Eigen::MatrixXd d_t = normalize_pairwise_distances(t_points);
  const Eigen::MatrixXd d_i = normalize_pairwise_distances(i_points);

  const int k_eff = std::min(params.k_nn, k - 2);

  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      const double dt = d_t(a, b), di = d_i(a, b);
      if (dt < 1e-12 || di < 1e-12) continue;  // coincident pair, incompatible
      const double beta = distance_compat(std::max(dt, di), std::min(dt, di), params.sigma_d);

      double alpha = 1.0;  // no neighbors to measure angles against
      if (k_eff >= 1) {
        const double ab = angular_compat(angle_property(t_points, a, b, k_eff),
                                         angle_property(i_points, a, b, k_eff),
                                         params.sigma_alpha);
        const double ba = angular_compat(angle_property(t_points, b, a, k_eff),
                                         angle_property(i_points, b, a, k_eff),
                                         params.sigma_alpha);
        alpha = 0.5 * (ab + ba);
      }
      const double val = params.lambda_c * alpha + (1.0 - params.lambda_c) * beta;
      e(a, b) = val;
      e(b, a) = val;
    }
  }
  return e;
}

Eigen::VectorXd leading_eigenvector(const Eigen::MatrixXd& e_mat, int iters, double tol) {
  const Eigen::Index k = e_mat.rows();
  if (k < 2 || e_mat.cols() != k) throw InvalidRange("matrix must be square, K >= 2");

  Eigen::VectorXd x = Eigen::VectorXd::Constant(k, 1.0 / std::sqrt(static_cast<double>(k)));
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd y = e_mat * x;
    const double n = y.norm();
    if (n <= 0.0) return Eigen::VectorXd::Ones(k);  // degenerate fallback
    y /= n;
    const double change = (y - x).norm();
    x = std::move(y);
    if (change < tol) break;
  }
  Eigen::VectorXd e = x.cwiseAbs();
  const double mx = e.maxCoeff();
  if (mx > 0.0) e /= mx;
  return e;
}

WeightedMatchSet combine_weights(std::vector<PointMatch> matches,
                                 std::vector<double> s, const Eigen::VectorXd& e) {
  if (matches.size() != s.size() ||
      static_cast<Eigen::Index>(matches.size()) != e.size()) {
    throw LengthMismatch("matches, s and e must have equal length");
  }
  std::vector<double> ev(e.data(), e.data() + e.size());
  return WeightedMatchSet::make(std::move(matches), std::move(s), std::move(ev));
}

}  // namespace tmatch
