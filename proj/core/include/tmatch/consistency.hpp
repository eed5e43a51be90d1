#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "tmatch/geometry.hpp"

namespace tmatch {

struct ConsistencyParams {
  double sigma_d = 0.4;
  double sigma_alpha = 1.0;
  double lambda_c = 0.5;
  int k_nn = 3;
};

/// Pairwise Euclidean distances divided by their mean over all unordered
/// pairs, so the normalized distances average to 1 and uniform scaling of the
/// point set cancels. Throws DegenerateSet when the points coincide.
Eigen::MatrixXd normalize_pairwise_distances(std::span<const Eigen::Vector2d> points);

/// Distance compatibility [1 - (d_t/d_i - 1)^2 / sigma_d^2]_+ .
double distance_compat(double d_t, double d_i, double sigma_d);

/// Angle property of the ordered pair (i, j) within one point set: the
/// largest unsigned angle between (p_i - p_x) and (p_i - p_j) over the k
/// nearest neighbors x of p_i (i and j excluded from the candidates).
double angle_property(std::span<const Eigen::Vector2d> points, int i, int j, int k_nn);

/// Angular compatibility [1 - (c_t - c_i)^2 / sigma_alpha^2]_+ .
double angular_compat(double c_t, double c_i, double sigma_alpha);

/// Spatial compatibility matrix over K matches:
/// E(a,b) = lambda_c * alpha + (1 - lambda_c) * beta, zero diagonal,
/// symmetric. Beta uses the ratio max/min of the two normalized distances;
/// alpha averages the two pair orderings. Throws TooFewMatches for K < 2,
/// which callers treat as "fall back to feature scores alone".
Eigen::MatrixXd build_compat_matrix(std::span<const Eigen::Vector2d> t_points,
                                    std::span<const Eigen::Vector2d> i_points,
                                    const ConsistencyParams& params);

/// Leading eigenvector by power iteration from the uniform vector, magnitudes
/// max-normalized into [0, 1]. An all-zero matrix yields the uniform fallback.
Eigen::VectorXd leading_eigenvector(const Eigen::MatrixXd& e_mat, int iters = 50,
                                    double tol = 1e-8);

/// w_k = s_k * e_k.
WeightedMatchSet combine_weights(std::vector<PointMatch> matches,
                                 std::vector<double> s, const Eigen::VectorXd& e);

}  // namespace tmatch
