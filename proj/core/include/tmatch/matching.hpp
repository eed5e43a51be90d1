#pragma once

#include <Eigen/Core>
#include <vector>

#include "tmatch/features.hpp"

namespace tmatch {

/// Temperature-scaled dot-product similarities, |T| x |I|.
struct ScoreMatrix {
  Eigen::MatrixXd s;
  double temperature = 0.1;
};

ScoreMatrix score_matrix(const TokenSet& ft, const TokenSet& fi, double temperature = 0.1);

enum class MatchMethod { OptimalTransport, DualSoftmax };

/// Match confidences in [0, 1]. For optimal transport the matrix excludes the
/// dustbins and is rescaled by |T|, so each row's confidences plus its dustbin
/// share sum to 1 and a perfect one-to-one assignment approaches 1.
struct AssignmentMatrix {
  Eigen::MatrixXd c;
  MatchMethod method = MatchMethod::OptimalTransport;
  Eigen::VectorXd row_dustbin;  // |T|, rescaled like c (OT only)
  Eigen::VectorXd col_dustbin;  // |I|, rescaled like c (OT only)
};

/// Log-domain Sinkhorn on the score matrix augmented with a constant-score
/// dustbin row and column. Real rows and columns carry uniform marginals of
/// 1/|T| each; the dustbin row absorbs up to all image mass and the dustbin
/// column up to all template mass. Adding one constant to every score
/// (dustbin included) leaves the transport plan unchanged.
AssignmentMatrix sinkhorn(const ScoreMatrix& sm, int iters = 100, double dustbin_score = 1.0);

/// c(i,j) = softmax over row i of s times softmax over column j of s.
AssignmentMatrix dual_softmax(const ScoreMatrix& sm);

struct CoarseMatch {
  int t_index = 0;
  int i_index = 0;
  double score = 0.0;
};

/// Mutual-nearest-neighbor matches above threshold; a partial matching.
struct CoarseMatchSet {
  std::vector<CoarseMatch> pairs;
};

/// Keeps (i,j) when c(i,j) is the maximum of row i and of column j and is at
/// least theta_c. Ties resolve to the lowest column, then the lowest row.
CoarseMatchSet mnn_filter(const AssignmentMatrix& a, double theta_c);

}  // namespace tmatch
