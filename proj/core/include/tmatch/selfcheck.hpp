#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <vector>

#include "tmatch/attention.hpp"
#include "tmatch/matching.hpp"

namespace tmatch {

// Reference implementations kept deliberately separate from the production
// code paths they validate. The selftest command and the test suites compare
// against these.
namespace oracle {

/// Explicit double-sum linear attention with rotary factors, O(N^2).
Eigen::MatrixXd linear_attention_bruteforce(const Eigen::MatrixXd& q,
                                            const Eigen::MatrixXd& k,
                                            const Eigen::MatrixXd& v,
                                            const std::vector<Eigen::Vector2d>& positions_q,
                                            const std::vector<Eigen::Vector2d>& positions_kv,
                                            const RotaryEncoder& enc);

/// Textbook Sinkhorn in probability space with the same dustbin convention
/// as the production solver: augmented row/column at `dustbin_score`,
/// marginals 1/|T| per real row and column.
Eigen::MatrixXd sinkhorn_textbook(const Eigen::MatrixXd& scores, int iters,
                                  double dustbin_score);

/// Dominant eigenvector via a dense symmetric eigensolver.
Eigen::VectorXd dominant_eigenvector_dense(const Eigen::MatrixXd& sym);

/// Per-row softmax followed by the weighted value sum, element by element.
Eigen::MatrixXd softmax_attention_rows(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                       const Eigen::MatrixXd& v);

}  // namespace oracle

/// Runs the oracle-backed sanity suite, printing one line per check.
/// Returns true when every check passes.
bool selftest(std::ostream& out);

}  // namespace tmatch
