#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "tmatch/features.hpp"

namespace tmatch {

/// 2D rotary relative positional encoding. The feature vector is split into
/// C/4 blocks of four; in block k the first pair rotates by x*theta_k and the
/// second pair by y*theta_k, with theta_k = 1/10000^(4(k-1)/C). Dot products
/// of encoded vectors then depend only on relative positions.
struct RotaryEncoder {
  int dim = 0;
  std::vector<double> theta;  // C/4 entries, theta[0] = 1, strictly decreasing

  explicit RotaryEncoder(int dim_);
};

/// Applies the block rotation for position `pos`. Norm-preserving.
Eigen::VectorXd rope_apply(const RotaryEncoder& enc, const Eigen::Vector2d& pos,
                           const Eigen::VectorXd& f);

/// Reference attention: row-stochastic softmax(Q K^T) V, O(N^2).
Eigen::MatrixXd softmax_attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                  const Eigen::MatrixXd& v);

/// Kernelized linear attention with rotary encoding, phi(x) = elu(x) + 1.
/// Queries, keys and values all carry the rotation; the positive-kernel
/// denominator stays un-rotated. Evaluated with the associativity trick in
/// O(N * C^2); numerically equal to the explicit double sum.
Eigen::MatrixXd linear_attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                 const Eigen::MatrixXd& v,
                                 const std::vector<Eigen::Vector2d>& positions_q,
                                 const std::vector<Eigen::Vector2d>& positions_kv,
                                 const RotaryEncoder& enc);

/// elu(x)+1 applied element-wise; strictly positive.
Eigen::MatrixXd kernel_feature(const Eigen::MatrixXd& x);

/// Weights for one attention sublayer plus its feed-forward.
struct AttentionLayerWeights {
  Eigen::MatrixXd wq, wk, wv, wo;  // dim x dim
  Eigen::MatrixXd ff1;             // hidden x dim
  Eigen::VectorXd ff_b1;           // hidden
  Eigen::MatrixXd ff2;             // dim x hidden
  Eigen::VectorXd ff_b2;           // dim
};

/// Interleaved self/cross transformer stack. The same weights serve both
/// token sets, so swapping the inputs swaps the outputs.
struct TransformerWeights {
  int dim = 0;
  int hidden = 0;
  std::vector<AttentionLayerWeights> self_layers;
  std::vector<AttentionLayerWeights> cross_layers;

  int layers() const { return static_cast<int>(self_layers.size()); }

  /// Deterministic Gaussian init scaled by 1/sqrt(fan-in); hidden = 2*dim.
  static TransformerWeights seeded(int n_layers, int dim, std::uint64_t seed);
  static TransformerWeights zero(int n_layers, int dim);
};

/// N layers of (self-attention on each set, cross-attention between sets),
/// residual connections throughout, positions untouched, outputs re-normalized
/// to unit descriptors. Cross updates read from a shared snapshot of both
/// sides so the block treats the two sets symmetrically.
std::pair<TokenSet, TokenSet> run_transformer(const TokenSet& t_tokens,
                                              const TokenSet& i_tokens,
                                              const TransformerWeights& w);

// Weight file format: "TMW1" magic line, a "dim <d> hidden <h> layers <n>"
// line, then per tensor a "tensor <name> <rows> <cols>" line followed by
// rows*cols little-endian float64 values.
void save_weights(const std::string& path, const TransformerWeights& w);
TransformerWeights load_weights(const std::string& path);

}  // namespace tmatch
