#include "tmatch/attention.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "tensor_io.hpp"
#include "tmatch/rng.hpp"

namespace tmatch {

RotaryEncoder::RotaryEncoder(int dim_) : dim(dim_) {
  if (dim < 4 || dim % 4 != 0) {
    throw DimMismatch("rotary encoder dim must be a positive multiple of 4");
  }
  const int blocks = dim / 4;
  theta.resize(blocks);
  for (int k = 0; k < blocks; ++k) {
    theta[k] = std::pow(10000.0, -4.0 * k / dim);
  }
}

Eigen::VectorXd rope_apply(const RotaryEncoder& enc, const Eigen::Vector2d& pos,
                           const Eigen::VectorXd& f) {
  if (f.size() != enc.dim) throw DimMismatch("vector dim does not match encoder");
  Eigen::VectorXd out(f.size());
  for (int k = 0; k < enc.dim / 4; ++k) {
    const double ax = pos.x() * enc.theta[k];
    const double ay = pos.y() * enc.theta[k];
    const double cx = std::cos(ax), sx = std::sin(ax);
    const double cy = std::cos(ay), sy = std::sin(ay);
    const int b = 4 * k;
    out(b) = cx * f(b) - sx * f(b + 1);
    out(b + 1) = sx * f(b) + cx * f(b + 1);
    out(b + 2) = cy * f(b + 2) - sy * f(b + 3);
    out(b + 3) = sy * f(b + 2) + cy * f(b + 3);
  }
  return out;
}

Eigen::MatrixXd softmax_attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                  const Eigen::MatrixXd& v) {
  if (k.rows() == 0) throw EmptyKeys("no keys");
  if (k.rows() != v.rows()) throw DimMismatch("K and V row counts differ");
  if (q.cols() != k.cols()) throw DimMismatch("Q and K dims differ");
  Eigen::MatrixXd scores = q * k.transpose();
  Eigen::MatrixXd out(q.rows(), v.cols());
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    const double m = scores.row(r).maxCoeff();
    Eigen::ArrayXd e = (scores.row(r).array() - m).exp();
    out.row(r) = (e.matrix().transpose() * v) / e.sum();
  }
  return out;
}

Eigen::MatrixXd kernel_feature(const Eigen::MatrixXd& x) {
  return x.unaryExpr([](double v) { return v >= 0.0 ? v + 1.0 : std::exp(v); });
}

Eigen::MatrixXd linear_attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                 const Eigen::MatrixXd& v,
                                 const std::vector<Eigen::Vector2d>& positions_q,
                                 const std::vector<Eigen::Vector2d>& positions_kv,
                                 const RotaryEncoder& enc) {
  if (q.cols() != enc.dim || k.cols() != enc.dim || v.cols() != enc.dim) {
    throw DimMismatch("token dims must equal the encoder dim");
  }
  if (k.rows() != v.rows()) throw DimMismatch("K and V row counts differ");
  if (static_cast<Eigen::Index>(positions_q.size()) != q.rows() ||
      static_cast<Eigen::Index>(positions_kv.size()) != k.rows()) {
    throw DimMismatch("positions do not match token counts");
  }
  if (k.rows() == 0) throw EmptyKeys("no keys");

  const Eigen::MatrixXd phi_q = kernel_feature(q);
  const Eigen::MatrixXd phi_k = kernel_feature(k);

  // Accumulate sum_n (Theta(n) v_n) (Theta(n) phi_k_n)^T and sum_n phi_k_n,
  // then each query costs one C^2 product.
  const int c = enc.dim;
  Eigen::MatrixXd kv = Eigen::MatrixXd::Zero(c, c);
  Eigen::VectorXd ksum = Eigen::VectorXd::Zero(c);
  for (Eigen::Index n = 0; n < k.rows(); ++n) {
    const Eigen::VectorXd bk = rope_apply(enc, positions_kv[n], phi_k.row(n).transpose());
    const Eigen::VectorXd cv = rope_apply(enc, positions_kv[n], v.row(n).transpose());
    kv.noalias() += cv * bk.transpose();
    ksum += phi_k.row(n).transpose();
  }

  Eigen::MatrixXd out(q.rows(), c);
  for (Eigen::Index m = 0; m < q.rows(); ++m) {
    const Eigen::VectorXd aq = rope_apply(enc, positions_q[m], phi_q.row(m).transpose());
    const double den = phi_q.row(m).dot(ksum);
    out.row(m) = (kv * aq / den).transpose();
  }
  return out;
}

TransformerWeights TransformerWeights::seeded(int n_layers, int dim, std::uint64_t seed) {
  TransformerWeights w;
  w.dim = dim;
  w.hidden = 2 * dim;
  Rng rng(seed);
  auto gaussian = [&rng](Eigen::Index rows, Eigen::Index cols, double scale) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
    return m;
  };
  auto layer = [&]() {
    AttentionLayerWeights l;
    const double s = 1.0 / std::sqrt(static_cast<double>(dim));
    l.wq = gaussian(dim, dim, s);
    l.wk = gaussian(dim, dim, s);
    l.wv = gaussian(dim, dim, s);
    l.wo = gaussian(dim, dim, s);
    l.ff1 = gaussian(w.hidden, dim, s);
    l.ff_b1 = Eigen::VectorXd::Zero(w.hidden);
    l.ff2 = gaussian(dim, w.hidden, 1.0 / std::sqrt(static_cast<double>(w.hidden)));
    l.ff_b2 = Eigen::VectorXd::Zero(dim);
    return l;
  };
  for (int i = 0; i < n_layers; ++i) {
    w.self_layers.push_back(layer());
    w.cross_layers.push_back(layer());
  }
  return w;
}

TransformerWeights TransformerWeights::zero(int n_layers, int dim) {
  TransformerWeights w;
  w.dim = dim;
  w.hidden = 2 * dim;
  AttentionLayerWeights l;
  l.wq = Eigen::MatrixXd::Zero(dim, dim);
  l.wk = l.wq;
  l.wv = l.wq;
  l.wo = l.wq;
  l.ff1 = Eigen::MatrixXd::Zero(w.hidden, dim);
  l.ff_b1 = Eigen::VectorXd::Zero(w.hidden);
  l.ff2 = Eigen::MatrixXd::Zero(dim, w.hidden);
  l.ff_b2 = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < n_layers; ++i) {
    w.self_layers.push_back(l);
    w.cross_layers.push_back(l);
  }
  return w;
}

namespace {

Eigen::MatrixXd feed_forward(const Eigen::MatrixXd& x, const AttentionLayerWeights& l) {
  Eigen::MatrixXd h = (x * l.ff1.transpose()).rowwise() + l.ff_b1.transpose();
  h = h.cwiseMax(0.0);
  return (h * l.ff2.transpose()).rowwise() + l.ff_b2.transpose();
}

// One attention sublayer with residual add and feed-forward.
Eigen::MatrixXd sublayer(const Eigen::MatrixXd& x,
                         const std::vector<Eigen::Vector2d>& pos_x,
                         const Eigen::MatrixXd& kv,
                         const std::vector<Eigen::Vector2d>& pos_kv,
                         const AttentionLayerWeights& l, const RotaryEncoder& enc) {
  const Eigen::MatrixXd msg = linear_attention(x * l.wq.transpose(), kv * l.wk.transpose(),
                                               kv * l.wv.transpose(), pos_x, pos_kv, enc);
  Eigen::MatrixXd out = x + msg * l.wo.transpose();
  out += feed_forward(out, l);
  return out;
}

}  // namespace

std::pair<TokenSet, TokenSet> run_transformer(const TokenSet& t_tokens,
                                              const TokenSet& i_tokens,
                                              const TransformerWeights& w) {
  if (t_tokens.size() == 0 || i_tokens.size() == 0) {
    throw EmptyKeys("both token sets must be non-empty");
  }
  if (t_tokens.dim() != w.dim || i_tokens.dim() != w.dim) {
    throw DimMismatch("token dims do not match the weights");
  }
  const RotaryEncoder enc(w.dim);
  Eigen::MatrixXd t = t_tokens.descriptors;
  Eigen::MatrixXd im = i_tokens.descriptors;
  for (int layer = 0; layer < w.layers(); ++layer) {
    t = sublayer(t, t_tokens.positions, t, t_tokens.positions, w.self_layers[layer], enc);
    im = sublayer(im, i_tokens.positions, im, i_tokens.positions, w.self_layers[layer], enc);
    const Eigen::MatrixXd t_snap = t, i_snap = im;
    t = sublayer(t_snap, t_tokens.positions, i_snap, i_tokens.positions, w.cross_layers[layer], enc);
    im = sublayer(i_snap, i_tokens.positions, t_snap, t_tokens.positions, w.cross_layers[layer], enc);
  }
  auto renorm = [](Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double n = m.row(r).norm();
      if (n > 0.0) m.row(r) /= n;
    }
  };
  renorm(t);
  renorm(im);
  TokenSet t_out = t_tokens, i_out = i_tokens;
  t_out.descriptors = std::move(t);
  i_out.descriptors = std::move(im);
  return {std::move(t_out), std::move(i_out)};
}

namespace {

using detail::read_tensor;
using detail::write_tensor;

std::string tensor_name(const char* group, int layer, const char* part) {
  std::ostringstream s;
  s << group << "." << layer << "." << part;
  return s.str();
}

}  // namespace

void save_weights(const std::string& path, const TransformerWeights& w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path);
  out << "TMW1\n";
  out << "dim " << w.dim << " hidden " << w.hidden << " layers " << w.layers() << "\n";
  auto dump = [&](const char* group, const std::vector<AttentionLayerWeights>& ls) {
    for (int i = 0; i < static_cast<int>(ls.size()); ++i) {
      write_tensor(out, tensor_name(group, i, "wq"), ls[i].wq);
      write_tensor(out, tensor_name(group, i, "wk"), ls[i].wk);
      write_tensor(out, tensor_name(group, i, "wv"), ls[i].wv);
      write_tensor(out, tensor_name(group, i, "wo"), ls[i].wo);
      write_tensor(out, tensor_name(group, i, "ff1"), ls[i].ff1);
      write_tensor(out, tensor_name(group, i, "ff_b1"), ls[i].ff_b1);
      write_tensor(out, tensor_name(group, i, "ff2"), ls[i].ff2);
      write_tensor(out, tensor_name(group, i, "ff_b2"), ls[i].ff_b2);
    }
  };
  dump("self", w.self_layers);
  dump("cross", w.cross_layers);
  if (!out) throw IoFailure("failed writing " + path);
}

TransformerWeights load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "TMW1") {
    throw IoFailure(path + ": bad magic");
  }
  if (!std::getline(in, line)) throw IoFailure(path + ": missing header");
  std::istringstream hdr(line);
  std::string k1, k2, k3;
  int dim = 0, hidden = 0, layers = 0;
  hdr >> k1 >> dim >> k2 >> hidden >> k3 >> layers;
  if (k1 != "dim" || k2 != "hidden" || k3 != "layers" || dim <= 0 || layers < 0) {
    throw IoFailure(path + ": malformed header");
  }
  TransformerWeights w;
  w.dim = dim;
  w.hidden = hidden;
  auto slurp = [&](const char* group, std::vector<AttentionLayerWeights>& ls) {
    for (int i = 0; i < layers; ++i) {
      AttentionLayerWeights l;
      l.wq = read_tensor(in, tensor_name(group, i, "wq"));
      l.wk = read_tensor(in, tensor_name(group, i, "wk"));
      l.wv = read_tensor(in, tensor_name(group, i, "wv"));
      l.wo = read_tensor(in, tensor_name(group, i, "wo"));
      l.ff1 = read_tensor(in, tensor_name(group, i, "ff1"));
      l.ff_b1 = read_tensor(in, tensor_name(group, i, "ff_b1"));
      l.ff2 = read_tensor(in, tensor_name(group, i, "ff2"));
      l.ff_b2 = read_tensor(in, tensor_name(group, i, "ff_b2"));
      ls.push_back(std::move(l));
    }
  };
  slurp("self", w.self_layers);
  slurp("cross", w.cross_layers);
  return w;
}

}  // namespace tmatch
