#include "tmatch/selfcheck.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <ostream>

#include "tmatch/consistency.hpp"
#include "tmatch/geometry.hpp"
#include "tmatch/refine.hpp"
#include "tmatch/rng.hpp"

namespace tmatch {

namespace oracle {

Eigen::MatrixXd linear_attention_bruteforce(const Eigen::MatrixXd& q,
                                            const Eigen::MatrixXd& k,
                                            const Eigen::MatrixXd& v,
                                            const std::vector<Eigen::Vector2d>& positions_q,
                                            const std::vector<Eigen::Vector2d>& positions_kv,
                                            const RotaryEncoder& enc) {
  const Eigen::MatrixXd phi_q = kernel_feature(q);
  const Eigen::MatrixXd phi_k = kernel_feature(k);
  Eigen::MatrixXd out(q.rows(), q.cols());
  for (Eigen::Index m = 0; m < q.rows(); ++m) {
    const Eigen::VectorXd qrot = rope_apply(enc, positions_q[m], phi_q.row(m).transpose());
    Eigen::VectorXd num = Eigen::VectorXd::Zero(q.cols());
    double den = 0.0;
    for (Eigen::Index n = 0; n < k.rows(); ++n) {
      const Eigen::VectorXd krot = rope_apply(enc, positions_kv[n], phi_k.row(n).transpose());
      const Eigen::VectorXd vrot = rope_apply(enc, positions_kv[n], v.row(n).transpose());
      num += qrot.dot(krot) * vrot;
      den += phi_q.row(m).dot(phi_k.row(n));
    }
    out.row(m) = (num / den).transpose();
  }
  return out;
}

Eigen::MatrixXd sinkhorn_textbook(const Eigen::MatrixXd& scores, int iters,
                                  double dustbin_score) {
  const Eigen::Index m = scores.rows(), n = scores.cols();
  Eigen::MatrixXd kmat(m + 1, n + 1);
  for (Eigen::Index r = 0; r <= m; ++r)
    for (Eigen::Index c = 0; c <= n; ++c)
      kmat(r, c) = std::exp(r < m && c < n ? scores(r, c) : dustbin_score);

  Eigen::VectorXd mu(m + 1), nu(n + 1);
  mu.head(m).setConstant(1.0 / static_cast<double>(m));
  mu(m) = static_cast<double>(n) / static_cast<double>(m);
  nu.head(n).setConstant(1.0 / static_cast<double>(m));
  nu(n) = 1.0;

  Eigen::VectorXd a = Eigen::VectorXd::Ones(m + 1);
  Eigen::VectorXd b = Eigen::VectorXd::Ones(n + 1);
  for (int it = 0; it < iters; ++it) {
    a = mu.array() / (kmat * b).array();
    b = nu.array() / (kmat.transpose() * a).array();
  }
  return a.asDiagonal() * kmat * b.asDiagonal();
}

Eigen::VectorXd dominant_eigenvector_dense(const Eigen::MatrixXd& sym) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  Eigen::Index best = 0;
  es.eigenvalues().cwiseAbs().maxCoeff(&best);
  return es.eigenvectors().col(best);
}

Eigen::MatrixXd softmax_attention_rows(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                       const Eigen::MatrixXd& v) {
  Eigen::MatrixXd out(q.rows(), v.cols());
  for (Eigen::Index r = 0; r < q.rows(); ++r) {
    std::vector<double> scores(k.rows());
    double mx = -1e300;
    for (Eigen::Index n = 0; n < k.rows(); ++n) {
      scores[n] = q.row(r).dot(k.row(n));
      mx = std::max(mx, scores[n]);
    }
    double z = 0.0;
    for (double& s : scores) {
      s = std::exp(s - mx);
      z += s;
    }
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(v.cols());
    for (Eigen::Index n = 0; n < k.rows(); ++n) acc += (scores[n] / z) * v.row(n);
    out.row(r) = acc;
  }
  return out;
}

}  // namespace oracle

namespace {

bool report(std::ostream& out, const char* name, bool pass) {
  out << (pass ? "[PASS] " : "[FAIL] ") << name << "\n";
  return pass;
}

}  // namespace

bool selftest(std::ostream& out) {
  bool all = true;
  Rng rng(20240527);

  {  // rotary identity over random positions and features
    const RotaryEncoder enc(64);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
      Eigen::Vector2d pm(rng.uniform(-80, 80), rng.uniform(-80, 80));
      Eigen::Vector2d pn(rng.uniform(-80, 80), rng.uniform(-80, 80));
      Eigen::VectorXd f(64), g(64);
      for (int i = 0; i < 64; ++i) {
        f(i) = rng.normal();
        g(i) = rng.normal();
      }
      const double lhs = rope_apply(enc, pm, f).dot(rope_apply(enc, pn, g));
      const double rhs = f.dot(rope_apply(enc, pn - pm, g));
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    all &= report(out, "rotary relative-position identity", worst < 1e-9);
  }

  {  // linear attention equals the explicit double sum
    const RotaryEncoder enc(16);
    double worst = 0.0;
    for (int t = 0; t < 25; ++t) {
      const int n = 2 + static_cast<int>(rng.next_u64() % 30);
      Eigen::MatrixXd q(n, 16), k(n, 16), v(n, 16);
      std::vector<Eigen::Vector2d> pos;
      for (int i = 0; i < n; ++i) {
        pos.emplace_back(rng.uniform(-20, 20), rng.uniform(-20, 20));
        for (int c = 0; c < 16; ++c) {
          q(i, c) = rng.normal();
          k(i, c) = rng.normal();
          v(i, c) = rng.normal();
        }
      }
      const Eigen::MatrixXd fast = linear_attention(q, k, v, pos, pos, enc);
      const Eigen::MatrixXd slow = oracle::linear_attention_bruteforce(q, k, v, pos, pos, enc);
      worst = std::max(worst, (fast - slow).cwiseAbs().maxCoeff());
    }
    all &= report(out, "linear attention vs double-sum oracle", worst < 1e-9);
  }

  {  // sinkhorn against the probability-space reference
    Eigen::MatrixXd s(3, 4);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) s(r, c) = rng.normal();
    const AssignmentMatrix a = sinkhorn({s, 1.0}, 100, 1.0);
    const Eigen::MatrixXd plan = oracle::sinkhorn_textbook(s, 100, 1.0);
    const double diff = (a.c / 3.0 - plan.topLeftCorner(3, 4)).cwiseAbs().maxCoeff();
    all &= report(out, "sinkhorn vs textbook oracle", diff < 1e-8);
  }

  {  // weighted DLT recovery on exact correspondences
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const Homography h = sample_gt_homography(rng.next_u64(), {});
      std::vector<PointMatch> pm;
      for (int i = 0; i < 8; ++i) {
        Eigen::Vector2d p(rng.uniform(0, 640), rng.uniform(0, 480));
        pm.push_back({p, apply_homography(h, p)});
      }
      const Homography est = dlt_weighted(WeightedMatchSet::uniform(std::move(pm)));
      worst = std::max(worst, canonical_distance(est, h));
    }
    all &= report(out, "weighted DLT exact recovery", worst < 1e-8);
  }

  {  // power iteration against the dense eigensolver
    double worst_cos = 1.0;
    for (int t = 0; t < 10; ++t) {
      Eigen::MatrixXd e(6, 6);
      for (int r = 0; r < 6; ++r)
        for (int c = r; c < 6; ++c) {
          const double v = rng.uniform01();
          e(r, c) = v;
          e(c, r) = v;
        }
      e.diagonal().setZero();
      const Eigen::VectorXd p = leading_eigenvector(e, 200, 1e-14);
      Eigen::VectorXd d = oracle::dominant_eigenvector_dense(e).cwiseAbs();
      d /= d.maxCoeff();
      const double cos = p.dot(d) / (p.norm() * d.norm());
      worst_cos = std::min(worst_cos, cos);
    }
    all &= report(out, "power iteration vs dense eigensolver", worst_cos > 1.0 - 1e-8);
  }

  {  // heatmap moments on a hand-built two-spike map
    Eigen::MatrixXd heat = Eigen::MatrixXd::Zero(3, 3);
    heat(1, 0) = 0.5;
    heat(1, 2) = 0.5;
    const HeatmapMoments mm = heatmap_moments(heat, -1);
    all &= report(out, "sub-pixel heatmap moments",
                  mm.mean.norm() < 1e-12 && std::abs(mm.variance - 1.0) < 1e-12);
  }

  {  // clipped-linear area under the curve
    const std::vector<double> errs = {0.0, 1.0, 2.0, 5.0};
    const double got = auc(errs, 2.0);
    all &= report(out, "cumulative error curve area", std::abs(got - 37.5) < 1e-12);
  }

  return all;
}

}  // namespace tmatch
