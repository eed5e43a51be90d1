#include "tmatch/matching.hpp"

#include <cmath>

namespace tmatch {

ScoreMatrix score_matrix(const TokenSet& ft, const TokenSet& fi, double temperature) {
  if (ft.size() == 0 || fi.size() == 0) throw EmptyInput("empty token set");
  if (ft.dim() != fi.dim()) throw DimMismatch("descriptor dims differ");
  if (!(temperature > 0.0)) throw InvalidRange("temperature must be positive");
  ScoreMatrix sm;
  sm.temperature = temperature;
  sm.s = ft.descriptors * fi.descriptors.transpose() / temperature;
  return sm;
}

AssignmentMatrix sinkhorn(const ScoreMatrix& sm, int iters, double dustbin_score) {
  if (iters < 1) throw InvalidRange("need at least one iteration");
  const Eigen::Index m = sm.s.rows(), n = sm.s.cols();

  Eigen::ArrayXXd z(m + 1, n + 1);
  z.topLeftCorner(m, n) = sm.s.array();
  z.row(m).setConstant(dustbin_score);
  z.col(n).setConstant(dustbin_score);

  // Marginals in units of 1/|T|: each real row and column holds 1/m, the
  // dustbin row absorbs up to n/m, the dustbin column up to 1.
  const double log_m = std::log(static_cast<double>(m));
  Eigen::ArrayXd log_mu(m + 1), log_nu(n + 1);
  log_mu.head(m).setConstant(-log_m);
  log_mu(m) = std::log(static_cast<double>(n)) - log_m;
  log_nu.head(n).setConstant(-log_m);
  log_nu(n) = 0.0;

  // Log-domain scaling updates, evaluated matrix-wide so the exp calls
  // vectorize. `buf` holds z shifted by the current duals.
  Eigen::ArrayXd u = Eigen::ArrayXd::Zero(m + 1);
  Eigen::ArrayXd v = Eigen::ArrayXd::Zero(n + 1);
  Eigen::ArrayXXd buf(m + 1, n + 1);
  for (int it = 0; it < iters; ++it) {
    buf = z.rowwise() + v.transpose();
    Eigen::ArrayXd row_max = buf.rowwise().maxCoeff();
    buf.colwise() -= row_max;
    u = log_mu - row_max - buf.exp().rowwise().sum().log();

    buf = z.colwise() + u;
    Eigen::ArrayXd col_max = buf.colwise().maxCoeff().transpose();
    buf.rowwise() -= col_max.transpose();
    v = log_nu - col_max - buf.exp().colwise().sum().transpose().log();
  }

  Eigen::MatrixXd plan = ((z.colwise() + u).rowwise() + v.transpose()).exp().matrix();
  AssignmentMatrix out;
  out.method = MatchMethod::OptimalTransport;
  const double scale = static_cast<double>(m);
  out.c = plan.topLeftCorner(m, n) * scale;
  out.row_dustbin = plan.col(n).head(m) * scale;
  out.col_dustbin = plan.row(m).head(n).transpose() * scale;
  return out;
}

AssignmentMatrix dual_softmax(const ScoreMatrix& sm) {
  const Eigen::Index m = sm.s.rows(), n = sm.s.cols();
  Eigen::MatrixXd row_sm(m, n), col_sm(m, n);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double mx = sm.s.row(r).maxCoeff();
    Eigen::ArrayXd e = (sm.s.row(r).array() - mx).exp();
    row_sm.row(r) = (e / e.sum()).matrix().transpose();
  }
  for (Eigen::Index c = 0; c < n; ++c) {
    const double mx = sm.s.col(c).maxCoeff();
    Eigen::ArrayXd e = (sm.s.col(c).array() - mx).exp();
    col_sm.col(c) = (e / e.sum()).matrix();
  }
  AssignmentMatrix out;
  out.method = MatchMethod::DualSoftmax;
  out.c = row_sm.cwiseProduct(col_sm);
  return out;
}

CoarseMatchSet mnn_filter(const AssignmentMatrix& a, double theta_c) {
  if (!(theta_c > 0.0) || !(theta_c < 1.0)) {
    throw InvalidRange("theta_c must lie in (0, 1)");
  }
  const Eigen::Index m = a.c.rows(), n = a.c.cols();
  std::vector<Eigen::Index> row_arg(m), col_arg(n);
  for (Eigen::Index r = 0; r < m; ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < n; ++c) {
      if (a.c(r, c) > a.c(r, best)) best = c;  // first max wins ties
    }
    row_arg[r] = best;
  }
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index best = 0;
    for (Eigen::Index r = 1; r < m; ++r) {
      if (a.c(r, c) > a.c(best, c)) best = r;
    }
    col_arg[c] = best;
  }
  CoarseMatchSet out;
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index c = row_arg[r];
    if (col_arg[c] == r && a.c(r, c) >= theta_c) {
      out.pairs.push_back({static_cast<int>(r), static_cast<int>(c), a.c(r, c)});
    }
  }
  return out;
}

}  // namespace tmatch
