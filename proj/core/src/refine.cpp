#include "tmatch/refine.hpp"

#include <cmath>
#include <fstream>

#include "tensor_io.hpp"
#include "tmatch/rng.hpp"

namespace tmatch {

WarpedImage warp_image(const EdgeImage& img, const Homography& h,
                       double binary_low, int out_width, int out_height) {
  const Homography hinv = invert(h);
  const int w = out_width > 0 ? out_width : img.width;
  const int hh = out_height > 0 ? out_height : img.height;

  WarpedImage out;
  out.h = h;
  out.image = EdgeImage(w, hh);
  for (int y = 0; y < hh; ++y) {
    for (int x = 0; x < w; ++x) {
      Eigen::Vector2d src;
      try {
        src = apply_homography(hinv, {static_cast<double>(x), static_cast<double>(y)});
      } catch (const DegeneratePoint&) {
        continue;  // pixel maps to infinity, leave it empty
      }
      const double fx = src.x(), fy = src.y();
      const int x0 = static_cast<int>(std::floor(fx));
      const int y0 = static_cast<int>(std::floor(fy));
      if (x0 < -1 || x0 >= img.width || y0 < -1 || y0 >= img.height) continue;
      const double ax = fx - x0, ay = fy - y0;
      auto sample = [&](int sx, int sy) {
        return img.in_bounds(sx, sy) ? img.strength_at(sx, sy) : 0.0;
      };
      const double val = (1 - ax) * (1 - ay) * sample(x0, y0) +
                         ax * (1 - ay) * sample(x0 + 1, y0) +
                         (1 - ax) * ay * sample(x0, y0 + 1) +
                         ax * ay * sample(x0 + 1, y0 + 1);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      out.image.strength[i] = val;
      out.image.binary[i] = val >= binary_low ? 1 : 0;
    }
  }
  return out;
}

FusionWeights FusionWeights::seeded(int coarse_dim, int fine_dim, std::uint64_t seed) {
  const int in = coarse_dim + fine_dim;
  const int hidden = 2 * fine_dim;
  Rng rng(seed);
  FusionWeights w;
  w.w1.resize(hidden, in);
  for (int r = 0; r < hidden; ++r)
    for (int c = 0; c < in; ++c) w.w1(r, c) = rng.normal() / std::sqrt(static_cast<double>(in));
  w.b1 = Eigen::VectorXd::Zero(hidden);
  w.w2.resize(fine_dim, hidden);
  for (int r = 0; r < fine_dim; ++r)
    for (int c = 0; c < hidden; ++c) w.w2(r, c) = rng.normal() / std::sqrt(static_cast<double>(hidden));
  w.b2 = Eigen::VectorXd::Zero(fine_dim);
  return w;
}

FusionWeights FusionWeights::identity_fine(int coarse_dim, int fine_dim) {
  const int in = coarse_dim + fine_dim;
  const int hidden = 2 * fine_dim;
  FusionWeights w;
  w.w1 = Eigen::MatrixXd::Zero(hidden, in);
  w.w1.block(0, coarse_dim, fine_dim, fine_dim) = Eigen::MatrixXd::Identity(fine_dim, fine_dim);
  w.w1.block(fine_dim, coarse_dim, fine_dim, fine_dim) = -Eigen::MatrixXd::Identity(fine_dim, fine_dim);
  w.b1 = Eigen::VectorXd::Zero(hidden);
  w.w2 = Eigen::MatrixXd::Zero(fine_dim, hidden);
  w.w2.leftCols(fine_dim) = Eigen::MatrixXd::Identity(fine_dim, fine_dim);
  w.w2.rightCols(fine_dim) = -Eigen::MatrixXd::Identity(fine_dim, fine_dim);
  w.b2 = Eigen::VectorXd::Zero(fine_dim);
  return w;
}

Eigen::VectorXd fuse_apply(const FusionWeights& w, const Eigen::VectorXd& coarse,
                           const Eigen::VectorXd& fine) {
  if (coarse.size() + fine.size() != w.w1.cols()) {
    throw DimMismatch("fusion input dims do not match the weights");
  }
  Eigen::VectorXd z(coarse.size() + fine.size());
  z << coarse, fine;
  const Eigen::VectorXd h = (w.w1 * z + w.b1).cwiseMax(0.0);
  return w.w2 * h + w.b2;
}

DescriptorGrid fuse_features(const TokenSet& coarse_tr, const DescriptorGrid& fine_map,
                             const FusionWeights& w, bool renormalize) {
  if (coarse_tr.dim() != w.coarse_dim() || fine_map.dim != w.fine_dim()) {
    throw DimMismatch("fusion weights do not match the feature dims");
  }
  DescriptorGrid out = fine_map;
  // Each stride-8 coarse cell covers a 4x4 block of stride-2 cells.
  const int ratio = 8 / fine_map.stride;
  for (int t = 0; t < coarse_tr.size(); ++t) {
    const int gx0 = static_cast<int>(coarse_tr.positions[t].x()) * ratio;
    const int gy0 = static_cast<int>(coarse_tr.positions[t].y()) * ratio;
    const Eigen::VectorXd coarse = coarse_tr.descriptors.row(t).transpose();
    for (int dy = 0; dy < ratio; ++dy) {
      for (int dx = 0; dx < ratio; ++dx) {
        const int gx = gx0 + dx, gy = gy0 + dy;
        if (!out.in_bounds(gx, gy)) continue;
        const int idx = out.index(gx, gy);
        Eigen::VectorXd fused =
            fuse_apply(w, coarse, fine_map.d.row(idx).transpose());
        if (renormalize) {
          const double n = fused.norm();
          if (n > 0.0) fused /= n;
        }
        out.d.row(idx) = fused.transpose();
        out.computed[idx] = 1;
      }
    }
  }
  return out;
}

HeatmapMoments heatmap_moments(const Eigen::MatrixXd& heatmap, int lo) {
  HeatmapMoments mm;
  mm.mean.setZero();
  for (Eigen::Index r = 0; r < heatmap.rows(); ++r) {
    for (Eigen::Index c = 0; c < heatmap.cols(); ++c) {
      mm.mean += heatmap(r, c) * Eigen::Vector2d(lo + static_cast<double>(c),
                                                 lo + static_cast<double>(r));
    }
  }
  for (Eigen::Index r = 0; r < heatmap.rows(); ++r) {
    for (Eigen::Index c = 0; c < heatmap.cols(); ++c) {
      const Eigen::Vector2d o(lo + static_cast<double>(c), lo + static_cast<double>(r));
      mm.variance += heatmap(r, c) * (o - mm.mean).squaredNorm();
    }
  }
  return mm;
}

Eigen::MatrixXd softmax2d(const Eigen::MatrixXd& sims) {
  const double m = sims.maxCoeff();
  Eigen::MatrixXd e = (sims.array() - m).exp();
  return e / e.sum();
}

FineMatch subpixel_from_windows(const Eigen::MatrixXd& t_window,
                                const Eigen::MatrixXd& i_window, int w,
                                double temperature, const Eigen::Vector2d& i_px,
                                int stride, double center_prior) {
  if (t_window.rows() != w * w || i_window.rows() != w * w ||
      t_window.cols() != i_window.cols()) {
    throw DimMismatch("windows must hold w*w tokens of equal dim");
  }
  const int lo = -((w - 1) / 2);
  const int center_idx = (-lo) * w + (-lo);
  const Eigen::VectorXd center = t_window.row(center_idx).transpose();

  Eigen::MatrixXd sims(w, w);
  for (int r = 0; r < w; ++r)
    for (int c = 0; c < w; ++c) {
      const double o2 = static_cast<double>((lo + c) * (lo + c) + (lo + r) * (lo + r));
      sims(r, c) = i_window.row(r * w + c).dot(center) / temperature - center_prior * o2;
    }

  const Eigen::MatrixXd heat = softmax2d(sims);
  const HeatmapMoments mm = heatmap_moments(heat, lo);

  FineMatch fm;
  fm.i_px = i_px;
  fm.offset = mm.mean;
  fm.variance = mm.variance;
  fm.j_warped_px = i_px + mm.mean * static_cast<double>(stride);
  return fm;
}

std::optional<Eigen::MatrixXd> crop_window(const DescriptorGrid& g,
                                           const Eigen::Vector2i& i_px, int w) {
  const int cx = i_px.x() / g.stride;
  const int cy = i_px.y() / g.stride;
  const int lo = -((w - 1) / 2);
  if (cx + lo < 0 || cy + lo < 0 || cx + lo + w > g.cells_x || cy + lo + w > g.cells_y) {
    return std::nullopt;  // border skip
  }
  Eigen::MatrixXd win(w * w, g.dim);
  for (int r = 0; r < w; ++r)
    for (int c = 0; c < w; ++c)
      win.row(r * w + c) = g.d.row(g.index(cx + lo + c, cy + lo + r));
  return win;
}

std::optional<FineMatch> subpixel_match(const DescriptorGrid& f_t,
                                        const DescriptorGrid& f_iw,
                                        const Eigen::Vector2i& i_px, int w,
                                        double temperature, double center_prior) {
  if (f_t.stride != f_iw.stride || f_t.dim != f_iw.dim) {
    throw DimMismatch("template and image grids disagree");
  }
  const auto t_win = crop_window(f_t, i_px, w);
  const auto i_win = crop_window(f_iw, i_px, w);
  if (!t_win || !i_win) return std::nullopt;
  return subpixel_from_windows(*t_win, *i_win, w, temperature,
                               i_px.cast<double>(), f_t.stride, center_prior);
}

WeightedMatchSet finalize_matches(std::span<const FineMatch> fine, const Homography& h_align) {
  const Homography back = invert(h_align);
  std::vector<PointMatch> out;
  out.reserve(fine.size());
  for (const auto& fm : fine) {
    out.push_back({fm.i_px, apply_homography(back, fm.j_warped_px)});
  }
  return WeightedMatchSet::uniform(std::move(out));
}

Homography estimate_final_homography(const WeightedMatchSet& ms) {
  return dlt_weighted(ms);
}

void save_fusion_weights(const std::string& path, const FusionWeights& w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path);
  out << "TMF1\n";
  detail::write_tensor(out, "w1", w.w1);
  detail::write_tensor(out, "b1", w.b1);
  detail::write_tensor(out, "w2", w.w2);
  detail::write_tensor(out, "b2", w.b2);
  if (!out) throw IoFailure("failed writing " + path);
}

FusionWeights load_fusion_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "TMF1") throw IoFailure(path + ": bad magic");
  FusionWeights w;
  w.w1 = detail::read_tensor(in, "w1");
  w.b1 = detail::read_tensor(in, "b1");
  w.w2 = detail::read_tensor(in, "w2");
  w.b2 = detail::read_tensor(in, "b2");
  return w;
}

}  // namespace tmatch
