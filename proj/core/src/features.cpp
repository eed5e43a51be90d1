#include "tmatch/features.hpp"

#include <Eigen/QR>
#include <cmath>

#include "tmatch/rng.hpp"

namespace tmatch {

Eigen::VectorXd orientation_histogram(const EdgeImage& e, const Eigen::Vector2i& center,
                                      int window, int subdiv) {
  if (window < 2) throw InvalidRange("window must be at least 2");
  if (subdiv < 1 || subdiv > 4) throw InvalidRange("subdiv must be between 1 and 4");
  const int half = window / 2;
  if (center.x() < -window || center.x() >= e.width + window ||
      center.y() < -window || center.y() >= e.height + window) {
    throw WindowOutOfRange("window center too far outside the image");
  }

  // Window content with clamp-to-image sampling.
  Eigen::MatrixXd win(window, window);
  for (int wy = 0; wy < window; ++wy) {
    for (int wx = 0; wx < window; ++wx) {
      const int x = std::clamp(center.x() - half + wx, 0, e.width - 1);
      const int y = std::clamp(center.y() - half + wy, 0, e.height - 1);
      win(wy, wx) = e.strength_at(x, y);
    }
  }

  const int bins = 8;
  Eigen::VectorXd hist = Eigen::VectorXd::Zero(bins * subdiv * subdiv);
  const double bin_width = 2.0 * M_PI / bins;
  const double cell_span = static_cast<double>(window) / subdiv;
  for (int wy = 0; wy < window; ++wy) {
    for (int wx = 0; wx < window; ++wx) {
      // Central differences clamped at the window boundary.
      const double gx = 0.5 * (win(wy, std::min(wx + 1, window - 1)) -
                               win(wy, std::max(wx - 1, 0)));
      const double gy = 0.5 * (win(std::min(wy + 1, window - 1), wx) -
                               win(std::max(wy - 1, 0), wx));
      const double mag = std::hypot(gx, gy);
      if (mag < 1e-12) continue;
      const double ang = std::atan2(gy, gx) + M_PI;  // [0, 2pi]
      // Soft assignment between the two nearest bins keeps the histogram
      // stable when orientations sit near a bin boundary.
      const double pos = ang / bin_width - 0.5;
      const int b0 = static_cast<int>(std::floor(pos));
      const double frac = pos - b0;
      const int bin_a = ((b0 % bins) + bins) % bins;
      const int bin_b = (bin_a + 1) % bins;

      if (subdiv == 1) {
        hist(bin_a) += mag * (1.0 - frac);
        hist(bin_b) += mag * frac;
        continue;
      }
      // Bilinear weights over the spatial subcells, so content sliding across
      // a subcell border changes the histogram smoothly.
      const double cxf = (wx + 0.5) / cell_span - 0.5;
      const double cyf = (wy + 0.5) / cell_span - 0.5;
      const int cx0 = static_cast<int>(std::floor(cxf));
      const int cy0 = static_cast<int>(std::floor(cyf));
      const double fx = cxf - cx0, fy = cyf - cy0;
      for (int dy = 0; dy < 2; ++dy) {
        const int cy = cy0 + dy;
        if (cy < 0 || cy >= subdiv) continue;
        const double wyw = dy == 0 ? 1.0 - fy : fy;
        for (int dx = 0; dx < 2; ++dx) {
          const int cx = cx0 + dx;
          if (cx < 0 || cx >= subdiv) continue;
          const double w = wyw * (dx == 0 ? 1.0 - fx : fx);
          if (w <= 0.0) continue;
          const int base = (cy * subdiv + cx) * bins;
          hist(base + bin_a) += w * mag * (1.0 - frac);
          hist(base + bin_b) += w * mag * frac;
        }
      }
    }
  }
  return hist;
}

namespace {

Descriptor lift_and_normalize(const Eigen::VectorXd& hist, const Eigen::MatrixXd& lift,
                              int dim) {
  if (hist.sum() <= 0.0) {
    Descriptor d = Descriptor::Zero(dim);
    d(0) = 1.0;
    return d;
  }
  Descriptor d = lift * hist;
  const double n = d.norm();
  if (n <= 0.0) {
    d.setZero();
    d(0) = 1.0;
    return d;
  }
  return d / n;
}

}  // namespace

Eigen::MatrixXd descriptor_lift(int dim, int raw, std::uint64_t seed) {
  Rng rng(derive_seed(seed, (static_cast<std::uint64_t>(dim) << 16) | static_cast<std::uint64_t>(raw)));
  const int n = std::max(dim, raw);
  Eigen::MatrixXd g(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) g(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  // Fix column signs so the factorization is unique.
  for (int c = 0; c < n; ++c) {
    if (q(c, c) < 0.0) q.col(c) = -q.col(c);
  }
  // Orthonormal columns embed (raw <= dim) or orthonormal rows project
  // (raw > dim); either way histogram geometry survives the lift.
  return q.topLeftCorner(dim, raw);
}

Descriptor describe_patch(const EdgeImage& e, const Eigen::Vector2i& center,
                          int window, int dim, int subdiv, std::uint64_t lift_seed) {
  if (dim % 4 != 0 || dim < 8) throw InvalidRange("descriptor dim must be >= 8 and divisible by 4");
  const Eigen::VectorXd hist = orientation_histogram(e, center, window, subdiv);
  const Eigen::MatrixXd lift = descriptor_lift(dim, static_cast<int>(hist.size()), lift_seed);
  return lift_and_normalize(hist, lift, dim);
}

DescriptorGrid describe_grid(const EdgeImage& e, int stride, int window, int dim,
                             int subdiv, std::uint64_t lift_seed,
                             const std::vector<std::uint8_t>* needed) {
  DescriptorGrid grid;
  grid.stride = stride;
  grid.dim = dim;
  grid.cells_x = (e.width + stride - 1) / stride;
  grid.cells_y = (e.height + stride - 1) / stride;
  const std::size_t n_cells = static_cast<std::size_t>(grid.cells_x) * grid.cells_y;
  if (needed && needed->size() != n_cells) {
    throw LengthMismatch("needed mask does not match the cell grid");
  }
  grid.d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_cells), dim);
  grid.computed.assign(n_cells, 0);

  // One lift for every cell; recomputing it per patch would dominate runtime.
  const int raw = 8 * subdiv * subdiv;
  const Eigen::MatrixXd lift = descriptor_lift(dim, raw, lift_seed);
  const int half = stride / 2;
  for (int gy = 0; gy < grid.cells_y; ++gy) {
    for (int gx = 0; gx < grid.cells_x; ++gx) {
      const std::size_t i = static_cast<std::size_t>(gy) * grid.cells_x + gx;
      if (needed && !(*needed)[i]) continue;
      const Eigen::Vector2i center(gx * stride + half, gy * stride + half);
      const Eigen::VectorXd hist = orientation_histogram(e, center, window, subdiv);
      grid.d.row(static_cast<Eigen::Index>(i)) =
          lift_and_normalize(hist, lift, dim).transpose();
      grid.computed[i] = 1;
    }
  }
  return grid;
}

OrientationField::OrientationField(const EdgeImage& e) : width_(e.width), height_(e.height) {
  const std::size_t n = static_cast<std::size_t>(width_ + 1) * (height_ + 1);
  for (auto& plane : integral_) plane.assign(n, 0.0);

  const int bins = 8;
  const double bin_width = 2.0 * M_PI / bins;
  const std::size_t row = width_ + 1;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, width_ - 1);
      const int ym = std::max(y - 1, 0), yp = std::min(y + 1, height_ - 1);
      const double gx = 0.5 * (e.strength_at(xp, y) - e.strength_at(xm, y));
      const double gy = 0.5 * (e.strength_at(x, yp) - e.strength_at(x, ym));
      const double mag = std::hypot(gx, gy);
      double contrib[8] = {0, 0, 0, 0, 0, 0, 0, 0};
      if (mag >= 1e-12) {
        const double ang = std::atan2(gy, gx) + M_PI;
        const double pos = ang / bin_width - 0.5;
        const int b0 = static_cast<int>(std::floor(pos));
        const double frac = pos - b0;
        const int bin_a = ((b0 % bins) + bins) % bins;
        contrib[bin_a] += mag * (1.0 - frac);
        contrib[(bin_a + 1) % bins] += mag * frac;
      }
      const std::size_t idx = static_cast<std::size_t>(y + 1) * row + (x + 1);
      for (int b = 0; b < bins; ++b) {
        integral_[b][idx] = contrib[b] + integral_[b][idx - 1] +
                            integral_[b][idx - row] - integral_[b][idx - row - 1];
      }
    }
  }
}

double OrientationField::box(int bin, int x0, int y0, int x1, int y1) const {
  x0 = std::clamp(x0, 0, width_);
  y0 = std::clamp(y0, 0, height_);
  x1 = std::clamp(x1, 0, width_);
  y1 = std::clamp(y1, 0, height_);
  if (x0 >= x1 || y0 >= y1) return 0.0;
  const std::size_t row = width_ + 1;
  const auto& p = integral_[bin];
  return p[static_cast<std::size_t>(y1) * row + x1] -
         p[static_cast<std::size_t>(y0) * row + x1] -
         p[static_cast<std::size_t>(y1) * row + x0] +
         p[static_cast<std::size_t>(y0) * row + x0];
}

Eigen::VectorXd OrientationField::box_histogram(int x0, int y0, int x1, int y1) const {
  Eigen::VectorXd hist = Eigen::VectorXd::Zero(32);
  const int mx = (x0 + x1) / 2, my = (y0 + y1) / 2;
  const int qx0[4] = {x0, mx, x0, mx};
  const int qy0[4] = {y0, y0, my, my};
  const int qx1[4] = {mx, x1, mx, x1};
  const int qy1[4] = {my, my, y1, y1};
  for (int q = 0; q < 4; ++q) {
    for (int b = 0; b < 8; ++b) {
      hist(q * 8 + b) = box(b, qx0[q], qy0[q], qx1[q], qy1[q]);
    }
  }
  return hist;
}

Descriptor context_descriptor(const OrientationField& field, const Eigen::Vector2i& center,
                              std::span<const int> windows,
                              std::span<const double> scale_weights,
                              const Eigen::MatrixXd& lift) {
  if (scale_weights.size() != windows.size()) {
    throw LengthMismatch("one scale weight per context window");
  }
  const int per = 32;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(per * static_cast<int>(windows.size()));
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const int half = windows[k] / 2;
    Eigen::VectorXd hk = field.box_histogram(center.x() - half, center.y() - half,
                                             center.x() - half + windows[k],
                                             center.y() - half + windows[k]);
    const double n = hk.norm();
    if (n > 0.0) hk *= scale_weights[k] / n;
    h.segment(static_cast<Eigen::Index>(k) * per, per) = hk;
  }
  return lift_and_normalize(h, lift, static_cast<int>(lift.rows()));
}

DescriptorGrid context_grid(const EdgeImage& e, int stride, std::span<const int> windows,
                            std::span<const double> scale_weights, int dim,
                            std::uint64_t lift_seed,
                            const std::vector<std::uint8_t>* needed) {
  if (windows.empty()) throw InvalidRange("need at least one context window");
  DescriptorGrid grid;
  grid.stride = stride;
  grid.dim = dim;
  grid.cells_x = (e.width + stride - 1) / stride;
  grid.cells_y = (e.height + stride - 1) / stride;
  const std::size_t n_cells = static_cast<std::size_t>(grid.cells_x) * grid.cells_y;
  if (needed && needed->size() != n_cells) {
    throw LengthMismatch("needed mask does not match the cell grid");
  }
  grid.d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_cells), dim);
  grid.computed.assign(n_cells, 0);

  const OrientationField field(e);
  const int raw = 32 * static_cast<int>(windows.size());
  const Eigen::MatrixXd lift = descriptor_lift(dim, raw, lift_seed);
  const int half = stride / 2;
  for (int gy = 0; gy < grid.cells_y; ++gy) {
    for (int gx = 0; gx < grid.cells_x; ++gx) {
      const std::size_t i = static_cast<std::size_t>(gy) * grid.cells_x + gx;
      if (needed && !(*needed)[i]) continue;
      const Eigen::Vector2i center(gx * stride + half, gy * stride + half);
      grid.d.row(static_cast<Eigen::Index>(i)) =
          context_descriptor(field, center, windows, scale_weights, lift).transpose();
      grid.computed[i] = 1;
    }
  }
  return grid;
}

}  // namespace tmatch
