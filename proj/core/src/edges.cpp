#include "tmatch/edges.hpp"

#include <cmath>
#include <deque>

namespace tmatch {

EdgeImage detect_edges(const GrayImage& img, const EdgeConfig& cfg) {
  if (img.width < 3 || img.height < 3) {
    throw ImageTooSmall("detect_edges needs at least a 3x3 image");
  }
  const int w = img.width, h = img.height;
  std::vector<double> gx(img.data.size(), 0.0), gy(img.data.size(), 0.0);
  std::vector<double> mag(img.data.size(), 0.0);
  double max_mag = 0.0;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      gx[i] = 0.5 * (img.at(x + 1, y) - img.at(x - 1, y));
      gy[i] = 0.5 * (img.at(x, y + 1) - img.at(x, y - 1));
      mag[i] = std::hypot(gx[i], gy[i]);
      max_mag = std::max(max_mag, mag[i]);
    }
  }

  EdgeImage out(w, h);
  if (max_mag <= 0.0) return out;  // constant image
  for (std::size_t i = 0; i < mag.size(); ++i) out.strength[i] = mag[i] / max_mag;

  // Non-maximum suppression along the quantized gradient direction.
  // Sector k covers angles around k*45 degrees; ties survive so plateau
  // edges of even width keep both pixels.
  static const int dx4[4] = {1, 1, 0, -1};
  static const int dy4[4] = {0, 1, 1, 1};
  std::vector<std::uint8_t> keep(img.data.size(), 0);
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (mag[i] <= 0.0) continue;
      double ang = std::atan2(gy[i], gx[i]);
      if (ang < 0.0) ang += M_PI;
      int sector = static_cast<int>(std::lround(ang / (M_PI / 4.0))) & 3;
      const int nx1 = x + dx4[sector], ny1 = y + dy4[sector];
      const int nx2 = x - dx4[sector], ny2 = y - dy4[sector];
      const double m1 = img.in_bounds(nx1, ny1) ? mag[static_cast<std::size_t>(ny1) * w + nx1] : 0.0;
      const double m2 = img.in_bounds(nx2, ny2) ? mag[static_cast<std::size_t>(ny2) * w + nx2] : 0.0;
      if (mag[i] >= m1 && mag[i] >= m2) keep[i] = 1;
    }
  }

  // Hysteresis: strong seeds, weak pixels join via 8-connectivity.
  std::deque<std::pair<int, int>> frontier;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (keep[i] && out.strength[i] >= cfg.high) {
        out.binary[i] = 1;
        frontier.emplace_back(x, y);
      }
    }
  }
  while (!frontier.empty()) {
    const auto [x, y] = frontier.front();
    frontier.pop_front();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (!out.in_bounds(nx, ny)) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (!out.binary[j] && keep[j] && out.strength[j] >= cfg.low) {
          out.binary[j] = 1;
          frontier.emplace_back(nx, ny);
        }
      }
    }
  }
  return out;
}

EdgeImage mask_to_edges(const MaskImage& mask) {
  bool any = false;
  for (auto v : mask.data) {
    if (v) { any = true; break; }
  }
  if (!any) throw EmptyMask("mask has no foreground pixels");

  EdgeImage out(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      const bool boundary =
          !mask.in_bounds(x - 1, y) || !mask.at(x - 1, y) ||
          !mask.in_bounds(x + 1, y) || !mask.at(x + 1, y) ||
          !mask.in_bounds(x, y - 1) || !mask.at(x, y - 1) ||
          !mask.in_bounds(x, y + 1) || !mask.at(x, y + 1);
      if (boundary) {
        const std::size_t i = static_cast<std::size_t>(y) * mask.width + x;
        out.strength[i] = 1.0;
        out.binary[i] = 1;
      }
    }
  }
  return out;
}

}  // namespace tmatch
