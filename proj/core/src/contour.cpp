#include "tmatch/contour.hpp"

#include <cmath>
#include <deque>

namespace tmatch {

MaskImage center_mask(const MaskImage& mask, int width, int height) {
  double cx = 0.0, cy = 0.0;
  long count = 0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y)) {
        cx += x;
        cy += y;
        ++count;
      }
    }
  }
  if (count == 0) throw EmptyMask("mask has no foreground pixels");
  const int dx = static_cast<int>(std::lround(width / 2.0 - cx / count));
  const int dy = static_cast<int>(std::lround(height / 2.0 - cy / count));

  MaskImage out(width, height);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      const int nx = x + dx, ny = y + dy;
      if (out.in_bounds(nx, ny)) out.at(nx, ny) = 1;
    }
  }
  return out;
}

namespace {

// Largest 8-connected component; everything else cleared.
MaskImage largest_component(const MaskImage& mask) {
  MaskImage out(mask.width, mask.height);
  std::vector<int> label(mask.data.size(), 0);
  int next = 0;
  int best_label = 0;
  long best_size = 0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * mask.width + x;
      if (!mask.data[i] || label[i]) continue;
      const int id = ++next;
      long size = 0;
      std::deque<std::pair<int, int>> q{{x, y}};
      label[i] = id;
      while (!q.empty()) {
        const auto [px, py] = q.front();
        q.pop_front();
        ++size;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = px + dx, ny = py + dy;
            if (!mask.in_bounds(nx, ny)) continue;
            const std::size_t ni = static_cast<std::size_t>(ny) * mask.width + nx;
            if (mask.data[ni] && !label[ni]) {
              label[ni] = id;
              q.emplace_back(nx, ny);
            }
          }
        }
      }
      if (size > best_size) {
        best_size = size;
        best_label = id;
      }
    }
  }
  if (best_label == 0) throw EmptyMask("mask has no foreground pixels");
  for (std::size_t i = 0; i < label.size(); ++i) out.data[i] = label[i] == best_label ? 1 : 0;
  return out;
}

}  // namespace

std::vector<Eigen::Vector2d> trace_contour(const MaskImage& mask) {
  const MaskImage comp = largest_component(mask);

  // Topmost-leftmost foreground pixel starts the trace.
  int sx = -1, sy = -1;
  for (int y = 0; y < comp.height && sx < 0; ++y) {
    for (int x = 0; x < comp.width; ++x) {
      if (comp.at(x, y)) {
        sx = x;
        sy = y;
        break;
      }
    }
  }

  auto fg = [&comp](int x, int y) { return comp.in_bounds(x, y) && comp.at(x, y); };

  // Moore neighborhood, clockwise from west.
  static const int nbr_dx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
  static const int nbr_dy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

  std::vector<Eigen::Vector2d> poly;
  poly.emplace_back(sx, sy);

  int cx = sx, cy = sy;
  int backtrack = 0;  // direction of the background pixel we entered from (west)
  const int start_x = sx, start_y = sy;
  int first_dir = -1;
  const std::size_t limit = comp.data.size() * 4 + 8;
  for (std::size_t guard = 0; guard < limit; ++guard) {
    int dir = backtrack;
    int found = -1;
    for (int step = 0; step < 8; ++step) {
      dir = (dir + 1) % 8;
      if (fg(cx + nbr_dx[dir], cy + nbr_dy[dir])) {
        found = dir;
        break;
      }
    }
    if (found < 0) return poly;  // isolated pixel
    if (cx == start_x && cy == start_y) {
      if (first_dir < 0) {
        first_dir = found;
      } else if (found == first_dir) {
        break;  // closed the loop entering the same way (Jacob's criterion)
      }
    }
    cx += nbr_dx[found];
    cy += nbr_dy[found];
    if (cx == start_x && cy == start_y) {
      // Re-reaching the start; loop detection happens on the next probe.
    } else {
      poly.emplace_back(cx, cy);
    }
    backtrack = (found + 4) % 8;
  }
  return poly;
}

std::vector<Eigen::Vector2d> boundary_measure_points(const MaskImage& mask, int n) {
  if (n < 1) throw InvalidRange("need at least one measurement point");
  const std::vector<Eigen::Vector2d> poly = trace_contour(mask);
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(n);
  if (poly.size() == 1) {
    pts.assign(n, poly[0]);
    return pts;
  }

  std::vector<double> cum(poly.size() + 1, 0.0);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[(i + 1) % poly.size()];
    cum[i + 1] = cum[i] + (b - a).norm();
  }
  const double total = cum.back();
  if (total <= 0.0) {
    pts.assign(n, poly[0]);
    return pts;
  }
  std::size_t seg = 0;
  for (int k = 0; k < n; ++k) {
    const double s = total * k / n;
    while (seg + 1 < cum.size() - 1 && cum[seg + 1] <= s) ++seg;
    const double t = (s - cum[seg]) / (cum[seg + 1] - cum[seg]);
    const Eigen::Vector2d& a = poly[seg];
    const Eigen::Vector2d& b = poly[(seg + 1) % poly.size()];
    pts.push_back(a + t * (b - a));
  }
  return pts;
}

}  // namespace tmatch
