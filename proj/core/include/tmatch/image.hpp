#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tmatch/error.hpp"

namespace tmatch {

/// Dense grayscale raster, intensities in [0, 1], row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

/// Binary template mask, row-major, non-zero means foreground.
struct MaskImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  MaskImage() = default;
  MaskImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

/// Edge map: per-pixel strength in [0, 1] plus the thresholded binary edge set.
struct EdgeImage {
  int width = 0;
  int height = 0;
  std::vector<double> strength;
  std::vector<std::uint8_t> binary;

  EdgeImage() = default;
  EdgeImage(int w, int h)
      : width(w),
        height(h),
        strength(static_cast<std::size_t>(w) * h, 0.0),
        binary(static_cast<std::size_t>(w) * h, 0) {}

  double strength_at(int x, int y) const { return strength[static_cast<std::size_t>(y) * width + x]; }
  bool edge_at(int x, int y) const { return binary[static_cast<std::size_t>(y) * width + x] != 0; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

// 8-bit binary PGM (P5) round-trip. Gray values scale by maxval on read and
// by 255 on write; masks use 0/255 with >127 counting as foreground.
GrayImage read_pgm(const std::string& path);
void write_pgm(const std::string& path, const GrayImage& img);
MaskImage read_mask_pgm(const std::string& path);
void write_mask_pgm(const std::string& path, const MaskImage& mask);

/// Writes edge strength scaled to 0..255.
void write_edge_pgm(const std::string& path, const EdgeImage& edges);
/// Reads a strength image back as edges; binary = strength >= binary_low.
EdgeImage read_edge_pgm(const std::string& path, double binary_low);

}  // namespace tmatch
