#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tmatch/image.hpp"

namespace tmatch {

/// Unit-norm patch descriptor. Dimension must be divisible by 4 so the rotary
/// encoding blocks line up.
using Descriptor = Eigen::VectorXd;

enum class TokenSide { Template, Image };

/// Sampled patch features plus their grid coordinates.
struct TokenSet {
  Eigen::MatrixXd descriptors;             // rows = tokens
  std::vector<Eigen::Vector2d> positions;  // grid coordinates
  TokenSide side = TokenSide::Template;

  int size() const { return static_cast<int>(descriptors.rows()); }
  int dim() const { return static_cast<int>(descriptors.cols()); }
};

/// Raw gradient-orientation histogram over a square window of the edge
/// strength map: 8 orientation bins per spatial subcell, magnitudes as
/// weights, gradients computed from window content only (so identical windows
/// give identical histograms wherever they sit). subdiv is the spatial
/// subdivision per axis (1 or 2).
Eigen::VectorXd orientation_histogram(const EdgeImage& e, const Eigen::Vector2i& center,
                                      int window, int subdiv);

/// Histogram lifted to `dim` by a fixed seeded orthonormal projection and
/// L2-normalized. All-zero windows map to the first basis vector.
Descriptor describe_patch(const EdgeImage& e, const Eigen::Vector2i& center,
                          int window, int dim, int subdiv, std::uint64_t lift_seed);

/// The deterministic lift matrix itself (dim x raw, orthonormal columns).
Eigen::MatrixXd descriptor_lift(int dim, int raw, std::uint64_t seed);

/// Dense descriptor field over a stride-aligned cell grid. Rows follow the
/// grid row-major; only cells marked in `needed` are computed when given.
struct DescriptorGrid {
  int cells_x = 0;
  int cells_y = 0;
  int stride = 2;
  int dim = 0;
  Eigen::MatrixXd d;                    // (cells_x*cells_y) x dim
  std::vector<std::uint8_t> computed;   // per cell

  int index(int gx, int gy) const { return gy * cells_x + gx; }
  bool in_bounds(int gx, int gy) const {
    return gx >= 0 && gx < cells_x && gy >= 0 && gy < cells_y;
  }
};

DescriptorGrid describe_grid(const EdgeImage& e, int stride, int window, int dim,
                             int subdiv, std::uint64_t lift_seed,
                             const std::vector<std::uint8_t>* needed = nullptr);

/// Soft-binned orientation magnitudes accumulated into per-bin integral
/// images, so any axis-aligned box histogram is four taps per bin. Gradients
/// are central differences with clamped sampling at the image borders.
class OrientationField {
 public:
  explicit OrientationField(const EdgeImage& e);

  /// Histogram over [x0,x1) x [y0,y1) clipped to the image, 2x2 hard
  /// subcells, 8 soft orientation bins per subcell.
  Eigen::VectorXd box_histogram(int x0, int y0, int x1, int y1) const;

  int width() const { return width_; }
  int height() const { return height_; }

 private:
  double box(int bin, int x0, int y0, int x1, int y1) const;
  int width_ = 0;
  int height_ = 0;
  std::array<std::vector<double>, 8> integral_;
};

/// Multi-scale context descriptor for one cell center: per-window box
/// histograms, each L2-normalized and scaled by its entry in `scale_weights`
/// (wider context usually earns more weight), concatenated, lifted and
/// normalized. Blank contexts map to the first basis vector.
Descriptor context_descriptor(const OrientationField& field, const Eigen::Vector2i& center,
                              std::span<const int> windows,
                              std::span<const double> scale_weights,
                              const Eigen::MatrixXd& lift);

/// Dense grid of context descriptors; the coarse-level batch path.
DescriptorGrid context_grid(const EdgeImage& e, int stride, std::span<const int> windows,
                            std::span<const double> scale_weights, int dim,
                            std::uint64_t lift_seed,
                            const std::vector<std::uint8_t>* needed = nullptr);

}  // namespace tmatch
