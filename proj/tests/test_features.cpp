#include <doctest.h>

#include "tmatch/features.hpp"
#include "tmatch/rng.hpp"

using namespace tmatch;

namespace {

EdgeImage random_strength(int w, int h, std::uint64_t seed) {
  EdgeImage e(w, h);
  Rng rng(seed);
  for (auto& v : e.strength) v = rng.uniform01();
  return e;
}

// Rotates the whole strength field by 180 degrees.
EdgeImage rotate180(const EdgeImage& e) {
  EdgeImage out(e.width, e.height);
  for (int y = 0; y < e.height; ++y)
    for (int x = 0; x < e.width; ++x)
      out.strength[static_cast<std::size_t>(e.height - 1 - y) * e.width +
                   (e.width - 1 - x)] = e.strength_at(x, y);
  return out;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("blank window maps to the basis fallback") {
  EdgeImage e(32, 32);  // all zero
  const Descriptor d = describe_patch(e, {16, 16}, 16, 64, 2, 7);
  CHECK(d(0) == doctest::Approx(1.0));
  CHECK(d.norm() == doctest::Approx(1.0));
}

TEST_CASE("identical windows give identical descriptors") {
  EdgeImage e(64, 32);
  Rng rng(5);
  // same 10x10 block stamped at two places
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) {
      const double v = rng.uniform01();
      e.strength[static_cast<std::size_t>(6 + y) * 64 + 4 + x] = v;
      e.strength[static_cast<std::size_t>(14 + y) * 64 + 40 + x] = v;
    }
  const Descriptor a = describe_patch(e, {9, 11}, 10, 64, 2, 7);
  const Descriptor b = describe_patch(e, {45, 19}, 10, 64, 2, 7);
  CHECK(a.dot(b) == doctest::Approx(1.0));
  CHECK((a - b).norm() < 1e-12);
}

TEST_CASE("180-degree rotation permutes orientation bins by 4") {
  // interior gradients away from bin boundaries
  EdgeImage e(24, 24);
  Rng rng(11);
  for (auto& v : e.strength) v = rng.uniform01();
  const EdgeImage r = rotate180(e);

  // the 24-wide window at (12,12) covers the full frame on both sides
  const Eigen::VectorXd h = orientation_histogram(e, {12, 12}, 24, 1);
  const Eigen::VectorXd hr = orientation_histogram(r, {12, 12}, 24, 1);
  REQUIRE(h.size() == 8);
  for (int b = 0; b < 8; ++b) {
    CHECK(h(b) == doctest::Approx(hr((b + 4) % 8)).epsilon(1e-9));
  }
}

TEST_CASE("descriptors are unit norm and scale invariant") {
  EdgeImage e = random_strength(40, 40, 9);
  const Descriptor a = describe_patch(e, {20, 20}, 16, 64, 2, 7);
  CHECK(a.norm() == doctest::Approx(1.0).epsilon(1e-9));

  EdgeImage scaled = e;
  for (auto& v : scaled.strength) v *= 0.35;
  const Descriptor b = describe_patch(scaled, {20, 20}, 16, 64, 2, 7);
  CHECK((a - b).norm() < 1e-12);
}

TEST_CASE("self-match similarity is maximal") {
  EdgeImage e = random_strength(80, 48, 21);
  const Descriptor probe = describe_patch(e, {33, 25}, 16, 64, 2, 7);
  double self_sim = 0.0, best_other = -2.0;
  for (int y = 10; y < 38; ++y) {
    for (int x = 10; x < 70; ++x) {
      const double sim = probe.dot(describe_patch(e, {x, y}, 16, 64, 2, 7));
      if (x == 33 && y == 25) {
        self_sim = sim;
      } else {
        best_other = std::max(best_other, sim);
      }
    }
  }
  CHECK(self_sim == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(self_sim >= best_other);
}

TEST_CASE("descriptor dim must suit the rotary blocks") {
  EdgeImage e(16, 16);
  CHECK_THROWS_AS(describe_patch(e, {8, 8}, 8, 30, 1, 7), InvalidRange);
  CHECK_THROWS_AS(describe_patch(e, {200, 8}, 8, 32, 1, 7), WindowOutOfRange);
}

TEST_CASE("lift is orthonormal and deterministic") {
  const Eigen::MatrixXd l1 = descriptor_lift(64, 32, 7);
  const Eigen::MatrixXd l2 = descriptor_lift(64, 32, 7);
  CHECK((l1 - l2).norm() == 0.0);
  const Eigen::MatrixXd gram = l1.transpose() * l1;
  CHECK((gram - Eigen::MatrixXd::Identity(32, 32)).norm() < 1e-12);
  CHECK((descriptor_lift(64, 32, 8) - l1).norm() > 1e-3);
}

TEST_CASE("describe_grid matches describe_patch per cell") {
  EdgeImage e = random_strength(32, 24, 33);
  const DescriptorGrid g = describe_grid(e, 8, 16, 64, 2, 7);
  CHECK(g.cells_x == 4);
  CHECK(g.cells_y == 3);
  for (int gy = 0; gy < g.cells_y; ++gy) {
    for (int gx = 0; gx < g.cells_x; ++gx) {
      const Descriptor d = describe_patch(e, {gx * 8 + 4, gy * 8 + 4}, 16, 64, 2, 7);
      CHECK((g.d.row(g.index(gx, gy)).transpose() - d).norm() < 1e-12);
    }
  }

  std::vector<std::uint8_t> needed(12, 0);
  needed[5] = 1;
  const DescriptorGrid sparse = describe_grid(e, 8, 16, 64, 2, 7, &needed);
  CHECK(sparse.computed[5] == 1);
  CHECK(sparse.computed[0] == 0);
  CHECK((sparse.d.row(5) - g.d.row(5)).norm() == 0.0);
}

}  // TEST_SUITE
