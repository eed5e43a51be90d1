#include <doctest.h>

#include <set>

#include "tmatch/rng.hpp"
#include "tmatch/sampling.hpp"

using namespace tmatch;

TEST_SUITE("sampling") {

TEST_CASE("patch grid flags and geometry") {
  EdgeImage e(64, 40);
  SUBCASE("empty image flags nothing") {
    const PatchGrid g = build_patch_grid(e, 8);
    CHECK(g.cells_x == 8);
    CHECK(g.cells_y == 5);
    for (const auto& c : g.cells) CHECK_FALSE(c.contains_edge);
  }
  SUBCASE("single edge pixel flags exactly its cell") {
    e.binary[3 * 64 + 11] = 1;  // (11, 3) -> cell (1, 0)
    const PatchGrid g = build_patch_grid(e, 8);
    for (const auto& c : g.cells) {
      CHECK(c.contains_edge == (c.gx == 1 && c.gy == 0));
    }
    CHECK(g.at(1, 0).center.x() == doctest::Approx(12.0));
    CHECK(g.at(1, 0).center.y() == doctest::Approx(4.0));
  }
  SUBCASE("full edge image flags everything") {
    for (auto& b : e.binary) b = 1;
    const PatchGrid g = build_patch_grid(e, 2);
    for (const auto& c : g.cells) CHECK(c.contains_edge);
  }
}

TEST_CASE("patch grid rejects bad strides") {
  EdgeImage e(16, 16);
  CHECK_THROWS_AS(build_patch_grid(e, 4), BadStride);
  CHECK_THROWS_AS(build_patch_grid(EdgeImage(4, 4), 8), BadStride);
}

TEST_CASE("fps returns everything when n covers the set") {
  std::vector<Eigen::Vector2d> pts = {{0, 0}, {1, 0}, {2, 0}};
  CHECK(fps(pts, 5, 0) == std::vector<int>{0, 1, 2});
}

TEST_CASE("fps on a line picks the endpoints") {
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i <= 10; ++i) pts.emplace_back(static_cast<double>(i), 0.0);
  const auto picked = fps(pts, 3, 5);
  REQUIRE(picked.size() == 3);
  CHECK(picked[0] == 5);
  CHECK(picked[1] == 0);  // tie between the two endpoints, lowest index wins
  CHECK(picked[2] == 10);
}

TEST_CASE("fps greedy max-min property against brute force") {
  Rng rng(77);
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < 60; ++i) pts.emplace_back(rng.uniform(0, 100), rng.uniform(0, 100));
  const int n = 12;
  const auto picked = fps(pts, n, centroid_seed_index(pts));

  std::set<int> chosen;
  chosen.insert(picked[0]);
  for (int step = 1; step < n; ++step) {
    auto min_dist = [&](int idx) {
      double best = std::numeric_limits<double>::infinity();
      for (int c : chosen) best = std::min(best, (pts[idx] - pts[c]).norm());
      return best;
    };
    const double picked_dist = min_dist(picked[step]);
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      if (!chosen.count(i)) CHECK(picked_dist >= min_dist(i) - 1e-12);
    }
    chosen.insert(picked[step]);
  }
}

TEST_CASE("fps output has no duplicates and is deterministic") {
  Rng rng(31);
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < 40; ++i) pts.emplace_back(rng.uniform(0, 50), rng.uniform(0, 50));
  const auto a = fps(pts, 15, 2);
  const auto b = fps(pts, 15, 2);
  CHECK(a == b);
  CHECK(std::set<int>(a.begin(), a.end()).size() == a.size());
}

TEST_CASE("centroid seed picks the most central point") {
  std::vector<Eigen::Vector2d> pts = {{0, 0}, {10, 0}, {5, 1}, {0, 10}, {10, 10}};
  CHECK(centroid_seed_index(pts) == 2);
}

}  // TEST_SUITE
