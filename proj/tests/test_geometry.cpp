#include <doctest.h>

#include <cmath>

#include "tmatch/geometry.hpp"
#include "tmatch/rng.hpp"

using namespace tmatch;

namespace {

Homography translation(double tx, double ty) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 2) = tx;
  m(1, 2) = ty;
  return Homography::from_matrix(m);
}

Homography similarity(double s, double tx, double ty) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 0) = s;
  m(1, 1) = s;
  m(0, 2) = tx;
  m(1, 2) = ty;
  return Homography::from_matrix(m);
}

// Scalar-by-scalar projective action, the oracle for apply_homography.
Eigen::Vector2d project_symbolic(const Eigen::Matrix3d& m, double x, double y) {
  const double xp = m(0, 0) * x + m(0, 1) * y + m(0, 2);
  const double yp = m(1, 0) * x + m(1, 1) * y + m(1, 2);
  const double zp = m(2, 0) * x + m(2, 1) * y + m(2, 2);
  return {xp / zp, yp / zp};
}

Homography random_h(Rng& rng) {
  PerturbationConfig cfg;
  return sample_gt_homography(rng.next_u64(), cfg);
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("apply_homography identity and translation") {
  CHECK((apply_homography(Homography::identity(), {3, 4}) - Eigen::Vector2d(3, 4)).norm() ==
        doctest::Approx(0.0));
  const auto p = apply_homography(translation(5, 0), {0, 0});
  CHECK(p.x() == doctest::Approx(5.0));
  CHECK(p.y() == doctest::Approx(0.0));
}

TEST_CASE("apply_homography matches symbolic product") {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    const Homography h = random_h(rng);
    const Eigen::Vector2d p(rng.uniform(0, 640), rng.uniform(0, 480));
    const Eigen::Vector2d got = apply_homography(h, p);
    const Eigen::Vector2d want = project_symbolic(h.m, p.x(), p.y());
    CHECK((got - want).norm() < 1e-12);
  }
}

TEST_CASE("apply_homography degenerate denominator") {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(2, 0) = 1.0;  // z' = x + 1, vanishes on the line x = -1
  const Homography h = Homography::from_matrix(m);
  CHECK_THROWS_AS(apply_homography(h, {-1.0, 1.0}), DegeneratePoint);
}

TEST_CASE("dlt identity correspondences") {
  std::vector<PointMatch> pm = {
      {{0, 0}, {0, 0}}, {{100, 0}, {100, 0}}, {{100, 80}, {100, 80}}, {{0, 80}, {0, 80}}};
  const Homography h = dlt_weighted(WeightedMatchSet::uniform(pm));
  CHECK(canonical_distance(h, Homography::identity()) < 1e-10);
}

TEST_CASE("dlt recovers a known translation+scale") {
  const Homography want = similarity(1.5, 12.0, -7.0);
  Rng rng(5);
  std::vector<PointMatch> pm;
  for (int i = 0; i < 6; ++i) {
    Eigen::Vector2d p(rng.uniform(0, 640), rng.uniform(0, 480));
    pm.push_back({p, apply_homography(want, p)});
  }
  CHECK(canonical_distance(dlt_weighted(WeightedMatchSet::uniform(pm)), want) < 1e-8);
}

TEST_CASE("dlt masks zero-weight outliers exactly") {
  Rng rng(7);
  const Homography want = random_h(rng);
  std::vector<PointMatch> pm;
  std::vector<double> s, e;
  for (int i = 0; i < 8; ++i) {
    Eigen::Vector2d p(rng.uniform(0, 640), rng.uniform(0, 480));
    pm.push_back({p, apply_homography(want, p)});
    s.push_back(1.0);
    e.push_back(1.0);
  }
  for (int i = 0; i < 2; ++i) {  // planted outliers, weight 0
    pm.push_back({{rng.uniform(0, 640), rng.uniform(0, 480)},
                  {rng.uniform(0, 640), rng.uniform(0, 480)}});
    s.push_back(1.0);
    e.push_back(0.0);
  }
  const Homography got = dlt_weighted(WeightedMatchSet::make(pm, s, e));
  CHECK(canonical_distance(got, want) < 1e-8);
}

TEST_CASE("dlt exact recovery over many random homographies") {
  Rng rng(99);
  for (int t = 0; t < 100; ++t) {
    const Homography want = random_h(rng);
    std::vector<PointMatch> pm;
    for (int i = 0; i < 10; ++i) {
      Eigen::Vector2d p(rng.uniform(0, 640), rng.uniform(0, 480));
      pm.push_back({p, apply_homography(want, p)});
    }
    CHECK(canonical_distance(dlt_weighted(WeightedMatchSet::uniform(pm)), want) < 1e-8);
  }
}

TEST_CASE("dlt weight scale invariance") {
  Rng rng(13);
  const Homography want = random_h(rng);
  std::vector<PointMatch> pm;
  std::vector<double> s, e;
  for (int i = 0; i < 7; ++i) {
    Eigen::Vector2d p(rng.uniform(0, 640), rng.uniform(0, 480));
    pm.push_back({p, apply_homography(want, p) + Eigen::Vector2d(rng.normal(), rng.normal())});
    s.push_back(rng.uniform(0.2, 1.0));
    e.push_back(1.0);
  }
  const Homography a = dlt_weighted(WeightedMatchSet::make(pm, s, e));
  for (auto& v : s) v *= 7.5;
  const Homography b = dlt_weighted(WeightedMatchSet::make(pm, s, e));
  CHECK(canonical_distance(a, b) < 1e-10);
}

TEST_CASE("dlt error cases") {
  std::vector<PointMatch> three = {{{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}, {{0, 1}, {0, 1}}};
  CHECK_THROWS_AS(dlt_weighted(WeightedMatchSet::uniform(three)), InsufficientMatches);

  // all weight on fewer than four matches
  std::vector<PointMatch> five = {{{0, 0}, {0, 0}},
                                  {{10, 0}, {10, 0}},
                                  {{0, 10}, {0, 10}},
                                  {{10, 10}, {10, 10}},
                                  {{5, 5}, {5, 5}}};
  CHECK_THROWS_AS(dlt_weighted(WeightedMatchSet::make(
                      five, {1, 1, 1, 0, 0}, {1, 1, 1, 1, 1})),
                  InsufficientMatches);

  std::vector<PointMatch> collinear;
  for (int i = 0; i < 6; ++i) {
    collinear.push_back({{static_cast<double>(i), static_cast<double>(i)},
                         {static_cast<double>(i), static_cast<double>(i)}});
  }
  CHECK_THROWS_AS(dlt_weighted(WeightedMatchSet::uniform(collinear)), RankDeficient);
}

TEST_CASE("invert closed forms and round trip") {
  CHECK(canonical_distance(invert(Homography::identity()), Homography::identity()) < 1e-12);
  CHECK(canonical_distance(invert(translation(5, 7)), translation(-5, -7)) < 1e-12);

  Rng rng(3);
  const Homography h = random_h(rng);
  const Homography hi = invert(h);
  for (int i = 0; i < 10; ++i) {
    const Eigen::Vector2d p(rng.uniform(0, 640), rng.uniform(0, 480));
    CHECK((apply_homography(hi, apply_homography(h, p)) - p).norm() < 1e-9);
  }
  CHECK(canonical_distance(invert(invert(h)), h) < 1e-10);
}

TEST_CASE("reprojection errors") {
  Rng rng(17);
  const Homography h = random_h(rng);
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < 20; ++i) pts.emplace_back(rng.uniform(0, 640), rng.uniform(0, 480));

  for (double e : reprojection_errors(h, h, pts)) CHECK(e == doctest::Approx(0.0));

  // estimated = ground truth composed with a 2 px x-shift
  const Homography shifted = Homography::from_matrix(translation(2, 0).m * h.m);
  std::vector<Eigen::Vector2d> axis_pts = {{0, 0}, {100, 0}, {0, 100}, {50, 50}};
  // shift applied after h: every projected point moves exactly 2 px in x
  for (double e : reprojection_errors(shifted, h, axis_pts)) {
    CHECK(e == doctest::Approx(2.0).epsilon(1e-9));
  }

  // random pair equals the two-sided projection distance
  const Homography g = random_h(rng);
  const auto errs = reprojection_errors(h, g, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double want = (apply_homography(h, pts[i]) - apply_homography(g, pts[i])).norm();
    CHECK(errs[i] == doctest::Approx(want).epsilon(1e-12));
  }

  CHECK_THROWS_AS(reprojection_errors(h, g, {}), EmptyInput);
}

TEST_CASE("auc values and monotonicity") {
  CHECK(auc(std::vector<double>{0, 0, 0}, 5.0) == doctest::Approx(100.0));
  CHECK(auc(std::vector<double>{5, 5}, 5.0) == doctest::Approx(0.0));
  CHECK(auc(std::vector<double>{0.0, 2.5, 6.0}, 5.0) == doctest::Approx(50.0));

  CHECK_THROWS_AS(auc(std::vector<double>{}, 3.0), EmptyInput);
  CHECK_THROWS_AS(auc(std::vector<double>{1.0}, 0.0), InvalidRange);

  Rng rng(23);
  std::vector<double> errs;
  for (int i = 0; i < 30; ++i) errs.push_back(rng.uniform(0, 10));
  const double base = auc(errs, 5.0);
  auto bumped = errs;
  bumped[4] += 1.0;
  CHECK(auc(bumped, 5.0) <= base);      // non-increasing in each error
  CHECK(auc(errs, 6.0) >= base);        // non-decreasing in threshold
  const double inf = std::numeric_limits<double>::infinity();
  errs.push_back(inf);                  // failure sentinel scores zero
  CHECK(auc(errs, 5.0) == doctest::Approx(base * 30.0 / 31.0));
}

TEST_CASE("sample_gt_homography") {
  PerturbationConfig zero;
  zero.scale_min = zero.scale_max = 1.0;
  zero.rotation_deg = 0.0;
  zero.corner_px = 0.0;
  CHECK(canonical_distance(sample_gt_homography(5, zero), Homography::identity()) < 1e-9);

  // common corner displacement reduces to a pure translation (4-point solve)
  const double dx = 9.0, dy = -4.0;
  std::vector<PointMatch> corners = {{{0, 0}, {dx, dy}},
                                     {{639, 0}, {639 + dx, dy}},
                                     {{639, 479}, {639 + dx, 479 + dy}},
                                     {{0, 479}, {dx, 479 + dy}}};
  const Homography hc = dlt_weighted(WeightedMatchSet::uniform(corners));
  CHECK(canonical_distance(hc, translation(dx, dy)) < 1e-9);

  PerturbationConfig cfg;
  CHECK(to_line(sample_gt_homography(42, cfg)) == to_line(sample_gt_homography(42, cfg)));
  CHECK(to_line(sample_gt_homography(42, cfg)) != to_line(sample_gt_homography(43, cfg)));

  PerturbationConfig bad;
  bad.scale_min = -1.0;
  CHECK_THROWS_AS(sample_gt_homography(1, bad), InvalidRange);
}

TEST_CASE("canonical form and serialization") {
  Rng rng(31);
  const Homography h = random_h(rng);
  CHECK(h.m.norm() == doctest::Approx(1.0));
  CHECK(h.m(2, 2) >= 0.0);
  // idempotent
  CHECK(canonical_distance(Homography::from_matrix(h.m), h) < 1e-15);
  // scale invariance of the canonical form
  CHECK(canonical_distance(Homography::from_matrix(h.m * -3.7), h) < 1e-12);

  const Homography back = homography_from_line(to_line(h));
  CHECK(canonical_distance(back, h) < 1e-15);
}

}  // TEST_SUITE
