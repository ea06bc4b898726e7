// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

#include "gradientstage/calib.hpp"

#include <gtest/gtest.h>

#include <random>

#include "calib_oracle.hpp"
#include "gradientstage/stage.hpp"
#include "test_support.hpp"

namespace gradientstage {
namespace {

using testing::PinholeCamera;

TEST(HighlightCentroid, GaussianSpot) {
  const Point2 c = detect_highlight_centroid(testing::gaussian_spot(200, 100, {100.0, 50.0}, 3.0));
  EXPECT_NEAR(c.x, 100.0, 0.1);
  EXPECT_NEAR(c.y, 50.0, 0.1);
}

TEST(HighlightCentroid, SubpixelSpotsStayClose) {
  for (double off : {0.25, 0.5, 0.75}) {
    const Point2 c = detect_highlight_centroid(testing::gaussian_spot(64, 64, {30.0 + off, 31.0 - off}, 3.0));
    EXPECT_NEAR(c.x, 30.0 + off, 0.15);
    EXPECT_NEAR(c.y, 31.0 - off, 0.15);
  }
}

TEST(HighlightCentroid, LargerSpotWins) {
  Image img = testing::gaussian_spot(120, 60, {30.0, 30.0}, 2.0);
  const Image big = testing::gaussian_spot(120, 60, {90.0, 25.0}, 5.0);
  for (std::size_t i = 0; i < img.size(); ++i) img.set(i, std::max(img.at(i), big.at(i)));
  const Point2 c = detect_highlight_centroid(img);
  EXPECT_NEAR(c.x, 90.0, 0.1);
  EXPECT_NEAR(c.y, 25.0, 0.1);
}

TEST(HighlightCentroid, OpeningRemovesSpeckle) {
  Image img = testing::gaussian_spot(80, 80, {40.0, 40.0}, 4.0, 0.8);
  img.set(5, 5, 1.0);
  const Point2 c = detect_highlight_centroid(img);
  EXPECT_NEAR(c.x, 40.0, 0.1);
  EXPECT_NEAR(c.y, 40.0, 0.1);
}

TEST(HighlightCentroid, BlackImageThrows) {
  try {
    detect_highlight_centroid(Image(10, 10));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("no highlight"), std::string::npos);
  }
  EXPECT_THROW(detect_highlight_centroid(Image(4, 4, 1.0), 1.5), DataError);
}

TEST(FitConic, ExactCircle) {
  std::vector<Point2> pts;
  for (int k = 0; k < 8; ++k) pts.push_back({10.0 * std::cos(k * M_PI / 4), 10.0 * std::sin(k * M_PI / 4)});
  const ConicFit fit = fit_conic(pts);
  const Conic& c = fit.conic;
  EXPECT_NEAR(c.a, c.c, 1e-9);
  EXPECT_NEAR(c.b / c.a, 0.0, 1e-9);
  EXPECT_NEAR(-c.f / c.a, 100.0, 1e-6);
  for (double r : fit.residuals) EXPECT_NEAR(r, 0.0, 1e-9);
}

TEST(FitConic, EllipseAxisRatio) {
  std::vector<Point2> pts;
  const double th = 0.4;
  for (int k = 0; k < 20; ++k) {
    const double t = 2 * M_PI * k / 20.0;
    const double x = 20 * std::cos(t), y = 10 * std::sin(t);
    pts.push_back({50 + std::cos(th) * x - std::sin(th) * y, -30 + std::sin(th) * x + std::cos(th) * y});
  }
  const Eigen::Matrix2d q = fit_conic(pts).conic.matrix().topLeftCorner<2, 2>();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(q);
  EXPECT_NEAR(std::sqrt(es.eigenvalues()(1) / es.eigenvalues()(0)), 2.0, 1e-6);
}

TEST(FitConic, DegenerateInputsThrow) {
  std::vector<Point2> line;
  for (int k = 0; k < 6; ++k) line.push_back({1.0 * k, 2.0 * k + 1});
  EXPECT_THROW(fit_conic(line), DataError);
  EXPECT_THROW(fit_conic({{0, 0}, {1, 0}, {0, 1}}), DataError);
}

TEST(SphereCenter, OnAxisForwardOracle) {
  const PinholeCamera cam{2000.0, 0.0, 0.0};
  const Vec3 truth{0, 0, 890};
  const ConicFit fit = fit_conic(testing::limb_points(cam, truth, 38.1, 36));
  const SphereCenter sc = sphere_center(fit.conic, cam.intrinsics(), 38.1);
  EXPECT_LT(norm(sc.center - truth), 0.5);
  EXPECT_NEAR(sc.distance, 890.0, 0.5);
}

TEST(SphereCenter, OffAxisDirection) {
  const PinholeCamera cam{1500.0, 320.0, 240.0};
  const Vec3 truth{120, -80, 900};
  const SphereCenter sc = sphere_center(fit_conic(testing::limb_points(cam, truth, 38.1, 48)).conic, cam.intrinsics(), 38.1);
  EXPECT_LT(angle_between_deg(sc.center, truth), 0.05);
  EXPECT_LT(norm(sc.center - truth), 0.5);
}

TEST(SphereCenter, RadiusScalesDistance) {
  const PinholeCamera cam{2000.0, 0.0, 0.0};
  const Conic c = fit_conic(testing::limb_points(cam, {30, 10, 890}, 38.1, 36)).conic;
  double prev = 0.0;
  for (double r : {30.0, 38.1, 45.0}) {
    const double d = sphere_center(c, cam.intrinsics(), r).distance;
    EXPECT_GT(d, prev);
    EXPECT_NEAR(d / r, 890.0 * std::sqrt(1 + (900.0 + 100.0) / (890.0 * 890.0)) / 38.1, 0.01 * d / r);
    prev = d;
  }
  EXPECT_THROW(sphere_center(c, cam.intrinsics(), 0.0), DataError);
}

TEST(SphereCenter, NonCircularConeRejected) {
  std::vector<Point2> pts;
  for (int k = 0; k < 12; ++k) pts.push_back({40 * std::cos(k * M_PI / 6), 10 * std::sin(k * M_PI / 6)});
  EXPECT_THROW(sphere_center(fit_conic(pts).conic, PinholeCamera{2000.0}.intrinsics(), 38.1), DataError);
}

TEST(RaySphere, Cases) {
  const auto hit = ray_sphere_intersect({0, 0, 0}, {0, 0, 1}, {0, 0, 10}, 1.0);
  ASSERT_TRUE(hit);
  EXPECT_EQ(*hit, (Vec3{0, 0, 9}));
  const auto tangent = ray_sphere_intersect({1, 0, 0}, {0, 0, 1}, {0, 0, 10}, 1.0);
  ASSERT_TRUE(tangent);
  EXPECT_NEAR(norm(*tangent - Vec3{1, 0, 10}), 0.0, 1e-9);
  EXPECT_FALSE(ray_sphere_intersect({0, 0, 0}, {0, 0, -1}, {0, 0, 10}, 1.0));
  EXPECT_FALSE(ray_sphere_intersect({0, 0, 0}, {1, 0, 0}, {0, 0, 10}, 1.0));
}

TEST(LightDirection, PoleIsRetroReflective) {
  const PinholeCamera cam{2000.0, 100.0, 100.0};
  const LightEstimate le = light_direction(cam.project({0, 0, 851.9}), cam.intrinsics(), {0, 0, 0}, {0, 0, 890}, 38.1);
  EXPECT_LT(angle_between_deg(le.direction, {0, 0, -1}), 1e-9);
  EXPECT_NEAR(le.point.z, 890 - 38.1, 1e-9);
}

TEST(LightDirection, GrazingGivesMinusView) {
  const Vec3 c{0, 0, 890};
  const double r = 38.1;
  const double d = 890.0;
  const Vec3 tangent{r * std::sqrt(1 - r * r / (d * d)), 0, d - r * r / d};
  const PinholeCamera cam{2000.0};
  const LightEstimate le = light_direction(cam.project(tangent), cam.intrinsics(), {0, 0, 0}, c, r);
  EXPECT_LT(angle_between_deg(le.direction, normalized(tangent)), 1e-3);
}

TEST(LightDirection, OffSphereThrows) {
  const PinholeCamera cam{2000.0};
  try {
    light_direction({500, 0}, cam.intrinsics(), {0, 0, 0}, {0, 0, 890}, 38.1);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("highlight off sphere"), std::string::npos);
  }
}

TEST(LightDirection, ForwardRenderedStage) {
  const PinholeCamera cam{2000.0, 200.0, 200.0};
  const Vec3 centre{0, 0, 890};
  const double radius = 38.1;
  const auto leds = select_hemisphere(generate_icosphere_directions(2), {0, 0, -1}, 41);
  for (const Vec3& w : leds) {
    const Vec3 p = centre + 1200.0 * w;
    const Vec3 h = testing::mirror_point(centre, radius, p);
    const Point2 c = detect_highlight_centroid(testing::gaussian_spot(400, 400, cam.project(h), 3.0));
    const LightEstimate le = light_direction(c, cam.intrinsics(), {0, 0, 0}, centre, radius);
    EXPECT_LT(angle_between_deg(le.direction, normalized(p - h)), 0.5);
    EXPECT_LT(angle_between_deg(led_direction_on_stage(le, centre, 1200.0), w), 0.5);
  }
}

TEST(BlindSpot, UsesNeighbourCorrection) {
  const auto nominal = generate_icosphere_directions(1);
  std::vector<std::optional<Vec3>> rec(nominal.size());
  const Vec3 shift{0.01, 0, 0};
  for (std::size_t i = 0; i < nominal.size(); ++i) rec[i] = nominal[i] + shift;
  rec[3].reset();
  const Vec3 v = interpolate_blind_spot(nominal, rec, 3);
  EXPECT_LT(angle_between_deg(v, normalized(nominal[3] + shift)), 1e-9);
  std::vector<std::optional<Vec3>> none(nominal.size());
  EXPECT_LT(angle_between_deg(interpolate_blind_spot(nominal, none, 3), nominal[3]), 1e-12);
}

Eigen::Matrix3d test_homography() {
  Eigen::Matrix3d h;
  h << 1.02, 0.03, 12.0, -0.02, 0.98, -7.0, 1e-5, -2e-5, 1.0;
  return h;
}

std::vector<PointPair> checkerboard_pairs(const Eigen::Matrix3d& h, double noise, std::mt19937_64* rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<PointPair> out;
  const Homography hh{h};
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 13; ++c) {
      const Point2 p{100.0 + 40.0 * c, 80.0 + 40.0 * r};
      Point2 q = hh.apply(p);
      if (noise > 0.0) {
        q.x += noise * g(*rng);
        q.y += noise * g(*rng);
      }
      out.emplace_back(p, q);
    }
  return out;
}

TEST(Homography, IdentityPairs) {
  std::vector<PointPair> pairs;
  for (int i = 0; i < 10; ++i) pairs.push_back({{1.0 * i, 3.0 * i * i}, {1.0 * i, 3.0 * i * i}});
  const HomographyFit fit = estimate_homography_dlt(pairs);
  EXPECT_LT((fit.homography.H - normalize_homography(Eigen::Matrix3d::Identity())).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Homography, NoiselessCheckerboard) {
  const auto pairs = checkerboard_pairs(test_homography(), 0.0, nullptr);
  ASSERT_EQ(pairs.size(), 65u);
  const HomographyFit fit = estimate_homography_dlt(pairs);
  EXPECT_LT(transfer_error(fit.homography, pairs), 1e-6);
  EXPECT_LT(fit.symmetric_transfer_error, 1e-6);
  EXPECT_NEAR(fit.homography.H.norm(), 1.0, 1e-12);
}

TEST(Homography, FourPointsInterpolate) {
  const Homography truth{test_homography()};
  std::vector<PointPair> pairs;
  for (const Point2& p : {Point2{0, 0}, Point2{100, 0}, Point2{100, 80}, Point2{0, 80}}) pairs.push_back({p, truth.apply(p)});
  const HomographyFit fit = estimate_homography_dlt(pairs);
  for (const auto& [p, q] : pairs) {
    const Point2 m = fit.homography.apply(p);
    EXPECT_NEAR(m.x, q.x, 1e-8);
    EXPECT_NEAR(m.y, q.y, 1e-8);
  }
}

TEST(Homography, CollinearThrows) {
  std::vector<PointPair> pairs;
  for (int i = 0; i < 6; ++i) pairs.push_back({{1.0 * i, 1.0 * i}, {2.0 * i, 2.0 * i}});
  EXPECT_THROW(estimate_homography_dlt(pairs), DataError);
  EXPECT_THROW(estimate_homography_dlt({}), DataError);
}

TEST(Sampson, NoiselessIsUnchanged) {
  const auto pairs = checkerboard_pairs(test_homography(), 0.0, nullptr);
  const HomographyFit fit = estimate_homography_dlt(pairs);
  const SampsonRefinement r = refine_sampson(fit.homography, pairs);
  EXPECT_LT((r.homography.H - fit.homography.H).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_FALSE(r.warning.has_value());
}

TEST(Sampson, NoisyReducesError) {
  std::mt19937_64 rng(42);
  int better = 0;
  for (int t = 0; t < 20; ++t) {
    const auto pairs = checkerboard_pairs(test_homography(), 0.5, &rng);
    const HomographyFit fit = estimate_homography_dlt(pairs);
    const SampsonRefinement r = refine_sampson(fit.homography, pairs);
    EXPECT_LE(r.final_error, r.initial_error);
    EXPECT_NEAR(r.initial_error, sampson_error(fit.homography, pairs), 1e-9 * r.initial_error);
    better += r.final_error < r.initial_error;
  }
  EXPECT_GE(better, 19);
}

TEST(Sampson, SingleOutlierStillDecreases) {
  auto pairs = checkerboard_pairs(test_homography(), 0.0, nullptr);
  pairs[7].second.x += 15.0;
  const HomographyFit fit = estimate_homography_dlt(pairs);
  const SampsonRefinement r = refine_sampson(fit.homography, pairs);
  EXPECT_LT(r.final_error, r.initial_error);
}

TEST(Sampson, ErrorMatchesFirstOrderGeometricError) {
  const Homography h{normalize_homography(test_homography())};
  const Point2 p{150, 120};
  const Point2 q = h.apply(p);
  const std::vector<PointPair> pairs = {{p, {q.x + 0.3, q.y}}};
  EXPECT_GT(sampson_error(h, pairs), 0.0);
  EXPECT_LT(sampson_error(h, pairs), 0.3 * 0.3 * 1.01);
}

TEST(WarpHomography, TranslationShiftsImage) {
  const Image src = testing::sample_image(20, 10, [](double x, double y) { return x + 100 * y; });
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 2) = 3.0;
  const Image out = warp_homography(src, Homography{t}, 20, 10);
  EXPECT_FALSE(out.valid(2, 4));
  ASSERT_TRUE(out.valid(5, 4));
  EXPECT_NEAR(out.at(5, 4), 2 + 400, 1e-9);
}

TEST(Separate, Formula) {
  const ReflectanceSeparation s = separate_reflectance(Image(1, 1, 10.0), Image(1, 1, 4.0));
  EXPECT_EQ(s.specular.at(0), 6.0);
  EXPECT_EQ(s.diffuse.at(0), 8.0);
  EXPECT_EQ(separate_reflectance(Image(1, 1, 3.0), Image(1, 1, 3.0)).specular.at(0), 0.0);
  const ReflectanceSeparation c = separate_reflectance(Image(2, 1, 2.0), Image(2, 1, 3.0));
  EXPECT_EQ(c.specular.at(0), 0.0);
  EXPECT_EQ(c.clamped_count, 2u);
  EXPECT_EQ(c.clamped[1], 1);
  EXPECT_THROW(separate_reflectance(Image(1, 1), Image(2, 1)), DataError);
}

}  // namespace
}  // namespace gradientstage
