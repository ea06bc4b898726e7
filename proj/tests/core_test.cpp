// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

#include "gradientstage/core.hpp"

#include <gtest/gtest.h>

#include <random>

#include "gradientstage/parallel.hpp"
#include "test_support.hpp"

namespace gradientstage {
namespace {

NormalMap single(const Vec3& n) {
  NormalMap m(1, 1);
  m.set(0, n, 1.0);
  return m;
}

TEST(Vec3, Arithmetic) {
  const Vec3 a{1, 2, 3}, b{-2, 0.5, 4};
  EXPECT_EQ(a + b, (Vec3{-1, 2.5, 7}));
  EXPECT_EQ(a - b, (Vec3{3, 1.5, -1}));
  EXPECT_EQ(2.0 * a, (Vec3{2, 4, 6}));
  EXPECT_DOUBLE_EQ(dot(a, b), -2 + 1 + 12);
  EXPECT_EQ(cross(Vec3{1, 0, 0}, Vec3{0, 1, 0}), (Vec3{0, 0, 1}));
  EXPECT_NEAR(norm(normalized({3, 4, 0})), 1.0, 1e-15);
  EXPECT_THROW(normalized({}), DataError);
}

TEST(AngleBetween, SmallAnglesAreAccurate) {
  const double t = 1e-9 * M_PI / 180.0;
  EXPECT_NEAR(angle_between_deg({0, 0, 1}, {0, std::sin(t), std::cos(t)}), 1e-9, 1e-15);
  EXPECT_NEAR(angle_between_deg({0, 0, 1}, {0, 0, -1}), 180.0, 1e-12);
}

TEST(Condition, NamesRoundTrip) {
  for (Condition c : kAllConditions) {
    EXPECT_EQ(parse_condition(condition_name(c)), c);
    EXPECT_EQ(parse_condition(condition_suffix(c)), c);
    EXPECT_EQ(flipped(flipped(c)), c);
  }
  EXPECT_EQ(parse_condition("x_bar"), Condition::Xbar);
  EXPECT_EQ(parse_condition("YBAR"), Condition::Ybar);
  EXPECT_FALSE(parse_condition("w").has_value());
  EXPECT_EQ(flipped(Condition::C), Condition::C);
  EXPECT_FALSE(axis_of(Condition::C).has_value());
  EXPECT_EQ(axis_of(Condition::Zbar), Axis::Z);
  EXPECT_TRUE(is_complement(Condition::Ybar));
  EXPECT_FALSE(is_complement(Condition::C));
}

TEST(Image, RejectsBadSamples) {
  Image img(2, 2);
  EXPECT_THROW(img.set(0, 0, -1.0), DataError);
  EXPECT_THROW(img.set(0, 0, std::nan("")), DataError);
  EXPECT_THROW(img.set(0, 0, INFINITY), DataError);
  img.invalidate(1, 1);
  EXPECT_EQ(img.valid_count(), 3u);
  EXPECT_EQ(img.at(1, 1), 0.0);
}

TEST(Image, BilinearSample) {
  const Image img = testing::sample_image(4, 4, [](double x, double y) { return 1.0 + x + 10.0 * y; });
  EXPECT_EQ(*sample_bilinear(img, 2.0, 1.0), img.at(2, 1));
  EXPECT_NEAR(*sample_bilinear(img, 1.25, 2.5), 1.0 + 1.25 + 25.0, 1e-12);
  EXPECT_FALSE(sample_bilinear(img, 3.5, 0.0).has_value());
  EXPECT_FALSE(sample_bilinear(img, -0.1, 0.0).has_value());
  Image holes = img;
  holes.invalidate(2, 2);
  EXPECT_FALSE(sample_bilinear(holes, 1.5, 1.5).has_value());
  EXPECT_TRUE(sample_bilinear(holes, 0.5, 0.5).has_value());
}

TEST(NormalMap, SetFromVectorKeepsLength) {
  NormalMap m(2, 1);
  EXPECT_TRUE(m.set_from_vector(0, {0, 0, 2.0}));
  EXPECT_EQ(m.normal(0), (Vec3{0, 0, 1}));
  EXPECT_EQ(m.magnitude(0), 2.0);
  EXPECT_FALSE(m.set_from_vector(1, {0, 0, 1e-12}));
  EXPECT_FALSE(m.valid(1));
  EXPECT_THROW(m.set(1, {0, 0, 2}, 1.0), DataError);
}

TEST(ImageSet, MissingConditionMessage) {
  GradientImageSet set;
  set.set(Condition::X, Image(3, 2));
  EXPECT_THROW(set.set(Condition::Y, Image(2, 3)), DataError);
  try {
    set.get(Condition::Xbar);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("missing condition"), std::string::npos);
  }
  EXPECT_EQ(set.width(), 3);
}

TEST(ImageSet, JointMask) {
  GradientImageSet set;
  Image a(2, 1), b(2, 1);
  a.invalidate(0);
  set.set(Condition::X, a);
  set.set(Condition::C, b);
  const auto m = set.joint_mask({Condition::X, Condition::C});
  EXPECT_EQ(m[0], 0);
  EXPECT_EQ(m[1], 1);
}

TEST(AngularError, IdenticalMapsGiveZero) {
  NormalMap a(3, 3);
  std::mt19937_64 rng(2);
  for (std::size_t i = 0; i < a.size(); ++i) a.set(i, testing::random_unit(rng), 1.0);
  const Image e = angular_error_map(a, a);
  for (std::size_t i = 0; i < e.size(); ++i) EXPECT_EQ(e.at(i), 0.0);
}

TEST(AngularError, OrthogonalAndFiveDegrees) {
  EXPECT_NEAR(angular_error_map(single({0, 0, 1}), single({0, 1, 0})).at(0), 90.0, 1e-12);
  const double t = 5.0 * M_PI / 180.0;
  EXPECT_NEAR(angular_error_map(single({0, 0, 1}), single({0, std::sin(t), std::cos(t)})).at(0), 5.0, 1e-6);
}

TEST(AngularError, InvalidPropagates) {
  NormalMap a(2, 1), b(2, 1);
  a.set(0, {0, 0, 1}, 1);
  a.set(1, {0, 0, 1}, 1);
  b.set(0, {0, 0, 1}, 1);
  const Image e = angular_error_map(a, b);
  EXPECT_TRUE(e.valid(std::size_t{0}));
  EXPECT_FALSE(e.valid(std::size_t{1}));
}

TEST(Histogram, ConstantImage) {
  const auto h = histogram(Image(5, 4, 3.0), 1.0);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h[0].count, 20u);
  EXPECT_DOUBLE_EQ(h[0].center, 3.5);
}

TEST(Histogram, EmptyMask) {
  Image img(2, 2);
  for (std::size_t i = 0; i < img.size(); ++i) img.invalidate(i);
  EXPECT_TRUE(histogram(img, 1.0).empty());
}

TEST(Histogram, UniformRampCounts) {
  Image img(1000, 1);
  for (int x = 0; x < 1000; ++x) img.set(x, 0, 10.0 * x / 1000.0);
  const auto h = histogram(img, 1.0);
  ASSERT_EQ(h.size(), 10u);
  std::size_t total = 0;
  for (const auto& b : h) {
    EXPECT_NEAR(static_cast<double>(b.count), 100.0, 1.0);
    total += b.count;
  }
  EXPECT_EQ(total, 1000u);
}

TEST(ValueStats, Basic) {
  Image img(3, 1);
  img.set(0, 0, 1.0);
  img.set(1, 0, 2.0);
  img.invalidate(2, 0);
  const ValueStats s = value_stats(img);
  EXPECT_EQ(s.min, 1.0);
  EXPECT_EQ(s.max, 2.0);
  EXPECT_EQ(s.mean, 1.5);
  EXPECT_EQ(s.count, 2u);
  img.invalidate(0, 0);
  img.invalidate(1, 0);
  EXPECT_THROW(value_stats(img), DataError);
}

TEST(ParallelRows, VisitsEveryRowOnceForAnyThreadCount) {
  for (int threads : {1, 2, 3, 8}) {
    set_thread_count(threads);
    std::vector<int> hits(37, 0);
    parallel_rows(37, [&](int r) { hits[r] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
  }
  set_thread_count(0);
  EXPECT_GE(thread_count(), 1);
}

}  // namespace
}  // namespace gradientstage
