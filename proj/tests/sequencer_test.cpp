// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

#include "gradientstage/sequencer.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "gradientstage/photometric.hpp"
#include "test_support.hpp"

namespace gradientstage {
namespace {

using C = Condition;

bool mentions(const std::vector<std::string>& v, const std::string& what) {
  for (const auto& s : v)
    if (s.find(what) != std::string::npos) return true;
  return false;
}

TEST(GenerateSequence, OneAndThree) {
  EXPECT_EQ(generate_sequence(1).frames, (std::vector<C>{C::X, C::Z, C::C, C::Y, C::Xbar}));
  EXPECT_EQ(generate_sequence(3).frames,
            (std::vector<C>{C::X, C::Z, C::C, C::Y, C::Xbar, C::C, C::Zbar, C::Ybar, C::C, C::Xbar, C::Z}));
  EXPECT_THROW(generate_sequence(0), DataError);
}

TEST(GenerateSequence, UnitSequenceLabels) {
  const CaptureSequence s = generate_sequence(12);
  const std::vector<std::string> expected = {"x", "ybar", "zbar", "x", "y", "zbar", "xbar", "y", "z", "xbar", "ybar", "z"};
  ASSERT_EQ(s.windows.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(s.windows[i].text(), expected[i]) << i;
  const CaptureSequence longer = generate_sequence(24);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(longer.windows[i + 12], longer.windows[i]);
}

TEST(GenerateSequence, AllValidAndCounted) {
  for (int n = 1; n <= 50; ++n) {
    const CaptureSequence s = generate_sequence(n);
    EXPECT_TRUE(validate_sequence(s.frames).empty()) << n;
    EXPECT_EQ(std::count(s.frames.begin(), s.frames.end(), C::C), n);
    const int expected = image_count(n, CaptureMethod::Minimal);
    EXPECT_EQ(static_cast<int>(s.frames.size()), n % 2 == 1 ? expected : expected - 1) << n;
  }
}

TEST(GenerateSequence, WindowsHoldEachAxisOnce) {
  const CaptureSequence s = generate_sequence(20);
  for (std::size_t k = 0; k < s.windows.size(); ++k) {
    const std::size_t c = 3 * k + 2;
    std::array<int, 3> seen{};
    for (std::size_t j : {c - 2, c - 1, c + 1}) seen[static_cast<std::size_t>(*axis_of(s.frames[j]))] += 1;
    EXPECT_EQ(seen, (std::array<int, 3>{1, 1, 1}));
    EXPECT_EQ(flipped(s.frames[c - 2]), s.frames[c + 2]);
  }
}

TEST(ValidateSequence, RuleViolations) {
  EXPECT_TRUE(validate_sequence({C::X, C::Y, C::C, C::Z, C::Xbar}).empty());
  EXPECT_TRUE(mentions(validate_sequence({C::X, C::C, C::Y, C::Z, C::Xbar}), "rule 2"));
  const auto wilson = validate_sequence({C::X, C::Y, C::Z, C::C, C::Xbar, C::Ybar, C::Zbar});
  EXPECT_TRUE(mentions(wilson, "rule 2"));
  EXPECT_TRUE(mentions(validate_sequence({C::X, C::Y, C::C, C::Z, C::Ybar}), "rule 1"));
  EXPECT_TRUE(mentions(validate_sequence({C::X, C::Y, C::C, C::Zbar, C::Xbar}), "rule 1"));
  EXPECT_TRUE(mentions(validate_sequence({C::X, C::Y}), "no tracking frame"));
}

TEST(ValidateSequence, ThreeSameTypeWindowsCannotChain) {
  const std::vector<C> all_plain = {C::X, C::Y, C::C, C::Z, C::Xbar, C::C, C::Y, C::Z, C::C, C::X, C::Y};
  EXPECT_TRUE(mentions(validate_sequence(all_plain), "rule 1"));
  for (int n = 3; n <= 30; ++n) {
    const CaptureSequence s = generate_sequence(n);
    for (std::size_t k = 0; k + 2 < s.windows.size(); ++k)
      EXPECT_FALSE(s.windows[k].dual == s.windows[k + 1].dual && s.windows[k].dual == s.windows[k + 2].dual);
  }
}

TEST(ClassifyWindow, MinimalAndDual) {
  EXPECT_EQ(classify_window({C::X, C::Z, C::C, C::Y, C::Xbar}), (WindowLabel{Axis::X, false}));
  EXPECT_EQ(classify_window({C::Y, C::Xbar, C::C, C::Zbar, C::Ybar}), (WindowLabel{Axis::Y, true}));
  EXPECT_FALSE(classify_window({C::Y, C::Xbar, C::C, C::Z, C::Ybar}).has_value());
  EXPECT_FALSE(classify_window({C::Y, C::Y, C::C, C::Z, C::Ybar}).has_value());
}

TEST(ImageCount, Table) {
  const int wilson[] = {7, 11, 15, 19, 23, 27};
  const int minimal[] = {5, 9, 11, 15, 17, 21};
  for (int n = 1; n <= 6; ++n) {
    EXPECT_EQ(image_count(n, CaptureMethod::Wilson), wilson[n - 1]);
    EXPECT_EQ(image_count(n, CaptureMethod::Minimal), minimal[n - 1]);
  }
  for (int n = 1; n <= 50; ++n) EXPECT_LT(image_count(n, CaptureMethod::Minimal), image_count(n, CaptureMethod::Wilson));
  EXPECT_THROW(image_count(0, CaptureMethod::Wilson), DataError);
}

TEST(SequenceCsv, RoundTripAndLabels) {
  const auto dir = testing::temp_dir("seq_csv");
  const CaptureSequence s = generate_sequence(2);
  write_sequence_csv(dir / "s.csv", s);
  EXPECT_EQ(read_sequence_csv(dir / "s.csv"), s.frames);
  std::ifstream in(dir / "s.csv");
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), s.frames.size() + 1);
  EXPECT_EQ(lines[0], "frame_index,condition,subsequence_label");
  EXPECT_EQ(lines[1], "1,X,s_x");
  EXPECT_EQ(lines[4], "4,Y,s_x;s_ybar");
}

// Static set whose constraint r_a + r_ā = r_c holds exactly in floating point.
struct DyadicScene {
  Image c;
  std::array<Image, 3> g;
  explicit DyadicScene(int w, int h, unsigned seed) : c(w, h, 1.0), g{Image(w, h), Image(w, h), Image(w, h)} {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> q(64, 960);
    for (auto& img : g)
      for (std::size_t i = 0; i < img.size(); ++i) img.set(i, q(rng) / 1024.0);
  }
  Image frame(C cond) const {
    if (cond == C::C) return c;
    const Image& a = g[static_cast<std::size_t>(*axis_of(cond))];
    if (is_gradient(cond)) return a;
    Image out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out.set(i, 1.0 - a.at(i));
    return out;
  }
  GradientImageSet set() const {
    GradientImageSet s;
    for (C cond : kAllConditions) s.set(cond, frame(cond));
    return s;
  }
};

TEST(TrackingFrameNormal, StaticSceneEqualsMinimal) {
  const DyadicScene scene(24, 16, 3);
  const std::array<C, 5> conds = {C::Y, C::Xbar, C::C, C::Zbar, C::Ybar};
  std::array<Image, 5> frames{Image(1, 1), Image(1, 1), Image(1, 1), Image(1, 1), Image(1, 1)};
  TrackingWindow w;
  w.conditions = conds;
  for (std::size_t j = 0; j < 5; ++j) {
    frames[j] = scene.frame(conds[j]);
    w.frames[j] = &frames[j];
  }
  const NormalMap n = tracking_frame_normal(w, FlowField(24, 16), FlowField(24, 16));
  const NormalMap ref = recover_minimal(scene.set(), Axis::Y, true);
  for (std::size_t i = 0; i < n.size(); ++i) {
    ASSERT_TRUE(n.valid(i));
    EXPECT_EQ(n.normal(i), ref.normal(i));
  }
  EXPECT_THROW(tracking_frame_normal(w, FlowField(3, 3), FlowField(24, 16)), DataError);
  w.conditions[1] = C::X;
  EXPECT_THROW(tracking_frame_normal(w, FlowField(24, 16), FlowField(24, 16)), DataError);
}

TEST(TrackingFrameNormal, DualWindowMatchesSubstitution) {
  const DyadicScene scene(8, 8, 4);
  TrackingWindow w;
  w.conditions = {C::Y, C::Xbar, C::C, C::Zbar, C::Ybar};
  std::array<Image, 5> frames{scene.frame(C::Y), scene.frame(C::Xbar), scene.frame(C::C), scene.frame(C::Zbar),
                              scene.frame(C::Ybar)};
  for (std::size_t j = 0; j < 5; ++j) w.frames[j] = &frames[j];
  const NormalMap n = tracking_frame_normal(w, FlowField(8, 8), FlowField(8, 8));
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double pair = frames[0].at(i) + frames[4].at(i);
    const Vec3 raw{pair - 2.0 * frames[1].at(i), frames[0].at(i) - frames[4].at(i), pair - 2.0 * frames[3].at(i)};
    EXPECT_LT(angle_between_deg(n.normal(i), raw), 1e-12);
  }
}

TEST(IntermediateWarpedNormal, IdenticalFlanksReturnInput) {
  NormalMap nm(6, 6);
  std::mt19937_64 rng(5);
  for (std::size_t i = 0; i < nm.size(); ++i) nm.set(i, testing::random_unit(rng), 0.5);
  for (auto [tp, tn] : {std::pair{1, 2}, std::pair{2, 1}, std::pair{1, 3}}) {
    const NormalMap out = intermediate_warped_normal(nm, nm, FlowField(6, 6), FlowField(6, 6), tp, tn);
    for (std::size_t i = 0; i < nm.size(); ++i) EXPECT_EQ(out.normal(i), nm.normal(i));
  }
  EXPECT_THROW(intermediate_warped_normal(nm, nm, FlowField(6, 6), FlowField(6, 6), 0, 1), DataError);
}

TEST(IntermediateWarpedNormal, WeightsAreOppositeDistances) {
  NormalMap a(1, 1), b(1, 1);
  const Vec3 na{1, 0, 0}, nb{0, 1, 0};
  a.set(0, na, 1.0);
  b.set(0, nb, 1.0);
  const NormalMap m12 = intermediate_warped_normal(a, b, FlowField(1, 1), FlowField(1, 1), 1, 2);
  EXPECT_LT(angle_between_deg(m12.normal(0), 2.0 * na + nb), 1e-12);
  const NormalMap m13 = intermediate_warped_normal(a, b, FlowField(1, 1), FlowField(1, 1), 1, 3);
  EXPECT_LT(angle_between_deg(m13.normal(0), 3.0 * na + nb), 1e-12);
}

TEST(IntermediateWarpedNormal, OneSidedWhereOtherWarpIsInvalid) {
  NormalMap a(4, 1), b(4, 1);
  for (std::size_t i = 0; i < 4; ++i) {
    a.set(i, {1, 0, 0}, 1.0);
    b.set(i, {0, 0, 1}, 1.0);
  }
  const NormalMap out = intermediate_warped_normal(a, b, FlowField(4, 1), FlowField::constant(4, 1, {-2.0, 0.0}), 1, 2);
  EXPECT_EQ(out.normal(std::size_t{3}), (Vec3{1, 0, 0}));
  EXPECT_LT(angle_between_deg(out.normal(std::size_t{0}), {2, 0, 1}), 1e-12);
}

TEST(ProcessSequence, StaticSceneIsBitExact) {
  const DyadicScene scene(20, 12, 6);
  const CaptureSequence seq = generate_sequence(5);
  std::vector<Image> images;
  for (C cond : seq.frames) images.push_back(scene.frame(cond));
  const std::vector<WindowFlows> zero(5, WindowFlows{FlowField(20, 12), FlowField(20, 12)});
  const ProcessedSequence p = process_sequence(seq.frames, images, zero);
  ASSERT_EQ(p.normals.size(), seq.frames.size());
  const NormalMap ref = recover_minimal(scene.set(), Axis::X);
  for (const NormalMap& n : p.normals)
    for (std::size_t i = 0; i < n.size(); ++i) {
      ASSERT_TRUE(n.valid(i));
      ASSERT_EQ(n.normal(i), ref.normal(i));
    }
}

TEST(ProcessSequence, StaticSceneWithAlignment) {
  const DyadicScene scene(32, 32, 7);
  const CaptureSequence seq = generate_sequence(2);
  std::vector<Image> images;
  for (C cond : seq.frames) images.push_back(scene.frame(cond));
  const ProcessedSequence p = process_sequence(seq.frames, images, {}, {3, 1e-3});
  const NormalMap ref = recover_minimal(scene.set(), Axis::X);
  ASSERT_EQ(p.residuals.size(), 2u);
  for (const NormalMap& n : p.normals) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i)
      if (n.valid(i)) worst = std::max(worst, angle_between_deg(n.normal(i), ref.normal(i)));
    EXPECT_LT(worst, 1e-6);
  }
}

TEST(ProcessSequence, RejectsInvalidInput) {
  const DyadicScene scene(8, 8, 1);
  const std::vector<C> bad = {C::X, C::C, C::Y, C::Z, C::Xbar};
  std::vector<Image> images;
  for (C cond : bad) images.push_back(scene.frame(cond));
  EXPECT_THROW(process_sequence(bad, images), DataError);
  images.pop_back();
  EXPECT_THROW(process_sequence(generate_sequence(1).frames, images), DataError);
}

// Bumpy diffuse surface translating +1 px per frame along x.
struct MovingSurface {
  testing::SmoothTexture albedo{23, 24, 8.0, 30.0};
  Vec3 normal(double x, double y) const {
    return normalized({0.35 * std::sin(x / 9.0 + 0.3 * y / 11.0), 0.3 * std::cos(y / 10.0), 1.0});
  }
  double radiance(C cond, double x, double y) const {
    const Vec3 n = normal(x, y);
    const double k = M_PI * (0.5 + 0.25 * std::tanh(2.0 * (albedo(x, y) - 0.5))) / 2.0;
    if (cond == C::C) return k;
    const double na = n[static_cast<int>(*axis_of(cond))];
    return k * ((is_gradient(cond) ? na : -na) / 3.0 + 0.5);
  }
};

TEST(ProcessSequence, UniformTranslationTrackingNormals) {
  const MovingSurface s;
  const int w = 96, h = 72;
  const CaptureSequence seq = generate_sequence(3);
  std::vector<Image> images;
  for (std::size_t t = 0; t < seq.frames.size(); ++t)
    images.push_back(testing::sample_image(w, h, [&](double x, double y) { return s.radiance(seq.frames[t], x - t, y); }));
  const ProcessedSequence p = process_sequence(seq.frames, images);
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t c = 3 * k + 2;
    const NormalMap& n = p.normals[c];
    double sum = 0.0;
    int count = 0;
    for (int y = 8; y < h - 8; ++y)
      for (int x = 8; x < w - 8; ++x) {
        if (!n.valid(x, y)) continue;
        sum += angle_between_deg(n.normal(x, y), s.normal(x - static_cast<double>(c), y));
        ++count;
      }
    ASSERT_GT(count, 0);
    EXPECT_LT(sum / count, 1.0) << "tracking frame " << k;
    EXPECT_NEAR(p.flows[k].u.at(w / 2, h / 2).dx, -2.0, 0.3);
    EXPECT_NEAR(p.flows[k].v.at(w / 2, h / 2).dx, 2.0, 0.3);
  }
}

}  // namespace
}  // namespace gradientstage
