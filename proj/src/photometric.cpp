// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

#include "gradientstage/photometric.hpp"

#include <functional>

#include "gradientstage/parallel.hpp"

namespace gradientstage {

namespace {

// Runs fn(i) -> optional vector over pixels valid in every listed image.
template <typename Fn>
NormalMap per_pixel(const GradientImageSet& set, const std::vector<Condition>& needed, Fn fn) {
  std::vector<const Image*> images;
  for (Condition c : needed) images.push_back(&set.get(c));
  const int w = set.width(), h = set.height();
  NormalMap out(w, h);
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = out.index(x, y);
      bool ok = true;
      for (const Image* img : images) ok = ok && img->valid(i);
      if (!ok) continue;
      const std::optional<Vec3> v = fn(i);
      if (v) out.set_from_vector(i, *v);
    }
  });
  return out;
}

}  // namespace

NormalMap recover_ma(const GradientImageSet& set) {
  set.require({Condition::X, Condition::Y, Condition::Z, Condition::C});
  const Image& rx = set.get(Condition::X);
  const Image& ry = set.get(Condition::Y);
  const Image& rz = set.get(Condition::Z);
  const Image& rc = set.get(Condition::C);
  return per_pixel(set, {Condition::X, Condition::Y, Condition::Z, Condition::C},
                   [&](std::size_t i) -> std::optional<Vec3> {
                     const double c = rc.at(i);
                     if (c < kDarkThreshold) return std::nullopt;
                     return Vec3{rx.at(i) / c - 0.5, ry.at(i) / c - 0.5, rz.at(i) / c - 0.5};
                   });
}

NormalMap recover_wilson(const GradientImageSet& set) {
  const std::vector<Condition> needed = {Condition::X,    Condition::Y,    Condition::Z,
                                         Condition::Xbar, Condition::Ybar, Condition::Zbar};
  for (Condition c : needed) (void)set.get(c);
  std::array<const Image*, 6> r{};
  for (int k = 0; k < 6; ++k) r[static_cast<std::size_t>(k)] = &set.get(needed[static_cast<std::size_t>(k)]);
  return per_pixel(set, needed, [&](std::size_t i) -> std::optional<Vec3> {
    return Vec3{r[0]->at(i) - r[3]->at(i), r[1]->at(i) - r[4]->at(i), r[2]->at(i) - r[5]->at(i)};
  });
}

std::vector<Condition> minimal_conditions(Axis base, bool dual) {
  std::vector<Condition> out;
  for (int a = 0; a < 3; ++a) out.push_back(dual ? complement_condition(static_cast<Axis>(a))
                                                 : gradient_condition(static_cast<Axis>(a)));
  out.push_back(dual ? gradient_condition(base) : complement_condition(base));
  return out;
}

NormalMap recover_minimal(const GradientImageSet& set, Axis base, bool dual) {
  const std::vector<Condition> needed = minimal_conditions(base, dual);
  for (Condition c : needed) (void)set.get(c);
  const int a = static_cast<int>(base);
  const Image& ra = set.get(gradient_condition(base));
  const Image& rabar = set.get(complement_condition(base));
  std::array<const Image*, 3> others{};
  for (int b = 0; b < 3; ++b) {
    const Axis ax = static_cast<Axis>(b);
    others[static_cast<std::size_t>(b)] = &set.get(dual ? complement_condition(ax) : gradient_condition(ax));
  }
  return per_pixel(set, needed, [&](std::size_t i) -> std::optional<Vec3> {
    const double pair = ra.at(i) + rabar.at(i);
    Vec3 v;
    for (int b = 0; b < 3; ++b) {
      if (b == a) {
        v[b] = ra.at(i) - rabar.at(i);
      } else if (dual) {
        v[b] = pair - 2.0 * others[static_cast<std::size_t>(b)]->at(i);
      } else {
        v[b] = 2.0 * others[static_cast<std::size_t>(b)]->at(i) - pair;
      }
    }
    return v;
  });
}

SpecularRecovery recover_specular(const GradientImageSet& set, const Vec3& view) {
  set.require({Condition::X, Condition::Y, Condition::Z, Condition::C});
  const Vec3 to_camera = normalized(view);
  const Image& rx = set.get(Condition::X);
  const Image& ry = set.get(Condition::Y);
  const Image& rz = set.get(Condition::Z);
  const Image& rc = set.get(Condition::C);
  SpecularRecovery out{per_pixel(set, {Condition::X, Condition::Y, Condition::Z, Condition::C},
                                 [&](std::size_t i) -> std::optional<Vec3> {
                                   const double h = 0.5 * rc.at(i);
                                   return Vec3{rx.at(i) - h, ry.at(i) - h, rz.at(i) - h};
                                 }),
                       NormalMap(set.width(), set.height())};
  for (std::size_t i = 0; i < out.reflection.size(); ++i) {
    if (!out.reflection.valid(i)) continue;
    if (out.normals.set_from_vector(i, out.reflection.normal(i) + to_camera))
      out.normals.set(i, out.normals.normal(i), out.reflection.magnitude(i));
  }
  return out;
}

double ideal_lobe_centroid(double k) {
  if (!(k > 0.0)) throw DataError("lobe parameter k must be positive");
  const double denom = 4.0 * (k * k - 3.0);
  if (std::abs(k * k - 3.0) < 1e-12) throw DataError("lobe centroid is singular at k^2 = 3");
  return 3.0 * (k * k - 2.0 * k) / denom;
}

MagnitudeSummary magnitude_stats(const NormalMap& map, double bin_width) {
  Image mag(map.width(), map.height());
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map.valid(i)) {
      mag.set(i, map.magnitude(i));
    } else {
      mag.invalidate(i);
    }
  }
  MagnitudeSummary s;
  s.stats = value_stats(mag);
  s.histogram = histogram(mag, bin_width);
  return s;
}

}  // namespace gradientstage
