// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

#include "gradientstage/stage.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

#include "gradientstage/parallel.hpp"

namespace gradientstage {

void LightStage::validate() const {
  if (leds.empty()) throw DataError("light stage has no LEDs");
  if (quantization_levels < 2) throw DataError("quantization_levels must be >= 2");
  if (!(stage_radius > 0.0)) throw DataError("stage radius must be positive");
  for (const auto& led : leds) {
    if (!is_finite(led.direction) || std::abs(norm(led.direction) - 1.0) > 1e-9)
      throw DataError("LED " + std::to_string(led.id) + " direction is not unit length");
    if (!(led.intensity >= 0.0 && led.intensity <= 1.0))
      throw DataError("LED " + std::to_string(led.id) + " intensity outside [0,1]");
  }
}

LightStage LightStage::from_directions(const std::vector<Vec3>& directions, double stage_radius,
                                       int quantization_levels) {
  LightStage s;
  s.stage_radius = stage_radius;
  s.quantization_levels = quantization_levels;
  s.leds.reserve(directions.size());
  for (std::size_t i = 0; i < directions.size(); ++i)
    s.leds.push_back({static_cast<int>(i), normalized(directions[i]), 1.0});
  s.validate();
  return s;
}

std::vector<Vec3> generate_icosphere_directions(int subdivisions) {
  if (subdivisions < 0 || subdivisions > 3) throw DataError("icosphere subdivisions must be in 0..3");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                             {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : verts) v = normalized(v);
  std::vector<std::array<int, 3>> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                           {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                           {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                           {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      verts.push_back(normalized(verts[static_cast<std::size_t>(a)] + verts[static_cast<std::size_t>(b)]));
      const int idx = static_cast<int>(verts.size()) - 1;
      midpoints.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  return verts;
}

std::vector<Vec3> select_hemisphere(const std::vector<Vec3>& directions, const Vec3& axis, std::size_t count) {
  const Vec3 a = normalized(axis);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < directions.size(); ++i)
    if (dot(directions[i], a) > 0.0) order.push_back(i);
  if (count == directions.size()) return directions;
  if (count > order.size())
    throw DataError("select_hemisphere: only " + std::to_string(order.size()) + " directions face the axis");
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return dot(directions[i], a) > dot(directions[j], a); });
  order.resize(count);
  std::sort(order.begin(), order.end());
  std::vector<Vec3> out;
  out.reserve(count);
  for (std::size_t i : order) out.push_back(directions[i]);
  return out;
}

double gradient_intensity(const Vec3& d, Condition condition) {
  switch (condition) {
    case Condition::X: return (d.x + 1.0) / 2.0;
    case Condition::Y: return (d.y + 1.0) / 2.0;
    case Condition::Z: return (d.z + 1.0) / 2.0;
    case Condition::Xbar: return (-d.x + 1.0) / 2.0;
    case Condition::Ybar: return (-d.y + 1.0) / 2.0;
    case Condition::Zbar: return (-d.z + 1.0) / 2.0;
    case Condition::C: return 1.0;
  }
  return 0.0;
}

namespace {

int quantize_level(double p, int levels) {
  const int top = levels - 1;
  const int level = static_cast<int>(std::floor(p * top + 0.5));
  return std::clamp(level, 0, top);
}

double led_power(const LedRecord& led, Condition c) {
  return std::clamp(gradient_intensity(led.direction, c) * led.intensity, 0.0, 1.0);
}

}  // namespace

std::vector<IltEntry> build_ilt(const LightStage& stage, Condition condition) {
  stage.validate();
  std::vector<IltEntry> out;
  out.reserve(stage.leds.size());
  for (const auto& led : stage.leds)
    out.push_back({led.id, quantize_level(led_power(led, condition), stage.quantization_levels)});
  return out;
}

SceneSpec::SceneSpec(NormalMap normals)
    : true_normals(std::move(normals)),
      albedo(true_normals.width(), true_normals.height(), 1.0),
      occlusion(true_normals.width(), true_normals.height(), 1.0),
      distortion(true_normals.size(), Distortion{}) {}

void SceneSpec::validate() const {
  const int w = width(), h = height();
  if (albedo.width() != w || albedo.height() != h || occlusion.width() != w || occlusion.height() != h ||
      distortion.size() != true_normals.size())
    throw DataError("scene layers do not match the normal map dimensions");
  for (std::size_t i = 0; i < true_normals.size(); ++i) {
    if (!true_normals.valid(i)) continue;
    if (albedo.at(i) > 1.0) throw DataError("albedo must lie in [0,1]");
    if (occlusion.at(i) > 1.0) throw DataError("occlusion V_p must lie in [0,1]");
  }
}

SpecularSceneSpec::SpecularSceneSpec(NormalMap reflections, double strength)
    : reflection_vectors(std::move(reflections)),
      lobe_strength(reflection_vectors.width(), reflection_vectors.height(), strength) {}

Image render_lambert_analytic(const SceneSpec& scene, Condition condition) {
  scene.validate();
  const int w = scene.width();
  Image out(w, scene.height());
  parallel_rows(scene.height(), [&](int y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = out.index(x, y);
      if (!scene.true_normals.valid(i) || !scene.albedo.valid(i) || !scene.occlusion.valid(i)) {
        out.invalidate(i);
        continue;
      }
      const double k = M_PI * scene.albedo.at(i) * scene.occlusion.at(i) / 2.0;
      const Vec3& n = scene.true_normals.normal(i);
      const Distortion& d = scene.distortion[i];
      double r = k;
      if (condition != Condition::C) {
        const int a = static_cast<int>(*axis_of(condition));
        if (is_gradient(condition)) {
          r = k * (d[a] + n[a] / 3.0 + 0.5);
        } else {
          r = k * (d[a] + d[a + 3] - n[a] / 3.0 + 0.5);
        }
      }
      if (r < 0.0 || !std::isfinite(r)) {
        out.invalidate(i);
      } else {
        out.set(i, r);
      }
    }
  });
  return out;
}

GradientImageSet render_lambert_analytic_set(const SceneSpec& scene) {
  GradientImageSet set;
  for (Condition c : kAllConditions) set.set(c, render_lambert_analytic(scene, c));
  return set;
}

Image render_lambert_discrete(const SceneSpec& scene, const LightStage& stage, Condition condition,
                              const DiscreteRenderOptions& options) {
  stage.validate();
  scene.validate();
  const std::size_t n_led = stage.leds.size();
  if (!options.led_gain.empty() && options.led_gain.size() != n_led)
    throw DataError("led_gain must have one entry per LED");
  std::vector<double> power(n_led);
  for (std::size_t l = 0; l < n_led; ++l) {
    const double p = led_power(stage.leds[l], condition);
    power[l] = options.quantize
                   ? static_cast<double>(quantize_level(p, stage.quantization_levels)) / (stage.quantization_levels - 1)
                   : p;
    if (!options.led_gain.empty()) {
      const double g = options.led_gain[l];
      if (!std::isfinite(g) || g < 0.0) throw DataError("led_gain entries must be finite and non-negative");
      power[l] *= g;
    }
  }
  const double weight = 2.0 * M_PI / static_cast<double>(n_led);
  const int w = scene.width();
  Image out(w, scene.height());
  parallel_rows(scene.height(), [&](int y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = out.index(x, y);
      if (!scene.true_normals.valid(i) || !scene.albedo.valid(i)) {
        out.invalidate(i);
        continue;
      }
      const Vec3& n = scene.true_normals.normal(i);
      double sum = 0.0;
      for (std::size_t l = 0; l < n_led; ++l) {
        const double c = dot(n, stage.leds[l].direction);
        if (c <= 0.0 || power[l] == 0.0) continue;
        if (options.occluded && options.occluded(i, l)) continue;
        sum += power[l] * c;
      }
      out.set(i, weight * scene.albedo.at(i) * sum);
    }
  });
  return out;
}

GradientImageSet render_lambert_discrete_set(const SceneSpec& scene, const LightStage& stage,
                                             const DiscreteRenderOptions& options) {
  GradientImageSet set;
  for (Condition c : kAllConditions) set.set(c, render_lambert_discrete(scene, stage, c, options));
  return set;
}

Image render_specular_analytic(const SpecularSceneSpec& scene, Condition condition) {
  const NormalMap& u = scene.reflection_vectors;
  if (scene.lobe_strength.width() != u.width() || scene.lobe_strength.height() != u.height())
    throw DataError("lobe strength does not match the reflection map");
  Image out(u.width(), u.height());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!u.valid(i) || !scene.lobe_strength.valid(i)) {
      out.invalidate(i);
      continue;
    }
    const double s = scene.lobe_strength.at(i);
    out.set(i, s * (condition == Condition::C ? 1.0 : gradient_intensity(u.normal(i), condition)));
  }
  return out;
}

GradientImageSet render_specular_analytic_set(const SpecularSceneSpec& scene) {
  GradientImageSet set;
  for (Condition c : kAllConditions) set.set(c, render_specular_analytic(scene, c));
  return set;
}

SceneSpec make_cylinder_scene(int width, int height, double radius_px) {
  if (!(radius_px > 0.0) || 2.0 * radius_px > width) throw DataError("cylinder radius must fit in the image");
  NormalMap nm(width, height);
  const double cx = (width - 1) / 2.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = (x - cx) / radius_px;
      if (std::abs(dx) > 1.0) continue;
      nm.set(nm.index(x, y), normalized({dx, 0.0, std::sqrt(std::max(0.0, 1.0 - dx * dx))}), 1.0);
    }
  }
  return SceneSpec(std::move(nm));
}

SceneSpec make_sphere_scene(int width, int height, double radius_px) {
  if (!(radius_px > 0.0) || 2.0 * radius_px > std::min(width, height))
    throw DataError("sphere radius must fit in the image");
  NormalMap nm(width, height);
  const double cx = (width - 1) / 2.0, cy = (height - 1) / 2.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = (x - cx) / radius_px;
      // Image rows grow downward; scene +y points up.
      const double dy = (cy - y) / radius_px;
      const double r2 = dx * dx + dy * dy;
      if (r2 > 1.0) continue;
      nm.set(nm.index(x, y), normalized({dx, dy, std::sqrt(std::max(0.0, 1.0 - r2))}), 1.0);
    }
  }
  return SceneSpec(std::move(nm));
}

void apply_multiplicative_noise(Image& image, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (!image.valid(i)) continue;
    image.set(i, std::max(0.0, image.at(i) * (1.0 + sigma * gauss(rng))));
  }
}

void apply_multiplicative_noise(GradientImageSet& set, double sigma, std::mt19937_64& rng) {
  for (Condition c : kAllConditions) {
    if (!set.has(c)) continue;
    Image img = set.get(c);
    apply_multiplicative_noise(img, sigma, rng);
    set.set(c, std::move(img));
  }
}

void write_leds_json(const std::filesystem::path& path, const LightStage& stage) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& led : stage.leds)
    j.push_back({{"id", led.id}, {"x", led.direction.x}, {"y", led.direction.y}, {"z", led.direction.z}});
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

LightStage read_leds_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  LightStage stage;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& e : j) {
      const Vec3 d{e.at("x").get<double>(), e.at("y").get<double>(), e.at("z").get<double>()};
      stage.leds.push_back({e.at("id").get<int>(), normalized(d), 1.0});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad LED file " + path.string() + ": " + e.what());
  }
  stage.validate();
  return stage;
}

void write_ilt_csv(const std::filesystem::path& path, const std::vector<IltEntry>& ilt) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "id,level\n";
  for (const auto& e : ilt) out << e.id << ',' << e.level << '\n';
}

}  // namespace gradientstage
