// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic light stage: LED constellations, gradient intensities, ILTs and
// the analytic / discrete radiance renderers used as ground truth.

#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <random>
#include <vector>

#include "gradientstage/core.hpp"

namespace gradientstage {

struct LedRecord {
  int id = 0;
  Vec3 direction;          // unit, from the stage centre
  double intensity = 1.0;  // per-LED brightness scale in [0,1]
};

struct LightStage {
  std::vector<LedRecord> leds;
  double stage_radius = 1000.0;  // mm
  int quantization_levels = 4096;

  // Throws DataError when an invariant is broken.
  void validate() const;
  // LEDs numbered 0..n-1 in input order.
  static LightStage from_directions(const std::vector<Vec3>& directions, double stage_radius = 1000.0,
                                    int quantization_levels = 4096);
};

// 12, 42, 162, 642 unit directions for 0..3 subdivisions.
std::vector<Vec3> generate_icosphere_directions(int subdivisions);

// The `count` directions closest to `axis`, ties by input order; returned in
// input order.
std::vector<Vec3> select_hemisphere(const std::vector<Vec3>& directions, const Vec3& axis, std::size_t count);

double gradient_intensity(const Vec3& direction, Condition condition);

struct IltEntry {
  int id = 0;
  int level = 0;
};
// round(intensity * (levels - 1)), half up.
std::vector<IltEntry> build_ilt(const LightStage& stage, Condition condition);

// Per-pixel distortion (δ_x, δ_y, δ_z, δ_x̄, δ_ȳ, δ_z̄).
using Distortion = std::array<double, 6>;

struct SceneSpec {
  NormalMap true_normals;
  Image albedo;     // ρ_D
  Image occlusion;  // V_p
  std::vector<Distortion> distortion;

  // Unit albedo and visibility, zero distortion.
  explicit SceneSpec(NormalMap normals);
  int width() const { return true_normals.width(); }
  int height() const { return true_normals.height(); }
  void validate() const;
};

struct SpecularSceneSpec {
  NormalMap reflection_vectors;
  Image lobe_strength;

  explicit SpecularSceneSpec(NormalMap reflections, double strength = 1.0);
};

// Pixels with invalid normals, or where the distorted model goes negative,
// come out invalid.
Image render_lambert_analytic(const SceneSpec& scene, Condition condition);
GradientImageSet render_lambert_analytic_set(const SceneSpec& scene);

struct DiscreteRenderOptions {
  bool quantize = false;  // use ILT levels instead of exact intensities
  // Returns true when LED `led` (index into stage.leds) is hidden from pixel `pixel`.
  std::function<bool(std::size_t pixel, std::size_t led)> occluded;
  // Optional per-LED emission multiplier (index into stage.leds).
  std::vector<double> led_gain;
};

// (2π/N) Σ P_i ρ max(0, n·ω_i). V_p and δ are not used; occlusion comes from
// options.occluded.
Image render_lambert_discrete(const SceneSpec& scene, const LightStage& stage, Condition condition,
                              const DiscreteRenderOptions& options = {});
GradientImageSet render_lambert_discrete_set(const SceneSpec& scene, const LightStage& stage,
                                             const DiscreteRenderOptions& options = {});

Image render_specular_analytic(const SpecularSceneSpec& scene, Condition condition);
GradientImageSet render_specular_analytic_set(const SpecularSceneSpec& scene);

// Vertical-axis cylinder (normals in the x-z plane) / sphere centred in the
// image. Background invalid.
SceneSpec make_cylinder_scene(int width, int height, double radius_px);
SceneSpec make_sphere_scene(int width, int height, double radius_px);

// Multiplies each valid sample by (1 + sigma * N(0,1)), clamped at 0.
void apply_multiplicative_noise(Image& image, double sigma, std::mt19937_64& rng);
void apply_multiplicative_noise(GradientImageSet& set, double sigma, std::mt19937_64& rng);

// JSON `[{id, x, y, z}]`; CSV `id,level`.
void write_leds_json(const std::filesystem::path& path, const LightStage& stage);
LightStage read_leds_json(const std::filesystem::path& path);
void write_ilt_csv(const std::filesystem::path& path, const std::vector<IltEntry>& ilt);

}  // namespace gradientstage
