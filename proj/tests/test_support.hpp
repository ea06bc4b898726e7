// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gradientstage/core.hpp"

namespace gradientstage::testing {

// Smooth band-limited texture defined on the continuous plane, so shifted
// copies can be sampled exactly.
class SmoothTexture {
 public:
  explicit SmoothTexture(unsigned seed, int terms = 24, double min_wavelength = 10.0, double max_wavelength = 48.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI), wl(min_wavelength, max_wavelength);
    for (int k = 0; k < terms; ++k) {
      const double th = angle(rng), l = wl(rng);
      waves_.push_back({std::cos(th) * 2.0 * M_PI / l, std::sin(th) * 2.0 * M_PI / l, angle(rng)});
    }
  }
  // Values in roughly [0.1, 0.9].
  double operator()(double x, double y) const {
    double s = 0.0;
    for (const auto& w : waves_) s += std::sin(w.kx * x + w.ky * y + w.phase);
    return 0.5 + 0.4 * s / std::sqrt(2.0 * static_cast<double>(waves_.size())) * 1.2;
  }

 private:
  struct Wave {
    double kx, ky, phase;
  };
  std::vector<Wave> waves_;
};

inline Image sample_image(int w, int h, const std::function<double(double, double)>& f) {
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set(x, y, std::max(0.0, f(x, y)));
  return img;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("gradientstage_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline Vec3 random_unit(std::mt19937_64& rng, bool front = true) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    Vec3 v{g(rng), g(rng), g(rng)};
    if (front) v.z = std::abs(v.z);
    const double n = norm(v);
    if (n > 1e-3) return v / n;
  }
}

}  // namespace gradientstage::testing
