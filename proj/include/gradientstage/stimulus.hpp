// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

// Shape-only, texture-only and combined stimulus images.

#pragma once

#include <optional>
#include <string>

#include "gradientstage/core.hpp"

namespace gradientstage {

struct ShapeImage {
  Image image;
  std::optional<std::string> warning;  // set when a light is not front-facing
};

// ½ (max(0, n·l1) + max(0, n·l2)).
ShapeImage shape_only(const NormalMap& normals, const Vec3& l1 = {0.3, 0.3, 0.906},
                      const Vec3& l2 = {-0.3, 0.3, 0.906});

// Scaled by its own maximum; throws on an all-zero image.
Image texture_only(const Image& diffuse_c);

// Per-pixel product clamped to [0,1].
Image combined(const Image& shape, const Image& texture);

}  // namespace gradientstage
