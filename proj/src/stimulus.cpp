// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

#include "gradientstage/stimulus.hpp"

#include <algorithm>

namespace gradientstage {

ShapeImage shape_only(const NormalMap& normals, const Vec3& l1, const Vec3& l2) {
  ShapeImage out{Image(normals.width(), normals.height()), std::nullopt};
  if (std::abs(norm(l1) - 1.0) > 1e-3 || std::abs(norm(l2) - 1.0) > 1e-3)
    out.warning = "light vectors are not unit length; normalizing";
  const Vec3 a = normalized(l1), b = normalized(l2);
  if (a.z <= 0.0 || b.z <= 0.0) out.warning = "light vector with non-positive z is not front-facing";
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (!normals.valid(i)) {
      out.image.invalidate(i);
      continue;
    }
    const Vec3& n = normals.normal(i);
    const double v = 0.5 * (std::max(0.0, dot(n, a)) + std::max(0.0, dot(n, b)));
    out.image.set(i, std::clamp(v, 0.0, 1.0));
  }
  return out;
}

Image texture_only(const Image& diffuse_c) {
  const double m = diffuse_c.max_valid();
  if (!(m > 0.0)) throw DataError("texture image is all zero");
  Image out(diffuse_c.width(), diffuse_c.height());
  for (std::size_t i = 0; i < diffuse_c.size(); ++i) {
    if (diffuse_c.valid(i)) {
      out.set(i, diffuse_c.at(i) / m);
    } else {
      out.invalidate(i);
    }
  }
  return out;
}

Image combined(const Image& shape, const Image& texture) {
  if (!shape.same_shape(texture)) throw DataError("combined: dimension mismatch");
  Image out(shape.width(), shape.height());
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape.valid(i) && texture.valid(i)) {
      out.set(i, std::clamp(shape.at(i) * texture.at(i), 0.0, 1.0));
    } else {
      out.invalidate(i);
    }
  }
  return out;
}

}  // namespace gradientstage
