// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "gradientstage/core.hpp"

namespace gradientstage {

struct Displacement {
  double dx = 0.0;
  double dy = 0.0;
};

// Per-pixel displacement (px) with validity mask. Warping by a flow samples
// the source at p + flow(p). Starts all valid and zero.
class FlowField {
 public:
  FlowField(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return vectors_.size(); }
  bool same_shape(const Image& img) const { return width_ == img.width() && height_ == img.height(); }
  bool same_shape(const FlowField& o) const { return width_ == o.width_ && height_ == o.height_; }

  const Displacement& at(std::size_t i) const { return vectors_[i]; }
  const Displacement& at(int x, int y) const { return vectors_[index(x, y)]; }
  bool valid(std::size_t i) const { return mask_[i] != 0; }
  void set(std::size_t i, Displacement d);
  void invalidate(std::size_t i) {
    vectors_[i] = {};
    mask_[i] = 0;
  }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  static FlowField constant(int width, int height, Displacement d);

 private:
  int width_;
  int height_;
  std::vector<Displacement> vectors_;
  std::vector<std::uint8_t> mask_;
};

// Per-pixel multiple of a flow; mask preserved.
FlowField scale_flow(const FlowField& f, double factor);
inline FlowField negate_flow(const FlowField& f) { return scale_flow(f, -1.0); }
// Halved displacements (linear-motion approximation for an adjacent frame).
inline FlowField half_flow(const FlowField& f) { return scale_flow(f, 0.5); }

}  // namespace gradientstage
