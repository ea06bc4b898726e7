// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

// Warping, flow estimation and joint photometric alignment of a
// gradient/complement pair against a tracking frame.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gradientstage/core.hpp"
#include "gradientstage/flow_field.hpp"

namespace gradientstage {

// out(p) = img(p + flow(p)), bilinear; invalid outside the source.
Image warp_image(const Image& img, const FlowField& flow);

// Componentwise bilinear warp then renormalization. Magnitudes are
// interpolated the same way.
NormalMap warp_normals(const NormalMap& nm, const FlowField& flow);

// Σ |c − (g + gbar)| over jointly valid pixels. Throws on an empty mask.
double complement_residual(const Image& g, const Image& gbar, const Image& c);

struct FlowResult {
  FlowField flow;
  std::optional<std::string> warning;
};

// Estimates f with src(p + f(p)) ≈ tgt(p).
class FlowEstimator {
 public:
  virtual ~FlowEstimator() = default;
  virtual FlowResult estimate(const Image& src, const Image& tgt) const = 0;
};

struct FlowParams {
  int levels = 4;
  double lambda = 0.1;  // smoothness weight on intensities scaled to [0,1]
  int inner_iterations = 100;
  int warps = 3;  // re-linearizations per level
};

// Coarse-to-fine Horn-Schunck with warping.
class PyramidFlowEstimator : public FlowEstimator {
 public:
  explicit PyramidFlowEstimator(FlowParams params = {}) : params_(params) {}
  FlowResult estimate(const Image& src, const Image& tgt) const override;
  const FlowParams& params() const { return params_; }

 private:
  FlowParams params_;
};

FlowResult flow_estimate(const Image& src, const Image& tgt, const FlowParams& params = {});

struct AlignOptions {
  int iterations = 10;
  double min_relative_improvement = 1e-3;  // early stop
};

struct JointAlignment {
  FlowField u;  // for g
  FlowField v;  // for gbar
  double initial_residual = 0.0;  // zero u, seeded v
  std::vector<double> residuals;  // after each iteration; u, v hold the best state
  std::optional<std::string> note;
};

JointAlignment joint_photometric_align(const Image& g, const Image& gbar, const Image& c,
                                       const AlignOptions& options = {}, const FlowEstimator* estimator = nullptr);

}  // namespace gradientstage
