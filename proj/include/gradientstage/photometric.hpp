// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

// Normal recovery from spherical gradient images.

#pragma once

#include <vector>

#include "gradientstage/core.hpp"

namespace gradientstage {

// Needs X, Y, Z, C. Magnitude channel holds N_d.
NormalMap recover_ma(const GradientImageSet& set);

// Needs all three gradients and all three complements.
NormalMap recover_wilson(const GradientImageSet& set);

// Non-dual: X, Y, Z and the base complement.
// Dual: Xbar, Ybar, Zbar and the base gradient.
NormalMap recover_minimal(const GradientImageSet& set, Axis base, bool dual = false);

// Conditions a minimal recovery reads.
std::vector<Condition> minimal_conditions(Axis base, bool dual);

struct SpecularRecovery {
  NormalMap reflection;  // u, magnitude N_s
  NormalMap normals;     // halfway normal
};
// `view` points from the surface toward the camera; default (0,0,1).
SpecularRecovery recover_specular(const GradientImageSet& set, const Vec3& view = {0.0, 0.0, 1.0});

// 3(k² − 2k) / (4(k² − 3)); throws for k ≤ 0 or k² = 3.
double ideal_lobe_centroid(double k);

struct MagnitudeSummary {
  ValueStats stats;
  std::vector<HistogramBin> histogram;
};
MagnitudeSummary magnitude_stats(const NormalMap& map, double bin_width = 0.01);

}  // namespace gradientstage
