// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

// Equality-constrained least-distance correction of recovered normals:
//   minimise ‖x − x₀‖²  subject to  A x = b
// with x = (δ_x, δ_y, δ_z, δ_x̄, δ_ȳ, δ_z̄, n_x, n_y, n_z).

#pragma once

#include <Eigen/Dense>

#include <vector>

#include "gradientstage/core.hpp"

namespace gradientstage {

using QpMatrix = Eigen::Matrix<double, 6, 9>;
using QpVector = Eigen::Matrix<double, 6, 1>;
using QpState = Eigen::Matrix<double, 9, 1>;

// Rows 1-3: [e_a, 0, e_a/3]; rows 4-6: [0, -e_a, 2e_a/3].
const QpMatrix& qp_matrix();

struct QpSystem {
  int width = 0;
  int height = 0;
  std::vector<QpVector> b;
  std::vector<std::uint8_t> mask;  // 0 where r_c is dark or an input is invalid
};

// b = (r_a/r_c − ½ for a = x,y,z; (r_a − r_ā)/r_c for a = x,y,z).
QpSystem build_qp_system(const GradientImageSet& set);

// x₀ + Aᵀ(AAᵀ)⁻¹(b − A x₀).
QpState solve_normal_correction(const QpVector& b, const QpState& x0);

struct QpCorrection {
  NormalMap normals;    // renormalized; magnitude = corrected ‖n‖
  Vec3Map delta;        // (δ_x, δ_y, δ_z)
  Vec3Map delta_bar;    // (δ_x̄, δ_ȳ, δ_z̄)
};

// x₀ = (0, …, 0, init normal). Pixels invalid in init or in the system stay
// invalid.
QpCorrection correct_normal_map(const GradientImageSet& set, const NormalMap& init);

}  // namespace gradientstage
