// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

#include "gradientstage/qp_correct.hpp"

#include "gradientstage/parallel.hpp"

namespace gradientstage {

namespace {

struct Projector {
  QpMatrix a;
  Eigen::Matrix<double, 9, 6> at_inv;  // Aᵀ(AAᵀ)⁻¹

  Projector() {
    a.setZero();
    for (int i = 0; i < 3; ++i) {
      a(i, i) = 1.0;
      a(i, 6 + i) = 1.0 / 3.0;
      a(3 + i, 3 + i) = -1.0;
      a(3 + i, 6 + i) = 2.0 / 3.0;
    }
    const Eigen::Matrix<double, 6, 6> aat = a * a.transpose();
    at_inv = a.transpose() * aat.inverse();
  }
};

const Projector& projector() {
  static const Projector p;
  return p;
}

}  // namespace

const QpMatrix& qp_matrix() { return projector().a; }

QpSystem build_qp_system(const GradientImageSet& set) {
  std::array<const Image*, 7> r{};
  for (Condition c : kAllConditions) r[static_cast<std::size_t>(c)] = &set.get(c);
  QpSystem sys;
  sys.width = set.width();
  sys.height = set.height();
  const std::size_t n = static_cast<std::size_t>(sys.width) * static_cast<std::size_t>(sys.height);
  sys.b.assign(n, QpVector::Zero());
  sys.mask.assign(n, 0);
  const Image& rc = *r[static_cast<std::size_t>(Condition::C)];
  for (std::size_t i = 0; i < n; ++i) {
    bool ok = true;
    for (const Image* img : r) ok = ok && img->valid(i);
    const double c = rc.at(i);
    if (!ok || c < kDarkThreshold) continue;
    for (int a = 0; a < 3; ++a) {
      const double g = r[static_cast<std::size_t>(a)]->at(i);
      const double gb = r[static_cast<std::size_t>(a + 3)]->at(i);
      sys.b[i](a) = g / c - 0.5;
      sys.b[i](3 + a) = (g - gb) / c;
    }
    sys.mask[i] = 1;
  }
  return sys;
}

QpState solve_normal_correction(const QpVector& b, const QpState& x0) {
  const Projector& p = projector();
  return x0 + p.at_inv * (b - p.a * x0);
}

QpCorrection correct_normal_map(const GradientImageSet& set, const NormalMap& init) {
  const QpSystem sys = build_qp_system(set);
  if (init.width() != sys.width || init.height() != sys.height)
    throw DataError("initial normal map does not match the image set");
  QpCorrection out{NormalMap(sys.width, sys.height), Vec3Map(sys.width, sys.height),
                   Vec3Map(sys.width, sys.height)};
  parallel_rows(sys.height, [&](int y) {
    for (int x = 0; x < sys.width; ++x) {
      const std::size_t i = out.normals.index(x, y);
      if (!sys.mask[i] || !init.valid(i)) continue;
      QpState x0 = QpState::Zero();
      const Vec3& n0 = init.normal(i);
      x0(6) = n0.x;
      x0(7) = n0.y;
      x0(8) = n0.z;
      const QpState xs = solve_normal_correction(sys.b[i], x0);
      if (!out.normals.set_from_vector(i, {xs(6), xs(7), xs(8)})) continue;
      out.delta.set(i, {xs(0), xs(1), xs(2)});
      out.delta_bar.set(i, {xs(3), xs(4), xs(5)});
    }
  });
  return out;
}

}  // namespace gradientstage
