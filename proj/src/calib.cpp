// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

#include "gradientstage/calib.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace gradientstage {

namespace {

std::vector<std::uint8_t> morph(const std::vector<std::uint8_t>& in, int w, int h, int r, bool erode) {
  std::vector<std::pair<int, int>> disk;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      if (dx * dx + dy * dy <= r * r) disk.emplace_back(dx, dy);
  std::vector<std::uint8_t> out(in.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool hit = erode;
      for (const auto& [dx, dy] : disk) {
        const int xx = x + dx, yy = y + dy;
        const bool on = xx >= 0 && yy >= 0 && xx < w && yy < h &&
                        in[static_cast<std::size_t>(yy) * static_cast<std::size_t>(w) + static_cast<std::size_t>(xx)];
        if (erode && !on) {
          hit = false;
          break;
        }
        if (!erode && on) {
          hit = true;
          break;
        }
      }
      out[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = hit ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

Point2 detect_highlight_centroid(const Image& img, double threshold, int morph_radius) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw DataError("highlight threshold must lie in (0,1)");
  if (morph_radius < 0) throw DataError("morphology radius must be >= 0");
  const double peak = img.max_valid();
  if (!(peak > 0.0)) throw DataError("no highlight");
  const int w = img.width(), h = img.height();
  std::vector<std::uint8_t> mask(img.size(), 0);
  for (std::size_t i = 0; i < img.size(); ++i) mask[i] = img.valid(i) && img.at(i) >= threshold * peak;
  if (morph_radius > 0) mask = morph(morph(mask, w, h, morph_radius, true), w, h, morph_radius, false);

  std::vector<int> label(img.size(), -1);
  std::vector<std::size_t> best;
  std::vector<std::size_t> stack, component;
  for (std::size_t seed = 0; seed < img.size(); ++seed) {
    if (!mask[seed] || label[seed] >= 0) continue;
    component.clear();
    stack.assign(1, seed);
    label[seed] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      component.push_back(i);
      const int x = static_cast<int>(i % static_cast<std::size_t>(w)), y = static_cast<int>(i / static_cast<std::size_t>(w));
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
          const std::size_t j = img.index(xx, yy);
          if (mask[j] && label[j] < 0) {
            label[j] = 1;
            stack.push_back(j);
          }
        }
      }
    }
    if (component.size() > best.size()) best = component;
  }
  if (best.empty()) throw DataError("no highlight");
  // Weights come from the thresholded pixels connected to the surviving
  // component, so the opening does not clip the spot asymmetrically.
  std::vector<std::uint8_t> seen(img.size(), 0);
  stack = best;
  best.clear();
  for (std::size_t i : stack) seen[i] = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    best.push_back(i);
    const int x = static_cast<int>(i % static_cast<std::size_t>(w)), y = static_cast<int>(i / static_cast<std::size_t>(w));
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int xx = x + dx, yy = y + dy;
        if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
        const std::size_t j = img.index(xx, yy);
        if (!seen[j] && img.valid(j) && img.at(j) >= threshold * peak) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i : best) {
    const double v = img.at(i);
    sw += v;
    sx += v * static_cast<double>(i % static_cast<std::size_t>(w));
    sy += v * static_cast<double>(i / static_cast<std::size_t>(w));
  }
  return {sx / sw, sy / sw};
}

Eigen::Matrix3d Conic::matrix() const {
  Eigen::Matrix3d m;
  m << a, b / 2, d / 2, b / 2, c, e / 2, d / 2, e / 2, f;
  return m;
}

double Conic::evaluate(const Point2& p) const {
  return a * p.x * p.x + b * p.x * p.y + c * p.y * p.y + d * p.x + e * p.y + f;
}

namespace {

// Similarity taking points to zero mean and mean distance √2.
Eigen::Matrix3d normalizing_transform(const std::vector<Point2>& pts) {
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double dist = 0.0;
  for (const auto& p : pts) dist += std::hypot(p.x - mx, p.y - my);
  dist /= static_cast<double>(pts.size());
  if (!(dist > 0.0)) throw DataError("degenerate point configuration");
  const double s = std::sqrt(2.0) / dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * mx, 0, s, -s * my, 0, 0, 1;
  return t;
}

Point2 transform(const Eigen::Matrix3d& m, const Point2& p) {
  const Eigen::Vector3d q = m * Eigen::Vector3d(p.x, p.y, 1.0);
  return {q.x() / q.z(), q.y() / q.z()};
}

Conic conic_from_matrix(const Eigen::Matrix3d& m) {
  return {m(0, 0), 2 * m(0, 1), m(1, 1), 2 * m(0, 2), 2 * m(1, 2), m(2, 2)};
}

}  // namespace

ConicFit fit_conic(const std::vector<Point2>& points) {
  const std::size_t n = points.size();
  if (n < 6) throw DataError("conic fit needs at least 6 points");
  const Eigen::Matrix3d tn = normalizing_transform(points);
  Eigen::MatrixXd d1(n, 3), d2(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 p = transform(tn, points[i]);
    const auto r = static_cast<Eigen::Index>(i);
    d1.row(r) << p.x * p.x, p.x * p.y, p.y * p.y;
    d2.row(r) << p.x, p.y, 1.0;
  }
  Eigen::MatrixXd design(n, 6);
  design << d1, d2;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design);
  const auto& sv = svd.singularValues();
  if (sv(4) < 1e-10 * sv(0)) throw DataError("degenerate point configuration for conic fit");

  const Eigen::Matrix3d s1 = d1.transpose() * d1;
  const Eigen::Matrix3d s2 = d1.transpose() * d2;
  const Eigen::Matrix3d s3 = d2.transpose() * d2;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(s3);
  if (!lu.isInvertible()) throw DataError("degenerate point configuration for conic fit");
  const Eigen::Matrix3d t = -lu.inverse() * s2.transpose();
  const Eigen::Matrix3d m = s1 + s2 * t;
  Eigen::Matrix3d mc;
  mc.row(0) = m.row(2) / 2.0;
  mc.row(1) = -m.row(1);
  mc.row(2) = m.row(0) / 2.0;
  Eigen::EigenSolver<Eigen::Matrix3d> es(mc);
  std::optional<Eigen::Vector3d> a1;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    const Eigen::Vector3d v = es.eigenvectors().col(k).real();
    const double cond = 4.0 * v(0) * v(2) - v(1) * v(1);
    if (cond > 0.0 && std::abs(es.eigenvalues()(k).imag()) < 1e-9 * (1.0 + std::abs(es.eigenvalues()(k).real())) &&
        cond > best) {
      best = cond;
      a1 = v;
    }
  }
  if (!a1) throw DataError("points do not determine an ellipse");
  const Eigen::Vector3d a2 = t * *a1;
  const Conic normalized_conic{(*a1)(0), (*a1)(1), (*a1)(2), a2(0), a2(1), a2(2)};
  const Eigen::Matrix3d cm = tn.transpose() * normalized_conic.matrix() * tn;
  Conic c = conic_from_matrix(cm);
  const double len = std::sqrt(c.a * c.a + c.b * c.b + c.c * c.c + c.d * c.d + c.e * c.e + c.f * c.f);
  const double sign = c.a < 0 ? -1.0 : 1.0;
  for (double* v : {&c.a, &c.b, &c.c, &c.d, &c.e, &c.f}) *v *= sign / len;
  ConicFit fit{c, {}};
  fit.residuals.reserve(n);
  for (const auto& p : points) fit.residuals.push_back(c.evaluate(p));
  return fit;
}

CameraIntrinsics CameraIntrinsics::from_focal(double focal_px, double cx, double cy) {
  CameraIntrinsics k;
  k.K << focal_px, 0, cx, 0, focal_px, cy, 0, 0, 1;
  k.validate();
  return k;
}

void CameraIntrinsics::validate() const {
  if (!K.allFinite() || K(1, 0) != 0.0 || K(2, 0) != 0.0 || K(2, 1) != 0.0)
    throw DataError("K must be a finite upper-triangular matrix");
  if (K(2, 2) != 1.0) throw DataError("K[2][2] must be 1");
  if (std::abs(K.determinant()) < 1e-12) throw DataError("K must be invertible");
}

SphereCenter sphere_center(const Conic& conic, const CameraIntrinsics& K, double radius_mm, double pair_tolerance) {
  if (!(radius_mm > 0.0)) throw DataError("mirror ball radius must be positive");
  K.validate();
  const Eigen::Matrix3d ch = K.K.transpose() * conic.matrix() * K.K;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (ch + ch.transpose()));
  const Eigen::Vector3d ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw DataError("not a sphere projection");
  const double gap01 = ev(1) - ev(0), gap12 = ev(2) - ev(1);
  int distinct;
  double a;
  if (gap01 <= gap12) {
    distinct = 2;
    a = 0.5 * (ev(0) + ev(1));
  } else {
    distinct = 0;
    a = 0.5 * (ev(1) + ev(2));
  }
  if (std::min(gap01, gap12) > pair_tolerance * scale) throw DataError("not a sphere projection");
  double b = ev(distinct);
  if (a < 0.0) {
    a = -a;
    b = -b;
  }
  if (!(b < 0.0)) throw DataError("not a sphere projection");
  const double d = radius_mm * std::sqrt((a - b) / -b);
  Eigen::Vector3d e = es.eigenvectors().col(distinct).normalized();
  if (e.z() < 0.0) e = -e;
  const Vec3 center{d * e.x(), d * e.y(), d * e.z()};
  return {center, norm(center)};
}

std::optional<Vec3> ray_sphere_intersect(const Vec3& origin, const Vec3& dir, const Vec3& center, double radius) {
  const Vec3 oc = origin - center;
  const double bq = dot(dir, oc);
  const double cq = dot(oc, oc) - radius * radius;
  double disc = bq * bq - cq;
  if (disc < 0.0) {
    if (disc < -1e-12 * radius * radius) return std::nullopt;
    disc = 0.0;
  }
  const double s = std::sqrt(disc);
  const double t1 = -bq - s, t2 = -bq + s;
  if (t1 > 0.0) return origin + t1 * dir;
  if (t2 > 0.0) return origin + t2 * dir;
  return std::nullopt;
}

LightEstimate light_direction(const Point2& h, const CameraIntrinsics& K, const Vec3& camera_origin,
                              const Vec3& sphere_center, double radius_mm) {
  const Eigen::Vector3d r = K.K.inverse() * Eigen::Vector3d(h.x, h.y, 1.0);
  const Vec3 dir = normalized({r.x(), r.y(), r.z()});
  const auto hit = ray_sphere_intersect(camera_origin, dir, sphere_center, radius_mm);
  if (!hit) throw DataError("highlight off sphere");
  const Vec3 n = normalized(*hit - sphere_center);
  const Vec3 v = normalized(camera_origin - *hit);
  return {*hit, n, normalized(2.0 * dot(n, v) * n - v)};
}

Vec3 light_direction_vector(const Point2& h, const CameraIntrinsics& K, const Vec3& camera_origin,
                            const Vec3& sphere_center, double radius_mm) {
  return light_direction(h, K, camera_origin, sphere_center, radius_mm).direction;
}

Vec3 led_direction_on_stage(const LightEstimate& estimate, const Vec3& stage_center, double stage_radius) {
  const auto p = ray_sphere_intersect(estimate.point, estimate.direction, stage_center, stage_radius);
  if (!p) throw DataError("reflected ray does not reach the stage sphere");
  return normalized(*p - stage_center);
}

Vec3 interpolate_blind_spot(const std::vector<Vec3>& nominal, const std::vector<std::optional<Vec3>>& recovered,
                            std::size_t missing) {
  if (nominal.size() != recovered.size() || missing >= nominal.size())
    throw DataError("blind-spot interpolation: inconsistent inputs");
  double spacing = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < nominal.size(); ++j)
    if (j != missing) spacing = std::min(spacing, angle_between_deg(nominal[missing], nominal[j]));
  Vec3 shift;
  int count = 0;
  for (std::size_t j = 0; j < nominal.size(); ++j) {
    if (j == missing || !recovered[j]) continue;
    if (angle_between_deg(nominal[missing], nominal[j]) > 1.5 * spacing) continue;
    shift += *recovered[j] - nominal[j];
    ++count;
  }
  if (count == 0) return normalized(nominal[missing]);
  return normalized(nominal[missing] + shift / count);
}

Point2 Homography::apply(const Point2& p) const { return transform(H, p); }

Eigen::Matrix3d normalize_homography(const Eigen::Matrix3d& H) {
  Eigen::Matrix3d m = H / H.norm();
  Eigen::Index r, c;
  m.cwiseAbs().maxCoeff(&r, &c);
  if (m(r, c) < 0.0) m = -m;
  return m;
}

HomographyFit estimate_homography_dlt(const std::vector<PointPair>& pairs) {
  const std::size_t n = pairs.size();
  if (n < 4) throw DataError("homography needs at least 4 correspondences");
  std::vector<Point2> src, dst;
  for (const auto& [p, q] : pairs) {
    src.push_back(p);
    dst.push_back(q);
  }
  const Eigen::Matrix3d t1 = normalizing_transform(src);
  const Eigen::Matrix3d t2 = normalizing_transform(dst);
  Eigen::MatrixXd a(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 p = transform(t1, src[i]);
    const Point2 q = transform(t2, dst[i]);
    const auto r = static_cast<Eigen::Index>(2 * i);
    a.row(r) << 0, 0, 0, -p.x, -p.y, -1, q.y * p.x, q.y * p.y, q.y;
    a.row(r + 1) << p.x, p.y, 1, 0, 0, 0, -q.x * p.x, -q.x * p.y, -q.x;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(7) < 1e-10 * sv(0)) throw DataError("degenerate correspondences for homography");
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Eigen::Matrix3d hm = t2.inverse() * hn * t1;
  if (std::abs(hm.determinant()) < 1e-14 * std::pow(hm.norm(), 3)) throw DataError("degenerate homography");
  HomographyFit fit;
  fit.homography.H = normalize_homography(hm);
  fit.symmetric_transfer_error = symmetric_transfer_error(fit.homography, pairs);
  return fit;
}

double transfer_error(const Homography& h, const std::vector<PointPair>& pairs) {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [p, q] : pairs) {
    const Point2 m = h.apply(p);
    sum += std::hypot(m.x - q.x, m.y - q.y);
  }
  return sum / static_cast<double>(pairs.size());
}

double symmetric_transfer_error(const Homography& h, const std::vector<PointPair>& pairs) {
  if (pairs.empty()) return 0.0;
  const Homography inv{h.H.inverse()};
  double sum = 0.0;
  for (const auto& [p, q] : pairs) {
    const Point2 f = h.apply(p);
    const Point2 b = inv.apply(q);
    sum += 0.5 * (std::hypot(f.x - q.x, f.y - q.y) + std::hypot(b.x - p.x, b.y - p.y));
  }
  return sum / static_cast<double>(pairs.size());
}

namespace {

// Whitened algebraic error L⁻¹e for one pair (LLᵀ = JJᵀ); false if JJᵀ is
// singular.
bool sampson_residual(const Eigen::Matrix3d& h, const PointPair& pair, Eigen::Vector2d& out) {
  const auto& [p, q] = pair;
  const Eigen::Vector3d x(p.x, p.y, 1.0);
  const double h1x = h.row(0).dot(x), h2x = h.row(1).dot(x), h3x = h.row(2).dot(x);
  const Eigen::Vector2d e(-h2x + q.y * h3x, h1x - q.x * h3x);
  Eigen::Matrix<double, 2, 4> j;
  j << -h(1, 0) + q.y * h(2, 0), -h(1, 1) + q.y * h(2, 1), 0.0, h3x,
       h(0, 0) - q.x * h(2, 0), h(0, 1) - q.x * h(2, 1), -h3x, 0.0;
  const Eigen::Matrix2d jj = j * j.transpose();
  Eigen::LLT<Eigen::Matrix2d> llt(jj);
  if (llt.info() != Eigen::Success || !(jj.determinant() > 1e-300)) return false;
  out = llt.matrixL().solve(e);
  return true;
}

Eigen::VectorXd sampson_residuals(const Eigen::Matrix3d& h, const std::vector<PointPair>& pairs) {
  Eigen::VectorXd r(2 * static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    Eigen::Vector2d v;
    if (!sampson_residual(h, pairs[i], v)) v.setConstant(std::numeric_limits<double>::infinity());
    r.segment<2>(2 * static_cast<Eigen::Index>(i)) = v;
  }
  return r;
}

}  // namespace

double sampson_error(const Homography& h, const std::vector<PointPair>& pairs) {
  return sampson_residuals(h.H, pairs).squaredNorm();
}

SampsonRefinement refine_sampson(const Homography& initial, const std::vector<PointPair>& pairs, int max_iterations) {
  if (pairs.size() < 4) throw DataError("homography needs at least 4 correspondences");
  std::vector<Point2> src, dst;
  for (const auto& [p, q] : pairs) {
    src.push_back(p);
    dst.push_back(q);
  }
  // Parametrize H = T2⁻¹ Ĥ T1 for conditioning; the error stays in pixels.
  const Eigen::Matrix3d t1 = normalizing_transform(src);
  const Eigen::Matrix3d t2 = normalizing_transform(dst);
  const Eigen::Matrix3d t1i = t1.inverse(), t2i = t2.inverse();
  auto to_h = [&](const Eigen::Matrix<double, 9, 1>& p) {
    Eigen::Matrix3d m;
    m << p(0), p(1), p(2), p(3), p(4), p(5), p(6), p(7), p(8);
    return Eigen::Matrix3d(t2i * m * t1);
  };
  Eigen::Matrix3d hn = t2 * initial.H * t1i;
  hn /= hn.norm();
  Eigen::Matrix<double, 9, 1> params;
  params << hn(0, 0), hn(0, 1), hn(0, 2), hn(1, 0), hn(1, 1), hn(1, 2), hn(2, 0), hn(2, 1), hn(2, 2);

  SampsonRefinement out;
  out.homography.H = normalize_homography(initial.H);
  out.initial_error = sampson_error(out.homography, pairs);
  out.final_error = out.initial_error;
  if (!std::isfinite(out.initial_error)) throw DataError("initial homography is degenerate for these pairs");

  Eigen::VectorXd r = sampson_residuals(to_h(params), pairs);
  double cost = r.squaredNorm();
  double mu = -1.0;
  int rejected = 0;
  const Eigen::Index m = r.size();
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::MatrixXd jac(m, 9);
    for (int k = 0; k < 9; ++k) {
      const double step = 1e-7;
      Eigen::Matrix<double, 9, 1> hi = params, lo = params;
      hi(k) += step;
      lo(k) -= step;
      jac.col(k) = (sampson_residuals(to_h(hi), pairs) - sampson_residuals(to_h(lo), pairs)) / (2.0 * step);
    }
    const Eigen::Matrix<double, 9, 9> jtj = jac.transpose() * jac;
    const Eigen::Matrix<double, 9, 1> g = jac.transpose() * r;
    if (g.norm() < 1e-14 * (1.0 + cost)) break;
    if (mu < 0.0) mu = 1e-3 * jtj.diagonal().maxCoeff();
    bool accepted = false;
    while (!accepted) {
      const Eigen::Matrix<double, 9, 9> lhs = jtj + mu * Eigen::Matrix<double, 9, 9>::Identity();
      const Eigen::Matrix<double, 9, 1> delta = lhs.ldlt().solve(-g);
      Eigen::Matrix<double, 9, 1> cand = params + delta;
      cand /= cand.norm();
      const Eigen::VectorXd rc = sampson_residuals(to_h(cand), pairs);
      const double cc = rc.squaredNorm();
      if (std::isfinite(cc) && cc < cost) {
        const double improvement = (cost - cc) / std::max(cost, 1e-300);
        params = cand;
        r = rc;
        cost = cc;
        mu = std::max(mu / 10.0, 1e-15);
        rejected = 0;
        accepted = true;
        ++out.iterations;
        if (improvement < 1e-12) it = max_iterations;
      } else {
        mu *= 10.0;
        if (++rejected >= 5) {
          if (delta.norm() > 1e-10) out.warning = "Sampson refinement: error increased for 5 consecutive steps";
          it = max_iterations;
          break;
        }
      }
    }
  }
  if (cost < out.initial_error) {
    out.homography.H = normalize_homography(to_h(params));
    out.final_error = sampson_error(out.homography, pairs);
    if (!(out.final_error <= out.initial_error)) {
      out.homography.H = normalize_homography(initial.H);
      out.final_error = out.initial_error;
    }
  }
  return out;
}

Image warp_homography(const Image& src, const Homography& h, int out_width, int out_height) {
  const Eigen::Matrix3d inv = h.H.inverse();
  Image out(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const Eigen::Vector3d q = inv * Eigen::Vector3d(x, y, 1.0);
      std::optional<double> v;
      if (std::abs(q.z()) > 1e-12) v = sample_bilinear(src, q.x() / q.z(), q.y() / q.z());
      if (v) {
        out.set(x, y, *v);
      } else {
        out.invalidate(x, y);
      }
    }
  }
  return out;
}

ReflectanceSeparation separate_reflectance(const Image& i0, const Image& i1) {
  if (!i0.same_shape(i1)) throw DataError("separate_reflectance: dimension mismatch");
  ReflectanceSeparation out{Image(i0.width(), i0.height()), Image(i0.width(), i0.height()),
                            std::vector<std::uint8_t>(i0.size(), 0), 0};
  for (std::size_t i = 0; i < i0.size(); ++i) {
    if (!i0.valid(i) || !i1.valid(i)) {
      out.specular.invalidate(i);
      out.diffuse.invalidate(i);
      continue;
    }
    double s = i0.at(i) - i1.at(i);
    if (s < 0.0) {
      s = 0.0;
      out.clamped[i] = 1;
      ++out.clamped_count;
    }
    out.specular.set(i, s);
    out.diffuse.set(i, 2.0 * i1.at(i));
  }
  return out;
}

}  // namespace gradientstage
