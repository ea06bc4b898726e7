// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

// Mirror-ball light calibration, homography registration of the two
// polarization cameras, and specular/diffuse separation.

#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gradientstage/core.hpp"

namespace gradientstage {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Binarize at threshold·max, open with a disk, then intensity-weighted
// centroid of the largest 8-connected component. Throws "no highlight".
Point2 detect_highlight_centroid(const Image& img, double threshold = 0.5, int morph_radius = 2);

// x̃ᵀ C x̃ = 0 with C = [[a, b/2, d/2], [b/2, c, e/2], [d/2, e/2, f]].
struct Conic {
  double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;
  Eigen::Matrix3d matrix() const;
  double evaluate(const Point2& p) const;
};

struct ConicFit {
  Conic conic;  // coefficient vector has unit norm
  std::vector<double> residuals;
};

// Direct least-squares ellipse fit (Fitzgibbon, Halir-Flusser form).
ConicFit fit_conic(const std::vector<Point2>& points);

struct CameraIntrinsics {
  Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
  static CameraIntrinsics from_focal(double focal_px, double cx, double cy);
  void validate() const;
};

struct SphereCenter {
  Vec3 center;      // S_c, mm, camera frame
  double distance;  // d = ‖S_c‖
};

// `pair_tolerance` is the relative gap allowed between the two repeated
// eigenvalues of KᵀCK.
SphereCenter sphere_center(const Conic& conic, const CameraIntrinsics& K, double radius_mm,
                           double pair_tolerance = 1e-6);

// Nearest intersection with t > 0, or none.
std::optional<Vec3> ray_sphere_intersect(const Vec3& origin, const Vec3& dir, const Vec3& center, double radius);

struct LightEstimate {
  Vec3 point;      // H on the ball
  Vec3 normal;     // N
  Vec3 direction;  // L (unit, from H toward the light)
};

// Throws "highlight off sphere" when the viewing ray misses the ball.
LightEstimate light_direction(const Point2& h, const CameraIntrinsics& K, const Vec3& camera_origin,
                              const Vec3& sphere_center, double radius_mm);
// Convenience returning only L.
Vec3 light_direction_vector(const Point2& h, const CameraIntrinsics& K, const Vec3& camera_origin,
                            const Vec3& sphere_center, double radius_mm);

// Direction of the LED from the stage centre: intersect H + tL with the
// stage sphere.
Vec3 led_direction_on_stage(const LightEstimate& estimate, const Vec3& stage_center, double stage_radius);

// Fills an LED with no visible highlight: the nominal direction shifted by
// the mean correction (recovered − nominal) of neighbours within 1.5x the
// smallest angular spacing around it.
Vec3 interpolate_blind_spot(const std::vector<Vec3>& nominal, const std::vector<std::optional<Vec3>>& recovered,
                            std::size_t missing);

using PointPair = std::pair<Point2, Point2>;  // (x, x') with x' ~ H x

struct Homography {
  Eigen::Matrix3d H = Eigen::Matrix3d::Identity();  // ‖H‖_F = 1
  Point2 apply(const Point2& p) const;
};

// Frobenius norm 1, largest-magnitude entry positive.
Eigen::Matrix3d normalize_homography(const Eigen::Matrix3d& H);

struct HomographyFit {
  Homography homography;
  double symmetric_transfer_error = 0.0;  // mean px
};
HomographyFit estimate_homography_dlt(const std::vector<PointPair>& pairs);

// Mean distance ‖x' − Hx‖ (px).
double transfer_error(const Homography& h, const std::vector<PointPair>& pairs);
// Mean of ½(‖x' − Hx‖ + ‖x − H⁻¹x'‖).
double symmetric_transfer_error(const Homography& h, const std::vector<PointPair>& pairs);
// Σ eᵀ(JJᵀ)⁻¹e over all pairs (px²).
double sampson_error(const Homography& h, const std::vector<PointPair>& pairs);

struct SampsonRefinement {
  Homography homography;
  double initial_error = 0.0;
  double final_error = 0.0;
  int iterations = 0;
  std::optional<std::string> warning;  // set on divergence
};
SampsonRefinement refine_sampson(const Homography& initial, const std::vector<PointPair>& pairs,
                                 int max_iterations = 100);

// out(p) = src(H⁻¹ p), bilinear; invalid outside the source.
Image warp_homography(const Image& src, const Homography& h, int out_width, int out_height);

struct ReflectanceSeparation {
  Image specular;  // max(0, i0 − i1)
  Image diffuse;   // 2 i1
  std::vector<std::uint8_t> clamped;
  std::size_t clamped_count = 0;
};
ReflectanceSeparation separate_reflectance(const Image& i0, const Image& i1);

}  // namespace gradientstage
