// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

// Shared domain types: vectors, radiance images, normal maps and the
// gradient image set keyed by illumination condition.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gradientstage {

// Invalid input data (bad image, missing condition, degenerate geometry).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Denominators below this (normalized radiance units) invalidate a pixel.
inline constexpr double kDarkThreshold = 1e-9;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x; y += o.y; z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x; y -= o.y; z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) {
    x *= s; y *= s; z *= s;
    return *this;
  }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline bool is_finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}
// Throws DataError for zero-length input.
Vec3 normalized(const Vec3& a);

// Angle between two vectors in degrees, accurate near 0 and 180.
double angle_between_deg(const Vec3& a, const Vec3& b);

enum class Axis { X = 0, Y = 1, Z = 2 };

enum class Condition { X = 0, Y = 1, Z = 2, Xbar = 3, Ybar = 4, Zbar = 5, C = 6 };

inline constexpr std::array<Condition, 7> kAllConditions = {
    Condition::X, Condition::Y, Condition::Z, Condition::Xbar,
    Condition::Ybar, Condition::Zbar, Condition::C};

constexpr Condition gradient_condition(Axis a) { return static_cast<Condition>(static_cast<int>(a)); }
constexpr Condition complement_condition(Axis a) {
  return static_cast<Condition>(static_cast<int>(a) + 3);
}
constexpr bool is_gradient(Condition c) { return static_cast<int>(c) < 3; }
constexpr bool is_complement(Condition c) {
  return static_cast<int>(c) >= 3 && c != Condition::C;
}
// Axis of a gradient or complement condition; C has none.
std::optional<Axis> axis_of(Condition c);
// X <-> Xbar etc.; C maps to itself.
Condition flipped(Condition c);

// "X", "Xbar", "C" ...
std::string_view condition_name(Condition c);
// File suffix used by image sets: x, y, z, xb, yb, zb, c.
std::string_view condition_suffix(Condition c);
// Accepts names (case-insensitive), suffixes and the x̄-style "x_bar".
std::optional<Condition> parse_condition(std::string_view text);
std::string_view axis_name(Axis a);
std::optional<Axis> parse_axis(std::string_view text);

// Scalar radiance grid with a validity mask. Valid samples are finite and
// non-negative; invalid samples read as 0.
class Image {
 public:
  // All-valid image filled with `value`.
  Image(int width, int height, double value = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return samples_.size(); }
  bool same_shape(const Image& o) const { return width_ == o.width_ && height_ == o.height_; }

  double at(int x, int y) const { return samples_[index(x, y)]; }
  bool valid(int x, int y) const { return mask_[index(x, y)] != 0; }
  double at(std::size_t i) const { return samples_[i]; }
  bool valid(std::size_t i) const { return mask_[i] != 0; }

  // Throws DataError on NaN, infinity or negative radiance.
  void set(int x, int y, double value) { set(index(x, y), value); }
  void set(std::size_t i, double value);
  void invalidate(int x, int y) { invalidate(index(x, y)); }
  void invalidate(std::size_t i) {
    samples_[i] = 0.0;
    mask_[i] = 0;
  }

  std::size_t valid_count() const;
  double max_valid() const;

  const std::vector<double>& samples() const { return samples_; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

 private:
  int width_;
  int height_;
  std::vector<double> samples_;
  std::vector<std::uint8_t> mask_;
};

// Bilinear sample at (x, y) in pixel-centre coordinates. None when any
// contributing neighbour is outside or invalid. Integer positions return the
// stored sample unchanged.
std::optional<double> sample_bilinear(const Image& img, double x, double y);

// Grid of 3-vectors with a mask; used for distortion maps and raw vector
// fields that are not unit length.
class Vec3Map {
 public:
  Vec3Map(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  const Vec3& at(std::size_t i) const { return data_[i]; }
  const Vec3& at(int x, int y) const { return data_[index(x, y)]; }
  bool valid(std::size_t i) const { return mask_[i] != 0; }
  bool valid(int x, int y) const { return mask_[index(x, y)] != 0; }
  void set(std::size_t i, const Vec3& v);
  void invalidate(std::size_t i) {
    data_[i] = {};
    mask_[i] = 0;
  }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

 private:
  int width_;
  int height_;
  std::vector<Vec3> data_;
  std::vector<std::uint8_t> mask_;
};

// Unit normals plus the pre-normalization length (N_d or N_s). Starts all
// invalid.
class NormalMap {
 public:
  NormalMap(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return normals_.size(); }
  bool same_shape(const NormalMap& o) const { return width_ == o.width_ && height_ == o.height_; }

  const Vec3& normal(std::size_t i) const { return normals_[i]; }
  const Vec3& normal(int x, int y) const { return normals_[index(x, y)]; }
  double magnitude(std::size_t i) const { return magnitude_[i]; }
  double magnitude(int x, int y) const { return magnitude_[index(x, y)]; }
  bool valid(std::size_t i) const { return mask_[i] != 0; }
  bool valid(int x, int y) const { return mask_[index(x, y)] != 0; }

  // Normalizes `v` and stores its length as magnitude. Lengths below
  // kDarkThreshold (or non-finite input) invalidate the pixel. Returns
  // whether the pixel ended up valid.
  bool set_from_vector(std::size_t i, const Vec3& v);
  // `n` must already be unit length within 1e-6.
  void set(std::size_t i, const Vec3& n, double magnitude);
  void invalidate(std::size_t i);

  std::size_t valid_count() const;

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

 private:
  int width_;
  int height_;
  std::vector<Vec3> normals_;
  std::vector<double> magnitude_;
  std::vector<std::uint8_t> mask_;
};

// Registered radiance images keyed by condition; any subset may be present.
class GradientImageSet {
 public:
  GradientImageSet() = default;

  // Throws DataError if dimensions disagree with images already present.
  void set(Condition c, Image image);
  bool has(Condition c) const { return images_[static_cast<int>(c)].has_value(); }
  // Throws DataError("missing condition <name>").
  const Image& get(Condition c) const;
  void require(std::initializer_list<Condition> conditions) const;

  bool empty() const;
  int width() const;
  int height() const;
  // Pixels valid in every listed image.
  std::vector<std::uint8_t> joint_mask(std::initializer_list<Condition> conditions) const;

 private:
  std::array<std::optional<Image>, 7> images_;
};

// Per-pixel angle in degrees; invalid where either input is invalid.
Image angular_error_map(const NormalMap& a, const NormalMap& b);

struct HistogramBin {
  double center = 0.0;
  std::size_t count = 0;
};

// Bins [k*w, (k+1)*w) over valid pixels, contiguous from the lowest to the
// highest occupied bin. Empty mask yields an empty list.
std::vector<HistogramBin> histogram(const Image& values, double bin_width);

struct ValueStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  std::size_t count = 0;
};
// Throws DataError on an empty mask.
ValueStats value_stats(const Image& values);

}  // namespace gradientstage
