// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

#include "gradientstage/core.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

namespace gradientstage {

Vec3 normalized(const Vec3& a) {
  const double len = norm(a);
  if (!(len > 0.0) || !std::isfinite(len)) throw DataError("cannot normalize a zero-length vector");
  return a / len;
}

double angle_between_deg(const Vec3& a, const Vec3& b) {
  // atan2 keeps full precision where acos(dot) saturates.
  const double s = norm(cross(a, b));
  const double c = dot(a, b);
  return std::atan2(s, c) * (180.0 / M_PI);
}

std::optional<Axis> axis_of(Condition c) {
  if (c == Condition::C) return std::nullopt;
  return static_cast<Axis>(static_cast<int>(c) % 3);
}

Condition flipped(Condition c) {
  if (c == Condition::C) return c;
  const int i = static_cast<int>(c);
  return static_cast<Condition>(i < 3 ? i + 3 : i - 3);
}

std::string_view condition_name(Condition c) {
  static constexpr std::array<std::string_view, 7> names = {"X", "Y", "Z", "Xbar", "Ybar", "Zbar", "C"};
  return names[static_cast<int>(c)];
}

std::string_view condition_suffix(Condition c) {
  static constexpr std::array<std::string_view, 7> names = {"x", "y", "z", "xb", "yb", "zb", "c"};
  return names[static_cast<int>(c)];
}

std::optional<Condition> parse_condition(std::string_view text) {
  std::string t;
  for (char ch : text) {
    if (ch == '_' || ch == '-') continue;
    t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  for (Condition c : kAllConditions) {
    std::string name(condition_name(c));
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (t == name || t == condition_suffix(c)) return c;
  }
  return std::nullopt;
}

std::string_view axis_name(Axis a) {
  static constexpr std::array<std::string_view, 3> names = {"x", "y", "z"};
  return names[static_cast<int>(a)];
}

std::optional<Axis> parse_axis(std::string_view text) {
  if (text.size() != 1) return std::nullopt;
  switch (std::tolower(static_cast<unsigned char>(text[0]))) {
    case 'x': return Axis::X;
    case 'y': return Axis::Y;
    case 'z': return Axis::Z;
    default: return std::nullopt;
  }
}

// ---------------------------------------------------------------------------

Image::Image(int width, int height, double value) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw DataError("image dimensions must be positive");
  if (!std::isfinite(value) || value < 0.0) throw DataError("image radiance must be finite and non-negative");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  samples_.assign(n, value);
  mask_.assign(n, 1);
}

void Image::set(std::size_t i, double value) {
  if (!std::isfinite(value) || value < 0.0) {
    throw DataError("image radiance must be finite and non-negative, got " + std::to_string(value));
  }
  samples_[i] = value;
  mask_[i] = 1;
}

std::size_t Image::valid_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

double Image::max_valid() const {
  double m = 0.0;
  for (std::size_t i = 0; i < samples_.size(); ++i)
    if (mask_[i] && samples_[i] > m) m = samples_[i];
  return m;
}

std::optional<double> sample_bilinear(const Image& img, double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y)) return std::nullopt;
  const double fx0 = std::floor(x), fy0 = std::floor(y);
  if (fx0 < 0.0 || fy0 < 0.0 || fx0 > img.width() - 1 || fy0 > img.height() - 1) return std::nullopt;
  const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
  const double tx = x - fx0, ty = y - fy0;
  if (tx > 0.0 && x0 + 1 >= img.width()) return std::nullopt;
  if (ty > 0.0 && y0 + 1 >= img.height()) return std::nullopt;
  double sum = 0.0;
  for (int dy = 0; dy < 2; ++dy) {
    const double wy = dy == 0 ? 1.0 - ty : ty;
    if (wy == 0.0) continue;
    for (int dx = 0; dx < 2; ++dx) {
      const double wx = dx == 0 ? 1.0 - tx : tx;
      if (wx == 0.0) continue;
      const std::size_t i = img.index(x0 + dx, y0 + dy);
      if (!img.valid(i)) return std::nullopt;
      if (wx == 1.0 && wy == 1.0) return img.at(i);
      sum += wx * wy * img.at(i);
    }
  }
  return sum;
}

Vec3Map::Vec3Map(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw DataError("map dimensions must be positive");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  data_.assign(n, Vec3{});
  mask_.assign(n, 0);
}

void Vec3Map::set(std::size_t i, const Vec3& v) {
  if (!is_finite(v)) throw DataError("vector map entries must be finite");
  data_[i] = v;
  mask_[i] = 1;
}

NormalMap::NormalMap(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw DataError("normal map dimensions must be positive");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  normals_.assign(n, Vec3{});
  magnitude_.assign(n, 0.0);
  mask_.assign(n, 0);
}

bool NormalMap::set_from_vector(std::size_t i, const Vec3& v) {
  const double len = norm(v);
  if (!std::isfinite(len) || len < kDarkThreshold) {
    invalidate(i);
    return false;
  }
  normals_[i] = v / len;
  magnitude_[i] = len;
  mask_[i] = 1;
  return true;
}

void NormalMap::set(std::size_t i, const Vec3& n, double magnitude) {
  if (!is_finite(n) || std::abs(norm(n) - 1.0) > 1e-6) throw DataError("normal must be unit length");
  if (!std::isfinite(magnitude) || magnitude < 0.0) throw DataError("normal magnitude must be >= 0");
  normals_[i] = n;
  magnitude_[i] = magnitude;
  mask_[i] = 1;
}

void NormalMap::invalidate(std::size_t i) {
  normals_[i] = {};
  magnitude_[i] = 0.0;
  mask_[i] = 0;
}

std::size_t NormalMap::valid_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

// ---------------------------------------------------------------------------

void GradientImageSet::set(Condition c, Image image) {
  for (const auto& existing : images_) {
    if (existing && !existing->same_shape(image)) {
      throw DataError("image for condition " + std::string(condition_name(c)) +
                      " does not match the set dimensions");
    }
  }
  images_[static_cast<int>(c)] = std::move(image);
}

const Image& GradientImageSet::get(Condition c) const {
  const auto& slot = images_[static_cast<int>(c)];
  if (!slot) throw DataError("missing condition " + std::string(condition_name(c)));
  return *slot;
}

void GradientImageSet::require(std::initializer_list<Condition> conditions) const {
  for (Condition c : conditions) (void)get(c);
}

bool GradientImageSet::empty() const {
  return std::none_of(images_.begin(), images_.end(), [](const auto& i) { return i.has_value(); });
}

int GradientImageSet::width() const {
  for (const auto& i : images_)
    if (i) return i->width();
  throw DataError("empty gradient image set");
}

int GradientImageSet::height() const {
  for (const auto& i : images_)
    if (i) return i->height();
  throw DataError("empty gradient image set");
}

std::vector<std::uint8_t> GradientImageSet::joint_mask(std::initializer_list<Condition> conditions) const {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(width()) * static_cast<std::size_t>(height()), 1);
  for (Condition c : conditions) {
    const Image& img = get(c);
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = mask[i] && img.valid(i);
  }
  return mask;
}

// ---------------------------------------------------------------------------

Image angular_error_map(const NormalMap& a, const NormalMap& b) {
  if (!a.same_shape(b)) throw DataError("angular_error_map: dimension mismatch");
  Image out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.valid(i) && b.valid(i)) {
      out.set(i, angle_between_deg(a.normal(i), b.normal(i)));
    } else {
      out.invalidate(i);
    }
  }
  return out;
}

std::vector<HistogramBin> histogram(const Image& values, double bin_width) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw DataError("histogram bin width must be positive");
  long lo = std::numeric_limits<long>::max();
  long hi = std::numeric_limits<long>::min();
  std::vector<long> keys;
  keys.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values.valid(i)) continue;
    const long k = static_cast<long>(std::floor(values.at(i) / bin_width));
    keys.push_back(k);
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  if (keys.empty()) return {};
  std::vector<HistogramBin> bins(static_cast<std::size_t>(hi - lo + 1));
  for (std::size_t b = 0; b < bins.size(); ++b)
    bins[b].center = (static_cast<double>(lo + static_cast<long>(b)) + 0.5) * bin_width;
  for (long k : keys) ++bins[static_cast<std::size_t>(k - lo)].count;
  return bins;
}

ValueStats value_stats(const Image& values) {
  ValueStats s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values.valid(i)) continue;
    const double v = values.at(i);
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
    sum += v;
    ++s.count;
  }
  if (s.count == 0) throw DataError("statistics of an empty mask");
  s.mean = sum / static_cast<double>(s.count);
  return s;
}

}  // namespace gradientstage
