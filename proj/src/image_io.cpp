// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

#include "gradientstage/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

namespace gradientstage {

namespace {

constexpr float kNaN = std::numeric_limits<float>::quiet_NaN();

bool read_token(std::istream& in, std::string& token) {
  token.clear();
  int ch = in.get();
  while (ch != EOF && std::isspace(ch)) ch = in.get();
  while (ch != EOF && !std::isspace(ch)) {
    token.push_back(static_cast<char>(ch));
    ch = in.get();
  }
  // The single whitespace after the last header token has been consumed.
  return !token.empty();
}

float byteswap_float(float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  bits = ((bits & 0x000000FFu) << 24) | ((bits & 0x0000FF00u) << 8) | ((bits & 0x00FF0000u) >> 8) |
         ((bits & 0xFF000000u) >> 24);
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace

PfmData read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string magic, w, h, scale;
  if (!read_token(in, magic) || !read_token(in, w) || !read_token(in, h) || !read_token(in, scale)) {
    throw DataError("truncated PFM header in " + path.string());
  }
  PfmData data;
  if (magic == "PF") {
    data.channels = 3;
  } else if (magic == "Pf") {
    data.channels = 1;
  } else {
    throw DataError("not a PFM file: " + path.string());
  }
  try {
    data.width = std::stoi(w);
    data.height = std::stoi(h);
  } catch (const std::exception&) {
    throw DataError("bad PFM dimensions in " + path.string());
  }
  const double s = std::strtod(scale.c_str(), nullptr);
  if (data.width <= 0 || data.height <= 0 || s == 0.0) throw DataError("bad PFM header in " + path.string());
  const bool file_little = s < 0.0;
  const bool swap = file_little != (std::endian::native == std::endian::little);

  const std::size_t row = static_cast<std::size_t>(data.width) * static_cast<std::size_t>(data.channels);
  data.pixels.resize(row * static_cast<std::size_t>(data.height));
  std::vector<float> buffer(row);
  // Stored bottom-to-top.
  for (int y = data.height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(row * sizeof(float)));
    if (!in) throw DataError("truncated PFM data in " + path.string());
    if (swap)
      for (float& v : buffer) v = byteswap_float(v);
    std::copy(buffer.begin(), buffer.end(), data.pixels.begin() + static_cast<std::ptrdiff_t>(row * static_cast<std::size_t>(y)));
  }
  return data;
}

void write_pfm(const std::filesystem::path& path, const PfmData& data) {
  if (data.channels != 1 && data.channels != 3) throw DataError("PFM supports 1 or 3 channels");
  const std::size_t row = static_cast<std::size_t>(data.width) * static_cast<std::size_t>(data.channels);
  if (data.pixels.size() != row * static_cast<std::size_t>(data.height)) throw DataError("PFM pixel count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << (data.channels == 3 ? "PF" : "Pf") << '\n' << data.width << ' ' << data.height << '\n' << "-1.0\n";
  const bool swap = std::endian::native != std::endian::little;
  std::vector<float> buffer(row);
  for (int y = data.height - 1; y >= 0; --y) {
    auto begin = data.pixels.begin() + static_cast<std::ptrdiff_t>(row * static_cast<std::size_t>(y));
    std::copy(begin, begin + static_cast<std::ptrdiff_t>(row), buffer.begin());
    if (swap)
      for (float& v : buffer) v = byteswap_float(v);
    out.write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(row * sizeof(float)));
  }
  if (!out) throw DataError("failed writing " + path.string());
}

Image read_image_pfm(const std::filesystem::path& path) {
  const PfmData data = read_pfm(path);
  if (data.channels != 1) throw DataError("expected a 1-channel PFM: " + path.string());
  Image img(data.width, data.height);
  for (std::size_t i = 0; i < data.pixels.size(); ++i) {
    const float v = data.pixels[i];
    if (std::isfinite(v) && v >= 0.0f) {
      img.set(i, v);
    } else {
      img.invalidate(i);
    }
  }
  return img;
}

void write_image_pfm(const std::filesystem::path& path, const Image& image) {
  PfmData data{image.width(), image.height(), 1, std::vector<float>(image.size())};
  for (std::size_t i = 0; i < image.size(); ++i)
    data.pixels[i] = image.valid(i) ? static_cast<float>(image.at(i)) : kNaN;
  write_pfm(path, data);
}

void write_normals_pfm(const std::filesystem::path& path, const NormalMap& normals, bool visualize) {
  PfmData data{normals.width(), normals.height(), 3, std::vector<float>(normals.size() * 3)};
  for (std::size_t i = 0; i < normals.size(); ++i) {
    const Vec3& n = normals.normal(i);
    for (int c = 0; c < 3; ++c) {
      float v;
      if (!normals.valid(i)) {
        v = visualize ? 0.0f : kNaN;
      } else {
        v = static_cast<float>(visualize ? 0.5 * (n[c] + 1.0) : n[c]);
      }
      data.pixels[i * 3 + static_cast<std::size_t>(c)] = v;
    }
  }
  write_pfm(path, data);
}

std::filesystem::path magnitude_sidecar_path(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  p.replace_extension(".mag.pfm");
  return p;
}

void write_normal_map(const std::filesystem::path& path, const NormalMap& normals) {
  write_normals_pfm(path, normals, false);
  Image mag(normals.width(), normals.height());
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (normals.valid(i)) {
      mag.set(i, normals.magnitude(i));
    } else {
      mag.invalidate(i);
    }
  }
  write_image_pfm(magnitude_sidecar_path(path), mag);
}

NormalMap read_normal_map(const std::filesystem::path& path) {
  const PfmData data = read_pfm(path);
  if (data.channels != 3) throw DataError("expected a 3-channel PFM normal map: " + path.string());
  std::optional<Image> mag;
  const auto side = magnitude_sidecar_path(path);
  if (std::filesystem::exists(side)) {
    mag = read_image_pfm(side);
    if (mag->width() != data.width || mag->height() != data.height) throw DataError("magnitude sidecar size mismatch");
  }
  NormalMap nm(data.width, data.height);
  for (std::size_t i = 0; i < nm.size(); ++i) {
    const Vec3 v{data.pixels[i * 3], data.pixels[i * 3 + 1], data.pixels[i * 3 + 2]};
    if (!is_finite(v) || !nm.set_from_vector(i, v)) {
      nm.invalidate(i);
      continue;
    }
    if (mag) {
      if (!mag->valid(i)) {
        nm.invalidate(i);
      } else {
        nm.set(i, nm.normal(i), mag->at(i));
      }
    } else {
      nm.set(i, nm.normal(i), 1.0);
    }
  }
  return nm;
}

void write_vec3_map_pfm(const std::filesystem::path& path, const Vec3Map& map) {
  PfmData data{map.width(), map.height(), 3, std::vector<float>(map.size() * 3)};
  for (std::size_t i = 0; i < map.size(); ++i)
    for (int c = 0; c < 3; ++c)
      data.pixels[i * 3 + static_cast<std::size_t>(c)] = map.valid(i) ? static_cast<float>(map.at(i)[c]) : kNaN;
  write_pfm(path, data);
}

Vec3Map read_vec3_map_pfm(const std::filesystem::path& path) {
  const PfmData data = read_pfm(path);
  if (data.channels != 3) throw DataError("expected a 3-channel PFM: " + path.string());
  Vec3Map map(data.width, data.height);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const Vec3 v{data.pixels[i * 3], data.pixels[i * 3 + 1], data.pixels[i * 3 + 2]};
    if (is_finite(v)) map.set(i, v);
  }
  return map;
}

void write_flow_pfm(const std::filesystem::path& path, const FlowField& flow) {
  PfmData data{flow.width(), flow.height(), 3, std::vector<float>(flow.size() * 3)};
  for (std::size_t i = 0; i < flow.size(); ++i) {
    const bool ok = flow.valid(i);
    data.pixels[i * 3] = ok ? static_cast<float>(flow.at(i).dx) : 0.0f;
    data.pixels[i * 3 + 1] = ok ? static_cast<float>(flow.at(i).dy) : 0.0f;
    data.pixels[i * 3 + 2] = ok ? 1.0f : 0.0f;
  }
  write_pfm(path, data);
}

FlowField read_flow_pfm(const std::filesystem::path& path) {
  const PfmData data = read_pfm(path);
  if (data.channels != 3) throw DataError("expected a 3-channel flow PFM: " + path.string());
  FlowField flow(data.width, data.height);
  for (std::size_t i = 0; i < flow.size(); ++i) {
    const float dx = data.pixels[i * 3], dy = data.pixels[i * 3 + 1], ok = data.pixels[i * 3 + 2];
    if (ok > 0.5f && std::isfinite(dx) && std::isfinite(dy)) {
      flow.set(i, {dx, dy});
    } else {
      flow.invalidate(i);
    }
  }
  return flow;
}

std::filesystem::path image_set_path(const std::filesystem::path& dir, const std::string& prefix, Condition c) {
  return dir / (prefix + "_" + std::string(condition_suffix(c)) + ".pfm");
}

GradientImageSet read_image_set(const std::filesystem::path& dir, const std::string& prefix) {
  GradientImageSet set;
  for (Condition c : kAllConditions) {
    const auto p = image_set_path(dir, prefix, c);
    if (std::filesystem::exists(p)) set.set(c, read_image_pfm(p));
  }
  if (set.empty()) throw DataError("no images named " + prefix + "_*.pfm in " + dir.string());
  return set;
}

void write_image_set(const std::filesystem::path& dir, const std::string& prefix, const GradientImageSet& set) {
  std::filesystem::create_directories(dir);
  for (Condition c : kAllConditions)
    if (set.has(c)) write_image_pfm(image_set_path(dir, prefix, c), set.get(c));
}

namespace {

std::vector<std::uint8_t> to_8bit(const Image& image, double gamma) {
  std::vector<std::uint8_t> out(image.size(), 0);
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (!image.valid(i)) continue;
    const double v = std::clamp(image.at(i), 0.0, 1.0);
    out[i] = static_cast<std::uint8_t>(std::lround(255.0 * std::pow(v, 1.0 / gamma)));
  }
  return out;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

void write_png_raw(const std::filesystem::path& path, int width, int height, int channels,
                   const std::vector<std::uint8_t>& pixels) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "wb"));
  if (!file) throw DataError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("PNG encoding failed for " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
  for (int y = 0; y < height; ++y)
    png_write_row(png, const_cast<png_bytep>(pixels.data() + stride * static_cast<std::size_t>(y)));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png8(const std::filesystem::path& path, const Image& image, double gamma) {
  write_png_raw(path, image.width(), image.height(), 1, to_8bit(image, gamma));
}

void write_pgm8(const std::filesystem::path& path, const Image& image, double gamma) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  const auto bytes = to_8bit(image, gamma);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_normals_png8(const std::filesystem::path& path, const NormalMap& normals) {
  std::vector<std::uint8_t> rgb(normals.size() * 3, 0);
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (!normals.valid(i)) continue;
    for (int c = 0; c < 3; ++c) {
      const double v = std::clamp(0.5 * (normals.normal(i)[c] + 1.0), 0.0, 1.0);
      rgb[i * 3 + static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(std::lround(255.0 * v));
    }
  }
  write_png_raw(path, normals.width(), normals.height(), 3, rgb);
}

void write_histogram_csv(const std::filesystem::path& path, const std::vector<HistogramBin>& bins) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "bin_center,count\n";
  for (const auto& b : bins) out << b.center << ',' << b.count << '\n';
}

}  // namespace gradientstage
