// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

// PFM (Portable FloatMap) and 8-bit export.
//
// PFM files are written little-endian (scale -1.0), rows bottom-to-top as
// the format requires. Invalid pixels are stored as NaN and read back as
// invalid. A normal map's magnitude channel travels in a 1-channel sidecar.
// Flow fields use a 3-channel file: (dx, dy, validity).

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gradientstage/core.hpp"
#include "gradientstage/flow_field.hpp"

namespace gradientstage {

struct PfmData {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 or 3
  // Row-major, top row first, interleaved channels.
  std::vector<float> pixels;
};

PfmData read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const PfmData& data);

Image read_image_pfm(const std::filesystem::path& path);
void write_image_pfm(const std::filesystem::path& path, const Image& image);

// `visualize` remaps components from [-1,1] to [0,1]; such files are for
// viewing only and are not read back as normals.
void write_normals_pfm(const std::filesystem::path& path, const NormalMap& normals, bool visualize = false);
void write_normal_map(const std::filesystem::path& path, const NormalMap& normals);  // + magnitude sidecar
NormalMap read_normal_map(const std::filesystem::path& path);  // sidecar optional
std::filesystem::path magnitude_sidecar_path(const std::filesystem::path& path);

void write_vec3_map_pfm(const std::filesystem::path& path, const Vec3Map& map);
Vec3Map read_vec3_map_pfm(const std::filesystem::path& path);

void write_flow_pfm(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flow_pfm(const std::filesystem::path& path);

// <prefix>_{x,y,z,xb,yb,zb,c}.pfm inside `dir`; absent files are skipped.
GradientImageSet read_image_set(const std::filesystem::path& dir, const std::string& prefix);
void write_image_set(const std::filesystem::path& dir, const std::string& prefix, const GradientImageSet& set);
std::filesystem::path image_set_path(const std::filesystem::path& dir, const std::string& prefix, Condition c);

// 8-bit export of values in [0,1] with gamma 2.2 applied at output; invalid
// pixels are written black.
void write_png8(const std::filesystem::path& path, const Image& image, double gamma = 2.2);
void write_pgm8(const std::filesystem::path& path, const Image& image, double gamma = 2.2);
void write_normals_png8(const std::filesystem::path& path, const NormalMap& normals);

// CSV with header `bin_center,count`.
void write_histogram_csv(const std::filesystem::path& path, const std::vector<HistogramBin>& bins);

}  // namespace gradientstage
