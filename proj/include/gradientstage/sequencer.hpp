// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

// Minimal-image-set capture sequences: planning, rule checking, tracking
// frame normals and temporal upsampling of warped normals.

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gradientstage/alignment.hpp"
#include "gradientstage/core.hpp"
#include "gradientstage/flow_field.hpp"

namespace gradientstage {

// Label of a tracking window: base axis, barred for a dual set.
struct WindowLabel {
  Axis base = Axis::X;
  bool dual = false;
  std::string text() const;  // "x", "ybar", ...
  friend bool operator==(const WindowLabel&, const WindowLabel&) = default;
};

struct CaptureSequence {
  std::vector<Condition> frames;
  std::vector<WindowLabel> windows;  // one per tracking frame, in order
};

// n ≥ 1 tracking frames, 3n + 2 frames.
CaptureSequence generate_sequence(int n);

// [F1, F2, C, F4, F5] with F1/F5 a complement pair and F2/F4 the other two
// axes at one polarity. None when the window is not a minimal or dual set.
std::optional<WindowLabel> classify_window(const std::array<Condition, 5>& window);

// Empty iff the placement rules hold and every tracking window is a minimal
// or dual set. The linear-motion assumption is not checkable here.
std::vector<std::string> validate_sequence(const std::vector<Condition>& frames);

enum class CaptureMethod { Wilson, Minimal };
int image_count(int n, CaptureMethod method);

// `frame_index,condition,subsequence_label`, 1-based indices.
void write_sequence_csv(const std::filesystem::path& path, const CaptureSequence& seq);
std::vector<Condition> read_sequence_csv(const std::filesystem::path& path);

struct TrackingWindow {
  std::array<Condition, 5> conditions;
  std::array<const Image*, 5> frames;  // F1, F2, C, F4, F5
};

// u aligns F1 to C, v aligns F5 to C (src(p + f) ≈ C(p)).
NormalMap tracking_frame_normal(const TrackingWindow& window, const FlowField& u, const FlowField& v);

// Warps each flanking tracking normal by the negated flow of this frame
// toward it, weights by the opposite temporal distance and renormalizes.
NormalMap intermediate_warped_normal(const NormalMap& n_prev, const NormalMap& n_next, const FlowField& f_prev,
                                     const FlowField& f_next, int t_prev, int t_next);
// Boundary frame with a single flanking tracking frame.
NormalMap single_sided_warped_normal(const NormalMap& n, const FlowField& f);

struct WindowFlows {
  FlowField u;
  FlowField v;
};

struct ProcessedSequence {
  std::vector<NormalMap> normals;          // one per frame
  std::vector<WindowFlows> flows;          // one per tracking frame
  std::vector<std::vector<double>> residuals;  // alignment residuals per window
};

// When `flows` is empty every window is aligned with joint_photometric_align.
ProcessedSequence process_sequence(const std::vector<Condition>& conditions, const std::vector<Image>& images,
                                   const std::vector<WindowFlows>& flows = {}, const AlignOptions& align = {});

}  // namespace gradientstage
