// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

#include "gradientstage/sequencer.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "gradientstage/photometric.hpp"

namespace gradientstage {

std::string WindowLabel::text() const { return std::string(axis_name(base)) + (dual ? "bar" : ""); }

namespace {

Axis remaining_axis(Axis a, Axis b) { return static_cast<Axis>(3 - static_cast<int>(a) - static_cast<int>(b)); }

Condition with_polarity(Axis a, bool complement) {
  return complement ? complement_condition(a) : gradient_condition(a);
}

}  // namespace

CaptureSequence generate_sequence(int n) {
  if (n < 1) throw DataError("generate_sequence: need at least one tracking frame");
  CaptureSequence seq;
  seq.frames = {Condition::X, Condition::Z, Condition::C, Condition::Y, Condition::Xbar};
  seq.windows.push_back({Axis::X, false});
  for (int k = 1; k < n; ++k) {
    const std::size_t end = seq.frames.size();
    const Condition f1 = seq.frames[end - 2];
    const Condition f2 = seq.frames[end - 1];
    const Axis base = *axis_of(f1);
    const bool dual = is_complement(f2);
    const Condition f4 = with_polarity(remaining_axis(base, *axis_of(f2)), dual);
    seq.frames.push_back(Condition::C);
    seq.frames.push_back(f4);
    seq.frames.push_back(flipped(f1));
    seq.windows.push_back({base, dual});
  }
  return seq;
}

std::optional<WindowLabel> classify_window(const std::array<Condition, 5>& w) {
  if (w[2] != Condition::C) return std::nullopt;
  for (int i : {0, 1, 3, 4})
    if (w[static_cast<std::size_t>(i)] == Condition::C) return std::nullopt;
  if (flipped(w[0]) != w[4]) return std::nullopt;
  const Axis base = *axis_of(w[0]);
  const Axis a2 = *axis_of(w[1]), a4 = *axis_of(w[3]);
  if (a2 == base || a4 == base || a2 == a4) return std::nullopt;
  if (is_complement(w[1]) != is_complement(w[3])) return std::nullopt;
  return WindowLabel{base, is_complement(w[1])};
}

std::vector<std::string> validate_sequence(const std::vector<Condition>& frames) {
  std::vector<std::string> out;
  std::vector<std::size_t> tracking;
  for (std::size_t i = 0; i < frames.size(); ++i)
    if (frames[i] == Condition::C) tracking.push_back(i);
  if (tracking.empty()) {
    out.push_back("rule 2: sequence has no tracking frame");
    return out;
  }
  if (tracking.front() != 2)
    out.push_back("rule 2: " + std::to_string(tracking.front()) + " gradient frames precede the first tracking frame (need 2)");
  for (std::size_t k = 1; k < tracking.size(); ++k) {
    const std::size_t gap = tracking[k] - tracking[k - 1] - 1;
    if (gap != 2)
      out.push_back("rule 2: " + std::to_string(gap) + " gradient frames between tracking frames at " +
                    std::to_string(tracking[k - 1] + 1) + " and " + std::to_string(tracking[k] + 1));
  }
  if (frames.size() - 1 - tracking.back() != 2)
    out.push_back("rule 2: " + std::to_string(frames.size() - 1 - tracking.back()) +
                  " gradient frames follow the last tracking frame (need 2)");

  std::vector<std::optional<WindowLabel>> labels;
  for (std::size_t t : tracking) {
    if (t < 2 || t + 2 >= frames.size()) {
      labels.emplace_back();
      continue;
    }
    const std::array<Condition, 5> w{frames[t - 2], frames[t - 1], frames[t], frames[t + 1], frames[t + 2]};
    const auto label = classify_window(w);
    if (!label) {
      std::string msg = "rule 1: frames " + std::to_string(t - 1) + ".." + std::to_string(t + 3);
      const bool stray_c = w[0] == Condition::C || w[1] == Condition::C || w[3] == Condition::C ||
                           w[4] == Condition::C;
      if (stray_c || flipped(w[0]) != w[4]) {
        msg += " do not place a complement pair outermost around the tracking frame";
      } else {
        msg += " do not form a minimal or dual-minimal set";
      }
      out.push_back(msg);
    }
    labels.push_back(label);
  }
  for (std::size_t k = 0; k + 2 < labels.size(); ++k) {
    if (!labels[k] || !labels[k + 1] || !labels[k + 2]) continue;
    const bool d = labels[k]->dual;
    if (labels[k + 1]->dual == d && labels[k + 2]->dual == d)
      out.push_back("unit sequence at tracking frames " + std::to_string(k + 1) + ".." + std::to_string(k + 3) +
                    (d ? " is (s_xbar, s_ybar, s_zbar)-type, which cannot be captured"
                       : " is (s_x, s_y, s_z)-type, which cannot be captured"));
  }
  return out;
}

int image_count(int n, CaptureMethod method) {
  if (n < 1) throw DataError("image_count: need at least one tracking frame");
  if (method == CaptureMethod::Wilson) return 4 * n + 3;
  return n % 2 == 1 ? 6 * (n / 2 + 1) - 1 : 3 * n + 3;
}

void write_sequence_csv(const std::filesystem::path& path, const CaptureSequence& seq) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "frame_index,condition,subsequence_label\n";
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    std::string label;
    for (std::size_t k = 0; k < seq.windows.size(); ++k) {
      const std::size_t c = 3 * k + 2;
      if (i + 2 < c || i > c + 2) continue;
      if (seq.frames[i] == Condition::C && i != c) continue;
      if (!label.empty()) label += ';';
      label += "s_" + seq.windows[k].text();
    }
    out << i + 1 << ',' << condition_name(seq.frames[i]) << ',' << label << '\n';
  }
}

std::vector<Condition> read_sequence_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<Condition> frames;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string idx, cond;
    std::getline(ss, idx, ',');
    std::getline(ss, cond, ',');
    const auto c = parse_condition(cond);
    if (!c) throw DataError("unknown condition '" + cond + "' in " + path.string());
    frames.push_back(*c);
  }
  return frames;
}

NormalMap tracking_frame_normal(const TrackingWindow& window, const FlowField& u, const FlowField& v) {
  const auto label = classify_window(window.conditions);
  if (!label) throw DataError("tracking window is not a minimal or dual set");
  for (const Image* f : window.frames)
    if (!f) throw DataError("tracking window is missing a frame");
  const Image& c = *window.frames[2];
  if (!u.same_shape(c) || !v.same_shape(c)) throw DataError("missing flow for tracking window");
  GradientImageSet set;
  set.set(window.conditions[0], warp_image(*window.frames[0], u));
  set.set(window.conditions[1], warp_image(*window.frames[1], half_flow(u)));
  set.set(window.conditions[3], warp_image(*window.frames[3], half_flow(v)));
  set.set(window.conditions[4], warp_image(*window.frames[4], v));
  return recover_minimal(set, label->base, label->dual);
}

NormalMap single_sided_warped_normal(const NormalMap& n, const FlowField& f) {
  return warp_normals(n, negate_flow(f));
}

NormalMap intermediate_warped_normal(const NormalMap& n_prev, const NormalMap& n_next, const FlowField& f_prev,
                                     const FlowField& f_next, int t_prev, int t_next) {
  if (t_prev < 1 || t_next < 1) throw DataError("temporal distances must be >= 1");
  if (!n_prev.same_shape(n_next)) throw DataError("flanking normal maps differ in size");
  const NormalMap a = warp_normals(n_prev, negate_flow(f_prev));
  const NormalMap b = warp_normals(n_next, negate_flow(f_next));
  const double wa = t_next, wb = t_prev;
  NormalMap out(a.width(), a.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const bool va = a.valid(i), vb = b.valid(i);
    if (!va && !vb) continue;
    if (va && vb && a.normal(i) == b.normal(i) && a.magnitude(i) == b.magnitude(i)) {
      out.set(i, a.normal(i), a.magnitude(i));
    } else if (va && vb) {
      if (out.set_from_vector(i, wa * a.normal(i) + wb * b.normal(i)))
        out.set(i, out.normal(i), (wa * a.magnitude(i) + wb * b.magnitude(i)) / (wa + wb));
    } else {
      const NormalMap& s = va ? a : b;
      out.set(i, s.normal(i), s.magnitude(i));
    }
  }
  return out;
}

ProcessedSequence process_sequence(const std::vector<Condition>& conditions, const std::vector<Image>& images,
                                   const std::vector<WindowFlows>& flows, const AlignOptions& align) {
  if (conditions.size() != images.size()) throw DataError("sequence has " + std::to_string(conditions.size()) +
                                                          " conditions but " + std::to_string(images.size()) + " images");
  const auto violations = validate_sequence(conditions);
  if (!violations.empty()) throw DataError("invalid capture sequence: " + violations.front());
  for (const Image& img : images)
    if (!img.same_shape(images.front())) throw DataError("sequence frames differ in size");
  const std::size_t n = (conditions.size() - 2) / 3;
  if (!flows.empty() && flows.size() != n) throw DataError("expected one flow pair per tracking frame");

  ProcessedSequence out;
  std::vector<NormalMap> tracking;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t c = 3 * k + 2;
    TrackingWindow w;
    for (std::size_t j = 0; j < 5; ++j) {
      w.conditions[j] = conditions[c - 2 + j];
      w.frames[j] = &images[c - 2 + j];
    }
    if (flows.empty()) {
      JointAlignment ja = joint_photometric_align(images[c - 2], images[c + 2], images[c], align);
      out.residuals.push_back(ja.residuals);
      out.flows.push_back({std::move(ja.u), std::move(ja.v)});
    } else {
      out.flows.push_back(flows[k]);
      out.residuals.emplace_back();
    }
    tracking.push_back(tracking_frame_normal(w, out.flows.back().u, out.flows.back().v));
  }

  const int w = images.front().width(), h = images.front().height();
  out.normals.assign(conditions.size(), NormalMap(w, h));
  out.normals[0] = single_sided_warped_normal(tracking.front(), out.flows.front().u);
  out.normals[1] = single_sided_warped_normal(tracking.front(), half_flow(out.flows.front().u));
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t c = 3 * k + 2;
    out.normals[c] = tracking[k];
    const WindowFlows& cur = out.flows[k];
    if (k + 1 < n) {
      const WindowFlows& nxt = out.flows[k + 1];
      out.normals[c + 1] = intermediate_warped_normal(tracking[k], tracking[k + 1], half_flow(cur.v), nxt.u, 1, 2);
      out.normals[c + 2] = intermediate_warped_normal(tracking[k], tracking[k + 1], cur.v, half_flow(nxt.u), 2, 1);
    } else {
      out.normals[c + 1] = single_sided_warped_normal(tracking[k], half_flow(cur.v));
      out.normals[c + 2] = single_sided_warped_normal(tracking[k], cur.v);
    }
  }
  return out;
}

}  // namespace gradientstage
