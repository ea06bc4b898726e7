// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

#include "gradientstage/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <sstream>

#include "gradientstage/alignment.hpp"
#include "gradientstage/calib.hpp"
#include "gradientstage/image_io.hpp"
#include "gradientstage/parallel.hpp"
#include "gradientstage/photometric.hpp"
#include "gradientstage/qp_correct.hpp"
#include "gradientstage/sequencer.hpp"
#include "gradientstage/stage.hpp"
#include "gradientstage/stimulus.hpp"

namespace gradientstage::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// A flag value that parses but makes no sense.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// {"threads": 2, "simulate": {"leds": 162}, "calibrate": {"lights": {...}}}
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json j = json::object();
    dump(app, default_also, j);
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw CLI::ConfigError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConfigError("config: top level must be an object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConfigError("config: unsupported value " + v.dump());
  }

  static void collect(const json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, val] : j.items()) {
      if (val.is_object()) {
        std::vector<std::string> p = parents;
        p.push_back(key);
        collect(val, p, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (val.is_array()) {
        for (const json& e : val) item.inputs.push_back(scalar(e));
      } else {
        item.inputs.push_back(scalar(val));
      }
      out.push_back(std::move(item));
    }
  }

  static void dump(const CLI::App* app, bool default_also, json& j) {
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames().front();
      if (name == "help" || name == "config") continue;
      std::vector<std::string> vals = opt->reduced_results();
      if (vals.empty() && default_also && !opt->get_default_str().empty()) vals = {opt->get_default_str()};
      if (vals.empty()) continue;
      if (vals.size() == 1) {
        j[name] = vals.front();
      } else {
        j[name] = vals;
      }
    }
    for (const CLI::App* sub : app->get_subcommands({})) {
      json s = json::object();
      dump(sub, default_also, s);
      if (!s.empty()) j[sub->get_name()] = s;
    }
  }
};

Vec3 to_vec3(const std::vector<double>& v, const std::string& what) {
  if (v.size() != 3) throw UsageError(what + " needs three components");
  return {v[0], v[1], v[2]};
}

struct Method {
  enum Kind { Ma, Wilson, Minimal, Specular } kind = Ma;
  Axis base = Axis::X;
  bool dual = false;
};

Method parse_method(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  Method m;
  if (parts.empty()) throw UsageError("empty method");
  if (parts[0] == "ma" && parts.size() == 1) return m;
  if (parts[0] == "wilson" && parts.size() == 1) return {Method::Wilson};
  if (parts[0] == "specular" && parts.size() == 1) return {Method::Specular};
  if (parts[0] == "minimal" && parts.size() <= 3) {
    m.kind = Method::Minimal;
    if (parts.size() >= 2) {
      const auto a = parse_axis(parts[1]);
      if (!a) throw UsageError("unknown minimal base '" + parts[1] + "'");
      m.base = *a;
    }
    if (parts.size() == 3) {
      if (parts[2] != "dual") throw UsageError("expected ':dual', got ':" + parts[2] + "'");
      m.dual = true;
    }
    return m;
  }
  throw UsageError("unknown method '" + text + "' (ma|wilson|minimal:<base>[:dual]|specular)");
}

NormalMap apply_method(const Method& m, const GradientImageSet& set, const Vec3& view) {
  switch (m.kind) {
    case Method::Ma:
      return recover_ma(set);
    case Method::Wilson:
      return recover_wilson(set);
    case Method::Minimal:
      return recover_minimal(set, m.base, m.dual);
    case Method::Specular:
      return recover_specular(set, view).normals;
  }
  return recover_ma(set);
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  return p.parent_path() / (p.stem().string() + suffix + p.extension().string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

// Plain 3x3 array, or an object holding one under "K" or "H".
Eigen::Matrix3d read_matrix3_json(const fs::path& path) {
  json j = read_json(path);
  if (j.is_object()) {
    if (j.contains("K")) {
      j = j["K"];
    } else if (j.contains("H")) {
      j = j["H"];
    }
  }
  if (!j.is_array() || j.size() != 3) throw DataError(path.string() + ": expected a 3x3 array");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    if (!j[r].is_array() || j[r].size() != 3) throw DataError(path.string() + ": expected a 3x3 array");
    for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json matrix3_json(const Eigen::Matrix3d& m) {
  json j = json::array();
  for (int r = 0; r < 3; ++r) j.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return j;
}

// Numeric CSV rows with `columns` fields; a non-numeric first line is a header.
std::vector<std::vector<double>> read_numeric_csv(const fs::path& path, std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    bool numeric = true;
    for (std::string cell; std::getline(ss, cell, ',');) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": not numeric");
    }
    if (row.size() != columns)
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                      " columns");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string frame_name(const std::string& stem, std::size_t index) {
  std::ostringstream ss;
  ss << stem << "_";
  ss.width(4);
  ss.fill('0');
  ss << index << ".pfm";
  return ss.str();
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::string scene = "sphere";
  int width = 128;
  int height = 128;
  double radius = 0.0;
  int leds = 162;
  bool quantize = false;
  bool specular = false;
  double noise = 0.0;
  double led_noise = 0.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string prefix = "scene";
};

LightStage simulated_stage(int leds) {
  if (leds < 1) throw UsageError("--leds must be positive (0 selects the analytic renderer)");
  std::vector<Vec3> dirs;
  for (int level = 0;; ++level) {
    dirs = generate_icosphere_directions(level);
    if (dirs.size() >= static_cast<std::size_t>(leds)) break;
    if (level >= 5) throw UsageError("--leds too large");
  }
  return LightStage::from_directions(select_hemisphere(dirs, {0, 0, 1}, static_cast<std::size_t>(leds)));
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.width < 1 || a.height < 1) throw UsageError("image size must be positive");
  if (a.scene != "sphere" && a.scene != "cylinder") throw UsageError("--scene must be sphere or cylinder");
  const double radius = a.radius > 0.0 ? a.radius : 0.45 * std::min(a.width, a.height);
  const SceneSpec scene = a.scene == "sphere" ? make_sphere_scene(a.width, a.height, radius)
                                              : make_cylinder_scene(a.width, a.height, radius);
  std::mt19937_64 rng(a.seed);
  GradientImageSet set;
  const fs::path dir(a.out);
  fs::create_directories(dir);
  if (a.specular) {
    NormalMap refl(a.width, a.height);
    const Vec3 view{0, 0, 1};
    for (std::size_t i = 0; i < refl.size(); ++i) {
      if (!scene.true_normals.valid(i)) continue;
      const Vec3& n = scene.true_normals.normal(i);
      refl.set(i, normalized(2.0 * dot(n, view) * n - view), 1.0);
    }
    set = render_specular_analytic_set(SpecularSceneSpec(std::move(refl)));
  } else if (a.leds == 0) {
    set = render_lambert_analytic_set(scene);
  } else {
    const LightStage stage = simulated_stage(a.leds);
    DiscreteRenderOptions opts;
    opts.quantize = a.quantize;
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Condition c : kAllConditions) {
      if (a.led_noise > 0.0) {
        opts.led_gain.resize(stage.leds.size());
        for (double& g : opts.led_gain) g = std::max(0.0, 1.0 + a.led_noise * gauss(rng));
      }
      set.set(c, render_lambert_discrete(scene, stage, c, opts));
    }
    write_leds_json(dir / "leds.json", stage);
    for (Condition c : kAllConditions)
      write_ilt_csv(dir / ("ilt_" + std::string(condition_suffix(c)) + ".csv"), build_ilt(stage, c));
  }
  if (a.noise > 0.0) apply_multiplicative_noise(set, a.noise, rng);
  write_image_set(dir, a.prefix, set);
  write_normal_map(dir / "truth.pfm", scene.true_normals);
  out << "wrote " << a.width << "x" << a.height << " " << a.scene << " set to " << dir.string() << "\n";
  return kExitOk;
}

// ---- recover / correct ----------------------------------------------------

struct RecoverArgs {
  std::string method = "ma";
  std::string in;
  std::string prefix = "scene";
  std::string out;
  std::string png;
  std::vector<double> view{0, 0, 1};
};

int cmd_recover(const RecoverArgs& a, std::ostream& out) {
  const Method m = parse_method(a.method);
  const Vec3 view = to_vec3(a.view, "--view");
  const GradientImageSet set = read_image_set(a.in, a.prefix);
  const NormalMap n = apply_method(m, set, view);
  ensure_parent(a.out);
  write_normal_map(a.out, n);
  if (!a.png.empty()) {
    ensure_parent(a.png);
    write_normals_png8(a.png, n);
  }
  out << "recovered " << n.valid_count() << " normals with " << a.method << "\n";
  return kExitOk;
}

struct CorrectArgs {
  std::string init = "ma";
  std::string in;
  std::string prefix = "scene";
  std::string out;
};

int cmd_correct(const CorrectArgs& a, std::ostream& out) {
  const Method m = parse_method(a.init);
  if (m.kind == Method::Specular) throw UsageError("--init must be ma, wilson or minimal");
  const GradientImageSet set = read_image_set(a.in, a.prefix);
  const QpCorrection qc = correct_normal_map(set, apply_method(m, set, {0, 0, 1}));
  const fs::path p(a.out);
  ensure_parent(p);
  write_normal_map(p, qc.normals);
  write_vec3_map_pfm(with_suffix(p, "_delta"), qc.delta);
  write_vec3_map_pfm(with_suffix(p, "_delta_bar"), qc.delta_bar);
  out << "corrected " << qc.normals.valid_count() << " normals\n";
  return kExitOk;
}

// ---- calibrate -------------------------------------------------------------

struct LightsArgs {
  std::string intrinsics;
  std::string limb;
  std::string highlights;
  std::string nominal;
  double radius = 0.0;
  std::vector<double> stage_center;
  double stage_radius = 0.0;
  double threshold = 0.5;
  int morph_radius = 2;
  double pair_tolerance = 1e-6;
  std::string out;
};

int cmd_lights(const LightsArgs& a, std::ostream& out, std::ostream& err) {
  if (a.radius <= 0.0) throw UsageError("--radius must be positive");
  const bool on_stage = !a.stage_center.empty();
  if (on_stage && a.stage_radius <= 0.0) throw UsageError("--stage-center needs a positive --stage-radius");
  if (!a.nominal.empty() && !on_stage) throw UsageError("--nominal needs --stage-center and --stage-radius");
  CameraIntrinsics K;
  K.K = read_matrix3_json(a.intrinsics);
  K.validate();
  std::vector<Point2> limb;
  for (const auto& r : read_numeric_csv(a.limb, 2)) limb.push_back({r[0], r[1]});
  const SphereCenter sc = sphere_center(fit_conic(limb).conic, K, a.radius, a.pair_tolerance);
  const Vec3 stage_c = on_stage ? to_vec3(a.stage_center, "--stage-center") : Vec3{};

  std::map<int, fs::path> files;
  const std::regex name(R"(led_(\d+)\.pfm)");
  if (!fs::is_directory(a.highlights)) throw DataError("not a directory: " + a.highlights);
  for (const auto& e : fs::directory_iterator(a.highlights)) {
    std::smatch mt;
    const std::string fn = e.path().filename().string();
    if (std::regex_match(fn, mt, name)) files[std::stoi(mt[1].str())] = e.path();
  }
  if (files.empty()) throw DataError("no led_<id>.pfm files in " + a.highlights);

  std::vector<int> ids;
  for (const auto& [id, p] : files) ids.push_back(id);
  std::vector<Vec3> nominal;
  if (!a.nominal.empty()) {
    const LightStage st = read_leds_json(a.nominal);
    ids.clear();
    for (const LedRecord& l : st.leds) {
      ids.push_back(l.id);
      nominal.push_back(l.direction);
    }
  }
  std::vector<std::optional<Vec3>> recovered(ids.size());
  std::vector<std::string> failures(ids.size());
  parallel_rows(static_cast<int>(ids.size()), [&](int k) {
    const auto it = files.find(ids[static_cast<std::size_t>(k)]);
    if (it == files.end()) {
      failures[static_cast<std::size_t>(k)] = "no image";
      return;
    }
    try {
      const Point2 h = detect_highlight_centroid(read_image_pfm(it->second), a.threshold, a.morph_radius);
      const LightEstimate est = light_direction(h, K, {0, 0, 0}, sc.center, a.radius);
      recovered[static_cast<std::size_t>(k)] =
          on_stage ? led_direction_on_stage(est, stage_c, a.stage_radius) : est.direction;
    } catch (const DataError& e) {
      failures[static_cast<std::size_t>(k)] = e.what();
    }
  });

  json lights = json::array();
  for (std::size_t k = 0; k < ids.size(); ++k) {
    Vec3 l;
    if (recovered[k]) {
      l = *recovered[k];
    } else if (!nominal.empty()) {
      l = interpolate_blind_spot(nominal, recovered, k);
      err << "led " << ids[k] << ": " << failures[k] << ", interpolated from neighbours\n";
    } else {
      throw DataError("led " + std::to_string(ids[k]) + ": " + failures[k]);
    }
    lights.push_back({{"id", ids[k]}, {"lx", l.x}, {"ly", l.y}, {"lz", l.z}});
  }
  write_json(a.out, lights);
  out << "sphere_center " << sc.center.x << " " << sc.center.y << " " << sc.center.z << " distance " << sc.distance
      << "\n"
      << "wrote " << lights.size() << " light directions\n";
  return kExitOk;
}

struct HomographyArgs {
  std::string pairs;
  bool no_refine = false;
  int iterations = 100;
  std::string out;
};

int cmd_homography(const HomographyArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<PointPair> pairs;
  for (const auto& r : read_numeric_csv(a.pairs, 4)) pairs.push_back({{r[0], r[1]}, {r[2], r[3]}});
  const HomographyFit dlt = estimate_homography_dlt(pairs);
  Homography h = dlt.homography;
  out << "dlt symmetric_transfer_error " << dlt.symmetric_transfer_error << " sampson "
      << sampson_error(h, pairs) << "\n";
  if (!a.no_refine) {
    const SampsonRefinement r = refine_sampson(h, pairs, a.iterations);
    if (r.warning) err << *r.warning << "\n";
    h = r.homography;
    out << "refined sampson " << r.final_error << " after " << r.iterations << " iterations\n";
  }
  write_json(a.out, matrix3_json(h.H));
  return kExitOk;
}

struct SeparateArgs {
  std::string i0;
  std::string i1;
  std::string homography;
  std::string out;
};

int cmd_separate(const SeparateArgs& a, std::ostream& out) {
  Image i0 = read_image_pfm(a.i0);
  const Image i1 = read_image_pfm(a.i1);
  if (!a.homography.empty()) {
    Homography h;
    h.H = read_matrix3_json(a.homography);
    i0 = warp_homography(i0, h, i1.width(), i1.height());
  }
  const ReflectanceSeparation s = separate_reflectance(i0, i1);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  write_image_pfm(dir / "specular.pfm", s.specular);
  write_image_pfm(dir / "diffuse.pfm", s.diffuse);
  out << "clamped " << s.clamped_count << " pixels\n";
  return kExitOk;
}

// ---- align ---------------------------------------------------------------

struct AlignArgs {
  std::string pair = "x";
  std::vector<std::string> frames;
  int iterations = 10;
  double min_improvement = 1e-3;
  std::string out;
};

int cmd_align(const AlignArgs& a, std::ostream& out, std::ostream& err) {
  const auto axis = parse_axis(a.pair);
  if (!axis) throw UsageError("--pair must be x, y or z");
  if (a.iterations < 1) throw UsageError("--iters must be >= 1");
  const Image g = read_image_pfm(a.frames.at(0));
  const Image gbar = read_image_pfm(a.frames.at(1));
  const Image c = read_image_pfm(a.frames.at(2));
  const JointAlignment ja = joint_photometric_align(g, gbar, c, {a.iterations, a.min_improvement});
  if (ja.note) err << *ja.note << "\n";
  const fs::path dir(a.out);
  fs::create_directories(dir);
  write_flow_pfm(dir / ("flow_" + std::string(condition_suffix(gradient_condition(*axis))) + ".pfm"), ja.u);
  write_flow_pfm(dir / ("flow_" + std::string(condition_suffix(complement_condition(*axis))) + ".pfm"), ja.v);
  std::ofstream csv(dir / "residuals.csv");
  csv << "iteration,residual\n";
  csv.precision(17);
  for (std::size_t k = 0; k < ja.residuals.size(); ++k) csv << k + 1 << "," << ja.residuals[k] << "\n";
  if (!csv) throw DataError("cannot write residuals.csv");
  out << "iterations " << ja.residuals.size();
  if (!ja.residuals.empty()) out << " residual " << ja.residuals.back();
  out << "\n";
  return kExitOk;
}

// ---- sequence ------------------------------------------------------------

struct PlanArgs {
  int n = 1;
  std::string method = "minimal";
  std::string csv;
};

int cmd_plan(const PlanArgs& a, std::ostream& out) {
  if (a.n < 1) throw UsageError("--n must be >= 1");
  const CaptureMethod m = a.method == "wilson" ? CaptureMethod::Wilson : CaptureMethod::Minimal;
  out << image_count(a.n, m) << "\n";
  if (!a.csv.empty()) {
    if (m != CaptureMethod::Minimal) throw UsageError("--csv is only available for the minimal method");
    ensure_parent(a.csv);
    write_sequence_csv(a.csv, generate_sequence(a.n));
  }
  return kExitOk;
}

struct ProcessArgs {
  std::string dir;
  std::string out;
  int iterations = 10;
};

int cmd_process(const ProcessArgs& a, std::ostream& out) {
  const fs::path dir(a.dir);
  const std::vector<Condition> conds = read_sequence_csv(dir / "sequence.csv");
  std::vector<Image> images;
  images.reserve(conds.size());
  for (std::size_t k = 0; k < conds.size(); ++k) images.push_back(read_image_pfm(dir / frame_name("frame", k)));
  const ProcessedSequence p = process_sequence(conds, images, {}, {a.iterations, 1e-3});
  const fs::path od = a.out.empty() ? dir : fs::path(a.out);
  fs::create_directories(od);
  for (std::size_t k = 0; k < p.normals.size(); ++k) write_normal_map(od / frame_name("normal", k), p.normals[k]);
  std::ofstream csv(od / "residuals.csv");
  csv << "window,iteration,residual\n";
  csv.precision(17);
  for (std::size_t w = 0; w < p.residuals.size(); ++w)
    for (std::size_t k = 0; k < p.residuals[w].size(); ++k) csv << w << "," << k + 1 << "," << p.residuals[w][k] << "\n";
  if (!csv) throw DataError("cannot write residuals.csv");
  out << "processed " << p.normals.size() << " frames, " << p.flows.size() << " tracking windows\n";
  return kExitOk;
}

// ---- stimulus / report ---------------------------------------------------

struct StimulusArgs {
  std::string normals;
  std::string texture;
  std::string out;
  std::vector<double> l1{0.3, 0.3, 0.906};
  std::vector<double> l2{-0.3, 0.3, 0.906};
  double gamma = 2.2;
};

int cmd_stimulus(const StimulusArgs& a, std::ostream& out, std::ostream& err) {
  const NormalMap n = read_normal_map(a.normals);
  const Image c = read_image_pfm(a.texture);
  const ShapeImage shape = shape_only(n, normalized(to_vec3(a.l1, "--l1")), normalized(to_vec3(a.l2, "--l2")));
  if (shape.warning) err << *shape.warning << "\n";
  const Image tex = texture_only(c);
  const Image both = combined(shape.image, tex);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  write_png8(dir / "shape_only.png", shape.image, a.gamma);
  write_png8(dir / "texture_only.png", tex, a.gamma);
  write_png8(dir / "combined.png", both, a.gamma);
  write_image_pfm(dir / "shape_only.pfm", shape.image);
  write_image_pfm(dir / "texture_only.pfm", tex);
  write_image_pfm(dir / "combined.pfm", both);
  out << "wrote stimuli to " << dir.string() << "\n";
  return kExitOk;
}

struct ReportArgs {
  std::string normals;
  std::string truth;
  double bin = 1.0;
  std::string out;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  if (!(a.bin > 0.0)) throw UsageError("--bin must be positive");
  const NormalMap n = read_normal_map(a.normals);
  const NormalMap t = read_normal_map(a.truth);
  if (!n.same_shape(t)) throw DataError("normal maps differ in size");
  const Image err = angular_error_map(n, t);
  const ValueStats s = value_stats(err);
  if (!a.out.empty()) {
    ensure_parent(a.out);
    write_histogram_csv(a.out, histogram(err, a.bin));
  }
  out << "count " << s.count << " mean " << s.mean << " min " << s.min << " max " << s.max << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spherical-gradient photometric stereo toolkit", "gradientstage"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file mirroring the flags; flags given on the command line win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: all cores)")
      ->envname("GRADIENTSTAGE_THREADS")
      ->check(CLI::NonNegativeNumber);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Render a synthetic gradient image set");
  simulate->add_option("--scene", sim.scene, "sphere or cylinder")->capture_default_str();
  simulate->add_option("--width", sim.width)->capture_default_str();
  simulate->add_option("--height", sim.height)->capture_default_str();
  simulate->add_option("--radius", sim.radius, "Object radius in pixels (default 0.45 min(w,h))");
  simulate->add_option("--leds", sim.leds, "LED count; 0 renders the continuous illumination")
      ->capture_default_str();
  simulate->add_flag("--quantize", sim.quantize, "Use ILT levels instead of exact intensities");
  simulate->add_flag("--specular", sim.specular, "Render a mirror-like sphere instead of a Lambertian one");
  simulate->add_option("--noise", sim.noise, "Multiplicative image noise sigma")->check(CLI::NonNegativeNumber);
  simulate->add_option("--led-noise", sim.led_noise, "Per-LED emission noise sigma")->check(CLI::NonNegativeNumber);
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--prefix", sim.prefix)->capture_default_str();

  RecoverArgs rec;
  CLI::App* recover = app.add_subcommand("recover", "Recover normals from a gradient image set");
  recover->add_option("--method", rec.method, "ma|wilson|minimal:<base>[:dual]|specular")->capture_default_str();
  recover->add_option("--in", rec.in, "Input directory")->required();
  recover->add_option("--prefix", rec.prefix)->capture_default_str();
  recover->add_option("--out", rec.out, "Output normal map (.pfm)")->required();
  recover->add_option("--png", rec.png, "Also write an 8-bit visualization");
  recover->add_option("--view", rec.view, "View vector for specular recovery")->expected(3)->delimiter(',');

  CorrectArgs cor;
  CLI::App* correct = app.add_subcommand("correct", "QP normal correction");
  correct->add_option("--init", cor.init, "ma|wilson|minimal:<base>[:dual]")->capture_default_str();
  correct->add_option("--in", cor.in)->required();
  correct->add_option("--prefix", cor.prefix)->capture_default_str();
  correct->add_option("--out", cor.out, "Output normal map; _delta and _delta_bar maps go alongside")->required();

  CLI::App* calibrate = app.add_subcommand("calibrate", "Light, homography and reflectance calibration");
  calibrate->require_subcommand(1);
  LightsArgs la;
  CLI::App* lights = calibrate->add_subcommand("lights", "Light directions from mirror-ball highlights");
  lights->add_option("--intrinsics", la.intrinsics, "K as JSON 3x3")->required();
  lights->add_option("--limb", la.limb, "CSV x,y of sphere outline points")->required();
  lights->add_option("--highlights", la.highlights, "Directory of led_<id>.pfm")->required();
  lights->add_option("--radius", la.radius, "Mirror-ball radius (mm)")->required();
  lights->add_option("--stage-center", la.stage_center, "Stage centre in camera frame (mm)")
      ->expected(3)
      ->delimiter(',');
  lights->add_option("--stage-radius", la.stage_radius, "Stage radius (mm)");
  lights->add_option("--nominal", la.nominal, "Nominal leds.json for blind-spot interpolation");
  lights->add_option("--threshold", la.threshold)->capture_default_str();
  lights->add_option("--morph-radius", la.morph_radius)->capture_default_str();
  lights->add_option("--pair-tolerance", la.pair_tolerance)->capture_default_str();
  lights->add_option("--out", la.out, "Output lights JSON")->required();

  HomographyArgs ha;
  CLI::App* homog = calibrate->add_subcommand("homography", "Register two cameras from point pairs");
  homog->add_option("--pairs", ha.pairs, "CSV x,y,xp,yp")->required();
  homog->add_flag("--no-refine", ha.no_refine, "Skip Sampson refinement");
  homog->add_option("--iters", ha.iterations)->capture_default_str();
  homog->add_option("--out", ha.out, "Output H as JSON 3x3")->required();

  SeparateArgs sa;
  CLI::App* separate = calibrate->add_subcommand("separate", "Specular/diffuse separation");
  separate->add_option("--i0", sa.i0, "Image with the specular component")->required();
  separate->add_option("--i1", sa.i1, "Cross-polarized image")->required();
  separate->add_option("--homography", sa.homography, "H mapping i0 onto i1");
  separate->add_option("--out", sa.out, "Output directory")->required();

  AlignArgs aa;
  CLI::App* align = app.add_subcommand("align", "Joint photometric alignment of a gradient pair");
  align->add_option("--pair", aa.pair, "Axis of the pair")->capture_default_str();
  align->add_option("--frames", aa.frames, "g gbar c")->expected(3)->required();
  align->add_option("--iters", aa.iterations)->capture_default_str();
  align->add_option("--min-improvement", aa.min_improvement)->capture_default_str();
  align->add_option("--out", aa.out, "Output directory")->required();

  CLI::App* sequence = app.add_subcommand("sequence", "Capture sequence planning and processing");
  sequence->require_subcommand(1);
  PlanArgs pa;
  CLI::App* plan = sequence->add_subcommand("plan", "Print the image count for n tracking frames");
  plan->add_option("--n", pa.n)->required();
  plan->add_option("--method", pa.method)->check(CLI::IsMember({"wilson", "minimal"}))->capture_default_str();
  plan->add_option("--csv", pa.csv, "Write the minimal sequence as CSV");
  ProcessArgs pr;
  CLI::App* process = sequence->add_subcommand("process", "Normals for every frame of a captured sequence");
  process->add_option("--dir", pr.dir, "Directory with sequence.csv and frame_NNNN.pfm")->required();
  process->add_option("--out", pr.out, "Output directory (default: --dir)");
  process->add_option("--iters", pr.iterations)->capture_default_str();

  StimulusArgs st;
  CLI::App* stimulus = app.add_subcommand("stimulus", "Shape-only, texture-only and combined stimuli");
  stimulus->add_option("--normals", st.normals)->required();
  stimulus->add_option("--texture", st.texture, "Constant-illumination image")->required();
  stimulus->add_option("--out", st.out, "Output directory")->required();
  stimulus->add_option("--l1", st.l1)->expected(3)->delimiter(',');
  stimulus->add_option("--l2", st.l2)->expected(3)->delimiter(',');
  stimulus->add_option("--gamma", st.gamma)->capture_default_str();

  ReportArgs re;
  CLI::App* report = app.add_subcommand("report", "Angular-error histogram between two normal maps");
  report->add_option("--normals", re.normals)->required();
  report->add_option("--truth", re.truth)->required();
  report->add_option("--bin", re.bin, "Bin width (degrees)")->capture_default_str();
  report->add_option("--out", re.out, "Histogram CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitUsage;
  }

  try {
    set_thread_count(threads);
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (recover->parsed()) return cmd_recover(rec, out);
    if (correct->parsed()) return cmd_correct(cor, out);
    if (lights->parsed()) return cmd_lights(la, out, err);
    if (homog->parsed()) return cmd_homography(ha, out, err);
    if (separate->parsed()) return cmd_separate(sa, out);
    if (align->parsed()) return cmd_align(aa, out, err);
    if (plan->parsed()) return cmd_plan(pa, out);
    if (process->parsed()) return cmd_process(pr, out);
    if (stimulus->parsed()) return cmd_stimulus(st, out, err);
    if (report->parsed()) return cmd_report(re, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"gradientstage"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace gradientstage::cli
