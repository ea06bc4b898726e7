// Copyright 2026 The GradientStage Authors
// SPDX-License-Identifier: Apache-2.0

#include "gradientstage/alignment.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "gradientstage/parallel.hpp"

namespace gradientstage {

FlowField::FlowField(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw DataError("flow dimensions must be positive");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  vectors_.assign(n, Displacement{});
  mask_.assign(n, 1);
}

void FlowField::set(std::size_t i, Displacement d) {
  if (!std::isfinite(d.dx) || !std::isfinite(d.dy)) throw DataError("flow displacements must be finite");
  vectors_[i] = d;
  mask_[i] = 1;
}

FlowField FlowField::constant(int width, int height, Displacement d) {
  FlowField f(width, height);
  for (std::size_t i = 0; i < f.size(); ++i) f.set(i, d);
  return f;
}

FlowField scale_flow(const FlowField& f, double factor) {
  FlowField out(f.width(), f.height());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.valid(i)) {
      out.set(i, {f.at(i).dx * factor, f.at(i).dy * factor});
    } else {
      out.invalidate(i);
    }
  }
  return out;
}

Image warp_image(const Image& img, const FlowField& flow) {
  if (!flow.same_shape(img)) throw DataError("warp_image: dimension mismatch");
  Image out(img.width(), img.height());
  parallel_rows(img.height(), [&](int y) {
    for (int x = 0; x < img.width(); ++x) {
      const std::size_t i = img.index(x, y);
      std::optional<double> v;
      if (flow.valid(i)) v = sample_bilinear(img, x + flow.at(i).dx, y + flow.at(i).dy);
      if (v) {
        out.set(i, *v);
      } else {
        out.invalidate(i);
      }
    }
  });
  return out;
}

NormalMap warp_normals(const NormalMap& nm, const FlowField& flow) {
  if (nm.width() != flow.width() || nm.height() != flow.height()) throw DataError("warp_normals: dimension mismatch");
  const int w = nm.width(), h = nm.height();
  NormalMap out(w, h);
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = nm.index(x, y);
      if (!flow.valid(i)) continue;
      const double sx = x + flow.at(i).dx, sy = y + flow.at(i).dy;
      if (!std::isfinite(sx) || !std::isfinite(sy)) continue;
      const double fx = std::floor(sx), fy = std::floor(sy);
      if (fx < 0 || fy < 0 || fx > w - 1 || fy > h - 1) continue;
      const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
      const double tx = sx - fx, ty = sy - fy;
      if (tx == 0.0 && ty == 0.0) {
        const std::size_t j = nm.index(x0, y0);
        if (nm.valid(j)) out.set(i, nm.normal(j), nm.magnitude(j));
        continue;
      }
      if ((tx > 0.0 && x0 + 1 >= w) || (ty > 0.0 && y0 + 1 >= h)) continue;
      Vec3 sum;
      double mag = 0.0;
      bool ok = true;
      for (int dy = 0; dy < 2 && ok; ++dy) {
        const double wy = dy == 0 ? 1.0 - ty : ty;
        if (wy == 0.0) continue;
        for (int dx = 0; dx < 2; ++dx) {
          const double wx = dx == 0 ? 1.0 - tx : tx;
          if (wx == 0.0) continue;
          const std::size_t j = nm.index(x0 + dx, y0 + dy);
          if (!nm.valid(j)) {
            ok = false;
            break;
          }
          sum += wx * wy * nm.normal(j);
          mag += wx * wy * nm.magnitude(j);
        }
      }
      if (!ok) continue;
      if (out.set_from_vector(i, sum)) out.set(i, out.normal(i), mag);
    }
  });
  return out;
}

double complement_residual(const Image& g, const Image& gbar, const Image& c) {
  if (!g.same_shape(gbar) || !g.same_shape(c)) throw DataError("complement_residual: dimension mismatch");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.valid(i) || !gbar.valid(i) || !c.valid(i)) continue;
    sum += std::abs(c.at(i) - (g.at(i) + gbar.at(i)));
    ++count;
  }
  if (count == 0) throw DataError("complement_residual: empty joint mask");
  return sum;
}

namespace {

// Dense float grid with mask, used inside the estimator.
struct Grid {
  int w = 0, h = 0;
  std::vector<double> v;
  std::vector<std::uint8_t> m;

  Grid() = default;
  Grid(int w_, int h_) : w(w_), h(h_), v(static_cast<std::size_t>(w_) * static_cast<std::size_t>(h_), 0.0),
                         m(v.size(), 1) {}
  std::size_t idx(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
  }
};

// Binomial 5-tap blur (mask-aware) followed by 2x decimation.
Grid downsample(const Grid& g) {
  static constexpr double k[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  Grid tmp(g.w, g.h);
  std::vector<double> wsum(g.v.size(), 0.0);
  for (int y = 0; y < g.h; ++y) {
    for (int x = 0; x < g.w; ++x) {
      double s = 0.0, ws = 0.0;
      for (int t = -2; t <= 2; ++t) {
        const int xx = x + t;
        if (xx < 0 || xx >= g.w) continue;
        const std::size_t j = g.idx(xx, y);
        if (!g.m[j]) continue;
        s += k[t + 2] * g.v[j];
        ws += k[t + 2];
      }
      const std::size_t i = g.idx(x, y);
      tmp.v[i] = ws > 0 ? s / ws : 0.0;
      tmp.m[i] = ws > 0;
    }
  }
  Grid blurred(g.w, g.h);
  for (int y = 0; y < g.h; ++y) {
    for (int x = 0; x < g.w; ++x) {
      double s = 0.0, ws = 0.0;
      for (int t = -2; t <= 2; ++t) {
        const int yy = y + t;
        if (yy < 0 || yy >= g.h) continue;
        const std::size_t j = g.idx(x, yy);
        if (!tmp.m[j]) continue;
        s += k[t + 2] * tmp.v[j];
        ws += k[t + 2];
      }
      const std::size_t i = g.idx(x, y);
      blurred.v[i] = ws > 0 ? s / ws : 0.0;
      blurred.m[i] = ws > 0 && g.m[i];
    }
  }
  Grid out(std::max(1, (g.w + 1) / 2), std::max(1, (g.h + 1) / 2));
  for (int y = 0; y < out.h; ++y) {
    for (int x = 0; x < out.w; ++x) {
      double s = 0.0;
      int n = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int xx = 2 * x + dx, yy = 2 * y + dy;
          if (xx >= g.w || yy >= g.h) continue;
          const std::size_t j = g.idx(xx, yy);
          if (!blurred.m[j]) continue;
          s += blurred.v[j];
          ++n;
        }
      }
      const std::size_t i = out.idx(x, y);
      out.v[i] = n ? s / n : 0.0;
      out.m[i] = n > 0;
    }
  }
  return out;
}

bool bilinear(const Grid& g, double x, double y, double& out) {
  const double fx = std::floor(x), fy = std::floor(y);
  if (fx < 0 || fy < 0 || fx > g.w - 1 || fy > g.h - 1) return false;
  const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
  const double tx = x - fx, ty = y - fy;
  const int x1 = std::min(x0 + 1, g.w - 1), y1 = std::min(y0 + 1, g.h - 1);
  if ((tx > 0 && x0 + 1 >= g.w) || (ty > 0 && y0 + 1 >= g.h)) return false;
  const std::size_t a = g.idx(x0, y0), b = g.idx(x1, y0), c = g.idx(x0, y1), d = g.idx(x1, y1);
  if (!g.m[a] || !g.m[b] || !g.m[c] || !g.m[d]) return false;
  out = (1 - ty) * ((1 - tx) * g.v[a] + tx * g.v[b]) + ty * ((1 - tx) * g.v[c] + tx * g.v[d]);
  return true;
}

// Bilinear upsample of a flow component to (w, h), scaled by 2.
std::vector<double> upsample(const std::vector<double>& f, int fw, int fh, int w, int h) {
  std::vector<double> out(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) {
    const double sy = std::clamp((y + 0.5) / 2.0 - 0.5, 0.0, fh - 1.0);
    const int y0 = static_cast<int>(sy), y1 = std::min(y0 + 1, fh - 1);
    const double ty = sy - y0;
    for (int x = 0; x < w; ++x) {
      const double sx = std::clamp((x + 0.5) / 2.0 - 0.5, 0.0, fw - 1.0);
      const int x0 = static_cast<int>(sx), x1 = std::min(x0 + 1, fw - 1);
      const double tx = sx - x0;
      auto at = [&](int xx, int yy) { return f[static_cast<std::size_t>(yy) * static_cast<std::size_t>(fw) + static_cast<std::size_t>(xx)]; };
      const double v = (1 - ty) * ((1 - tx) * at(x0, y0) + tx * at(x1, y0)) + ty * ((1 - tx) * at(x0, y1) + tx * at(x1, y1));
      out[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = 2.0 * v;
    }
  }
  return out;
}

void refine_level(const Grid& src, const Grid& tgt, std::vector<double>& u, std::vector<double>& v,
                  const FlowParams& p) {
  const int w = src.w, h = src.h;
  const std::size_t n = u.size();
  std::vector<double> ix(n), iy(n), it(n), u0(n), v0(n);
  std::vector<std::uint8_t> data(n);
  std::vector<double> un(n), vn(n);
  for (int warp = 0; warp < p.warps; ++warp) {
    u0 = u;
    v0 = v;
    parallel_rows(h, [&](int y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = src.idx(x, y);
        const double sx = x + u[i], sy = y + v[i];
        double c, l, r, t, b;
        data[i] = 0;
        ix[i] = iy[i] = it[i] = 0.0;
        if (!tgt.m[i] || !bilinear(src, sx, sy, c)) continue;
        if (!bilinear(src, sx - 1, sy, l) || !bilinear(src, sx + 1, sy, r) || !bilinear(src, sx, sy - 1, t) ||
            !bilinear(src, sx, sy + 1, b))
          continue;
        ix[i] = 0.5 * (r - l);
        iy[i] = 0.5 * (b - t);
        it[i] = c - tgt.v[i];
        data[i] = 1;
      }
    });
    const double alpha2 = p.lambda;
    for (int iter = 0; iter < p.inner_iterations; ++iter) {
      parallel_rows(h, [&](int y) {
        for (int x = 0; x < w; ++x) {
          const std::size_t i = src.idx(x, y);
          double su = 0.0, sv = 0.0;
          int k = 0;
          if (x > 0) { su += u[i - 1]; sv += v[i - 1]; ++k; }
          if (x + 1 < w) { su += u[i + 1]; sv += v[i + 1]; ++k; }
          if (y > 0) { su += u[i - static_cast<std::size_t>(w)]; sv += v[i - static_cast<std::size_t>(w)]; ++k; }
          if (y + 1 < h) { su += u[i + static_cast<std::size_t>(w)]; sv += v[i + static_cast<std::size_t>(w)]; ++k; }
          const double ub = k ? su / k : u[i], vb = k ? sv / k : v[i];
          if (!data[i]) {
            un[i] = ub;
            vn[i] = vb;
            continue;
          }
          const double num = ix[i] * (ub - u0[i]) + iy[i] * (vb - v0[i]) + it[i];
          const double den = alpha2 + ix[i] * ix[i] + iy[i] * iy[i];
          un[i] = ub - ix[i] * num / den;
          vn[i] = vb - iy[i] * num / den;
        }
      });
      u.swap(un);
      v.swap(vn);
    }
  }
}

}  // namespace

FlowResult PyramidFlowEstimator::estimate(const Image& src, const Image& tgt) const {
  if (!src.same_shape(tgt)) throw DataError("flow_estimate: dimension mismatch");
  if (params_.levels < 1 || params_.inner_iterations < 1 || params_.warps < 1 || !(params_.lambda > 0.0))
    throw DataError("invalid flow parameters");
  const int w = src.width(), h = src.height();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Image* img : {&src, &tgt}) {
    for (std::size_t i = 0; i < img->size(); ++i) {
      if (!img->valid(i)) continue;
      lo = std::min(lo, img->at(i));
      hi = std::max(hi, img->at(i));
    }
  }
  FlowResult result{FlowField(w, h), std::nullopt};
  if (!(hi - lo > 1e-12)) {
    result.warning = "flow_estimate: flat images, returning zero flow";
    return result;
  }
  std::vector<Grid> ps(1, Grid(w, h)), pt(1, Grid(w, h));
  for (std::size_t i = 0; i < src.size(); ++i) {
    ps[0].v[i] = (src.at(i) - lo) / (hi - lo);
    ps[0].m[i] = src.valid(i);
    pt[0].v[i] = (tgt.at(i) - lo) / (hi - lo);
    pt[0].m[i] = tgt.valid(i);
  }
  for (int l = 1; l < params_.levels; ++l) {
    if (ps.back().w < 8 || ps.back().h < 8) break;
    ps.push_back(downsample(ps.back()));
    pt.push_back(downsample(pt.back()));
  }
  std::vector<double> u, v;
  for (int l = static_cast<int>(ps.size()) - 1; l >= 0; --l) {
    const Grid& s = ps[static_cast<std::size_t>(l)];
    if (u.empty()) {
      u.assign(s.v.size(), 0.0);
      v.assign(s.v.size(), 0.0);
    } else {
      const Grid& coarse = ps[static_cast<std::size_t>(l) + 1];
      u = upsample(u, coarse.w, coarse.h, s.w, s.h);
      v = upsample(v, coarse.w, coarse.h, s.w, s.h);
    }
    refine_level(s, pt[static_cast<std::size_t>(l)], u, v, params_);
  }
  for (std::size_t i = 0; i < result.flow.size(); ++i) result.flow.set(i, {u[i], v[i]});
  return result;
}

FlowResult flow_estimate(const Image& src, const Image& tgt, const FlowParams& params) {
  return PyramidFlowEstimator(params).estimate(src, tgt);
}

namespace {

// (c − w) shifted by a common offset so both flow inputs stay non-negative.
std::pair<Image, Image> offset_pair(const Image& moving, const Image& c, const Image& other) {
  const int w = c.width(), h = c.height();
  std::vector<double> diff(c.size(), 0.0);
  std::vector<std::uint8_t> ok(c.size(), 0);
  double lo = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!c.valid(i) || !other.valid(i)) continue;
    diff[i] = c.at(i) - other.at(i);
    ok[i] = 1;
    lo = std::min(lo, diff[i]);
  }
  for (std::size_t i = 0; i < moving.size(); ++i)
    if (moving.valid(i)) lo = std::min(lo, moving.at(i));
  const double offset = -lo;
  Image src(w, h), tgt(w, h);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (moving.valid(i)) {
      src.set(i, moving.at(i) + offset);
    } else {
      src.invalidate(i);
    }
    if (ok[i]) {
      tgt.set(i, std::max(0.0, diff[i] + offset));
    } else {
      tgt.invalidate(i);
    }
  }
  return {std::move(src), std::move(tgt)};
}

// Mask-aware separable Gaussian.
std::vector<double> gaussian_blur(const std::vector<double>& v, const std::vector<std::uint8_t>& m, int w, int h,
                                  double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
  for (int t = -r; t <= r; ++t) k[static_cast<std::size_t>(t + r)] = std::exp(-t * t / (2.0 * sigma * sigma));
  auto pass = [&](const std::vector<double>& in, bool horizontal) {
    std::vector<double> out(in.size(), 0.0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = 0.0, ws = 0.0;
        for (int t = -r; t <= r; ++t) {
          const int xx = horizontal ? x + t : x, yy = horizontal ? y : y + t;
          if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
          const std::size_t j = static_cast<std::size_t>(yy) * static_cast<std::size_t>(w) + static_cast<std::size_t>(xx);
          if (!m[j]) continue;
          s += k[static_cast<std::size_t>(t + r)] * in[j];
          ws += k[static_cast<std::size_t>(t + r)];
        }
        out[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = ws > 0 ? s / ws : 0.0;
      }
    }
    return out;
  };
  return pass(pass(v, true), false);
}

// High-passed log intensities of a and b on a common offset: smooth shading
// differences drop out and the shared texture remains. Dark or invalid
// samples are dropped.
std::pair<Image, Image> texture_pair(const Image& a, const Image& b, double sigma = 3.0) {
  const double floor = 1e-3 * std::max(a.max_valid(), b.max_valid());
  const int w = a.width(), h = a.height();
  std::array<std::vector<double>, 2> hp;
  std::array<std::vector<std::uint8_t>, 2> mask;
  double lo = std::numeric_limits<double>::infinity();
  const std::array<const Image*, 2> in = {&a, &b};
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<double> l(a.size(), 0.0);
    mask[k].assign(a.size(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!in[k]->valid(i) || !(in[k]->at(i) > floor)) continue;
      l[i] = std::log(in[k]->at(i));
      mask[k][i] = 1;
    }
    const std::vector<double> low = gaussian_blur(l, mask[k], w, h, sigma);
    hp[k].resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      hp[k][i] = l[i] - low[i];
      if (mask[k][i]) lo = std::min(lo, hp[k][i]);
    }
  }
  std::array<Image, 2> out = {Image(w, h), Image(w, h)};
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (mask[k][i]) {
        out[k].set(i, hp[k][i] - lo);
      } else {
        out[k].invalidate(i);
      }
    }
  return {std::move(out[0]), std::move(out[1])};
}

}  // namespace

JointAlignment joint_photometric_align(const Image& g, const Image& gbar, const Image& c, const AlignOptions& options,
                                       const FlowEstimator* estimator) {
  if (!g.same_shape(gbar) || !g.same_shape(c)) throw DataError("joint_photometric_align: dimension mismatch");
  if (options.iterations < 1) throw DataError("joint_photometric_align: iterations must be >= 1");
  const PyramidFlowEstimator fallback;
  const FlowEstimator& est = estimator ? *estimator : fallback;
  const int w = g.width(), h = g.height();
  JointAlignment out{FlowField(w, h), FlowField(w, h), 0.0, {}, std::nullopt};
  FlowField u(w, h), v(w, h);
  double best = std::numeric_limits<double>::infinity();
  try {
    // Seed v from texture alone; the complement constraint barely constrains
    // shifts that trade u against v.
    if (c.max_valid() > 0.0 && gbar.max_valid() > 0.0) {
      const auto [src, tgt] = texture_pair(gbar, c);
      if (src.valid_count() > 0 && tgt.valid_count() > 0) {
        FlowResult r = est.estimate(src, tgt);
        if (!r.warning &&
            complement_residual(g, warp_image(gbar, r.flow), c) < complement_residual(g, gbar, c))
          v = std::move(r.flow);
      }
    }
    // Never return flows that do worse than the starting point.
    out.v = v;
    best = complement_residual(g, warp_image(gbar, v), c);
    out.initial_residual = best;
    for (int it = 0; it < options.iterations && best > 0.0; ++it) {
      {
        const auto [src, tgt] = offset_pair(g, c, warp_image(gbar, v));
        FlowResult r = est.estimate(src, tgt);
        if (r.warning) out.note = r.warning;
        u = std::move(r.flow);
      }
      const Image gw = warp_image(g, u);
      {
        const auto [src, tgt] = offset_pair(gbar, c, gw);
        FlowResult r = est.estimate(src, tgt);
        if (r.warning) out.note = r.warning;
        v = std::move(r.flow);
      }
      const double res = complement_residual(gw, warp_image(gbar, v), c);
      out.residuals.push_back(res);
      if (!(res < best)) break;
      const double prev = best;
      best = res;
      out.u = u;
      out.v = v;
      if (prev - res < options.min_relative_improvement * prev) break;
    }
  } catch (const DataError& e) {
    out.note = std::string("alignment stopped early: ") + e.what();
  }
  return out;
}

}  // namespace gradientstage
