#pragma once

// Random generators and independent reference implementations used by the
// unit and acceptance tests. The references deliberately avoid the library's
// own helpers for the quantity they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "terrasemi/terrasemi.hpp"

namespace tst {

using namespace terrasemi;

inline MultiBandImage random_image(Rng& rng, std::size_t h, std::size_t w, BandList bands) {
  std::vector<float> data(h * w * bands.size());
  for (auto& v : data) v = static_cast<float>(rng.uniform());
  return MultiBandImage(h, w, std::move(bands), std::move(data));
}

/// Random image on the 8-bit grid (every sample is q / 255).
inline MultiBandImage random_u8_image(Rng& rng, std::size_t h, std::size_t w, BandList bands) {
  std::vector<std::uint8_t> raw(h * w * bands.size());
  for (auto& v : raw) v = static_cast<std::uint8_t>(rng.uniform_int(256u));
  return from_u8(raw, h, w, std::move(bands));
}

inline LabelMap random_labels(Rng& rng, std::size_t h, std::size_t w, std::size_t k) {
  std::vector<std::uint8_t> data(h * w);
  for (auto& v : data) v = static_cast<std::uint8_t>(rng.uniform_int(static_cast<std::uint32_t>(k)));
  return LabelMap(h, w, k, std::move(data));
}

inline GeomPrimitive random_primitive(Rng& rng, Dims in) {
  switch (rng.uniform_int(9u)) {
    case 0: {
      Crop c;
      c.src_h = 1 + rng.uniform_int(static_cast<std::uint32_t>(in.height));
      c.src_w = 1 + rng.uniform_int(static_cast<std::uint32_t>(in.width));
      c.top = rng.uniform_int(static_cast<std::uint32_t>(in.height - c.src_h + 1));
      c.left = rng.uniform_int(static_cast<std::uint32_t>(in.width - c.src_w + 1));
      c.out_h = 2 + rng.uniform_int(14u);
      c.out_w = 2 + rng.uniform_int(14u);
      return c;
    }
    case 1: return FlipH{};
    case 2: return FlipV{};
    case 3: return Rot90{static_cast<int>(rng.uniform_int(4u))};
    case 4: return ShearX{rng.uniform(-0.3, 0.3)};
    case 5: return ShearY{rng.uniform(-0.3, 0.3)};
    case 6: return Rotate{rng.uniform(-30.0, 30.0)};
    case 7: return TranslateX{rng.uniform(-0.45, 0.45)};
    default: return TranslateY{rng.uniform(-0.45, 0.45)};
  }
}

inline GeomRecord random_record(Rng& rng, Dims source, std::size_t max_ops = 5) {
  GeomRecord rec = GeomRecord::identity(source);
  const std::size_t n = 1 + rng.uniform_int(static_cast<std::uint32_t>(max_ops));
  for (std::size_t i = 0; i < n; ++i) rec.append(random_primitive(rng, rec.output));
  return rec;
}

// ---------------------------------------------------------------------------
// Geometry reference: forward transforms written as 2x2 matrices about the
// image center and inverted numerically; one-hot planes are resampled with
// round-half-up nearest lookup, then argmax (all-zero column -> IGNORE).

struct Planes {
  std::size_t h, w, k;
  std::vector<double> v;  // k planes of h*w
  double& at(std::size_t c, std::size_t y, std::size_t x) { return v[(c * h + y) * w + x]; }
};

inline Planes one_hot(const LabelMap& labels) {
  Planes p{labels.height(), labels.width(), labels.classes(),
           std::vector<double>(labels.classes() * labels.pixels(), 0.0)};
  for (std::size_t y = 0; y < p.h; ++y)
    for (std::size_t x = 0; x < p.w; ++x)
      if (labels.at(y, x) != kIgnore) p.at(labels.at(y, x), y, x) = 1.0;
  return p;
}

inline Planes oracle_warp(Planes& in, const GeomPrimitive& prim) {
  const double H = static_cast<double>(in.h), W = static_cast<double>(in.w);
  std::size_t oh = in.h, ow = in.w;
  // Inverse map for the output pixel (y, x) -> (sy, sx); crop clamps.
  bool clamp = false;
  double lo_y = 0, hi_y = H - 1, lo_x = 0, hi_x = W - 1;
  std::array<double, 4> inv{1, 0, 0, 1};  // (y,x) rows
  double oy0 = 0, ox0 = 0, iy0 = 0, ix0 = 0;  // output/input anchors
  double sy_scale = 1, sx_scale = 1;
  auto set_forward = [&](std::array<double, 4> f) {
    const double det = f[0] * f[3] - f[1] * f[2];
    inv = {f[3] / det, -f[1] / det, -f[2] / det, f[0] / det};
  };
  if (const auto* c = std::get_if<Crop>(&prim)) {
    clamp = true;
    oh = c->out_h;
    ow = c->out_w;
    lo_y = static_cast<double>(c->top);
    hi_y = lo_y + static_cast<double>(c->src_h) - 1;
    lo_x = static_cast<double>(c->left);
    hi_x = lo_x + static_cast<double>(c->src_w) - 1;
    sy_scale = static_cast<double>(c->src_h) / static_cast<double>(c->out_h);
    sx_scale = static_cast<double>(c->src_w) / static_cast<double>(c->out_w);
  } else {
    oy0 = (H - 1) / 2;
    ox0 = (W - 1) / 2;
    iy0 = oy0;
    ix0 = ox0;
    if (std::holds_alternative<FlipH>(prim)) set_forward({1, 0, 0, -1});
    if (std::holds_alternative<FlipV>(prim)) set_forward({-1, 0, 0, 1});
    if (const auto* r = std::get_if<Rot90>(&prim)) {
      // Counter-clockwise quarter turns as displayed: (dy, dx) -> (-dx, dy).
      std::array<double, 4> f{1, 0, 0, 1};
      for (int i = 0; i < r->k; ++i) f = {-f[2], -f[3], f[0], f[1]};
      set_forward(f);
      if (r->k % 2 == 1) {
        std::swap(oh, ow);
        oy0 = (static_cast<double>(oh) - 1) / 2;
        ox0 = (static_cast<double>(ow) - 1) / 2;
      }
    }
    if (const auto* s = std::get_if<ShearX>(&prim)) inv = {1, 0, s->rate, 1};
    if (const auto* s = std::get_if<ShearY>(&prim)) inv = {1, s->rate, 0, 1};
    if (const auto* r = std::get_if<Rotate>(&prim)) {
      const double t = r->degrees * std::numbers::pi / 180.0;
      set_forward({std::cos(t), -std::sin(t), std::sin(t), std::cos(t)});
    }
    if (const auto* t = std::get_if<TranslateX>(&prim)) ox0 += t->fraction * W;
    if (const auto* t = std::get_if<TranslateY>(&prim)) oy0 += t->fraction * H;
  }
  Planes out{oh, ow, in.k, std::vector<double>(in.k * oh * ow, 0.0)};
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double sy, sx;
      if (clamp) {
        sy = lo_y + (static_cast<double>(y) + 0.5) * sy_scale - 0.5;
        sx = lo_x + (static_cast<double>(x) + 0.5) * sx_scale - 0.5;
      } else {
        const double dy = static_cast<double>(y) - oy0, dx = static_cast<double>(x) - ox0;
        sy = iy0 + inv[0] * dy + inv[1] * dx;
        sx = ix0 + inv[2] * dy + inv[3] * dx;
      }
      double ry = std::floor(sy + 0.5), rx = std::floor(sx + 0.5);
      if (clamp) {
        ry = std::clamp(ry, lo_y, hi_y);
        rx = std::clamp(rx, lo_x, hi_x);
      } else if (ry < 0 || ry > H - 1 || rx < 0 || rx > W - 1) {
        continue;
      }
      for (std::size_t c = 0; c < in.k; ++c)
        out.at(c, y, x) = in.at(c, static_cast<std::size_t>(ry), static_cast<std::size_t>(rx));
    }
  }
  return out;
}

inline LabelMap oracle_replay_labels(const GeomRecord& rec, const LabelMap& labels) {
  Planes p = one_hot(labels);
  for (const auto& prim : rec.ops) p = oracle_warp(p, prim);
  LabelMap out(p.h, p.w, labels.classes(), kIgnore);
  for (std::size_t y = 0; y < p.h; ++y) {
    for (std::size_t x = 0; x < p.w; ++x) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < p.k; ++c)
        if (p.at(c, y, x) > p.at(best, y, x)) best = c;
      if (p.at(best, y, x) > 0.5) out.at(y, x) = static_cast<std::uint8_t>(best);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// NT-Xent reference: explicit double loop, no log-sum-exp shift.

inline double brute_nt_xent(const std::vector<std::vector<double>>& z, double tau) {
  const std::size_t n2 = z.size();
  auto sim = [&](std::size_t a, std::size_t b) {
    double d = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < z[a].size(); ++i) {
      d += z[a][i] * z[b][i];
      na += z[a][i] * z[a][i];
      nb += z[b][i] * z[b][i];
    }
    return d / std::sqrt(na * nb);
  };
  double total = 0;
  for (std::size_t i = 0; i < n2; ++i) {
    const std::size_t j = i % 2 == 0 ? i + 1 : i - 1;
    double denom = 0;
    for (std::size_t k = 0; k < n2; ++k)
      if (k != i) denom += std::exp(sim(i, k) / tau);
    total += -std::log(std::exp(sim(i, j) / tau) / denom);
  }
  return total / static_cast<double>(n2);
}

// ---------------------------------------------------------------------------
// Metrics reference.

inline std::vector<std::vector<std::uint64_t>> oracle_confusion(const LabelMap& pred, const LabelMap& gt,
                                                                std::size_t k) {
  std::vector<std::vector<std::uint64_t>> cm(k, std::vector<std::uint64_t>(k, 0));
  for (std::size_t y = 0; y < gt.height(); ++y)
    for (std::size_t x = 0; x < gt.width(); ++x)
      if (gt.at(y, x) != kIgnore) cm[gt.at(y, x)][pred.at(y, x)] += 1;
  return cm;
}

inline std::optional<double> oracle_iou(const std::vector<std::vector<std::uint64_t>>& cm, std::size_t c) {
  std::uint64_t tp = cm[c][c], fp = 0, fn = 0;
  for (std::size_t i = 0; i < cm.size(); ++i) {
    if (i == c) continue;
    fp += cm[i][c];
    fn += cm[c][i];
  }
  if (tp + fp + fn == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
}

// ---------------------------------------------------------------------------

inline ProbMap random_probs(Rng& rng, std::size_t h, std::size_t w, std::size_t k, double sharpness = 4.0) {
  std::vector<float> data(h * w * k);
  for (std::size_t p = 0; p < h * w; ++p) {
    std::vector<double> e(k);
    double sum = 0;
    for (auto& v : e) sum += (v = std::exp(sharpness * rng.uniform()));
    for (std::size_t c = 0; c < k; ++c) data[p * k + c] = static_cast<float>(e[c] / sum);
  }
  return ProbMap(h, w, k, std::move(data));
}

inline bool same_pixels(const MultiBandImage& a, const MultiBandImage& b) {
  return a.height() == b.height() && a.width() == b.width() && a.bands() == b.bands() &&
         std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

inline double max_abs_diff(const MultiBandImage& a, const MultiBandImage& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a.data()[i]) - b.data()[i]));
  return m;
}

}  // namespace tst
