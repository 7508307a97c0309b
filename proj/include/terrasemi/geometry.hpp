#pragma once

// Recordable geometric transforms.
//
// Every transform is an inverse warp: each output pixel pulls from a source
// coordinate. Pixel centers sit at integer coordinates. Images are sampled
// bilinearly; label maps and validity masks use nearest neighbour with the
// same coordinate map, so a recorded warp replays on labels in alignment with
// the image. A source point counts as in bounds when its nearest pixel
// (round half up) exists; out-of-bounds outputs take the fill value (image
// fill, kIgnore, or invalid). Because both samplers share that test, the
// filled region of a replayed image is exactly the IGNORE region of the
// replayed labels.
//
// Rotation and shear pivot on the image center ((H-1)/2, (W-1)/2). Positive
// Rotate degrees turn content counter-clockwise as displayed (y down).
// Rot90{k} turns content counter-clockwise by k quarter turns.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "terrasemi/error.hpp"
#include "terrasemi/image.hpp"
#include "terrasemi/rng.hpp"

namespace terrasemi {

struct Crop {
  std::size_t top = 0, left = 0;
  std::size_t src_h = 1, src_w = 1;
  std::size_t out_h = 1, out_w = 1;
  bool operator==(const Crop&) const = default;
};
struct FlipH {
  bool operator==(const FlipH&) const = default;
};
struct FlipV {
  bool operator==(const FlipV&) const = default;
};
struct Rot90 {
  int k = 0;
  bool operator==(const Rot90&) const = default;
};
struct ShearX {
  double rate = 0.0;
  bool operator==(const ShearX&) const = default;
};
struct ShearY {
  double rate = 0.0;
  bool operator==(const ShearY&) const = default;
};
struct Rotate {
  double degrees = 0.0;
  bool operator==(const Rotate&) const = default;
};
struct TranslateX {
  double fraction = 0.0;
  bool operator==(const TranslateX&) const = default;
};
struct TranslateY {
  double fraction = 0.0;
  bool operator==(const TranslateY&) const = default;
};

using GeomPrimitive =
    std::variant<Crop, FlipH, FlipV, Rot90, ShearX, ShearY, Rotate, TranslateX, TranslateY>;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct FillPolicy {
  float image_fill = 0.0f;
};

struct Dims {
  std::size_t height = 0;
  std::size_t width = 0;
  bool operator==(const Dims&) const = default;
};

/// Output dims of `p` applied to a `in` sized raster; validates parameters.
inline Dims output_dims(const GeomPrimitive& p, Dims in) {
  return std::visit(
      Overloaded{
          [&](const Crop& c) {
            if (c.src_h == 0 || c.src_w == 0 || c.out_h == 0 || c.out_w == 0) {
              throw Error(ErrorKind::kInvalidArgument, "crop sizes must be >= 1");
            }
            if (c.top + c.src_h > in.height || c.left + c.src_w > in.width) {
              throw Error(ErrorKind::kDimensionMismatch, "crop box exceeds source bounds");
            }
            return Dims{c.out_h, c.out_w};
          },
          [&](const Rot90& r) {
            if (r.k < 0 || r.k > 3) throw Error(ErrorKind::kInvalidArgument, "rot90 k must be 0..3");
            return r.k % 2 == 1 ? Dims{in.width, in.height} : in;
          },
          [&](const auto&) { return in; },
      },
      p);
}

namespace detail {

/// Source-coordinate map of one primitive. `clamp` marks crop maps, whose
/// samples are confined to the crop box instead of being filled.
struct PixelMap {
  Dims out;
  bool clamp = false;
  std::size_t y_lo = 0, y_hi = 0, x_lo = 0, x_hi = 0;  // inclusive box

  // Affine part: src = a * (y, x) + b, used by everything except crop.
  double ayy = 1, ayx = 0, axy = 0, axx = 1, by = 0, bx = 0;
  // Crop part.
  double scale_y = 1, scale_x = 1, top = 0, left = 0;

  std::pair<double, double> source(std::size_t y, std::size_t x) const {
    const double fy = static_cast<double>(y), fx = static_cast<double>(x);
    if (clamp) {
      return {top + (fy + 0.5) * scale_y - 0.5, left + (fx + 0.5) * scale_x - 0.5};
    }
    return {ayy * fy + ayx * fx + by, axy * fy + axx * fx + bx};
  }
};

inline PixelMap pixel_map(const GeomPrimitive& p, Dims in) {
  PixelMap m;
  m.out = output_dims(p, in);
  m.y_hi = in.height - 1;
  m.x_hi = in.width - 1;
  const double h = static_cast<double>(in.height), w = static_cast<double>(in.width);
  const double cy = (h - 1.0) / 2.0, cx = (w - 1.0) / 2.0;
  std::visit(
      Overloaded{
          [&](const Crop& c) {
            m.clamp = true;
            m.y_lo = c.top;
            m.y_hi = c.top + c.src_h - 1;
            m.x_lo = c.left;
            m.x_hi = c.left + c.src_w - 1;
            m.top = static_cast<double>(c.top);
            m.left = static_cast<double>(c.left);
            m.scale_y = static_cast<double>(c.src_h) / static_cast<double>(c.out_h);
            m.scale_x = static_cast<double>(c.src_w) / static_cast<double>(c.out_w);
          },
          [&](const FlipH&) { m.axx = -1; m.bx = w - 1; },
          [&](const FlipV&) { m.ayy = -1; m.by = h - 1; },
          [&](const Rot90& r) {
            // out(y, x) <- in(...) for counter-clockwise quarter turns.
            switch (r.k) {
              case 1: m.ayy = 0; m.ayx = 1; m.axy = -1; m.axx = 0; m.bx = w - 1; break;
              case 2: m.ayy = -1; m.axx = -1; m.by = h - 1; m.bx = w - 1; break;
              case 3: m.ayy = 0; m.ayx = -1; m.by = h - 1; m.axy = 1; m.axx = 0; break;
              default: break;
            }
          },
          [&](const ShearX& s) { m.axy = s.rate; m.bx = -s.rate * cy; },
          [&](const ShearY& s) { m.ayx = s.rate; m.by = -s.rate * cx; },
          [&](const Rotate& r) {
            const double t = r.degrees * std::numbers::pi / 180.0;
            const double c = std::cos(t), s = std::sin(t);
            // src_x = cx + c*dx - s*dy ; src_y = cy + s*dx + c*dy
            m.axx = c;  m.axy = -s; m.bx = cx - c * cx + s * cy;
            m.ayx = s;  m.ayy = c;  m.by = cy - s * cx - c * cy;
          },
          [&](const TranslateX& t) { m.bx = -t.fraction * w; },
          [&](const TranslateY& t) { m.by = -t.fraction * h; },
      },
      p);
  return m;
}

inline bool nearest_index(double s, std::size_t lo, std::size_t hi, bool clamp,
                          std::size_t& out) {
  const double r = std::floor(s + 0.5);
  if (clamp) {
    out = static_cast<std::size_t>(
        std::clamp(r, static_cast<double>(lo), static_cast<double>(hi)));
    return true;
  }
  if (r < static_cast<double>(lo) || r > static_cast<double>(hi)) return false;
  out = static_cast<std::size_t>(r);
  return true;
}

/// Nearest-neighbour resample of a byte raster (labels or mask payload).
inline std::vector<std::uint8_t> resample_nearest(std::span<const std::uint8_t> src, Dims in,
                                                  const GeomPrimitive& p, std::uint8_t fill,
                                                  Dims& out_dims) {
  const PixelMap m = pixel_map(p, in);
  out_dims = m.out;
  std::vector<std::uint8_t> out(m.out.height * m.out.width, fill);
  for (std::size_t y = 0; y < m.out.height; ++y) {
    for (std::size_t x = 0; x < m.out.width; ++x) {
      const auto [sy, sx] = m.source(y, x);
      std::size_t iy = 0, ix = 0;
      if (nearest_index(sy, m.y_lo, m.y_hi, m.clamp, iy) &&
          nearest_index(sx, m.x_lo, m.x_hi, m.clamp, ix)) {
        out[y * m.out.width + x] = src[iy * in.width + ix];
      }
    }
  }
  return out;
}

}  // namespace detail

/// Bilinear inverse warp of one primitive.
inline MultiBandImage apply_primitive(const MultiBandImage& image, const GeomPrimitive& p,
                                      const FillPolicy& fill = {}) {
  if (!(fill.image_fill >= 0.0f && fill.image_fill <= 1.0f)) {
    throw Error(ErrorKind::kInvalidArgument, "image fill must lie in [0,1]");
  }
  const Dims in{image.height(), image.width()};
  const detail::PixelMap m = detail::pixel_map(p, in);
  const std::size_t channels = image.channels();
  MultiBandImage out(m.out.height, m.out.width, image.bands());
  for (std::size_t y = 0; y < m.out.height; ++y) {
    for (std::size_t x = 0; x < m.out.width; ++x) {
      const auto [sy, sx] = m.source(y, x);
      std::size_t iy = 0, ix = 0;
      if (!detail::nearest_index(sy, m.y_lo, m.y_hi, m.clamp, iy) ||
          !detail::nearest_index(sx, m.x_lo, m.x_hi, m.clamp, ix)) {
        for (std::size_t c = 0; c < channels; ++c) out.at(y, x, c) = fill.image_fill;
        continue;
      }
      const double fy0 = std::floor(sy), fx0 = std::floor(sx);
      const double wy = sy - fy0, wx = sx - fx0;
      auto clamp_y = [&](double v) {
        return static_cast<std::size_t>(
            std::clamp(v, static_cast<double>(m.y_lo), static_cast<double>(m.y_hi)));
      };
      auto clamp_x = [&](double v) {
        return static_cast<std::size_t>(
            std::clamp(v, static_cast<double>(m.x_lo), static_cast<double>(m.x_hi)));
      };
      const std::size_t y0 = clamp_y(fy0), y1 = clamp_y(fy0 + 1.0);
      const std::size_t x0 = clamp_x(fx0), x1 = clamp_x(fx0 + 1.0);
      for (std::size_t c = 0; c < channels; ++c) {
        const double v = (1.0 - wy) * ((1.0 - wx) * image.at(y0, x0, c) + wx * image.at(y0, x1, c)) +
                         wy * ((1.0 - wx) * image.at(y1, x0, c) + wx * image.at(y1, x1, c));
        out.at(y, x, c) = std::clamp(static_cast<float>(v), 0.0f, 1.0f);
      }
    }
  }
  return out;
}

inline LabelMap apply_primitive(const LabelMap& labels, const GeomPrimitive& p) {
  Dims out;
  auto data = detail::resample_nearest(labels.data(), {labels.height(), labels.width()}, p,
                                       kIgnore, out);
  return LabelMap(out.height, out.width, labels.classes(), std::move(data));
}

inline ValidityMask apply_primitive(const ValidityMask& mask, const GeomPrimitive& p) {
  Dims out;
  auto data = detail::resample_nearest(mask.data(), {mask.height(), mask.width()}, p, 0, out);
  ValidityMask result(out.height, out.width, false);
  for (std::size_t i = 0; i < data.size(); ++i) result.set(i / out.width, i % out.width, data[i] != 0);
  return result;
}

/// Ordered, replayable list of applied primitives.
struct GeomRecord {
  Dims source;
  Dims output;
  std::vector<GeomPrimitive> ops;

  static GeomRecord identity(Dims dims) { return GeomRecord{dims, dims, {}}; }

  void append(const GeomPrimitive& p) {
    output = output_dims(p, output);
    ops.push_back(p);
  }

  /// Number of recorded primitives that move pixels (every primitive does).
  std::size_t size() const noexcept { return ops.size(); }

  bool operator==(const GeomRecord&) const = default;
};

namespace detail {
template <typename Raster>
void require_source_dims(const GeomRecord& rec, const Raster& r) {
  if (r.height() != rec.source.height || r.width() != rec.source.width) {
    throw Error(ErrorKind::kDimensionMismatch,
                "raster is " + std::to_string(r.height()) + "x" + std::to_string(r.width()) +
                    " but the record expects " + std::to_string(rec.source.height) + "x" +
                    std::to_string(rec.source.width));
  }
}
}  // namespace detail

/// Primitives are applied in order, each resampling the previous result.
inline MultiBandImage replay_on_image(const GeomRecord& rec, MultiBandImage image,
                                      const FillPolicy& fill = {}) {
  detail::require_source_dims(rec, image);
  for (const auto& p : rec.ops) image = apply_primitive(image, p, fill);
  return image;
}

inline LabelMap replay_on_labels(const GeomRecord& rec, LabelMap labels) {
  detail::require_source_dims(rec, labels);
  for (const auto& p : rec.ops) labels = apply_primitive(labels, p);
  return labels;
}

inline ValidityMask replay_on_mask(const GeomRecord& rec, ValidityMask mask) {
  detail::require_source_dims(rec, mask);
  for (const auto& p : rec.ops) mask = apply_primitive(mask, p);
  return mask;
}

/// Record equivalent to replaying `first` then `second`.
inline GeomRecord compose(const GeomRecord& first, const GeomRecord& second) {
  if (first.output != second.source) {
    throw Error(ErrorKind::kDimensionMismatch, "compose: output dims of the first record "
                                               "differ from source dims of the second");
  }
  GeomRecord out = first;
  out.ops.insert(out.ops.end(), second.ops.begin(), second.ops.end());
  out.output = second.output;
  return out;
}

/// Sampled crop box for a distorted crop. Each side's source length is
/// out * u with u ~ U[1-s, 1+s], rounded to whole pixels, kept inside
/// [ceil(out(1-s)), floor(out(1+s))] and clipped to the source size.
inline Crop sample_distorted_crop(Dims source, Dims out, double s, Rng& rng) {
  if (!(s >= 0.0 && s < 1.0)) throw Error(ErrorKind::kInvalidArgument, "crop distortion must be in [0,1)");
  if (out.height == 0 || out.width == 0) throw Error(ErrorKind::kInvalidArgument, "crop output must be >= 1x1");
  auto side = [&](std::size_t out_len, std::size_t src_len) {
    const double o = static_cast<double>(out_len);
    const double lo = std::max(1.0, std::ceil(o * (1.0 - s) - 1e-9));
    const double hi = std::floor(o * (1.0 + s) + 1e-9);
    const double u = rng.uniform(1.0 - s, 1.0 + s);
    double len = std::clamp(std::floor(o * u + 0.5), lo, hi);
    len = std::min(len, static_cast<double>(src_len));
    if (len < lo) {
      throw Error(ErrorKind::kInfeasible,
                  "source side " + std::to_string(src_len) +
                      " is smaller than the minimum feasible crop " +
                      std::to_string(static_cast<std::size_t>(lo)));
    }
    return static_cast<std::size_t>(len);
  };
  Crop c;
  c.out_h = out.height;
  c.out_w = out.width;
  c.src_h = side(out.height, source.height);
  c.src_w = side(out.width, source.width);
  c.top = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(source.height - c.src_h)));
  c.left = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(source.width - c.src_w)));
  return c;
}

inline std::pair<MultiBandImage, GeomRecord> random_distorted_crop(const MultiBandImage& image,
                                                                   Dims out, double s, Rng& rng) {
  const Dims src{image.height(), image.width()};
  GeomRecord rec = GeomRecord::identity(src);
  rec.append(sample_distorted_crop(src, out, s, rng));
  return {replay_on_image(rec, image), std::move(rec)};
}

struct FlipConfig {
  double hflip_prob = 0.5;
  double vflip_prob = 0.5;
  bool rot90 = true;
};

/// Samples flips and a quarter-turn count. Draw order is fixed (hflip, vflip,
/// k) and all three draws happen regardless of configuration.
inline GeomRecord sample_flips_rot90(Dims dims, Rng& rng, const FlipConfig& cfg = {}) {
  const bool h = rng.bernoulli(cfg.hflip_prob);
  const bool v = rng.bernoulli(cfg.vflip_prob);
  const int k = static_cast<int>(rng.uniform_int(4u));
  GeomRecord rec = GeomRecord::identity(dims);
  if (h) rec.append(FlipH{});
  if (v) rec.append(FlipV{});
  if (cfg.rot90 && k != 0) rec.append(Rot90{k});
  return rec;
}

inline std::pair<MultiBandImage, GeomRecord> random_flips_rot90(const MultiBandImage& image,
                                                                Rng& rng,
                                                                const FlipConfig& cfg = {}) {
  GeomRecord rec = sample_flips_rot90({image.height(), image.width()}, rng, cfg);
  return {replay_on_image(rec, image), std::move(rec)};
}

/// True for primitives that only permute pixels (exact under bilinear too).
inline bool is_lattice_preserving(const GeomPrimitive& p) {
  return std::holds_alternative<FlipH>(p) || std::holds_alternative<FlipV>(p) ||
         std::holds_alternative<Rot90>(p);
}

// JSON form:
//   {"source": [H, W], "output": [H, W], "ops": [
//      {"op": "crop", "top": t, "left": l, "src_h": ., "src_w": ., "out_h": ., "out_w": .},
//      {"op": "flip_h"}, {"op": "flip_v"}, {"op": "rot90", "k": k},
//      {"op": "shear_x", "rate": R}, {"op": "shear_y", "rate": R},
//      {"op": "rotate", "degrees": d},
//      {"op": "translate_x", "fraction": f}, {"op": "translate_y", "fraction": f}]}

inline nlohmann::json to_json(const GeomPrimitive& p) {
  using nlohmann::json;
  return std::visit(
      Overloaded{
          [](const Crop& c) {
            return json{{"op", "crop"},     {"top", c.top},     {"left", c.left},
                        {"src_h", c.src_h}, {"src_w", c.src_w}, {"out_h", c.out_h},
                        {"out_w", c.out_w}};
          },
          [](const FlipH&) { return json{{"op", "flip_h"}}; },
          [](const FlipV&) { return json{{"op", "flip_v"}}; },
          [](const Rot90& r) { return json{{"op", "rot90"}, {"k", r.k}}; },
          [](const ShearX& s) { return json{{"op", "shear_x"}, {"rate", s.rate}}; },
          [](const ShearY& s) { return json{{"op", "shear_y"}, {"rate", s.rate}}; },
          [](const Rotate& r) { return json{{"op", "rotate"}, {"degrees", r.degrees}}; },
          [](const TranslateX& t) { return json{{"op", "translate_x"}, {"fraction", t.fraction}}; },
          [](const TranslateY& t) { return json{{"op", "translate_y"}, {"fraction", t.fraction}}; },
      },
      p);
}

inline GeomPrimitive primitive_from_json(const nlohmann::json& j) {
  try {
    const auto op = j.at("op").get<std::string>();
    if (op == "crop") {
      return Crop{j.at("top").get<std::size_t>(),   j.at("left").get<std::size_t>(),
                  j.at("src_h").get<std::size_t>(), j.at("src_w").get<std::size_t>(),
                  j.at("out_h").get<std::size_t>(), j.at("out_w").get<std::size_t>()};
    }
    if (op == "flip_h") return FlipH{};
    if (op == "flip_v") return FlipV{};
    if (op == "rot90") return Rot90{j.at("k").get<int>()};
    if (op == "shear_x") return ShearX{j.at("rate").get<double>()};
    if (op == "shear_y") return ShearY{j.at("rate").get<double>()};
    if (op == "rotate") return Rotate{j.at("degrees").get<double>()};
    if (op == "translate_x") return TranslateX{j.at("fraction").get<double>()};
    if (op == "translate_y") return TranslateY{j.at("fraction").get<double>()};
    throw Error(ErrorKind::kFormat, "unknown geometric op '" + op + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed geometric op: ") + e.what());
  }
}

inline nlohmann::json to_json(const GeomRecord& rec) {
  nlohmann::json ops = nlohmann::json::array();
  for (const auto& p : rec.ops) ops.push_back(to_json(p));
  return {{"source", {rec.source.height, rec.source.width}},
          {"output", {rec.output.height, rec.output.width}},
          {"ops", std::move(ops)}};
}

inline GeomRecord record_from_json(const nlohmann::json& j) {
  GeomRecord rec;
  try {
    rec.source = {j.at("source").at(0).get<std::size_t>(), j.at("source").at(1).get<std::size_t>()};
    rec.output = rec.source;
    for (const auto& op : j.at("ops")) rec.append(primitive_from_json(op));
    const Dims declared{j.at("output").at(0).get<std::size_t>(), j.at("output").at(1).get<std::size_t>()};
    if (declared != rec.output) {
      throw Error(ErrorKind::kFormat, "record output dims disagree with its ops");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed geometric record: ") + e.what());
  }
  return rec;
}

}  // namespace terrasemi
