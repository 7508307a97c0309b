#pragma once

// Augmentation policies: weak (supervised and pseudo-label inputs), SimCLR
// views, and the strong policy used for the FixMatch consistency branch.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "terrasemi/appearance.hpp"
#include "terrasemi/digest.hpp"
#include "terrasemi/error.hpp"
#include "terrasemi/geometry.hpp"
#include "terrasemi/image.hpp"
#include "terrasemi/rng.hpp"

namespace terrasemi {

// ---------------------------------------------------------------------------
// Weak policy

struct WeakPolicyConfig {
  Dims crop_out{};  // {0,0}: keep the source size
  double crop_distortion = 0.5;
  double jitter_prob = 0.5;
  double jitter_strength = 0.4;
  FlipConfig flips{};
};

inline void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, std::string(what) + " must lie in [0,1]");
  }
}

/// RGB jitter for (R,G,B) inputs, generalized jitter for every other layout.
inline MultiBandImage jitter_for_bands(const MultiBandImage& image, double strength, Rng& rng) {
  return is_rgb(image.bands()) ? color_jitter_rgb(image, strength, rng)
                               : color_jitter_general(image, strength, rng);
}

struct WeakResult {
  MultiBandImage image;
  std::optional<LabelMap> labels;
  GeomRecord record;
};

/// Distorted crop, flips and quarter turn, then gated jitter. Labels follow
/// the geometric record by nearest neighbour and are never jittered.
inline WeakResult weak_augment(const MultiBandImage& image, const LabelMap* labels,
                               const WeakPolicyConfig& cfg, Rng& rng) {
  check_probability(cfg.jitter_prob, "jitter_prob");
  const Dims src{image.height(), image.width()};
  if (labels && (labels->height() != src.height || labels->width() != src.width)) {
    throw Error(ErrorKind::kDimensionMismatch, "labels dims differ from image dims");
  }
  const Dims out = cfg.crop_out.height == 0 ? src : cfg.crop_out;

  GeomRecord rec = GeomRecord::identity(src);
  rec.append(sample_distorted_crop(src, out, cfg.crop_distortion, rng));
  rec = compose(rec, sample_flips_rot90(out, rng, cfg.flips));

  WeakResult result{replay_on_image(rec, image), std::nullopt, rec};
  if (labels) result.labels = replay_on_labels(rec, *labels);
  if (rng.bernoulli(cfg.jitter_prob)) {
    result.image = jitter_for_bands(result.image, cfg.jitter_strength, rng);
  }
  return result;
}

// ---------------------------------------------------------------------------
// SimCLR policy

struct SimclrPolicyConfig {
  Dims crop_out{};
  double crop_distortion = 0.5;
  FlipConfig flips{0.5, 0.5, false};
  double jitter_prob = 0.8;
  double jitter_strength = 0.8;
  double drop_prob = 0.2;
  DropMode drop_mode = DropMode::kRgbGray;
  bool blur = true;
  double blur_prob = 0.5;
  BlurConfig blur_cfg{};
};

/// crop -> flips -> gated jitter -> gated color drop -> gated blur.
inline MultiBandImage simclr_view(const MultiBandImage& image, const SimclrPolicyConfig& cfg,
                                  Rng& rng) {
  check_probability(cfg.jitter_prob, "jitter_prob");
  check_probability(cfg.drop_prob, "drop_prob");
  check_probability(cfg.blur_prob, "blur_prob");
  const Dims src{image.height(), image.width()};
  const Dims out = cfg.crop_out.height == 0 ? src : cfg.crop_out;
  auto [view, crop_rec] = random_distorted_crop(image, out, cfg.crop_distortion, rng);
  view = random_flips_rot90(view, rng, cfg.flips).first;
  if (rng.bernoulli(cfg.jitter_prob)) view = jitter_for_bands(view, cfg.jitter_strength, rng);
  view = color_drop(view, cfg.drop_mode, cfg.drop_prob, rng);
  if (cfg.blur) view = gaussian_blur(view, cfg.blur_cfg, cfg.blur_prob, rng);
  return view;
}

/// Two independent samples of the SimCLR pipeline from one source.
inline std::pair<MultiBandImage, MultiBandImage> simclr_views(const MultiBandImage& image,
                                                              const SimclrPolicyConfig& cfg,
                                                              Rng& rng) {
  MultiBandImage a = simclr_view(image, cfg, rng);
  MultiBandImage b = simclr_view(image, cfg, rng);
  return {std::move(a), std::move(b)};
}

// ---------------------------------------------------------------------------
// Strong policy

enum class AugFn : std::uint8_t {
  kAutoContrast,
  kBrightness,
  kColor,
  kContrast,
  kEqualize,
  kHue,
  kInvert,
  kPosterize,
  kRotate,
  kSaturation,
  kShearX,
  kShearY,
  kSolarize,
  kSolarizeAdd,
  kTranslateX,
  kTranslateY,
};

inline constexpr std::array<std::pair<AugFn, std::string_view>, 16> kAugFnNames{{
    {AugFn::kAutoContrast, "AutoContrast"}, {AugFn::kBrightness, "Brightness"},
    {AugFn::kColor, "Color"},               {AugFn::kContrast, "Contrast"},
    {AugFn::kEqualize, "Equalize"},         {AugFn::kHue, "Hue"},
    {AugFn::kInvert, "Invert"},             {AugFn::kPosterize, "Posterize"},
    {AugFn::kRotate, "Rotate"},             {AugFn::kSaturation, "Saturation"},
    {AugFn::kShearX, "ShearX"},             {AugFn::kShearY, "ShearY"},
    {AugFn::kSolarize, "Solarize"},         {AugFn::kSolarizeAdd, "SolarizeAdd"},
    {AugFn::kTranslateX, "TranslateX"},     {AugFn::kTranslateY, "TranslateY"},
}};

inline std::string_view aug_fn_name(AugFn fn) {
  for (const auto& [f, name] : kAugFnNames)
    if (f == fn) return name;
  return "?";
}

/// Case-insensitive ("Autocontrast" and "AutoContrast" both parse).
inline AugFn parse_aug_fn(std::string_view name) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  };
  for (const auto& [f, n] : kAugFnNames)
    if (lower(n) == lower(name)) return f;
  throw Error(ErrorKind::kFormat, "unknown augmentation function '" + std::string(name) + "'");
}

inline bool is_geometric(AugFn fn) {
  return fn == AugFn::kRotate || fn == AugFn::kShearX || fn == AugFn::kShearY ||
         fn == AugFn::kTranslateX || fn == AugFn::kTranslateY;
}

struct StrongEntry {
  AugFn fn;
  double prob;
  double strength;
  bool operator==(const StrongEntry&) const = default;
};

struct StrongRow {
  StrongEntry first;
  StrongEntry second;
  bool operator==(const StrongRow&) const = default;
};

inline constexpr std::size_t kStrongTableRows = 25;

struct StrongAugTable {
  std::vector<StrongRow> rows;
};

/// The 25 two-function compositions, entries as fn(probability, strength).
inline StrongAugTable default_strong_table() {
  using F = AugFn;
  return StrongAugTable{{
      {{F::kEqualize, 0.8, 0.1}, {F::kShearY, 0.8, 0.4}},
      {{F::kColor, 0.4, 0.9}, {F::kEqualize, 0.6, 0.3}},
      {{F::kColor, 0.4, 0.1}, {F::kRotate, 0.6, 0.8}},
      {{F::kSolarize, 0.8, 0.3}, {F::kEqualize, 0.4, 0.7}},
      {{F::kSolarize, 0.4, 0.2}, {F::kSolarize, 0.6, 0.2}},
      {{F::kColor, 0.2, 0.0}, {F::kEqualize, 0.8, 0.8}},
      {{F::kEqualize, 0.4, 0.8}, {F::kSolarizeAdd, 0.8, 0.3}},
      {{F::kShearX, 0.2, 0.9}, {F::kRotate, 0.6, 0.8}},
      {{F::kColor, 0.6, 0.1}, {F::kEqualize, 1.0, 0.2}},
      {{F::kInvert, 0.4, 0.9}, {F::kRotate, 0.6, 0.0}},
      {{F::kEqualize, 1.0, 0.9}, {F::kShearY, 0.6, 0.3}},
      {{F::kColor, 0.4, 0.7}, {F::kEqualize, 0.6, 0.0}},
      {{F::kPosterize, 0.4, 0.6}, {F::kAutoContrast, 0.4, 0.7}},
      {{F::kSolarize, 0.6, 0.8}, {F::kColor, 0.6, 0.9}},
      {{F::kSolarize, 0.2, 0.4}, {F::kRotate, 0.8, 0.9}},
      {{F::kRotate, 1.0, 0.7}, {F::kTranslateY, 0.8, 0.9}},
      {{F::kShearX, 0.0, 0.0}, {F::kSolarize, 0.8, 0.4}},
      {{F::kShearY, 0.8, 0.0}, {F::kColor, 0.6, 0.4}},
      {{F::kColor, 1.0, 0.0}, {F::kRotate, 0.6, 0.2}},
      {{F::kEqualize, 0.8, 0.4}, {F::kEqualize, 0.0, 0.8}},
      {{F::kEqualize, 1.0, 0.4}, {F::kAutoContrast, 0.6, 0.2}},
      {{F::kShearY, 0.4, 0.7}, {F::kSolarizeAdd, 0.6, 0.7}},
      {{F::kPosterize, 0.8, 0.2}, {F::kSolarize, 0.6, 1.0}},
      {{F::kSolarize, 0.6, 0.8}, {F::kEqualize, 0.6, 0.1}},
      {{F::kColor, 0.8, 0.6}, {F::kRotate, 0.4, 0.5}},
  }};
}

/// Canonical text of a table: one row per line, "Fn,p,s;Fn,p,s\n", numbers
/// printed with %.6g.
inline std::string canonical_text(const StrongAugTable& table) {
  std::string out;
  char buf[64];
  auto entry = [&](const StrongEntry& e) {
    std::snprintf(buf, sizeof(buf), ",%.6g,%.6g", e.prob, e.strength);
    out += aug_fn_name(e.fn);
    out += buf;
  };
  for (const auto& row : table.rows) {
    entry(row.first);
    out += ';';
    entry(row.second);
    out += '\n';
  }
  return out;
}

inline std::string table_digest(const StrongAugTable& table) {
  return to_hex(fnv1a64(canonical_text(table)));
}

/// Digest of the shipped 25-row table; a loaded table must reproduce it.
inline constexpr std::string_view kStrongTableDigest = "77334363665e87b9";

inline void validate_table(const StrongAugTable& table) {
  if (table.rows.size() != kStrongTableRows) {
    throw Error(ErrorKind::kFormat, "strong table must have exactly 25 rows, got " +
                                        std::to_string(table.rows.size()));
  }
  for (const auto& row : table.rows) {
    for (const auto& e : {row.first, row.second}) {
      if (!(e.prob >= 0.0 && e.prob <= 1.0) || !(e.strength >= 0.0 && e.strength <= 1.0)) {
        throw Error(ErrorKind::kFormat, "strong table probabilities and strengths must lie in [0,1]");
      }
    }
  }
}

// Data file: {"rows": [[{"fn": "Equalize", "prob": 0.8, "strength": 0.1}, {...}], ...]}
inline nlohmann::json to_json(const StrongAugTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  auto entry = [](const StrongEntry& e) {
    return nlohmann::json{{"fn", std::string(aug_fn_name(e.fn))}, {"prob", e.prob}, {"strength", e.strength}};
  };
  for (const auto& r : table.rows) rows.push_back({entry(r.first), entry(r.second)});
  return {{"rows", std::move(rows)}};
}

/// Parses a table file; with `verify_digest` the content must match the
/// shipped table exactly.
inline StrongAugTable strong_table_from_json(const nlohmann::json& j, bool verify_digest = true) {
  StrongAugTable table;
  try {
    for (const auto& r : j.at("rows")) {
      if (r.size() != 2) throw Error(ErrorKind::kFormat, "strong table rows hold two entries");
      auto entry = [](const nlohmann::json& e) {
        return StrongEntry{parse_aug_fn(e.at("fn").get<std::string>()), e.at("prob").get<double>(),
                           e.at("strength").get<double>()};
      };
      table.rows.push_back({entry(r[0]), entry(r[1])});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed strong table: ") + e.what());
  }
  validate_table(table);
  if (verify_digest && table_digest(table) != kStrongTableDigest) {
    throw Error(ErrorKind::kFormat, "strong table digest mismatch: got " + table_digest(table) +
                                        ", expected " + std::string(kStrongTableDigest));
  }
  return table;
}

/// Strength in [0,1] to primitive parameters. Signed magnitudes take a random
/// sign (one extra draw).
struct MagnitudeMap {
  double rotate_max_degrees = 30.0;
  double shear_max = 0.3;
  double translate_max = 0.45;
  double posterize_max_reduction = 4.0;  // B = 8 - round(4 s)
  double solarize_add_max = 110.0;       // A = round(110 s)
  int solarize_add_threshold = 128;
  double factor_max = 1.0;               // color-like factor 1 +/- s
  double max_jitter_strength = 0.95;     // cap when substituting jitter ops

  int posterize_bits(double s) const {
    return 8 - static_cast<int>(std::floor(posterize_max_reduction * s + 0.5));
  }
  int solarize_threshold(double s) const {
    return static_cast<int>(std::floor(255.0 * (1.0 - s) + 0.5));
  }
  int solarize_add_amount(double s) const {
    return static_cast<int>(std::floor(solarize_add_max * s + 0.5));
  }
};

struct CutoutConfig {
  std::size_t n_rects = 4;
  double rect_frac = 0.1;
  float fill = 0.0f;
};

struct Rect {
  std::size_t top = 0, left = 0, height = 0, width = 0;
  bool operator==(const Rect&) const = default;
};

inline std::size_t cutout_side(Dims dims, double rect_frac) {
  const double side = std::floor(rect_frac * static_cast<double>(std::min(dims.height, dims.width)) + 0.5);
  return std::max<std::size_t>(1, static_cast<std::size_t>(side));
}

inline MultiBandImage fill_rects(MultiBandImage image, const std::vector<Rect>& rects, float fill) {
  for (const Rect& r : rects)
    for (std::size_t y = r.top; y < r.top + r.height; ++y)
      for (std::size_t x = r.left; x < r.left + r.width; ++x)
        for (std::size_t c = 0; c < image.channels(); ++c) image.at(y, x, c) = fill;
  return image;
}

/// n_rects squares of side round(rect_frac * min(H, W)), centers uniform over
/// the image, clipped at the borders. Rectangles may overlap.
inline std::pair<MultiBandImage, std::vector<Rect>> cutout_multi(const MultiBandImage& image,
                                                                 const CutoutConfig& cut,
                                                                 Rng& rng) {
  if (!(cut.rect_frac > 0.0 && cut.rect_frac < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "cutout rect_frac must lie in (0,1)");
  }
  const Dims dims{image.height(), image.width()};
  const auto side = static_cast<std::int64_t>(cutout_side(dims, cut.rect_frac));
  std::vector<Rect> rects;
  for (std::size_t i = 0; i < cut.n_rects; ++i) {
    const auto cy = rng.uniform_int(0, static_cast<std::int64_t>(dims.height) - 1);
    const auto cx = rng.uniform_int(0, static_cast<std::int64_t>(dims.width) - 1);
    const std::int64_t y0 = std::max<std::int64_t>(0, cy - side / 2);
    const std::int64_t x0 = std::max<std::int64_t>(0, cx - side / 2);
    const std::int64_t y1 = std::min<std::int64_t>(static_cast<std::int64_t>(dims.height), cy - side / 2 + side);
    const std::int64_t x1 = std::min<std::int64_t>(static_cast<std::int64_t>(dims.width), cx - side / 2 + side);
    rects.push_back({static_cast<std::size_t>(y0), static_cast<std::size_t>(x0),
                     static_cast<std::size_t>(y1 - y0), static_cast<std::size_t>(x1 - x0)});
  }
  return {fill_rects(image, rects, cut.fill), std::move(rects)};
}

/// Applies one table entry at full probability (the caller gates it).
/// Geometric functions append their primitive to `rec`.
inline MultiBandImage apply_strong_fn(const MultiBandImage& image, AugFn fn, double strength,
                                      const MagnitudeMap& mag, Rng& rng, GeomRecord& rec,
                                      const FillPolicy& fill = {}) {
  auto signed_mag = [&](double max) {
    const double v = max * strength;
    return rng.bernoulli(0.5) ? -v : v;
  };
  auto geometric = [&](const GeomPrimitive& p) {
    rec.append(p);
    return apply_primitive(image, p, fill);
  };
  const bool rgb = is_rgb(image.bands());
  const double jitter_s = std::min(strength, mag.max_jitter_strength);
  switch (fn) {
    case AugFn::kAutoContrast: return autocontrast(image);
    case AugFn::kEqualize: return equalize(image);
    case AugFn::kInvert: return invert(image);
    case AugFn::kPosterize: return posterize(image, mag.posterize_bits(strength));
    case AugFn::kSolarize: return solarize(image, mag.solarize_threshold(strength));
    case AugFn::kSolarizeAdd:
      return solarize_add(image, mag.solarize_add_amount(strength), mag.solarize_add_threshold);
    case AugFn::kColor:
      if (!rgb) return color_jitter_general(image, jitter_s, rng);
      return color(image, std::clamp(1.0 + signed_mag(mag.factor_max), 0.0, 2.0));
    case AugFn::kBrightness:
      return adjust_brightness(image, std::max(0.0, 1.0 + signed_mag(mag.factor_max)));
    case AugFn::kContrast:
      return adjust_contrast(image, std::max(0.0, 1.0 + signed_mag(mag.factor_max)));
    case AugFn::kHue:
      if (!rgb) return color_jitter_general(image, jitter_s, rng);
      return adjust_hue(image, 1.0 + signed_mag(mag.factor_max));
    case AugFn::kSaturation:
      if (!rgb) return color_jitter_general(image, jitter_s, rng);
      return adjust_saturation(image, std::max(0.0, 1.0 + signed_mag(mag.factor_max)));
    case AugFn::kRotate: return geometric(Rotate{signed_mag(mag.rotate_max_degrees)});
    case AugFn::kShearX: return geometric(ShearX{signed_mag(mag.shear_max)});
    case AugFn::kShearY: return geometric(ShearY{signed_mag(mag.shear_max)});
    case AugFn::kTranslateX: return geometric(TranslateX{signed_mag(mag.translate_max)});
    case AugFn::kTranslateY: return geometric(TranslateY{signed_mag(mag.translate_max)});
  }
  return image;
}

struct StrongResult {
  MultiBandImage image;
  GeomRecord record;  // geometric part only
  std::vector<Rect> cut_rects;
  std::size_t row = 0;
};

/// Applies one row: each entry fires independently with its own probability,
/// in row order, followed by the multi-rectangle cutout.
inline StrongResult strong_augment_row(const MultiBandImage& image, const StrongRow& row,
                                       const MagnitudeMap& mag, const CutoutConfig& cut, Rng& rng,
                                       const FillPolicy& fill = {}) {
  StrongResult result{image, GeomRecord::identity({image.height(), image.width()}), {}, 0};
  for (const StrongEntry& e : {row.first, row.second}) {
    if (rng.bernoulli(e.prob)) {
      result.image = apply_strong_fn(result.image, e.fn, e.strength, mag, rng, result.record, fill);
    }
  }
  auto [img, rects] = cutout_multi(result.image, cut, rng);
  result.image = std::move(img);
  result.cut_rects = std::move(rects);
  return result;
}

/// Picks one of the table's rows uniformly and applies it.
inline StrongResult strong_augment(const MultiBandImage& image, const StrongAugTable& table,
                                   const MagnitudeMap& mag, const CutoutConfig& cut, Rng& rng,
                                   const FillPolicy& fill = {}) {
  if (table.rows.empty()) throw Error(ErrorKind::kInvalidArgument, "strong table is empty");
  const std::size_t row = rng.uniform_int(static_cast<std::uint32_t>(table.rows.size()));
  StrongResult result = strong_augment_row(image, table.rows[row], mag, cut, rng, fill);
  result.row = row;
  return result;
}

// ---------------------------------------------------------------------------
// Config files. Every key is optional and falls back to the defaults above.
//
// {"weak":   {"crop_out": [h, w], "crop_distortion": s, "jitter_prob": p,
//             "jitter_strength": S, "hflip_prob": p, "vflip_prob": p, "rot90": true},
//  "simclr": {"crop_out": [h, w], "crop_distortion": s, "jitter_prob": p,
//             "jitter_strength": S, "drop_prob": p,
//             "drop_mode": "rgb_gray" | "channel_mean" | "noop",
//             "blur": true, "blur_prob": p, "sigma": [lo, hi], "kernel_frac": f},
//  "strong": {"n_rects": n, "rect_frac": f, "fill": v, "rotate_max_degrees": d,
//             "shear_max": r, "translate_max": l, "table": <table object>}}

struct PolicyConfig {
  WeakPolicyConfig weak;
  SimclrPolicyConfig simclr;
  StrongAugTable strong_table = default_strong_table();
  MagnitudeMap magnitude;
  CutoutConfig cutout;
};

inline DropMode parse_drop_mode(std::string_view s) {
  if (s == "rgb_gray") return DropMode::kRgbGray;
  if (s == "channel_mean") return DropMode::kChannelMean;
  if (s == "noop") return DropMode::kNoop;
  throw Error(ErrorKind::kFormat, "unknown drop_mode '" + std::string(s) + "'");
}

inline PolicyConfig policy_from_json(const nlohmann::json& j, PolicyConfig cfg = {}) {
  try {
    auto dims = [](const nlohmann::json& v) { return Dims{v.at(0).get<std::size_t>(), v.at(1).get<std::size_t>()}; };
    if (j.contains("weak")) {
      const auto& w = j["weak"];
      if (w.contains("crop_out")) cfg.weak.crop_out = dims(w["crop_out"]);
      cfg.weak.crop_distortion = w.value("crop_distortion", cfg.weak.crop_distortion);
      cfg.weak.jitter_prob = w.value("jitter_prob", cfg.weak.jitter_prob);
      cfg.weak.jitter_strength = w.value("jitter_strength", cfg.weak.jitter_strength);
      cfg.weak.flips.hflip_prob = w.value("hflip_prob", cfg.weak.flips.hflip_prob);
      cfg.weak.flips.vflip_prob = w.value("vflip_prob", cfg.weak.flips.vflip_prob);
      cfg.weak.flips.rot90 = w.value("rot90", cfg.weak.flips.rot90);
    }
    if (j.contains("simclr")) {
      const auto& s = j["simclr"];
      if (s.contains("crop_out")) cfg.simclr.crop_out = dims(s["crop_out"]);
      cfg.simclr.crop_distortion = s.value("crop_distortion", cfg.simclr.crop_distortion);
      cfg.simclr.jitter_prob = s.value("jitter_prob", cfg.simclr.jitter_prob);
      cfg.simclr.jitter_strength = s.value("jitter_strength", cfg.simclr.jitter_strength);
      cfg.simclr.drop_prob = s.value("drop_prob", cfg.simclr.drop_prob);
      if (s.contains("drop_mode")) cfg.simclr.drop_mode = parse_drop_mode(s["drop_mode"].get<std::string>());
      cfg.simclr.blur = s.value("blur", cfg.simclr.blur);
      cfg.simclr.blur_prob = s.value("blur_prob", cfg.simclr.blur_prob);
      if (s.contains("sigma")) {
        cfg.simclr.blur_cfg.sigma_min = s["sigma"].at(0).get<double>();
        cfg.simclr.blur_cfg.sigma_max = s["sigma"].at(1).get<double>();
      }
      cfg.simclr.blur_cfg.kernel_frac = s.value("kernel_frac", cfg.simclr.blur_cfg.kernel_frac);
      cfg.simclr.flips.hflip_prob = s.value("hflip_prob", cfg.simclr.flips.hflip_prob);
      cfg.simclr.flips.vflip_prob = s.value("vflip_prob", cfg.simclr.flips.vflip_prob);
    }
    if (j.contains("strong")) {
      const auto& s = j["strong"];
      cfg.cutout.n_rects = s.value("n_rects", cfg.cutout.n_rects);
      cfg.cutout.rect_frac = s.value("rect_frac", cfg.cutout.rect_frac);
      cfg.cutout.fill = s.value("fill", cfg.cutout.fill);
      cfg.magnitude.rotate_max_degrees = s.value("rotate_max_degrees", cfg.magnitude.rotate_max_degrees);
      cfg.magnitude.shear_max = s.value("shear_max", cfg.magnitude.shear_max);
      cfg.magnitude.translate_max = s.value("translate_max", cfg.magnitude.translate_max);
      if (s.contains("table")) cfg.strong_table = strong_table_from_json(s["table"]);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed policy config: ") + e.what());
  }
  return cfg;
}

}  // namespace terrasemi
