#pragma once

// Photometric augmentations.
//
// Stochastic ops sample a factor from [1-S, 1+S] and delegate to a
// deterministic `adjust_*` form that tests can drive with forced factors.
// A factor of exactly 1 short-circuits to a bitwise copy, so every op is an
// exact identity at S = 0.
//
// Ops defined in 8-bit terms (equalize, autocontrast, invert, posterize,
// solarize, solarize_add) quantize each sample to q = round(255 x), operate
// on q, and map back as q / 255. Samples an op leaves untouched keep their
// original value.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "terrasemi/error.hpp"
#include "terrasemi/image.hpp"
#include "terrasemi/rng.hpp"

namespace terrasemi {

/// Grayscale weights (ITU-R BT.601 luma).
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

inline void check_strength(double s) {
  if (!(s >= 0.0 && s < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "jitter strength must lie in [0,1)");
  }
}

inline void require_rgb(const MultiBandImage& image, const char* op) {
  if (!is_rgb(image.bands())) {
    throw Error(ErrorKind::kInvalidArgument, std::string("RGB-only augmentation: ") + op +
                                                 " requires bands (R,G,B)");
  }
}

inline double sample_factor(double strength, Rng& rng) {
  return rng.uniform(1.0 - strength, 1.0 + strength);
}

namespace detail {

inline float clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

inline double luma(const MultiBandImage& img, std::size_t y, std::size_t x) {
  return kLumaR * img.at(y, x, 0) + kLumaG * img.at(y, x, 1) + kLumaB * img.at(y, x, 2);
}

inline double channel_mean(const MultiBandImage& img, std::size_t c) {
  double sum = 0.0;
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x) sum += img.at(y, x, c);
  return sum / static_cast<double>(img.pixels());
}

inline std::uint8_t q255(float x) { return quantize_u8(x); }
inline float from_q(int q) { return static_cast<float>(q) / 255.0f; }

}  // namespace detail

/// Mean luminance: luma mean for RGB, mean of all samples otherwise.
inline double mean_luminance(const MultiBandImage& img) {
  if (is_rgb(img.bands())) {
    double sum = 0.0;
    for (std::size_t y = 0; y < img.height(); ++y)
      for (std::size_t x = 0; x < img.width(); ++x) sum += detail::luma(img, y, x);
    return sum / static_cast<double>(img.pixels());
  }
  const auto d = img.data();
  return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

inline MultiBandImage adjust_brightness(const MultiBandImage& image, double factor) {
  if (factor == 1.0) return image;
  MultiBandImage out = image;
  for (float& v : out.data()) v = detail::clamp01(v * factor);
  return out;
}

inline MultiBandImage adjust_contrast(const MultiBandImage& image, double factor) {
  if (factor == 1.0) return image;
  const double m = mean_luminance(image);
  MultiBandImage out = image;
  for (float& v : out.data()) v = detail::clamp01(m + factor * (v - m));
  return out;
}

inline void require_factor_count(const MultiBandImage& image, std::span<const double> f) {
  if (f.size() != image.channels()) {
    throw Error(ErrorKind::kDimensionMismatch, "need one factor per channel");
  }
}

inline MultiBandImage adjust_brightness_per_channel(const MultiBandImage& image,
                                                    std::span<const double> factors) {
  require_factor_count(image, factors);
  MultiBandImage out = image;
  const std::size_t n = image.channels();
  auto d = out.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double f = factors[i % n];
    if (f != 1.0) d[i] = detail::clamp01(d[i] * f);
  }
  return out;
}

inline MultiBandImage adjust_contrast_per_channel(const MultiBandImage& image,
                                                  std::span<const double> factors) {
  require_factor_count(image, factors);
  const std::size_t n = image.channels();
  std::vector<double> means(n);
  for (std::size_t c = 0; c < n; ++c) means[c] = detail::channel_mean(image, c);
  MultiBandImage out = image;
  auto d = out.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::size_t c = i % n;
    if (factors[c] != 1.0) d[i] = detail::clamp01(means[c] + factors[c] * (d[i] - means[c]));
  }
  return out;
}

struct Hsv {
  double h, s, v;  // h in [0,1)
};

inline Hsv rgb_to_hsv(double r, double g, double b) {
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out{0.0, mx > 0.0 ? delta / mx : 0.0, mx};
  if (delta > 0.0) {
    double h;
    if (mx == r) {
      h = (g - b) / delta;
      if (h < 0.0) h += 6.0;
    } else if (mx == g) {
      h = (b - r) / delta + 2.0;
    } else {
      h = (r - g) / delta + 4.0;
    }
    out.h = h / 6.0;
  }
  return out;
}

inline std::array<double, 3> hsv_to_rgb(Hsv hsv) {
  const double c = hsv.v * hsv.s;
  const double hp = hsv.h * 6.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  const double m = hsv.v - c;
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(std::floor(hp)) % 6) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  return {r + m, g + m, b + m};
}

namespace detail {
template <typename Fn>
MultiBandImage map_hsv(const MultiBandImage& image, Fn&& fn) {
  MultiBandImage out = image;
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      Hsv hsv = rgb_to_hsv(image.at(y, x, 0), image.at(y, x, 1), image.at(y, x, 2));
      fn(hsv);
      const auto rgb = hsv_to_rgb(hsv);
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = clamp01(rgb[c]);
    }
  }
  return out;
}
}  // namespace detail

/// Rotates hue by (factor - 1) of a full turn.
inline MultiBandImage adjust_hue(const MultiBandImage& image, double factor) {
  require_rgb(image, "hue");
  if (factor == 1.0) return image;
  const double delta = factor - 1.0;
  return detail::map_hsv(image, [delta](Hsv& p) {
    p.h = std::fmod(p.h + delta, 1.0);
    if (p.h < 0.0) p.h += 1.0;
  });
}

/// Scales HSV saturation by factor, clamped to [0,1].
inline MultiBandImage adjust_saturation(const MultiBandImage& image, double factor) {
  require_rgb(image, "saturation");
  if (factor == 1.0) return image;
  return detail::map_hsv(image, [factor](Hsv& p) { p.s = std::clamp(p.s * factor, 0.0, 1.0); });
}

inline MultiBandImage brightness(const MultiBandImage& image, double s, Rng& rng) {
  check_strength(s);
  return adjust_brightness(image, sample_factor(s, rng));
}

inline MultiBandImage contrast(const MultiBandImage& image, double s, Rng& rng) {
  check_strength(s);
  return adjust_contrast(image, sample_factor(s, rng));
}

inline std::vector<double> sample_channel_factors(std::size_t n, double s, Rng& rng) {
  std::vector<double> f(n);
  for (double& v : f) v = sample_factor(s, rng);
  return f;
}

inline MultiBandImage brightness_per_channel(const MultiBandImage& image, double s, Rng& rng) {
  check_strength(s);
  return adjust_brightness_per_channel(image, sample_channel_factors(image.channels(), s, rng));
}

inline MultiBandImage contrast_per_channel(const MultiBandImage& image, double s, Rng& rng) {
  check_strength(s);
  return adjust_contrast_per_channel(image, sample_channel_factors(image.channels(), s, rng));
}

inline MultiBandImage hue(const MultiBandImage& image, double s, Rng& rng) {
  check_strength(s);
  require_rgb(image, "hue");
  return adjust_hue(image, sample_factor(s, rng));
}

inline MultiBandImage saturation(const MultiBandImage& image, double s, Rng& rng) {
  check_strength(s);
  require_rgb(image, "saturation");
  return adjust_saturation(image, sample_factor(s, rng));
}

// ---------------------------------------------------------------------------
// Color jitter. Both variants apply four ops in a random order; the plan
// structs make order and factors explicit.

enum class JitterOp : std::uint8_t {
  kBrightness,
  kContrast,
  kHue,                // RGB jitter only
  kSaturation,         // RGB jitter only
  kBrightnessPerChannel,  // general jitter only
  kContrastPerChannel,    // general jitter only
};

struct RgbJitterPlan {
  std::array<JitterOp, 4> order{JitterOp::kBrightness, JitterOp::kContrast, JitterOp::kHue,
                                JitterOp::kSaturation};
  double brightness = 1.0, contrast = 1.0, hue = 1.0, saturation = 1.0;
};

struct GeneralJitterPlan {
  std::array<JitterOp, 4> order{JitterOp::kBrightness, JitterOp::kContrast,
                                JitterOp::kBrightnessPerChannel, JitterOp::kContrastPerChannel};
  double brightness = 1.0, contrast = 1.0;
  std::vector<double> brightness_per_channel, contrast_per_channel;
};

/// Order first, then factors for brightness(S), contrast(S), hue(S/4), saturation(S).
inline RgbJitterPlan sample_rgb_jitter(double s, Rng& rng) {
  check_strength(s);
  RgbJitterPlan plan;
  rng.shuffle(std::span<JitterOp>(plan.order));
  plan.brightness = sample_factor(s, rng);
  plan.contrast = sample_factor(s, rng);
  plan.hue = sample_factor(s / 4.0, rng);
  plan.saturation = sample_factor(s, rng);
  return plan;
}

/// Order first, then brightness(S), contrast(S), per-channel brightness(S/2),
/// per-channel contrast(S/2).
inline GeneralJitterPlan sample_general_jitter(std::size_t channels, double s, Rng& rng) {
  check_strength(s);
  GeneralJitterPlan plan;
  rng.shuffle(std::span<JitterOp>(plan.order));
  plan.brightness = sample_factor(s, rng);
  plan.contrast = sample_factor(s, rng);
  plan.brightness_per_channel = sample_channel_factors(channels, s / 2.0, rng);
  plan.contrast_per_channel = sample_channel_factors(channels, s / 2.0, rng);
  return plan;
}

inline MultiBandImage apply_jitter(MultiBandImage image, const RgbJitterPlan& plan) {
  require_rgb(image, "color_jitter_rgb");
  for (JitterOp op : plan.order) {
    switch (op) {
      case JitterOp::kBrightness: image = adjust_brightness(image, plan.brightness); break;
      case JitterOp::kContrast: image = adjust_contrast(image, plan.contrast); break;
      case JitterOp::kHue: image = adjust_hue(image, plan.hue); break;
      case JitterOp::kSaturation: image = adjust_saturation(image, plan.saturation); break;
      default: throw Error(ErrorKind::kInvalidArgument, "op not part of RGB jitter");
    }
  }
  return image;
}

inline MultiBandImage apply_jitter(MultiBandImage image, const GeneralJitterPlan& plan) {
  for (JitterOp op : plan.order) {
    switch (op) {
      case JitterOp::kBrightness: image = adjust_brightness(image, plan.brightness); break;
      case JitterOp::kContrast: image = adjust_contrast(image, plan.contrast); break;
      case JitterOp::kBrightnessPerChannel:
        image = adjust_brightness_per_channel(image, plan.brightness_per_channel);
        break;
      case JitterOp::kContrastPerChannel:
        image = adjust_contrast_per_channel(image, plan.contrast_per_channel);
        break;
      default: throw Error(ErrorKind::kInvalidArgument, "op not part of general jitter");
    }
  }
  return image;
}

inline MultiBandImage color_jitter_rgb(const MultiBandImage& image, double s, Rng& rng) {
  require_rgb(image, "color_jitter_rgb");
  return apply_jitter(image, sample_rgb_jitter(s, rng));
}

inline MultiBandImage color_jitter_general(const MultiBandImage& image, double s, Rng& rng) {
  return apply_jitter(image, sample_general_jitter(image.channels(), s, rng));
}

// ---------------------------------------------------------------------------

enum class DropMode : std::uint8_t { kRgbGray, kChannelMean, kNoop };

/// Replaces every channel by luma (kRgbGray) or the cross-channel mean
/// (kChannelMean) with probability p. One gate draw is always consumed.
inline MultiBandImage color_drop(const MultiBandImage& image, DropMode mode, double p, Rng& rng) {
  if (mode == DropMode::kRgbGray) require_rgb(image, "rgb_gray color drop");
  const bool fire = rng.bernoulli(p);
  if (!fire || mode == DropMode::kNoop) return image;
  MultiBandImage out = image;
  const std::size_t n = image.channels();
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      double g;
      if (mode == DropMode::kRgbGray) {
        g = detail::luma(image, y, x);
      } else {
        g = 0.0;
        for (std::size_t c = 0; c < n; ++c) g += image.at(y, x, c);
        g /= static_cast<double>(n);
      }
      const float v = detail::clamp01(g);
      for (std::size_t c = 0; c < n; ++c) out.at(y, x, c) = v;
    }
  }
  return out;
}

struct BlurConfig {
  double sigma_min = 0.1;
  double sigma_max = 2.0;
  double kernel_frac = 0.1;
};

/// Odd kernel size floor(frac * min(H, W)), bumped to the next odd number.
inline std::size_t blur_kernel_size(const MultiBandImage& image, double kernel_frac) {
  auto k = static_cast<std::size_t>(kernel_frac * static_cast<double>(std::min(image.height(), image.width())));
  if (k % 2 == 0) ++k;
  return k;
}

/// Half-sample symmetric index: -1 -> 0, n -> n-1. Periodic with 2n.
inline std::size_t reflect_index(std::int64_t i, std::size_t n) {
  const auto period = static_cast<std::int64_t>(2 * n);
  std::int64_t m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::int64_t>(n)) m = period - 1 - m;
  return static_cast<std::size_t>(m);
}

/// Separable Gaussian with symmetric-reflect borders. With this padding and a
/// normalized symmetric kernel the per-channel sum is conserved.
inline MultiBandImage blur_with_sigma(const MultiBandImage& image, double sigma,
                                      std::size_t kernel_size) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::kInvalidArgument, "blur sigma must be positive");
  if (kernel_size % 2 == 0) throw Error(ErrorKind::kInvalidArgument, "blur kernel size must be odd");
  const auto radius = static_cast<std::int64_t>(kernel_size / 2);
  std::vector<double> kernel(kernel_size);
  double total = 0.0;
  for (std::int64_t t = -radius; t <= radius; ++t) {
    kernel[t + radius] = std::exp(-static_cast<double>(t * t) / (2.0 * sigma * sigma));
    total += kernel[t + radius];
  }
  for (double& k : kernel) k /= total;

  const std::size_t h = image.height(), w = image.width(), n = image.channels();
  std::vector<double> tmp(h * w * n);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < n; ++c) {
        double acc = 0.0;
        for (std::int64_t t = -radius; t <= radius; ++t) {
          acc += kernel[t + radius] *
                 image.at(y, reflect_index(static_cast<std::int64_t>(x) + t, w), c);
        }
        tmp[(y * w + x) * n + c] = acc;
      }
  MultiBandImage out(h, w, image.bands());
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < n; ++c) {
        double acc = 0.0;
        for (std::int64_t t = -radius; t <= radius; ++t) {
          acc += kernel[t + radius] *
                 tmp[(reflect_index(static_cast<std::int64_t>(y) + t, h) * w + x) * n + c];
        }
        out.at(y, x, c) = detail::clamp01(acc);
      }
  return out;
}

/// With probability p, blurs with sigma ~ U[sigma_min, sigma_max]. Gate and
/// sigma are both always drawn.
inline MultiBandImage gaussian_blur(const MultiBandImage& image, const BlurConfig& cfg, double p,
                                    Rng& rng) {
  if (!(cfg.sigma_min > 0.0 && cfg.sigma_max >= cfg.sigma_min)) {
    throw Error(ErrorKind::kInvalidArgument, "blur sigma range must be positive");
  }
  const bool fire = rng.bernoulli(p);
  const double sigma = rng.uniform(cfg.sigma_min, cfg.sigma_max);
  if (!fire) return image;
  const std::size_t k = blur_kernel_size(image, cfg.kernel_frac);
  if (k == 1) return image;
  return blur_with_sigma(image, sigma, k);
}

// ---------------------------------------------------------------------------
// 8-bit defined ops.

namespace detail {
template <typename Fn>
MultiBandImage map_q255(const MultiBandImage& image, Fn&& fn) {
  MultiBandImage out = image;
  for (float& v : out.data()) v = fn(v, static_cast<int>(q255(v)));
  return out;
}
}  // namespace detail

inline MultiBandImage invert(const MultiBandImage& image) {
  return detail::map_q255(image, [](float, int q) { return detail::from_q(255 - q); });
}

/// Keeps the B high bits of each quantized sample.
inline MultiBandImage posterize(const MultiBandImage& image, int bits) {
  if (bits < 1 || bits > 8) throw Error(ErrorKind::kInvalidArgument, "posterize bits must be 1..8");
  if (bits == 8) return image;
  const int mask = ~((1 << (8 - bits)) - 1) & 0xff;
  return detail::map_q255(image, [mask](float, int q) { return detail::from_q(q & mask); });
}

/// Quantized samples above T become 255 - q.
inline MultiBandImage solarize(const MultiBandImage& image, int threshold) {
  if (threshold < 0 || threshold > 255) throw Error(ErrorKind::kInvalidArgument, "solarize threshold must be 0..255");
  return detail::map_q255(image, [threshold](float v, int q) {
    return q > threshold ? detail::from_q(255 - q) : v;
  });
}

/// min(q + A, 255), then solarize at T.
inline MultiBandImage solarize_add(const MultiBandImage& image, int addition, int threshold) {
  if (addition < 0 || addition > 255 || threshold < 0 || threshold > 255) {
    throw Error(ErrorKind::kInvalidArgument, "solarize_add parameters must be 0..255");
  }
  return detail::map_q255(image, [=](float, int q) {
    const int added = std::min(q + addition, 255);
    return detail::from_q(added > threshold ? 255 - added : added);
  });
}

/// Per-channel histogram equalization over 256 bins, using the cumulative
/// histogram lookup of the AutoAugment reference:
///   step = (N - count of the highest occupied bin) / 255   (integer division)
///   lut[0] = 0, lut[v] = min(255, (cdf[v-1] + step/2) / step)
/// A channel with step == 0 is returned unchanged.
inline MultiBandImage equalize(const MultiBandImage& image) {
  MultiBandImage out = image;
  const std::size_t n = image.channels();
  const auto src = image.data();
  auto dst = out.data();
  for (std::size_t c = 0; c < n; ++c) {
    std::array<std::uint64_t, 256> hist{};
    for (std::size_t i = c; i < src.size(); i += n) ++hist[detail::q255(src[i])];
    std::uint64_t last = 0;
    for (int v = 255; v >= 0; --v) {
      if (hist[v] != 0) { last = hist[v]; break; }
    }
    const std::uint64_t total = image.pixels();
    const std::uint64_t step = (total - last) / 255;
    if (step == 0) continue;
    std::array<int, 256> lut{};
    std::uint64_t cdf = 0;
    for (int v = 0; v < 256; ++v) {
      lut[v] = v == 0 ? 0 : static_cast<int>(std::min<std::uint64_t>(255, (cdf + step / 2) / step));
      cdf += hist[v];
    }
    for (std::size_t i = c; i < src.size(); i += n) dst[i] = detail::from_q(lut[detail::q255(src[i])]);
  }
  return out;
}

/// Per-channel linear stretch of [min, max] onto [0, 255] in the quantized
/// domain, rounded. Constant channels are unchanged.
inline MultiBandImage autocontrast(const MultiBandImage& image) {
  MultiBandImage out = image;
  const std::size_t n = image.channels();
  const auto src = image.data();
  auto dst = out.data();
  for (std::size_t c = 0; c < n; ++c) {
    int lo = 255, hi = 0;
    for (std::size_t i = c; i < src.size(); i += n) {
      const int q = detail::q255(src[i]);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    if (hi <= lo) continue;
    const int range = hi - lo;
    for (std::size_t i = c; i < src.size(); i += n) {
      // round((q - lo) * 255 / range), half up, in integers
      const int num = 2 * (detail::q255(src[i]) - lo) * 255 + range;
      dst[i] = detail::from_q(num / (2 * range));
    }
  }
  return out;
}

/// Blend with the luma image: gray + C (x - gray). C = 0 gives gray, C = 1 the
/// original; C in (1, 2] extrapolates (more saturated), clamped.
inline MultiBandImage color(const MultiBandImage& image, double c) {
  require_rgb(image, "color");
  if (!(c >= 0.0 && c <= 2.0)) throw Error(ErrorKind::kInvalidArgument, "color factor must lie in [0,2]");
  if (c == 1.0) return image;
  MultiBandImage out = image;
  for (std::size_t y = 0; y < image.height(); ++y)
    for (std::size_t x = 0; x < image.width(); ++x) {
      const double g = detail::luma(image, y, x);
      for (std::size_t ch = 0; ch < 3; ++ch) out.at(y, x, ch) = detail::clamp01(g + c * (image.at(y, x, ch) - g));
    }
  return out;
}

}  // namespace terrasemi
