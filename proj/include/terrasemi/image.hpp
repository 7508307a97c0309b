#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "terrasemi/error.hpp"

namespace terrasemi {

/// Semantic tag of one image channel.
enum class Band : std::uint8_t { kR, kG, kB, kNir, kVV, kVH, kGeneric };

inline std::string_view band_name(Band b) {
  switch (b) {
    case Band::kR: return "R";
    case Band::kG: return "G";
    case Band::kB: return "B";
    case Band::kNir: return "NIR";
    case Band::kVV: return "VV";
    case Band::kVH: return "VH";
    case Band::kGeneric: return "GENERIC";
  }
  return "GENERIC";
}

inline Band parse_band(std::string_view name) {
  for (Band b : {Band::kR, Band::kG, Band::kB, Band::kNir, Band::kVV,
                 Band::kVH, Band::kGeneric}) {
    if (band_name(b) == name) return b;
  }
  throw Error(ErrorKind::kFormat, "unknown band tag '" + std::string(name) + "'");
}

using BandList = std::vector<Band>;

inline BandList rgb_bands() { return {Band::kR, Band::kG, Band::kB}; }
inline BandList rgbn_bands() { return {Band::kR, Band::kG, Band::kB, Band::kNir}; }
inline BandList sar_bands() { return {Band::kVV, Band::kVH}; }
inline BandList generic_bands(std::size_t n) { return BandList(n, Band::kGeneric); }

/// Exactly (R, G, B) in that order. RGB-only operations require this.
inline bool is_rgb(const BandList& bands) { return bands == rgb_bands(); }

/// Label value that excludes a pixel from losses and metrics.
inline constexpr std::uint8_t kIgnore = 255;

/// H x W x C float raster, row-major and channel-interleaved, samples in [0,1].
class MultiBandImage {
 public:
  MultiBandImage() = default;

  /// Zero-filled image.
  MultiBandImage(std::size_t height, std::size_t width, BandList bands)
      : height_(height), width_(width), bands_(std::move(bands)),
        data_(height * width * bands_.size(), 0.0f) {
    check_shape();
  }

  MultiBandImage(std::size_t height, std::size_t width, BandList bands,
                 std::vector<float> data)
      : height_(height), width_(width), bands_(std::move(bands)),
        data_(std::move(data)) {
    check_shape();
    if (data_.size() != height_ * width_ * bands_.size()) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "image payload holds " + std::to_string(data_.size()) +
                      " samples, expected " +
                      std::to_string(height_ * width_ * bands_.size()));
    }
    for (float v : data_) {
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw Error(ErrorKind::kInvalidArgument,
                    "image sample outside [0,1] or not finite");
      }
    }
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return bands_.size(); }
  std::size_t pixels() const noexcept { return height_ * width_; }
  const BandList& bands() const noexcept { return bands_; }

  float at(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[(y * width_ + x) * bands_.size() + c];
  }
  float& at(std::size_t y, std::size_t x, std::size_t c) {
    return data_[(y * width_ + x) * bands_.size() + c];
  }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  bool operator==(const MultiBandImage&) const = default;

 private:
  void check_shape() const {
    if (height_ == 0 || width_ == 0) {
      throw Error(ErrorKind::kInvalidArgument, "image dimensions must be >= 1");
    }
    if (bands_.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "image needs at least one band");
    }
  }

  std::size_t height_ = 0;
  std::size_t width_ = 0;
  BandList bands_;
  std::vector<float> data_;
};

/// Per-pixel class ids in {0..K-1} plus kIgnore.
class LabelMap {
 public:
  LabelMap() = default;

  LabelMap(std::size_t height, std::size_t width, std::size_t classes,
           std::uint8_t fill = 0)
      : LabelMap(height, width, classes,
                 std::vector<std::uint8_t>(height * width, fill)) {}

  LabelMap(std::size_t height, std::size_t width, std::size_t classes,
           std::vector<std::uint8_t> data)
      : height_(height), width_(width), classes_(classes), data_(std::move(data)) {
    if (height_ == 0 || width_ == 0) {
      throw Error(ErrorKind::kInvalidArgument, "label map dimensions must be >= 1");
    }
    if (classes_ < 2 || classes_ > 255) {
      throw Error(ErrorKind::kInvalidArgument, "label map needs 2..255 classes");
    }
    if (data_.size() != height_ * width_) {
      throw Error(ErrorKind::kDimensionMismatch, "label payload size mismatch");
    }
    for (std::uint8_t v : data_) {
      if (v >= classes_ && v != kIgnore) {
        throw Error(ErrorKind::kInvalidArgument,
                    "label " + std::to_string(v) + " >= class count " +
                        std::to_string(classes_));
      }
    }
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t classes() const noexcept { return classes_; }
  std::size_t pixels() const noexcept { return height_ * width_; }

  std::uint8_t at(std::size_t y, std::size_t x) const { return data_[y * width_ + x]; }
  std::uint8_t& at(std::size_t y, std::size_t x) { return data_[y * width_ + x]; }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  bool operator==(const LabelMap&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t classes_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Per-pixel boolean, stored as 0/1 bytes.
class ValidityMask {
 public:
  ValidityMask() = default;

  ValidityMask(std::size_t height, std::size_t width, bool fill = true)
      : height_(height), width_(width),
        data_(height * width, static_cast<std::uint8_t>(fill ? 1 : 0)) {
    if (height_ == 0 || width_ == 0) {
      throw Error(ErrorKind::kInvalidArgument, "mask dimensions must be >= 1");
    }
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t pixels() const noexcept { return height_ * width_; }

  bool at(std::size_t y, std::size_t x) const { return data_[y * width_ + x] != 0; }
  void set(std::size_t y, std::size_t x, bool v) {
    data_[y * width_ + x] = static_cast<std::uint8_t>(v ? 1 : 0);
  }

  std::size_t count_valid() const noexcept {
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), 1));
  }

  std::span<const std::uint8_t> data() const noexcept { return data_; }

  bool operator==(const ValidityMask&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> data_;
};

/// 8-bit raster to [0,1] floats; each sample is exactly float(u) / 255.
inline MultiBandImage from_u8(std::span<const std::uint8_t> raw, std::size_t height,
                              std::size_t width, BandList bands) {
  if (raw.size() != height * width * bands.size()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "raw raster size does not match height x width x bands");
  }
  std::vector<float> data(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    data[i] = static_cast<float>(raw[i]) / 255.0f;
  }
  return MultiBandImage(height, width, std::move(bands), std::move(data));
}

/// Quantizes one [0,1] sample to 0..255, rounding half away from zero.
inline std::uint8_t quantize_u8(float x) {
  const double scaled = std::floor(static_cast<double>(x) * 255.0 + 0.5);
  return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

inline std::vector<std::uint8_t> to_u8(const MultiBandImage& image) {
  std::vector<std::uint8_t> out(image.data().size());
  std::transform(image.data().begin(), image.data().end(), out.begin(), quantize_u8);
  return out;
}

inline void require_same_dims(const LabelMap& labels, const ValidityMask& mask) {
  if (labels.height() != mask.height() || labels.width() != mask.width()) {
    throw Error(ErrorKind::kDimensionMismatch, "label map and mask dims differ");
  }
}

}  // namespace terrasemi
