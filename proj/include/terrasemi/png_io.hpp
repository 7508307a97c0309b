#pragma once

// 8-bit PNG import/export for 1-, 3- and 4-channel rasters. Requires libpng.
// Channel tags on import: 1 -> GENERIC, 3 -> R,G,B, 4 -> R,G,B,NIR (the
// fourth PNG channel is treated as near-infrared, not alpha).

#include <filesystem>
#include <string>
#include <vector>

#include <png.h>

#include "terrasemi/error.hpp"
#include "terrasemi/image.hpp"

namespace terrasemi {

inline MultiBandImage read_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw Error(ErrorKind::kIo, "cannot read PNG '" + path.string() + "': " + img.message);
  }
  const bool has_alpha = (img.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  const bool has_color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  std::size_t channels = 1;
  if (has_color) {
    img.format = has_alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
    channels = has_alpha ? 4 : 3;
  } else {
    img.format = PNG_FORMAT_GRAY;
  }
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, raw.data(), 0, nullptr)) {
    png_image_free(&img);
    throw Error(ErrorKind::kFormat, "cannot decode PNG '" + path.string() + "'");
  }
  BandList bands = channels == 1 ? generic_bands(1) : channels == 3 ? rgb_bands() : rgbn_bands();
  return from_u8(raw, img.height, img.width, std::move(bands));
}

inline void write_png(const MultiBandImage& image, const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  switch (image.channels()) {
    case 1: img.format = PNG_FORMAT_GRAY; break;
    case 3: img.format = PNG_FORMAT_RGB; break;
    case 4: img.format = PNG_FORMAT_RGBA; break;
    default:
      throw Error(ErrorKind::kInvalidArgument,
                  "PNG export supports 1, 3 or 4 channels, got " +
                      std::to_string(image.channels()));
  }
  const auto raw = to_u8(image);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!png_image_write_to_file(&img, path.c_str(), 0, raw.data(), 0, nullptr)) {
    throw Error(ErrorKind::kIo, "cannot write PNG '" + path.string() + "': " + img.message);
  }
}

}  // namespace terrasemi
