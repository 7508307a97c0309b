#pragma once

// MBT1 tensor container.
//
//   bytes 0..3    magic "MBT1"
//   bytes 4..7    little-endian uint32 header length L
//   bytes 8..8+L  UTF-8 JSON header (keys sorted, compact)
//   remainder     row-major, channel-interleaved payload
//
// Header keys: kind, height, width, channels, dtype, plus `bands` for
// images and `classes` for label maps. Kinds "image" (f32le) and "labels"
// (u8) carry the toolkit's raster types; "mask" (u8, 0/1) and "tensor"
// (f32le, unconstrained values) carry validity masks and model parameters.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "terrasemi/error.hpp"
#include "terrasemi/image.hpp"

namespace terrasemi {

/// Unconstrained float tensor (model parameters, embeddings).
struct FloatTensor {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<float> data;

  bool operator==(const FloatTensor&) const = default;
};

using ContainerValue = std::variant<MultiBandImage, LabelMap, ValidityMask, FloatTensor>;

inline constexpr std::string_view kContainerMagic = "MBT1";

namespace detail {

inline void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline std::uint32_t get_u32le(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(in[at + i])) << (8 * i);
  }
  return v;
}

inline void put_f32le(std::string& out, std::span<const float> values) {
  out.reserve(out.size() + values.size() * 4);
  for (float f : values) put_u32le(out, std::bit_cast<std::uint32_t>(f));
}

inline std::vector<float> get_f32le(std::string_view payload) {
  std::vector<float> values(payload.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(get_u32le(payload, 4 * i));
  }
  return values;
}

inline std::string frame(const nlohmann::json& header, std::string_view payload) {
  const std::string text = header.dump();
  std::string out(kContainerMagic);
  put_u32le(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  out += payload;
  return out;
}

template <typename T>
T header_field(const nlohmann::json& header, const char* key) {
  if (!header.contains(key)) {
    throw Error(ErrorKind::kFormat, std::string("container header missing '") + key + "'");
  }
  try {
    return header.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::kFormat, std::string("container header field '") + key +
                                        "' has the wrong type");
  }
}

}  // namespace detail

inline std::string encode_container(const MultiBandImage& image) {
  nlohmann::json header;
  header["kind"] = "image";
  header["height"] = image.height();
  header["width"] = image.width();
  header["channels"] = image.channels();
  header["dtype"] = "f32le";
  auto& bands = header["bands"] = nlohmann::json::array();
  for (Band b : image.bands()) bands.push_back(std::string(band_name(b)));
  std::string payload;
  detail::put_f32le(payload, image.data());
  return detail::frame(header, payload);
}

inline std::string encode_container(const LabelMap& labels) {
  nlohmann::json header;
  header["kind"] = "labels";
  header["height"] = labels.height();
  header["width"] = labels.width();
  header["channels"] = 1;
  header["dtype"] = "u8";
  header["classes"] = labels.classes();
  const auto d = labels.data();
  return detail::frame(header, std::string_view(reinterpret_cast<const char*>(d.data()), d.size()));
}

inline std::string encode_container(const ValidityMask& mask) {
  nlohmann::json header;
  header["kind"] = "mask";
  header["height"] = mask.height();
  header["width"] = mask.width();
  header["channels"] = 1;
  header["dtype"] = "u8";
  const auto d = mask.data();
  return detail::frame(header, std::string_view(reinterpret_cast<const char*>(d.data()), d.size()));
}

inline std::string encode_container(const FloatTensor& tensor) {
  if (tensor.data.size() != tensor.height * tensor.width * tensor.channels) {
    throw Error(ErrorKind::kDimensionMismatch, "tensor payload size mismatch");
  }
  nlohmann::json header;
  header["kind"] = "tensor";
  header["height"] = tensor.height;
  header["width"] = tensor.width;
  header["channels"] = tensor.channels;
  header["dtype"] = "f32le";
  std::string payload;
  detail::put_f32le(payload, tensor.data);
  return detail::frame(header, payload);
}

inline std::string encode_container(const ContainerValue& value) {
  return std::visit([](const auto& v) { return encode_container(v); }, value);
}

/// Parses a container. With `relaxed_floats`, an "image" payload is returned
/// as a FloatTensor without the [0,1] range check (used for embeddings).
inline ContainerValue decode_container(std::string_view bytes, bool relaxed_floats = false) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != kContainerMagic) {
    throw Error(ErrorKind::kFormat, "bad magic");
  }
  if (bytes.size() < 8) throw Error(ErrorKind::kFormat, "truncated header");
  const std::uint32_t header_len = detail::get_u32le(bytes, 4);
  if (bytes.size() - 8 < header_len) throw Error(ErrorKind::kFormat, "truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(8, header_len));
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::kFormat, "container header is not valid JSON");
  }
  if (!header.is_object()) throw Error(ErrorKind::kFormat, "container header is not an object");

  const auto kind = detail::header_field<std::string>(header, "kind");
  const auto dtype = detail::header_field<std::string>(header, "dtype");
  const auto height = detail::header_field<std::size_t>(header, "height");
  const auto width = detail::header_field<std::size_t>(header, "width");
  const auto channels = detail::header_field<std::size_t>(header, "channels");

  const bool is_float = kind == "image" || kind == "tensor";
  const bool is_byte = kind == "labels" || kind == "mask";
  if (!is_float && !is_byte) throw Error(ErrorKind::kFormat, "unknown kind '" + kind + "'");
  if ((is_float && dtype != "f32le") || (is_byte && dtype != "u8")) {
    throw Error(ErrorKind::kFormat, "dtype '" + dtype + "' invalid for kind '" + kind + "'");
  }
  if (is_byte && channels != 1) {
    throw Error(ErrorKind::kFormat, kind + " containers must have 1 channel");
  }

  const std::string_view payload = bytes.substr(8 + header_len);
  const std::size_t expected = height * width * channels * (is_float ? 4 : 1);
  if (payload.size() != expected) {
    throw Error(ErrorKind::kFormat,
                std::string(payload.size() < expected ? "truncated payload: " : "") +
                    "header/payload size mismatch (header implies " +
                    std::to_string(expected) + " bytes, found " +
                    std::to_string(payload.size()) + ")");
  }

  if (kind == "tensor" || (kind == "image" && relaxed_floats)) {
    return FloatTensor{height, width, channels, detail::get_f32le(payload)};
  }
  if (kind == "image") {
    const auto names = detail::header_field<std::vector<std::string>>(header, "bands");
    if (names.size() != channels) {
      throw Error(ErrorKind::kFormat, "bands list length differs from channels");
    }
    BandList bands;
    for (const auto& n : names) bands.push_back(parse_band(n));
    return MultiBandImage(height, width, std::move(bands), detail::get_f32le(payload));
  }
  std::vector<std::uint8_t> raw(payload.begin(), payload.end());
  if (kind == "labels") {
    const auto classes = detail::header_field<std::size_t>(header, "classes");
    return LabelMap(height, width, classes, std::move(raw));
  }
  ValidityMask mask(height, width, false);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] > 1) throw Error(ErrorKind::kFormat, "mask payload must hold 0/1 bytes");
    mask.set(i / width, i % width, raw[i] == 1);
  }
  return mask;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

/// Writes via a sibling temp file and rename so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::kIo, "short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline ContainerValue read_container(const std::filesystem::path& path,
                                     bool relaxed_floats = false) {
  return decode_container(read_file(path), relaxed_floats);
}

inline void write_container(const ContainerValue& value, const std::filesystem::path& path) {
  write_file_atomic(path, encode_container(value));
}

template <typename T>
T read_as(const std::filesystem::path& path) {
  auto value = read_container(path, std::is_same_v<T, FloatTensor>);
  if (auto* v = std::get_if<T>(&value)) return std::move(*v);
  throw Error(ErrorKind::kFormat, "'" + path.string() + "' holds a different container kind");
}

inline MultiBandImage read_image(const std::filesystem::path& p) { return read_as<MultiBandImage>(p); }
inline LabelMap read_labels(const std::filesystem::path& p) { return read_as<LabelMap>(p); }
inline ValidityMask read_mask(const std::filesystem::path& p) { return read_as<ValidityMask>(p); }
inline FloatTensor read_tensor(const std::filesystem::path& p) { return read_as<FloatTensor>(p); }

}  // namespace terrasemi
