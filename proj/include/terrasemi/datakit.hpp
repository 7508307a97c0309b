#pragma once

// Dataset manifests, train/val/test partitions, fixed disjoint subsample
// draws, and tiling of large rasters.
//
// Manifest file (JSON lines, one sample per line):
//   {"id": "...", "image": "path", "labels": "path"?, "region": "...",
//    "width": W, "height": H, ...extra string fields}
// Paths are relative to the manifest's directory. Extra string-valued keys
// (e.g. "mask", "geom", "rects") are carried through untouched.
//
// Plan file (JSON lines):
//   {"type": "plan", "seed": S, "manifest_digest": "<fnv1a64 hex>", "samples": N}
//   {"type": "assign", "id": "...", "split": "train" | "val" | "test"}   (manifest order)
//   {"type": "draw", "fraction": f, "index": i, "ids": [...]}            (by fraction, index)

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "terrasemi/container.hpp"
#include "terrasemi/digest.hpp"
#include "terrasemi/error.hpp"
#include "terrasemi/geometry.hpp"
#include "terrasemi/image.hpp"
#include "terrasemi/rng.hpp"

namespace terrasemi {

struct ManifestEntry {
  std::string id;
  std::string image;
  std::optional<std::string> labels;
  std::string region;
  std::size_t width = 0;
  std::size_t height = 0;
  std::map<std::string, std::string> extra;

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> samples;

  const ManifestEntry* find(std::string_view id) const {
    for (const auto& s : samples)
      if (s.id == id) return &s;
    return nullptr;
  }
};

inline void validate_manifest(const DatasetManifest& m) {
  std::unordered_set<std::string> seen;
  for (const auto& s : m.samples) {
    if (s.id.empty()) throw Error(ErrorKind::kFormat, "manifest sample with empty id");
    if (!seen.insert(s.id).second) throw Error(ErrorKind::kFormat, "duplicate manifest id '" + s.id + "'");
  }
}

inline nlohmann::json to_json(const ManifestEntry& e) {
  nlohmann::json j{{"id", e.id}, {"image", e.image}, {"region", e.region},
                   {"width", e.width}, {"height", e.height}};
  if (e.labels) j["labels"] = *e.labels;
  for (const auto& [k, v] : e.extra) j[k] = v;
  return j;
}

inline ManifestEntry manifest_entry_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kCore{"id", "image", "labels", "region", "width", "height"};
  ManifestEntry e;
  try {
    e.id = j.at("id").get<std::string>();
    e.image = j.at("image").get<std::string>();
    e.region = j.value("region", std::string());
    e.width = j.value("width", std::size_t{0});
    e.height = j.value("height", std::size_t{0});
    if (j.contains("labels") && !j["labels"].is_null()) e.labels = j["labels"].get<std::string>();
    for (const auto& [k, v] : j.items()) {
      if (!kCore.count(k) && v.is_string()) e.extra[k] = v.get<std::string>();
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::kFormat, std::string("malformed manifest line: ") + ex.what());
  }
  return e;
}

inline std::string manifest_to_jsonl(const DatasetManifest& m) {
  std::string out;
  for (const auto& s : m.samples) {
    out += to_json(s).dump();
    out += '\n';
  }
  return out;
}

inline DatasetManifest manifest_from_jsonl(std::string_view text) {
  DatasetManifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::kFormat, "manifest line is not valid JSON");
    }
    m.samples.push_back(manifest_entry_from_json(j));
  }
  validate_manifest(m);
  return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  return manifest_from_jsonl(read_file(path));
}

inline void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  write_file_atomic(path, manifest_to_jsonl(m));
}

/// Digest of the canonical serialization, used to detect manifest drift.
inline std::string manifest_digest(const DatasetManifest& m) {
  return to_hex(fnv1a64(manifest_to_jsonl(m)));
}

/// Checks that every labeled sample's label file exists.
inline void check_label_files(const DatasetManifest& m, const std::filesystem::path& base) {
  for (const auto& s : m.samples) {
    if (s.labels && !std::filesystem::exists(base / *s.labels)) {
      throw Error(ErrorKind::kIo, "label file missing for sample '" + s.id + "'");
    }
  }
}

// ---------------------------------------------------------------------------

enum class Split : std::uint8_t { kTrain, kVal, kTest };

inline std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw Error(ErrorKind::kFormat, "unknown split '" + std::string(s) + "'");
}

struct Draw {
  double fraction = 0.0;
  std::size_t index = 0;
  std::vector<std::string> ids;
  bool operator==(const Draw&) const = default;
};

struct SplitPlan {
  std::uint64_t seed = 0;
  std::string manifest_digest;
  std::vector<std::pair<std::string, Split>> assignment;  // manifest order
  std::vector<Draw> draws;                                 // sorted by (fraction, index)

  std::vector<std::string> ids_in(Split s) const {
    std::vector<std::string> out;
    for (const auto& [id, split] : assignment)
      if (split == s) out.push_back(id);
    return out;
  }

  std::vector<const Draw*> draws_for(double fraction) const {
    std::vector<const Draw*> out;
    for (const auto& d : draws)
      if (d.fraction == fraction) out.push_back(&d);
    return out;
  }

  bool operator==(const SplitPlan&) const = default;
};

/// Split sizes by largest remainder: floors first, leftovers to the largest
/// fractional parts, ties to the earlier split.
inline std::array<std::size_t, 3> largest_remainder_sizes(std::size_t n,
                                                          const std::array<double, 3>& ratios) {
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = ratios[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(exact));
    rem[i] = exact - std::floor(exact);
    assigned += sizes[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k % 3]];
  return sizes;
}

/// Seeded uniform shuffle, then contiguous train/val/test blocks.
inline SplitPlan iid_split(const DatasetManifest& manifest, const std::array<double, 3>& ratios,
                           std::uint64_t seed) {
  for (double r : ratios) {
    if (!(r > 0.0)) throw Error(ErrorKind::kInvalidArgument, "split ratios must be positive");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw Error(ErrorKind::kInvalidArgument, "split ratios must sum to 1");
  }
  const std::size_t n = manifest.samples.size();
  if (n < 3) throw Error(ErrorKind::kInfeasible, "fewer samples than splits");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed, fnv1a64("iid_split"));
  rng.shuffle(std::span(order));

  const auto sizes = largest_remainder_sizes(n, ratios);
  std::vector<Split> split_of(n);
  std::size_t pos = 0;
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t k = 0; k < sizes[s]; ++k) split_of[order[pos++]] = static_cast<Split>(s);

  SplitPlan plan;
  plan.seed = seed;
  plan.manifest_digest = manifest_digest(manifest);
  for (std::size_t i = 0; i < n; ++i) plan.assignment.emplace_back(manifest.samples[i].id, split_of[i]);
  return plan;
}

/// Assignment purely by region tag.
inline SplitPlan domain_split(const DatasetManifest& manifest,
                              const std::map<std::string, Split>& region_map) {
  SplitPlan plan;
  plan.manifest_digest = manifest_digest(manifest);
  for (const auto& s : manifest.samples) {
    const auto it = region_map.find(s.region);
    if (it == region_map.end()) {
      throw Error(ErrorKind::kInvalidArgument, "unmapped region '" + s.region + "' (sample '" + s.id + "')");
    }
    plan.assignment.emplace_back(s.id, it->second);
  }
  return plan;
}

/// n_draws pairwise-disjoint subsets of the train split, each of
/// round(fraction * |train|) ids: one seeded shuffle, consecutive blocks.
/// Replaces any existing draws with the same fraction.
inline SplitPlan subsample_draws(SplitPlan plan, double fraction, std::size_t n_draws,
                                 std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0) || n_draws == 0) {
    throw Error(ErrorKind::kInvalidArgument, "draw fraction must lie in (0,1] and draws >= 1");
  }
  if (fraction * static_cast<double>(n_draws) > 1.0 + 1e-9) {
    throw Error(ErrorKind::kInfeasible,
                "infeasible draws: " + std::to_string(n_draws) + " disjoint draws of " +
                    std::to_string(fraction) + " exceed the train split");
  }
  std::vector<std::string> train = plan.ids_in(Split::kTrain);
  const auto block = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(train.size()) + 0.5));
  if (block == 0) throw Error(ErrorKind::kInfeasible, "draw block size rounds to 0");
  if (block * n_draws > train.size()) {
    throw Error(ErrorKind::kInfeasible, "infeasible draws: rounded blocks exceed the train split");
  }
  Rng rng(seed, fnv1a64("subsample_draws"));
  rng.shuffle(std::span(train));

  std::erase_if(plan.draws, [&](const Draw& d) { return d.fraction == fraction; });
  for (std::size_t d = 0; d < n_draws; ++d) {
    Draw draw{fraction, d, {train.begin() + static_cast<std::ptrdiff_t>(d * block),
                            train.begin() + static_cast<std::ptrdiff_t>((d + 1) * block)}};
    plan.draws.push_back(std::move(draw));
  }
  std::stable_sort(plan.draws.begin(), plan.draws.end(), [](const Draw& a, const Draw& b) {
    return a.fraction != b.fraction ? a.fraction < b.fraction : a.index < b.index;
  });
  return plan;
}

inline std::string plan_to_jsonl(const SplitPlan& plan) {
  std::string out = nlohmann::json{{"type", "plan"},
                                   {"seed", plan.seed},
                                   {"manifest_digest", plan.manifest_digest},
                                   {"samples", plan.assignment.size()}}
                        .dump() + "\n";
  for (const auto& [id, split] : plan.assignment) {
    out += nlohmann::json{{"type", "assign"}, {"id", id}, {"split", std::string(split_name(split))}}.dump();
    out += '\n';
  }
  for (const auto& d : plan.draws) {
    out += nlohmann::json{{"type", "draw"}, {"fraction", d.fraction}, {"index", d.index}, {"ids", d.ids}}.dump();
    out += '\n';
  }
  return out;
}

inline SplitPlan plan_from_jsonl(std::string_view text) {
  SplitPlan plan;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = false;
  try {
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto j = nlohmann::json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "plan") {
        plan.seed = j.at("seed").get<std::uint64_t>();
        plan.manifest_digest = j.at("manifest_digest").get<std::string>();
        header = true;
      } else if (type == "assign") {
        plan.assignment.emplace_back(j.at("id").get<std::string>(), parse_split(j.at("split").get<std::string>()));
      } else if (type == "draw") {
        plan.draws.push_back({j.at("fraction").get<double>(), j.at("index").get<std::size_t>(),
                              j.at("ids").get<std::vector<std::string>>()});
      } else {
        throw Error(ErrorKind::kFormat, "unknown plan record type '" + type + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("malformed plan: ") + e.what());
  }
  if (!header) throw Error(ErrorKind::kFormat, "plan has no header record");
  return plan;
}

// ---------------------------------------------------------------------------

/// Tile anchors along one axis: multiples of stride, plus one tile flush to
/// the far edge when the length is not covered exactly.
inline std::vector<std::size_t> tile_offsets(std::size_t length, std::size_t tile, std::size_t stride) {
  if (tile == 0 || stride == 0) throw Error(ErrorKind::kInvalidArgument, "tile and stride must be >= 1");
  if (stride > tile) throw Error(ErrorKind::kInvalidArgument, "stride larger than tile leaves gaps");
  if (tile > length) throw Error(ErrorKind::kInvalidArgument, "tile larger than image");
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  for (; pos + tile <= length; pos += stride) out.push_back(pos);
  if (out.back() + tile < length) out.push_back(length - tile);
  return out;
}

struct Tile {
  MultiBandImage image;
  Dims offset;  // top, left
};

inline std::vector<Tile> tile(const MultiBandImage& image, Dims tile_dims, Dims stride) {
  const auto ys = tile_offsets(image.height(), tile_dims.height, stride.height);
  const auto xs = tile_offsets(image.width(), tile_dims.width, stride.width);
  std::vector<Tile> tiles;
  tiles.reserve(ys.size() * xs.size());
  const std::size_t n = image.channels();
  for (std::size_t oy : ys) {
    for (std::size_t ox : xs) {
      MultiBandImage t(tile_dims.height, tile_dims.width, image.bands());
      for (std::size_t y = 0; y < tile_dims.height; ++y)
        for (std::size_t x = 0; x < tile_dims.width; ++x)
          for (std::size_t c = 0; c < n; ++c) t.at(y, x, c) = image.at(oy + y, ox + x, c);
      tiles.push_back({std::move(t), {oy, ox}});
    }
  }
  return tiles;
}

}  // namespace terrasemi
