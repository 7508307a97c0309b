#pragma once

// Per-dataset configuration bundles: band layout, augmentation constants,
// crop sizes, domain-shift region maps and the learning-rate / weight-decay
// pairs of each model variant.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "terrasemi/datakit.hpp"
#include "terrasemi/error.hpp"
#include "terrasemi/image.hpp"
#include "terrasemi/policies.hpp"

namespace terrasemi {

enum class ModelVariant : std::uint8_t {
  kSupRandom,
  kSupImagenet,
  kSupSimclr,
  kFixmatchRandom,
  kFixmatchImagenet,
  kFixmatchSimclr,
};

inline constexpr std::array<std::string_view, 6> kModelVariantNames{
    "sup-random", "sup-imagenet", "sup-simclr", "fm-random", "fm-imagenet", "fm-simclr"};

inline ModelVariant parse_model_variant(std::string_view s) {
  for (std::size_t i = 0; i < kModelVariantNames.size(); ++i)
    if (kModelVariantNames[i] == s) return static_cast<ModelVariant>(i);
  throw Error(ErrorKind::kInvalidArgument, "unknown model variant '" + std::string(s) + "'");
}

struct Hyperparams {
  double learning_rate;
  double weight_decay;
};

struct DatasetPreset {
  std::string name;
  BandList bands;
  std::size_t classes = 2;
  std::vector<std::size_t> metric_classes;  // classes averaged into the reported IoU
  PolicyConfig policy;
  std::map<std::string, Split> regions;
  std::array<Hyperparams, 6> hyperparams{};

  const Hyperparams& hyper(ModelVariant v) const { return hyperparams[static_cast<std::size_t>(v)]; }
};

namespace detail {

inline PolicyConfig base_policy(Dims train_crop, Dims simclr_crop) {
  PolicyConfig p;
  p.weak.crop_out = train_crop;
  p.simclr.crop_out = simclr_crop;
  return p;
}

inline void assign(std::map<std::string, Split>& m, std::initializer_list<const char*> names, Split s) {
  for (const char* n : names) m[n] = s;
}

}  // namespace detail

inline DatasetPreset riverbed_preset() {
  DatasetPreset p{"riverbed", rgb_bands(), 2, {1}, detail::base_policy({321, 321}, {224, 224}), {}, {}};
  p.policy.simclr.drop_mode = DropMode::kRgbGray;
  detail::assign(p.regions, {"Ganga", "Brahmaputra"}, Split::kTrain);
  detail::assign(p.regions, {"Narmada"}, Split::kVal);
  detail::assign(p.regions, {"Krishna", "Kaveri"}, Split::kTest);
  p.hyperparams = {{{0.01, 0.001}, {0.03, 0.0001}, {0.003, 0.0001},
                    {0.03, 0.0001}, {0.01, 0.00001}, {0.003, 0.0001}}};
  return p;
}

inline DatasetPreset chesapeake_preset() {
  DatasetPreset p{"chesapeake", rgbn_bands(), 4, {}, detail::base_policy({241, 241}, {224, 224}), {}, {}};
  p.policy.simclr.drop_mode = DropMode::kChannelMean;
  detail::assign(p.regions, {"West Virginia"}, Split::kTrain);
  detail::assign(p.regions, {"Maryland"}, Split::kVal);
  detail::assign(p.regions, {"New York", "Pennsylvania", "Delaware"}, Split::kTest);
  p.hyperparams = {{{0.03, 0.0001}, {0.01, 0.0003}, {0.03, 0.0003},
                    {0.03, 0.0003}, {0.03, 0.0001}, {0.01, 0.0001}}};
  return p;
}

inline DatasetPreset sen1floods11_preset() {
  DatasetPreset p{"sen1floods11", sar_bands(), 2, {1}, detail::base_policy({321, 321}, {256, 256}), {}, {}};
  p.policy.simclr.jitter_prob = 0.85;
  p.policy.simclr.drop_mode = DropMode::kNoop;
  detail::assign(p.regions, {"Ghana", "India", "Nigeria", "Paraguay", "USA"}, Split::kTrain);
  detail::assign(p.regions, {"Somalia", "Sri-Lanka", "Bolivia"}, Split::kVal);
  detail::assign(p.regions, {"Mekong", "Pakistan", "Spain"}, Split::kTest);
  p.hyperparams = {{{0.01, 0.0001}, {0.001, 0.000001}, {0.01, 0.0001},
                    {0.03, 0.0001}, {0.03, 0.0001}, {0.1, 0.0001}}};
  return p;
}

inline std::vector<std::string> preset_names() { return {"riverbed", "chesapeake", "sen1floods11"}; }

inline DatasetPreset preset_by_name(std::string_view name) {
  if (name == "riverbed") return riverbed_preset();
  if (name == "chesapeake") return chesapeake_preset();
  if (name == "sen1floods11") return sen1floods11_preset();
  throw Error(ErrorKind::kInvalidArgument, "unknown preset '" + std::string(name) + "'");
}

/// Sweep of confidence thresholds tried per dataset.
inline constexpr std::array<double, 5> kThresholdSweep{0.75, 0.8, 0.85, 0.9, 0.95};

}  // namespace terrasemi
