#pragma once

// Separable synthetic segmentation task: every tile is a set of smooth random
// fields, and a pixel belongs to class 1 iff channel 0 exceeds 0.5. A nonzero
// `margin` empties the band (0.5 - margin, 0.5 + margin) of channel 0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "terrasemi/fixmatch.hpp"
#include "terrasemi/image.hpp"
#include "terrasemi/metrics.hpp"
#include "terrasemi/policies.hpp"
#include "terrasemi/rng.hpp"

namespace terrasemi {

struct SyntheticConfig {
  std::size_t tile = 16;
  std::size_t channels = 3;
  std::size_t labeled = 2;
  std::size_t unlabeled = 100;
  std::size_t val = 20;
  std::size_t test = 50;
  std::size_t waves = 3;      // cosine components per field
  double max_frequency = 1.5;  // cycles per tile
  double margin = 0.0;
};

namespace detail {

/// Sum of random low-frequency cosines, rescaled into [0,1] around 0.5.
inline std::vector<float> smooth_field(std::size_t n, const SyntheticConfig& cfg, Rng& rng) {
  std::vector<double> f(n * n, 0.0);
  const double offset = rng.uniform(-0.25, 0.25);
  for (std::size_t k = 0; k < cfg.waves; ++k) {
    const double fy = rng.uniform(-cfg.max_frequency, cfg.max_frequency);
    const double fx = rng.uniform(-cfg.max_frequency, cfg.max_frequency);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double amp = rng.uniform(0.1, 0.3);
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x)
        f[y * n + x] += amp * std::cos(2.0 * std::numbers::pi * (fy * y + fx * x) / static_cast<double>(n) + phase);
  }
  std::vector<float> out(n * n);
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = static_cast<float>(std::clamp(0.5 + offset + f[i], 0.0, 1.0));
  return out;
}

}  // namespace detail

inline LabelMap synthetic_labels(const MultiBandImage& image) {
  LabelMap labels(image.height(), image.width(), 2);
  for (std::size_t y = 0; y < image.height(); ++y)
    for (std::size_t x = 0; x < image.width(); ++x) labels.at(y, x) = image.at(y, x, 0) > 0.5f ? 1 : 0;
  return labels;
}

inline LabeledSample synthetic_tile(const SyntheticConfig& cfg, Rng& rng, std::string id) {
  const std::size_t n = cfg.tile;
  std::vector<float> data(n * n * cfg.channels);
  if (!(cfg.margin >= 0.0 && cfg.margin < 0.5)) throw Error(ErrorKind::kInvalidArgument, "margin must lie in [0, 0.5)");
  for (std::size_t c = 0; c < cfg.channels; ++c) {
    const auto field = detail::smooth_field(n, cfg, rng);
    for (std::size_t p = 0; p < n * n; ++p) {
      double v = field[p];
      if (c == 0) {
        // [0,1] -> [0, 0.5-m] u [0.5+m, 1]; 0.5 itself goes to the lower side.
        const double d = v - 0.5;
        v = 0.5 + (d > 0 ? 1.0 : -1.0) * (cfg.margin + (1.0 - 2.0 * cfg.margin) * std::abs(d));
      }
      data[p * cfg.channels + c] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  MultiBandImage image(n, n, generic_bands(cfg.channels), std::move(data));
  LabelMap labels = synthetic_labels(image);
  return {std::move(id), std::move(image), std::move(labels)};
}

/// Deterministic in `seed`. With `all_labeled`, the unlabeled pool is moved
/// into the labeled train split.
inline SegmentationDataset synthetic_dataset(const SyntheticConfig& cfg, std::uint64_t seed,
                                             bool all_labeled = false) {
  Rng rng = Rng::for_key(seed, "synthetic");
  SegmentationDataset d;
  d.classes = 2;
  d.channels = cfg.channels;
  d.metric_classes = {1};
  for (std::size_t i = 0; i < cfg.labeled; ++i) d.train.push_back(synthetic_tile(cfg, rng, "l" + std::to_string(i)));
  for (std::size_t i = 0; i < cfg.unlabeled; ++i) {
    LabeledSample s = synthetic_tile(cfg, rng, "u" + std::to_string(i));
    if (all_labeled) {
      d.train.push_back(std::move(s));
    } else {
      d.unlabeled.push_back({std::move(s.id), std::move(s.image)});
    }
  }
  for (std::size_t i = 0; i < cfg.val; ++i) d.val.push_back(synthetic_tile(cfg, rng, "v" + std::to_string(i)));
  for (std::size_t i = 0; i < cfg.test; ++i) d.test.push_back(synthetic_tile(cfg, rng, "t" + std::to_string(i)));
  return d;
}

/// Keeps the row structure (so row selection is unchanged) but disables every
/// photometric entry.
inline StrongAugTable geometric_only(StrongAugTable table) {
  for (auto& row : table.rows)
    for (StrongEntry* e : {&row.first, &row.second})
      if (!is_geometric(e->fn)) e->prob = 0.0;
  return table;
}

/// Training setup of the synthetic task. The label is a pointwise function of
/// channel-0 intensity, so only label-preserving perturbations are enabled:
/// no weak jitter, geometric strong entries only, no cutout.
inline TrainConfig synthetic_train_config() {
  TrainConfig cfg;
  cfg.base_lr = 1.0;
  cfg.total_steps = 2000;
  cfg.labeled_batch = 8;
  cfg.unlabeled_batch = 8;
  cfg.ema_decay = 0.99;
  cfg.eval_every = 50;
  cfg.policy.weak.jitter_prob = 0.0;
  cfg.policy.strong_table = geometric_only(cfg.policy.strong_table);
  cfg.policy.cutout.n_rects = 0;
  return cfg;
}

struct ExperimentArm {
  std::string name;
  std::vector<double> test_metrics;  // one per seed
  double median_metric = 0.0;
  Aggregate stats{};
};

inline ExperimentArm run_arm(std::string name, const SyntheticConfig& sc, const TrainConfig& cfg,
                             std::span<const std::uint64_t> seeds, bool semi, bool all_labeled) {
  ExperimentArm arm{std::move(name), {}, 0.0, {}};
  for (std::uint64_t seed : seeds) {
    SegmentationDataset d = synthetic_dataset(sc, seed, all_labeled);
    if (!semi) d.unlabeled.clear();
    arm.test_metrics.push_back(run_training(d, cfg, seed).test_metric);
  }
  arm.median_metric = median(arm.test_metrics);
  arm.stats = aggregate(arm.test_metrics);
  return arm;
}

}  // namespace terrasemi
