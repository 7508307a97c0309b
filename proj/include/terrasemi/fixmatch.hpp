#pragma once

// FixMatch for segmentation: confidence-thresholded pseudo-labels from a weak
// view, spatial replay of the strong view's geometry onto those labels, and a
// masked cross-entropy consistency loss, trained on a per-pixel multinomial
// logistic model (logits = W x + b at every pixel).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "terrasemi/container.hpp"
#include "terrasemi/error.hpp"
#include "terrasemi/geometry.hpp"
#include "terrasemi/image.hpp"
#include "terrasemi/metrics.hpp"
#include "terrasemi/parallel.hpp"
#include "terrasemi/policies.hpp"
#include "terrasemi/rng.hpp"

namespace terrasemi {

/// H x W x K per-pixel class probabilities.
class ProbMap {
 public:
  ProbMap(std::size_t height, std::size_t width, std::size_t classes, std::vector<float> data)
      : height_(height), width_(width), classes_(classes), data_(std::move(data)) {
    if (height_ == 0 || width_ == 0 || classes_ < 2) {
      throw Error(ErrorKind::kInvalidArgument, "probability map needs H, W >= 1 and K >= 2");
    }
    if (data_.size() != height_ * width_ * classes_) {
      throw Error(ErrorKind::kDimensionMismatch, "probability payload size mismatch");
    }
    for (std::size_t p = 0; p < height_ * width_; ++p) {
      double sum = 0.0;
      for (std::size_t k = 0; k < classes_; ++k) {
        const float v = data_[p * classes_ + k];
        if (!(v >= 0.0f && v <= 1.0f)) throw Error(ErrorKind::kInvalidArgument, "probability outside [0,1]");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-5) throw Error(ErrorKind::kInvalidArgument, "probabilities do not sum to 1");
    }
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t classes() const noexcept { return classes_; }
  float at(std::size_t y, std::size_t x, std::size_t k) const {
    return data_[(y * width_ + x) * classes_ + k];
  }
  std::span<const float> data() const noexcept { return data_; }

 private:
  std::size_t height_, width_, classes_;
  std::vector<float> data_;
};

struct PseudoLabels {
  LabelMap labels;
  ValidityMask valid;
  double threshold = 0.0;
};

/// Argmax per pixel (ties to the lowest class); valid iff the max probability
/// is >= threshold. Invalid pixels carry kIgnore. Thresholds above 1 are
/// accepted and leave every pixel invalid.
inline PseudoLabels pseudo_label(const ProbMap& probs, double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw Error(ErrorKind::kInvalidArgument, "confidence threshold must be positive");
  }
  PseudoLabels out{LabelMap(probs.height(), probs.width(), probs.classes()),
                   ValidityMask(probs.height(), probs.width(), false), threshold};
  for (std::size_t y = 0; y < probs.height(); ++y) {
    for (std::size_t x = 0; x < probs.width(); ++x) {
      std::size_t best = 0;
      float best_p = probs.at(y, x, 0);
      for (std::size_t k = 1; k < probs.classes(); ++k) {
        if (probs.at(y, x, k) > best_p) {
          best_p = probs.at(y, x, k);
          best = k;
        }
      }
      const bool ok = static_cast<double>(best_p) >= threshold;
      out.valid.set(y, x, ok);
      out.labels.at(y, x) = ok ? static_cast<std::uint8_t>(best) : kIgnore;
    }
  }
  return out;
}

/// Replays the strong view's geometry onto labels and mask. Cutout rectangles
/// do not change validity.
inline PseudoLabels align_pseudo(const GeomRecord& strong_record,
                                 [[maybe_unused]] std::span<const Rect> cut_rects,
                                 const PseudoLabels& pl) {
  require_same_dims(pl.labels, pl.valid);
  return {replay_on_labels(strong_record, pl.labels), replay_on_mask(strong_record, pl.valid),
          pl.threshold};
}

/// H x W x K logits (double precision).
struct LogitMap {
  std::size_t height = 0, width = 0, classes = 0;
  std::vector<double> data;
  double at(std::size_t y, std::size_t x, std::size_t k) const { return data[(y * width + x) * classes + k]; }
};

inline void softmax_inplace(std::span<double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) sum += (x = std::exp(x - mx));
  for (double& x : v) x /= sum;
}

inline double log_softmax_at(std::span<const double> logits, std::size_t k) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - mx);
  return logits[k] - mx - std::log(sum);
}

struct MaskedLoss {
  double loss = 0.0;
  std::size_t valid_count = 0;
};

/// Mean of -log softmax(logits)[label] over pixels that are valid (when a mask
/// is given) and not IGNORE. (0, 0) when no pixel qualifies.
inline MaskedLoss masked_cross_entropy(const LogitMap& logits, const LabelMap& labels,
                                       const ValidityMask* valid = nullptr) {
  if (logits.height != labels.height() || logits.width != labels.width()) {
    throw Error(ErrorKind::kDimensionMismatch, "logits and labels dims differ");
  }
  if (valid) require_same_dims(labels, *valid);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t y = 0; y < labels.height(); ++y) {
    for (std::size_t x = 0; x < labels.width(); ++x) {
      const std::uint8_t l = labels.at(y, x);
      if (l == kIgnore || (valid && !valid->at(y, x))) continue;
      if (l >= logits.classes) throw Error(ErrorKind::kInvalidArgument, "label exceeds logit classes");
      const std::span<const double> row(logits.data.data() + (y * logits.width + x) * logits.classes, logits.classes);
      sum -= log_softmax_at(row, l);
      ++n;
    }
  }
  return {n == 0 ? 0.0 : sum / static_cast<double>(n), n};
}

/// sup + lambda * semi.
inline double total_loss(double sup_loss, double semi_loss, double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "loss weight must be >= 0");
  return sup_loss + lambda * semi_loss;
}

// ---------------------------------------------------------------------------
// Per-pixel logistic model

struct ToyModel {
  std::size_t classes = 2;
  std::size_t channels = 1;
  std::vector<double> weights;  // classes x channels, row-major
  std::vector<double> bias;     // classes

  static ToyModel zeros(std::size_t classes, std::size_t channels) {
    return {classes, channels, std::vector<double>(classes * channels, 0.0), std::vector<double>(classes, 0.0)};
  }

  double& w(std::size_t k, std::size_t c) { return weights[k * channels + c]; }
  double w(std::size_t k, std::size_t c) const { return weights[k * channels + c]; }

  std::size_t parameter_count() const noexcept { return weights.size() + bias.size(); }

  /// Flat view order: weights then bias.
  double& param(std::size_t i) { return i < weights.size() ? weights[i] : bias[i - weights.size()]; }

  void check_input(const MultiBandImage& image) const {
    if (image.channels() != channels) {
      throw Error(ErrorKind::kDimensionMismatch, "model expects " + std::to_string(channels) +
                                                     " channels, image has " + std::to_string(image.channels()));
    }
  }

  LogitMap logits(const MultiBandImage& image) const {
    check_input(image);
    LogitMap out{image.height(), image.width(), classes, std::vector<double>(image.pixels() * classes)};
    const auto px = image.data();
    for (std::size_t p = 0; p < image.pixels(); ++p) {
      for (std::size_t k = 0; k < classes; ++k) {
        double acc = bias[k];
        for (std::size_t c = 0; c < channels; ++c) acc += w(k, c) * px[p * channels + c];
        out.data[p * classes + k] = acc;
      }
    }
    return out;
  }

  ProbMap probabilities(const MultiBandImage& image) const {
    LogitMap l = logits(image);
    std::vector<float> probs(l.data.size());
    for (std::size_t p = 0; p < image.pixels(); ++p) {
      std::span<double> row(l.data.data() + p * classes, classes);
      softmax_inplace(row);
      for (std::size_t k = 0; k < classes; ++k) probs[p * classes + k] = static_cast<float>(row[k]);
    }
    return ProbMap(image.height(), image.width(), classes, std::move(probs));
  }

  LabelMap predict(const MultiBandImage& image) const {
    const LogitMap l = logits(image);
    LabelMap out(image.height(), image.width(), classes);
    for (std::size_t p = 0; p < image.pixels(); ++p) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < classes; ++k)
        if (l.data[p * classes + k] > l.data[p * classes + best]) best = k;
      out.data()[p] = static_cast<std::uint8_t>(best);
    }
    return out;
  }

  bool operator==(const ToyModel&) const = default;
};

/// Checkpoint: tensor container, height = K, width = C + 1 (last column bias).
inline FloatTensor model_to_tensor(const ToyModel& m) {
  FloatTensor t{m.classes, m.channels + 1, 1, {}};
  for (std::size_t k = 0; k < m.classes; ++k) {
    for (std::size_t c = 0; c < m.channels; ++c) t.data.push_back(static_cast<float>(m.w(k, c)));
    t.data.push_back(static_cast<float>(m.bias[k]));
  }
  return t;
}

inline ToyModel model_from_tensor(const FloatTensor& t) {
  if (t.channels != 1 || t.width < 2 || t.height < 2) {
    throw Error(ErrorKind::kFormat, "checkpoint tensor must be K x (C+1) x 1");
  }
  ToyModel m = ToyModel::zeros(t.height, t.width - 1);
  for (std::size_t k = 0; k < m.classes; ++k) {
    for (std::size_t c = 0; c < m.channels; ++c) m.w(k, c) = t.data[k * t.width + c];
    m.bias[k] = t.data[k * t.width + m.channels];
  }
  return m;
}

inline void save_checkpoint(const ToyModel& m, const std::filesystem::path& path) {
  write_container(model_to_tensor(m), path);
}

inline ToyModel load_checkpoint(const std::filesystem::path& path) {
  return model_from_tensor(read_tensor(path));
}

/// One supervision target: an image with labels and an optional validity mask.
struct LossSample {
  const MultiBandImage* image = nullptr;
  const LabelMap* labels = nullptr;
  const ValidityMask* valid = nullptr;
};

/// Summed (not averaged) cross-entropy and its gradient over counted pixels.
struct CeSums {
  double loss = 0.0;
  std::size_t count = 0;
  std::vector<double> grad;  // flat, weights then bias
};

inline CeSums cross_entropy_sums(const ToyModel& m, const LossSample& s) {
  const LogitMap l = m.logits(*s.image);
  if (s.labels->height() != l.height || s.labels->width() != l.width) {
    throw Error(ErrorKind::kDimensionMismatch, "labels dims differ from image dims");
  }
  if (s.valid) require_same_dims(*s.labels, *s.valid);
  CeSums out{0.0, 0, std::vector<double>(m.parameter_count(), 0.0)};
  const auto px = s.image->data();
  const std::size_t nw = m.weights.size();
  std::vector<double> p(m.classes);
  for (std::size_t i = 0; i < s.labels->pixels(); ++i) {
    const std::uint8_t lab = s.labels->data()[i];
    if (lab == kIgnore || (s.valid && s.valid->data()[i] == 0)) continue;
    if (lab >= m.classes) throw Error(ErrorKind::kInvalidArgument, "label exceeds model classes");
    std::copy_n(l.data.begin() + static_cast<std::ptrdiff_t>(i * m.classes), m.classes, p.begin());
    out.loss -= log_softmax_at(p, lab);
    softmax_inplace(p);
    p[lab] -= 1.0;
    for (std::size_t k = 0; k < m.classes; ++k) {
      for (std::size_t c = 0; c < m.channels; ++c) out.grad[k * m.channels + c] += p[k] * px[i * m.channels + c];
      out.grad[nw + k] += p[k];
    }
    ++out.count;
  }
  return out;
}

/// Reduces per-sample sums in index order (deterministic regardless of how
/// they were computed).
inline CeSums reduce_sums(std::span<const CeSums> parts, std::size_t params) {
  CeSums total{0.0, 0, std::vector<double>(params, 0.0)};
  for (const auto& s : parts) {
    total.loss += s.loss;
    total.count += s.count;
    for (std::size_t i = 0; i < params; ++i) total.grad[i] += s.grad[i];
  }
  return total;
}

struct Objective {
  double total = 0.0;
  double sup = 0.0;
  double semi = 0.0;
  std::size_t sup_count = 0;
  std::size_t semi_count = 0;
  std::vector<double> grad;
};

/// sup_mean + lambda * semi_mean + 0.5 * weight_decay * |W|^2, with its exact
/// gradient. Means are pooled over all counted pixels of each batch;
/// pseudo-labels are constants.
inline Objective objective(const ToyModel& m, std::span<const LossSample> sup,
                           std::span<const LossSample> semi, double lambda, double weight_decay = 0.0,
                           std::size_t threads = 1) {
  const std::size_t np = m.parameter_count();
  std::vector<CeSums> sup_parts(sup.size()), semi_parts(semi.size());
  parallel_for(sup.size(), threads, [&](std::size_t i) { sup_parts[i] = cross_entropy_sums(m, sup[i]); });
  parallel_for(semi.size(), threads, [&](std::size_t i) { semi_parts[i] = cross_entropy_sums(m, semi[i]); });
  const CeSums s = reduce_sums(sup_parts, np);
  const CeSums u = reduce_sums(semi_parts, np);

  Objective o;
  o.sup_count = s.count;
  o.semi_count = u.count;
  o.sup = s.count ? s.loss / static_cast<double>(s.count) : 0.0;
  o.semi = u.count ? u.loss / static_cast<double>(u.count) : 0.0;
  o.total = total_loss(o.sup, o.semi, lambda);
  o.grad.assign(np, 0.0);
  for (std::size_t i = 0; i < np; ++i) {
    if (s.count) o.grad[i] += s.grad[i] / static_cast<double>(s.count);
    if (u.count && lambda != 0.0) o.grad[i] += lambda * (u.grad[i] / static_cast<double>(u.count));
  }
  if (weight_decay != 0.0) {
    double sq = 0.0;
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
      sq += m.weights[i] * m.weights[i];
      o.grad[i] += weight_decay * m.weights[i];
    }
    o.total += 0.5 * weight_decay * sq;
  }
  return o;
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  double momentum = 0.9;
  double base_lr = 0.03;
  double poly_power = 0.9;
  std::size_t total_steps = 1000;
  std::size_t labeled_batch = 32;
  std::size_t unlabeled_batch = 32;
  double threshold = 0.9;
  double lambda = 1.0;
  double ema_decay = 0.999;
  double weight_decay = 0.0;
  std::size_t eval_every = 100;
  std::size_t threads = 1;
  PolicyConfig policy{};
  FillPolicy fill{};
};

inline void validate(const TrainConfig& cfg) {
  if (!(cfg.threshold > 0.0 && cfg.threshold <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "confidence threshold must lie in (0,1]");
  }
  if (!(cfg.lambda >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "loss weight must be >= 0");
  if (cfg.total_steps == 0) throw Error(ErrorKind::kInvalidArgument, "total_steps must be >= 1");
}

/// base * (1 - step / total)^power, zero at step == total.
inline double poly_lr(double base, std::size_t step, std::size_t total, double power) {
  const double frac = std::clamp(1.0 - static_cast<double>(step) / static_cast<double>(total), 0.0, 1.0);
  return base * std::pow(frac, power);
}

struct LabeledSample {
  std::string id;
  MultiBandImage image;
  LabelMap labels;
};

struct UnlabeledSample {
  std::string id;
  MultiBandImage image;
};

struct TrainState {
  ToyModel model;
  ToyModel ema;
  std::vector<double> velocity;

  static TrainState init(const ToyModel& m) { return {m, m, std::vector<double>(m.parameter_count(), 0.0)}; }
};

struct LossReport {
  std::size_t step = 0;
  double lr = 0.0;
  double sup_loss = 0.0;
  double semi_loss = 0.0;
  double total_loss = 0.0;
  double valid_fraction = 0.0;
  std::optional<double> ema_val_metric;
};

inline nlohmann::json to_json(const LossReport& r) {
  nlohmann::json j{{"step", r.step},         {"lr", r.lr},
                   {"sup_loss", r.sup_loss}, {"semi_loss", r.semi_loss},
                   {"total_loss", r.total_loss}, {"valid_fraction", r.valid_fraction}};
  j["ema_val_metric"] = r.ema_val_metric ? nlohmann::json(*r.ema_val_metric) : nlohmann::json(nullptr);
  return j;
}

/// Augmented inputs of one step, kept alive for the loss evaluation.
struct StepBatch {
  std::vector<MultiBandImage> sup_images;
  std::vector<LabelMap> sup_labels;
  std::vector<MultiBandImage> semi_images;
  std::vector<PseudoLabels> semi_targets;
  std::size_t semi_pixels = 0;

  std::vector<LossSample> sup_samples() const {
    std::vector<LossSample> out;
    for (std::size_t i = 0; i < sup_images.size(); ++i) out.push_back({&sup_images[i], &sup_labels[i], nullptr});
    return out;
  }
  std::vector<LossSample> semi_samples() const {
    std::vector<LossSample> out;
    for (std::size_t i = 0; i < semi_images.size(); ++i)
      out.push_back({&semi_images[i], &semi_targets[i].labels, &semi_targets[i].valid});
    return out;
  }
};

/// Per-sample RNG stream of one step: keyed by (seed, step) and the slot key.
inline Rng step_rng(std::uint64_t seed, std::size_t step, std::string_view key) {
  return Rng::for_key(derive_seed(seed, step), key);
}

/// Weak views of the labeled batch; weak view -> pseudo-labels -> strong view
/// -> aligned targets for the unlabeled batch. Pseudo-labels come from the
/// current (not EMA) weights.
inline StepBatch prepare_step(const ToyModel& model, std::span<const LabeledSample* const> labeled,
                              std::span<const UnlabeledSample* const> unlabeled, const TrainConfig& cfg,
                              std::size_t step, std::uint64_t seed) {
  StepBatch b;
  b.sup_images.resize(labeled.size());
  b.sup_labels.resize(labeled.size());
  parallel_for(labeled.size(), cfg.threads, [&](std::size_t i) {
    Rng rng = step_rng(seed, step, "L:" + labeled[i]->id + "#" + std::to_string(i));
    WeakResult w = weak_augment(labeled[i]->image, &labeled[i]->labels, cfg.policy.weak, rng);
    b.sup_images[i] = std::move(w.image);
    b.sup_labels[i] = std::move(*w.labels);
  });
  b.semi_images.resize(unlabeled.size());
  b.semi_targets.resize(unlabeled.size(), PseudoLabels{LabelMap(1, 1, 2), ValidityMask(1, 1), 0.0});
  parallel_for(unlabeled.size(), cfg.threads, [&](std::size_t i) {
    Rng rng = step_rng(seed, step, "U:" + unlabeled[i]->id + "#" + std::to_string(i));
    WeakResult w = weak_augment(unlabeled[i]->image, nullptr, cfg.policy.weak, rng);
    const PseudoLabels pl = pseudo_label(model.probabilities(w.image), cfg.threshold);
    StrongResult s = strong_augment(w.image, cfg.policy.strong_table, cfg.policy.magnitude,
                                    cfg.policy.cutout, rng, cfg.fill);
    b.semi_targets[i] = align_pseudo(s.record, s.cut_rects, pl);
    b.semi_images[i] = std::move(s.image);
  });
  for (const auto& img : b.semi_images) b.semi_pixels += img.pixels();
  return b;
}

/// Momentum step (v = m v + g; p -= lr v) followed by the EMA update.
inline void apply_update(TrainState& st, std::span<const double> grad, double lr, const TrainConfig& cfg) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    st.velocity[i] = cfg.momentum * st.velocity[i] + grad[i];
    st.model.param(i) -= lr * st.velocity[i];
  }
  for (std::size_t i = 0; i < grad.size(); ++i) {
    st.ema.param(i) = cfg.ema_decay * st.ema.param(i) + (1.0 - cfg.ema_decay) * st.model.param(i);
  }
}

inline LossReport train_step(TrainState& st, std::span<const LabeledSample* const> labeled,
                             std::span<const UnlabeledSample* const> unlabeled, const TrainConfig& cfg,
                             std::size_t step, std::uint64_t seed) {
  if (labeled.empty()) throw Error(ErrorKind::kInvalidArgument, "labeled batch is empty");
  const StepBatch b = prepare_step(st.model, labeled, unlabeled, cfg, step, seed);
  const auto sup = b.sup_samples();
  const auto semi = b.semi_samples();
  const Objective o = objective(st.model, sup, semi, cfg.lambda, cfg.weight_decay, cfg.threads);
  const double lr = poly_lr(cfg.base_lr, step, cfg.total_steps, cfg.poly_power);
  apply_update(st, o.grad, lr, cfg);
  LossReport r;
  r.step = step;
  r.lr = lr;
  r.sup_loss = o.sup;
  r.semi_loss = o.semi;
  r.total_loss = o.total;
  r.valid_fraction = b.semi_pixels ? static_cast<double>(o.semi_count) / static_cast<double>(b.semi_pixels) : 0.0;
  return r;
}

// ---------------------------------------------------------------------------

struct SegmentationDataset {
  std::size_t classes = 2;
  std::size_t channels = 1;
  std::vector<LabeledSample> train;
  std::vector<UnlabeledSample> unlabeled;
  std::vector<LabeledSample> val;
  std::vector<LabeledSample> test;
  std::vector<std::size_t> metric_classes;  // empty: mean over all classes
};

/// Pixel-pooled mean IoU of a model over a labeled split.
inline double evaluate_iou(const ToyModel& m, std::span<const LabeledSample> split,
                           std::span<const std::size_t> metric_classes) {
  ConfusionMatrix cm(m.classes);
  for (const auto& s : split) accumulate(cm, m.predict(s.image), s.labels);
  return mean_iou(cm, metric_classes).value_or(0.0);
}

struct TrainResult {
  std::uint64_t seed = 0;
  ToyModel final_model;
  ToyModel best_ema;
  double best_val = -1.0;
  std::size_t best_step = 0;
  double test_metric = 0.0;
  std::vector<LossReport> curve;
};

/// Trains one seed. The EMA model is scored on val every `eval_every` steps
/// and at the end; the best-scoring snapshot is evaluated on test.
inline TrainResult run_training(const SegmentationDataset& data, const TrainConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  if (data.train.empty()) throw Error(ErrorKind::kInvalidArgument, "empty split: train");
  if (data.val.empty()) throw Error(ErrorKind::kInvalidArgument, "empty split: val");
  if (data.test.empty()) throw Error(ErrorKind::kInvalidArgument, "empty split: test");

  TrainState st = TrainState::init(ToyModel::zeros(data.classes, data.channels));
  TrainResult result;
  result.seed = seed;
  std::vector<const LabeledSample*> lb(cfg.labeled_batch);
  std::vector<const UnlabeledSample*> ub(data.unlabeled.empty() ? 0 : cfg.unlabeled_batch);
  for (std::size_t step = 0; step < cfg.total_steps; ++step) {
    Rng pick = step_rng(seed, step, "batch");
    for (auto& p : lb) p = &data.train[pick.uniform_int(static_cast<std::uint32_t>(data.train.size()))];
    for (auto& p : ub) p = &data.unlabeled[pick.uniform_int(static_cast<std::uint32_t>(data.unlabeled.size()))];
    LossReport r = train_step(st, lb, ub, cfg, step, seed);
    const bool last = step + 1 == cfg.total_steps;
    if (last || (cfg.eval_every && (step + 1) % cfg.eval_every == 0)) {
      const double v = evaluate_iou(st.ema, data.val, data.metric_classes);
      r.ema_val_metric = v;
      if (v > result.best_val) {
        result.best_val = v;
        result.best_ema = st.ema;
        result.best_step = step + 1;
      }
    }
    result.curve.push_back(r);
  }
  result.final_model = st.model;
  result.test_metric = evaluate_iou(result.best_ema, data.test, data.metric_classes);
  return result;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw Error(ErrorKind::kInvalidArgument, "median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace terrasemi
