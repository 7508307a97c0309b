// terrasemi command-line front end.
//
// Every subcommand reads its inputs, runs one library operation per sample,
// writes outputs atomically and prints a single JSON status line on stdout.
// Module errors exit with 1 (JSON error line on stderr), usage errors with 2.
// Per-sample randomness is keyed by (seed, subcommand, sample id), so results
// do not depend on --threads.

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "terrasemi/png_io.hpp"
#include "terrasemi/terrasemi.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace terrasemi;

namespace {

struct Common {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string config;
  std::string preset;
  std::string out;
  std::size_t threads = 0;
};

void add_common(CLI::App* cmd, Common& c, bool stochastic) {
  auto* seed = cmd->add_option("--seed", c.seed, "RNG seed");
  if (stochastic) seed->required();
  cmd->add_option("--config", c.config, "policy config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--preset", c.preset, "riverbed | chesapeake | sen1floods11 | synthetic");
  cmd->add_option("--out", c.out, "output path")->required();
  cmd->add_option("--threads", c.threads, "worker threads (default: TERRASEMI_THREADS or 1)");
}

std::size_t thread_count(const Common& c) { return c.threads ? c.threads : threads_from_env(1); }

PolicyConfig load_policy(const Common& c) {
  PolicyConfig p;
  if (!c.preset.empty() && c.preset != "synthetic") p = preset_by_name(c.preset).policy;
  if (c.preset == "synthetic") p = synthetic_train_config().policy;
  if (!c.config.empty()) {
    try {
      p = policy_from_json(json::parse(read_file(c.config)), p);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kFormat, std::string("config is not valid JSON: ") + e.what());
    }
  }
  return p;
}

MultiBandImage load_raster(const fs::path& p) {
  auto ext = p.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return ext == ".png" ? read_png(p) : read_image(p);
}

std::string safe_name(const std::string& id) {
  std::string s = id;
  for (char& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_' && ch != '.') ch = '_';
  return s;
}

/// JSONL records with paths resolved against the file's directory.
struct Records {
  fs::path dir;
  std::vector<json> rows;

  fs::path path_of(const json& row, const char* key) const {
    if (!row.contains(key) || !row[key].is_string()) {
      throw Error(ErrorKind::kFormat, "record '" + row.value("id", std::string("?")) + "' lacks '" + key + "'");
    }
    return dir / row[key].get<std::string>();
  }
  std::map<std::string, const json*> by_id() const {
    std::map<std::string, const json*> m;
    for (const auto& r : rows) m[r.at("id").get<std::string>()] = &r;
    return m;
  }
};

Records load_records(const fs::path& p) {
  Records r{p.parent_path(), {}};
  std::istringstream in(read_file(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      r.rows.push_back(json::parse(line));
    } catch (const json::exception&) {
      throw Error(ErrorKind::kFormat, "'" + p.string() + "' has a line that is not JSON");
    }
    if (!r.rows.back().contains("id")) throw Error(ErrorKind::kFormat, "'" + p.string() + "' has a record without id");
  }
  return r;
}

void write_records(const fs::path& p, const std::vector<json>& rows) {
  std::string text;
  for (const auto& r : rows) text += r.dump() + "\n";
  write_file_atomic(p, text);
}

/// Keeps only ids of one split (and optionally one draw) of a plan.
std::vector<json> filter_by_plan(std::vector<json> rows, const std::string& plan_path, const std::string& split,
                                 const std::string& draw) {
  if (plan_path.empty()) return rows;
  const SplitPlan plan = plan_from_jsonl(read_file(plan_path));
  std::set<std::string> keep;
  if (!draw.empty()) {
    const auto colon = draw.find(':');
    if (colon == std::string::npos) throw Error(ErrorKind::kInvalidArgument, "--draw expects FRACTION:INDEX");
    const double f = std::stod(draw.substr(0, colon));
    const std::size_t idx = std::stoul(draw.substr(colon + 1));
    bool found = false;
    for (const Draw* d : plan.draws_for(f)) {
      if (d->index == idx) {
        keep.insert(d->ids.begin(), d->ids.end());
        found = true;
      }
    }
    if (!found) throw Error(ErrorKind::kInvalidArgument, "plan has no draw " + draw);
  } else {
    const auto ids = plan.ids_in(parse_split(split.empty() ? "train" : split));
    keep.insert(ids.begin(), ids.end());
  }
  std::erase_if(rows, [&](const json& r) { return !keep.count(r.at("id").get<std::string>()); });
  return rows;
}

json ok(const std::string& cmd, json extra = json::object()) {
  json j{{"status", "ok"}, {"command", cmd}};
  for (auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

// ---------------------------------------------------------------------------

json cmd_split(const Common& c, const std::string& manifest_path, const std::string& mode,
               const std::vector<double>& ratios, const std::vector<std::string>& draws) {
  const DatasetManifest m = load_manifest(manifest_path);
  SplitPlan plan;
  if (mode == "domain") {
    if (c.preset.empty()) throw Error(ErrorKind::kInvalidArgument, "domain split needs --preset for its region map");
    plan = domain_split(m, preset_by_name(c.preset).regions);
    plan.seed = c.seed;
  } else {
    if (ratios.size() != 3) throw Error(ErrorKind::kInvalidArgument, "--ratios takes three values");
    plan = iid_split(m, {ratios[0], ratios[1], ratios[2]}, c.seed);
  }
  for (const auto& d : draws) {
    const auto colon = d.find(':');
    if (colon == std::string::npos) throw Error(ErrorKind::kInvalidArgument, "--draws expects FRACTION:COUNT");
    plan = subsample_draws(plan, std::stod(d.substr(0, colon)), std::stoul(d.substr(colon + 1)), c.seed);
  }
  write_file_atomic(c.out, plan_to_jsonl(plan));
  return ok("split", {{"train", plan.ids_in(Split::kTrain).size()},
                      {"val", plan.ids_in(Split::kVal).size()},
                      {"test", plan.ids_in(Split::kTest).size()},
                      {"draws", plan.draws.size()}});
}

json cmd_augment(const Common& c, const std::string& manifest_path, const std::string& plan,
                 const std::string& split) {
  const PolicyConfig policy = load_policy(c);
  const Records in = load_records(manifest_path);
  const auto rows = filter_by_plan(in.rows, plan, split, "");
  const fs::path out_dir = c.out;
  std::vector<json> out(rows.size());
  parallel_for(rows.size(), thread_count(c), [&](std::size_t i) {
    const json& r = rows[i];
    const std::string id = r.at("id");
    const MultiBandImage img = load_raster(in.path_of(r, "image"));
    std::optional<LabelMap> labels;
    if (r.contains("labels") && r["labels"].is_string()) labels = read_labels(in.path_of(r, "labels"));
    Rng rng = Rng::for_key(c.seed, "augment:" + id);
    const WeakResult w = weak_augment(img, labels ? &*labels : nullptr, policy.weak, rng);
    const std::string base = safe_name(id);
    json o{{"id", id}, {"image", base + ".weak.mbt"}, {"height", w.image.height()},
           {"width", w.image.width()}, {"geom", to_json(w.record)}};
    if (r.contains("region")) o["region"] = r["region"];
    write_container(w.image, out_dir / (base + ".weak.mbt"));
    if (w.labels) {
      o["labels"] = base + ".weak_labels.mbt";
      write_container(*w.labels, out_dir / (base + ".weak_labels.mbt"));
    }
    out[i] = std::move(o);
  });
  write_records(out_dir / "manifest.jsonl", out);
  return ok("augment", {{"samples", out.size()}, {"manifest", (out_dir / "manifest.jsonl").string()}});
}

json cmd_simclr_views(const Common& c, const std::string& manifest_path) {
  const PolicyConfig policy = load_policy(c);
  const Records in = load_records(manifest_path);
  const fs::path out_dir = c.out;
  std::vector<json> out(in.rows.size());
  parallel_for(in.rows.size(), thread_count(c), [&](std::size_t i) {
    const json& r = in.rows[i];
    const std::string id = r.at("id");
    Rng rng = Rng::for_key(c.seed, "simclr:" + id);
    const auto [a, b] = simclr_views(load_raster(in.path_of(r, "image")), policy.simclr, rng);
    const std::string base = safe_name(id);
    write_container(a, out_dir / (base + ".view0.mbt"));
    write_container(b, out_dir / (base + ".view1.mbt"));
    out[i] = json{{"id", id}, {"view0", base + ".view0.mbt"}, {"view1", base + ".view1.mbt"}};
  });
  write_records(out_dir / "manifest.jsonl", out);
  return ok("simclr-views", {{"samples", out.size()}});
}

json cmd_strong(const Common& c, const std::string& manifest_path) {
  const PolicyConfig policy = load_policy(c);
  const Records in = load_records(manifest_path);
  const fs::path out_dir = c.out;
  std::vector<json> out(in.rows.size());
  parallel_for(in.rows.size(), thread_count(c), [&](std::size_t i) {
    const json& r = in.rows[i];
    const std::string id = r.at("id");
    Rng rng = Rng::for_key(c.seed, "strong:" + id);
    const StrongResult s = strong_augment(load_raster(in.path_of(r, "image")), policy.strong_table,
                                          policy.magnitude, policy.cutout, rng);
    const std::string base = safe_name(id);
    write_container(s.image, out_dir / (base + ".strong.mbt"));
    json rects = json::array();
    for (const Rect& q : s.cut_rects) rects.push_back({q.top, q.left, q.height, q.width});
    out[i] = json{{"id", id}, {"image", base + ".strong.mbt"}, {"row", s.row},
                  {"geom", to_json(s.record)}, {"cut_rects", rects}};
  });
  write_records(out_dir / "manifest.jsonl", out);
  return ok("strong", {{"samples", out.size()}});
}

json cmd_pseudo_label(const Common& c, const std::string& manifest_path, const std::string& model_path,
                      double threshold) {
  const ToyModel model = load_checkpoint(model_path);
  const Records in = load_records(manifest_path);
  const fs::path out_dir = c.out;
  std::vector<json> out(in.rows.size());
  std::vector<std::size_t> valid(in.rows.size()), pixels(in.rows.size());
  parallel_for(in.rows.size(), thread_count(c), [&](std::size_t i) {
    const json& r = in.rows[i];
    const std::string id = r.at("id");
    const MultiBandImage img = load_raster(in.path_of(r, "image"));
    const PseudoLabels pl = pseudo_label(model.probabilities(img), threshold);
    const std::string base = safe_name(id);
    write_container(pl.labels, out_dir / (base + ".pseudo.mbt"));
    write_container(pl.valid, out_dir / (base + ".valid.mbt"));
    valid[i] = pl.valid.count_valid();
    pixels[i] = img.pixels();
    out[i] = json{{"id", id}, {"labels", base + ".pseudo.mbt"}, {"valid", base + ".valid.mbt"},
                  {"threshold", threshold}, {"valid_pixels", valid[i]}};
  });
  write_records(out_dir / "manifest.jsonl", out);
  std::size_t v = 0, n = 0;
  for (std::size_t i = 0; i < out.size(); ++i) v += valid[i], n += pixels[i];
  return ok("pseudo-label", {{"samples", out.size()}, {"valid_fraction", n ? double(v) / double(n) : 0.0}});
}

GeomRecord geom_of(const json& row) {
  if (!row.contains("geom")) throw Error(ErrorKind::kFormat, "record '" + row.at("id").get<std::string>() + "' has no geom");
  return record_from_json(row["geom"]);
}

json cmd_replay(const Common& c, const std::string& labels_path, const std::string& strong_path) {
  const Records labels = load_records(labels_path);
  const Records strong = load_records(strong_path);
  const auto index = strong.by_id();
  const fs::path out_dir = c.out;
  std::vector<json> out(labels.rows.size());
  parallel_for(labels.rows.size(), thread_count(c), [&](std::size_t i) {
    const json& r = labels.rows[i];
    const std::string id = r.at("id");
    const auto it = index.find(id);
    if (it == index.end()) throw Error(ErrorKind::kInvalidArgument, "no strong record for '" + id + "'");
    const GeomRecord rec = geom_of(*it->second);
    std::vector<Rect> rects;
    for (const auto& q : it->second->value("cut_rects", json::array()))
      rects.push_back({q.at(0).get<std::size_t>(), q.at(1).get<std::size_t>(), q.at(2).get<std::size_t>(),
                       q.at(3).get<std::size_t>()});
    LabelMap lab = read_labels(labels.path_of(r, "labels"));
    ValidityMask valid = r.contains("valid") ? read_mask(labels.path_of(r, "valid"))
                                             : ValidityMask(lab.height(), lab.width(), true);
    const PseudoLabels aligned = align_pseudo(rec, rects, PseudoLabels{std::move(lab), std::move(valid), 0.0});
    const std::string base = safe_name(id);
    write_container(aligned.labels, out_dir / (base + ".aligned.mbt"));
    write_container(aligned.valid, out_dir / (base + ".aligned_valid.mbt"));
    out[i] = json{{"id", id}, {"labels", base + ".aligned.mbt"}, {"valid", base + ".aligned_valid.mbt"}};
  });
  write_records(out_dir / "manifest.jsonl", out);
  return ok("replay", {{"samples", out.size()}});
}

EmbeddingBatch load_embeddings(const fs::path& p) {
  if (p.extension() == ".csv") {
    std::istringstream in(read_file(p));
    std::string line;
    std::vector<double> values;
    std::size_t rows = 0, dim = 0;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::istringstream ls(line);
      std::string cell;
      std::size_t n = 0;
      while (std::getline(ls, cell, ',')) {
        try {
          values.push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw Error(ErrorKind::kFormat, "embedding CSV cell '" + cell + "' is not a number");
        }
        ++n;
      }
      if (rows == 0) dim = n;
      if (n != dim) throw Error(ErrorKind::kFormat, "embedding CSV rows differ in length");
      ++rows;
    }
    return EmbeddingBatch(rows, dim, std::move(values));
  }
  const FloatTensor t = read_tensor(p);
  return EmbeddingBatch(t.height, t.width * t.channels, std::vector<double>(t.data.begin(), t.data.end()));
}

json cmd_ntxent(const std::string& path, double tau) {
  const EmbeddingBatch batch = load_embeddings(path);
  const double loss = nt_xent_batch(batch, Temperature(tau));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", loss);
  return ok("ntxent", {{"pairs", batch.pairs()}, {"dim", batch.dim()}, {"tau", tau}, {"loss", json::parse(buf)}});
}

json arm_json(const ExperimentArm& a, std::span<const std::uint64_t> seeds) {
  json per = json::array();
  for (std::size_t i = 0; i < seeds.size(); ++i) per.push_back({{"seed", seeds[i]}, {"test_iou", a.test_metrics[i]}});
  return {{"arm", a.name}, {"per_seed", per}, {"median", a.median_metric},
          {"mean", a.stats.mean}, {"std", a.stats.std}};
}

json cmd_train_toy_synthetic(const Common& c, std::size_t n_seeds, std::optional<std::size_t> steps) {
  const SyntheticConfig sc;
  TrainConfig cfg = synthetic_train_config();
  cfg.policy = load_policy(c);
  cfg.threads = thread_count(c);
  if (steps) cfg.total_steps = *steps;
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < n_seeds; ++i) seeds.push_back(c.seed + i);

  const fs::path out_dir = c.out;
  std::vector<json> curves;
  auto arm = [&](const std::string& name, bool semi, bool all) {
    ExperimentArm a{name, {}, 0.0, {}};
    for (std::uint64_t seed : seeds) {
      SegmentationDataset d = synthetic_dataset(sc, seed, all);
      if (!semi) d.unlabeled.clear();
      const TrainResult r = run_training(d, cfg, seed);
      a.test_metrics.push_back(r.test_metric);
      for (const auto& rep : r.curve) {
        json j = to_json(rep);
        j["arm"] = name;
        j["seed"] = seed;
        curves.push_back(std::move(j));
      }
      if (semi && seed == seeds.front()) save_checkpoint(r.best_ema, out_dir / "model.mbt");
    }
    a.median_metric = median(a.test_metrics);
    a.stats = aggregate(a.test_metrics);
    return a;
  };
  const ExperimentArm fm = arm("fixmatch", true, false);
  const ExperimentArm sup = arm("supervised", false, false);
  const ExperimentArm full = arm("supervised_all_labels", false, true);
  json report{{"task", "synthetic"},
              {"labeled_tiles", sc.labeled},
              {"unlabeled_tiles", sc.unlabeled},
              {"threshold", cfg.threshold},
              {"lambda", cfg.lambda},
              {"steps", cfg.total_steps},
              {"arms", {arm_json(fm, seeds), arm_json(sup, seeds), arm_json(full, seeds)}}};
  write_file_atomic(out_dir / "report.json", report.dump(2) + "\n");
  std::string text;
  for (const auto& j : curves) text += j.dump() + "\n";
  write_file_atomic(out_dir / "curves.jsonl", text);
  return ok("train-toy", {{"fixmatch_median", fm.median_metric},
                          {"supervised_median", sup.median_metric},
                          {"supervised_all_median", full.median_metric}});
}

std::vector<LabeledSample> labeled_from(const Records& in, const std::vector<json>& rows) {
  std::vector<LabeledSample> out;
  for (const auto& r : rows)
    out.push_back({r.at("id"), load_raster(in.path_of(r, "image")), read_labels(in.path_of(r, "labels"))});
  return out;
}

json cmd_train_toy_manifest(const Common& c, const std::string& manifest_path, const std::string& plan_path,
                            const std::string& variant_name, const std::string& draw, std::size_t n_seeds,
                            std::optional<std::size_t> steps) {
  if (plan_path.empty()) throw Error(ErrorKind::kInvalidArgument, "training on a manifest needs --plan");
  const DatasetPreset preset = preset_by_name(c.preset.empty() ? "riverbed" : c.preset);
  const ModelVariant variant = parse_model_variant(variant_name);
  const bool semi = variant == ModelVariant::kFixmatchRandom || variant == ModelVariant::kFixmatchImagenet ||
                    variant == ModelVariant::kFixmatchSimclr;
  const Records in = load_records(manifest_path);

  SegmentationDataset d;
  d.classes = preset.classes;
  d.metric_classes = preset.metric_classes;
  d.train = labeled_from(in, filter_by_plan(in.rows, plan_path, "train", draw));
  d.val = labeled_from(in, filter_by_plan(in.rows, plan_path, "val", ""));
  d.test = labeled_from(in, filter_by_plan(in.rows, plan_path, "test", ""));
  if (d.train.empty()) throw Error(ErrorKind::kInvalidArgument, "empty split: train");
  d.channels = d.train.front().image.channels();
  if (semi) {
    std::set<std::string> labeled;
    for (const auto& s : d.train) labeled.insert(s.id);
    for (const auto& r : filter_by_plan(in.rows, plan_path, "train", "")) {
      if (labeled.count(r.at("id"))) continue;
      d.unlabeled.push_back({r.at("id"), load_raster(in.path_of(r, "image"))});
    }
  }
  TrainConfig cfg;
  cfg.policy = load_policy(c);
  cfg.base_lr = preset.hyper(variant).learning_rate;
  cfg.weight_decay = preset.hyper(variant).weight_decay;
  cfg.threads = thread_count(c);
  if (steps) cfg.total_steps = *steps;

  std::vector<double> metrics;
  json per = json::array();
  for (std::size_t i = 0; i < n_seeds; ++i) {
    const TrainResult r = run_training(d, cfg, c.seed + i);
    metrics.push_back(r.test_metric);
    per.push_back({{"seed", c.seed + i}, {"test_iou", r.test_metric}, {"best_step", r.best_step}});
    if (i == 0) save_checkpoint(r.best_ema, fs::path(c.out) / "model.mbt");
  }
  const Aggregate agg = aggregate(metrics);
  json report{{"preset", preset.name}, {"variant", variant_name}, {"draw", draw},
              {"learning_rate", cfg.base_lr}, {"weight_decay", cfg.weight_decay},
              {"per_seed", per}, {"mean", agg.mean}, {"std", agg.std}};
  write_file_atomic(fs::path(c.out) / "report.json", report.dump(2) + "\n");
  return ok("train-toy", {{"mean", agg.mean}, {"std", agg.std}});
}

json cmd_evaluate(const Common& c, const std::vector<std::string>& preds, const std::string& gt_path,
                  const std::string& model_path, std::vector<std::size_t> metric_classes) {
  const Records gt = load_records(gt_path);
  const auto gt_index = gt.by_id();
  std::optional<ToyModel> model;
  if (!model_path.empty()) model = load_checkpoint(model_path);
  if (preds.empty() && !model) throw Error(ErrorKind::kInvalidArgument, "evaluate needs --pred or --model");

  auto score = [&](auto&& predict_for, const std::string& name) {
    std::vector<std::optional<ConfusionMatrix>> parts(gt.rows.size());
    std::vector<std::size_t> unscored(gt.rows.size(), 0);
    parallel_for(gt.rows.size(), thread_count(c), [&](std::size_t i) {
      const json& r = gt.rows[i];
      LabelMap truth = read_labels(gt.path_of(r, "labels"));
      const std::optional<LabelMap> pred = predict_for(r);
      if (!pred) return;
      if (pred->height() != truth.height() || pred->width() != truth.width()) {
        throw Error(ErrorKind::kDimensionMismatch, "prediction dims differ for '" + r.at("id").get<std::string>() + "'");
      }
      for (std::size_t p = 0; p < truth.pixels(); ++p) {
        if (pred->data()[p] == kIgnore && truth.data()[p] != kIgnore) {
          truth.data()[p] = kIgnore;
          ++unscored[i];
        }
      }
      ConfusionMatrix cm(truth.classes());
      accumulate(cm, *pred, truth);
      parts[i] = std::move(cm);
    });
    std::optional<ConfusionMatrix> total;
    std::size_t skipped = 0, images = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      skipped += unscored[i];
      if (!parts[i]) continue;
      ++images;
      if (!total) total = *parts[i];
      else *total += *parts[i];
    }
    if (!total) throw Error(ErrorKind::kInvalidArgument, "no prediction matched a ground-truth id");
    json per_class = json::array();
    for (std::size_t k = 0; k < total->classes(); ++k) {
      const auto v = class_iou(*total, k);
      per_class.push_back(v ? json(*v) : json(nullptr));
    }
    const auto miou = mean_iou(*total, metric_classes);
    return json{{"name", name}, {"images", images}, {"pixels", total->total()}, {"unscored", skipped},
                {"per_class_iou", per_class}, {"mean_iou", miou ? json(*miou) : json(nullptr)}};
  };

  json draws = json::array();
  std::vector<double> values;
  for (const auto& p : preds) {
    const Records pr = load_records(p);
    const auto idx = pr.by_id();
    draws.push_back(score(
        [&](const json& r) -> std::optional<LabelMap> {
          const auto it = idx.find(r.at("id").get<std::string>());
          if (it == idx.end()) return std::nullopt;
          return read_labels(pr.path_of(*it->second, "labels"));
        },
        fs::path(p).parent_path().filename().string()));
  }
  if (model) {
    draws.push_back(score([&](const json& r) -> std::optional<LabelMap> {
      return model->predict(load_raster(gt.path_of(r, "image")));
    }, "model"));
  }
  for (const auto& d : draws)
    if (!d["mean_iou"].is_null()) values.push_back(d["mean_iou"].get<double>());
  json report{{"draws", draws}};
  if (!values.empty()) {
    const Aggregate a = aggregate(values);
    report["aggregate"] = {{"mean", a.mean}, {"std", a.std}, {"n", values.size()}};
  }
  write_file_atomic(c.out, report.dump(2) + "\n");
  return ok("evaluate", {{"draws", draws.size()},
                         {"mean_iou", values.empty() ? json(nullptr) : json(aggregate(values).mean)}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"terrasemi: multi-band augmentation and semi-supervised segmentation toolkit"};
  app.require_subcommand(1);

  Common c;
  std::string manifest, plan, split, mode = "iid", model, pred_gt, strong_manifest, labels_manifest,
                                    embeddings, variant = "fm-random", draw;
  std::vector<double> ratios{0.6, 0.2, 0.2};
  std::vector<std::string> draws, preds;
  std::vector<std::size_t> metric_classes;
  double threshold = 0.9, tau = 0.1;
  std::size_t seeds = 5;
  std::optional<std::size_t> steps;

  auto* split_cmd = app.add_subcommand("split", "IID or domain split plus disjoint labeled draws");
  add_common(split_cmd, c, true);
  split_cmd->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--mode", mode)->check(CLI::IsMember({"iid", "domain"}));
  split_cmd->add_option("--ratios", ratios)->expected(3)->delimiter(',');
  split_cmd->add_option("--draws", draws, "FRACTION:COUNT, repeatable");

  auto* augment_cmd = app.add_subcommand("augment", "weak augmentation of images and labels");
  add_common(augment_cmd, c, true);
  augment_cmd->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
  augment_cmd->add_option("--plan", plan)->check(CLI::ExistingFile);
  augment_cmd->add_option("--split", split)->check(CLI::IsMember({"train", "val", "test"}));

  auto* simclr_cmd = app.add_subcommand("simclr-views", "two SimCLR views per image");
  add_common(simclr_cmd, c, true);
  simclr_cmd->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);

  auto* strong_cmd = app.add_subcommand("strong", "strong augmentation with recorded geometry");
  add_common(strong_cmd, c, true);
  strong_cmd->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);

  auto* pl_cmd = app.add_subcommand("pseudo-label", "thresholded pseudo-labels from a model checkpoint");
  add_common(pl_cmd, c, false);
  pl_cmd->add_option("--manifest", manifest)->required()->check(CLI::ExistingFile);
  pl_cmd->add_option("--model", model)->required()->check(CLI::ExistingFile);
  pl_cmd->add_option("--threshold", threshold);

  auto* replay_cmd = app.add_subcommand("replay", "align labels and masks with strong-view geometry");
  add_common(replay_cmd, c, false);
  replay_cmd->add_option("--labels", labels_manifest)->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--strong", strong_manifest)->required()->check(CLI::ExistingFile);

  auto* ntxent_cmd = app.add_subcommand("ntxent", "NT-Xent loss of a 2N x D embedding batch");
  ntxent_cmd->add_option("--embeddings", embeddings)->required()->check(CLI::ExistingFile);
  ntxent_cmd->add_option("--tau", tau);

  auto* train_cmd = app.add_subcommand("train-toy", "train the per-pixel model");
  add_common(train_cmd, c, true);
  train_cmd->add_option("--seeds", seeds, "number of consecutive seeds starting at --seed");
  train_cmd->add_option("--steps", steps, "override the number of training steps");
  train_cmd->add_option("--manifest", manifest, "dataset manifest (omit for the synthetic task)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--plan", plan, "split plan for --manifest")->check(CLI::ExistingFile);
  train_cmd->add_option("--variant", variant, "model variant; selects the preset learning rate and weight decay");
  train_cmd->add_option("--draw", draw, "FRACTION:INDEX labeled subset");

  auto* eval_cmd = app.add_subcommand("evaluate", "IoU report against ground truth");
  add_common(eval_cmd, c, false);
  eval_cmd->add_option("--gt", pred_gt)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--pred", preds, "prediction manifest, repeatable (one per draw)");
  eval_cmd->add_option("--model", model)->check(CLI::ExistingFile);
  eval_cmd->add_option("--metric-classes", metric_classes)->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    json status;
    if (*split_cmd) status = cmd_split(c, manifest, mode, ratios, draws);
    else if (*augment_cmd) status = cmd_augment(c, manifest, plan, split);
    else if (*simclr_cmd) status = cmd_simclr_views(c, manifest);
    else if (*strong_cmd) status = cmd_strong(c, manifest);
    else if (*pl_cmd) status = cmd_pseudo_label(c, manifest, model, threshold);
    else if (*replay_cmd) status = cmd_replay(c, labels_manifest, strong_manifest);
    else if (*ntxent_cmd) status = cmd_ntxent(embeddings, tau);
    else if (*train_cmd) {
      if (c.preset == "synthetic" || (c.preset.empty() && manifest.empty())) {
        status = cmd_train_toy_synthetic(c, seeds, steps);
      } else {
        status = cmd_train_toy_manifest(c, manifest, plan, variant, draw, seeds, steps);
      }
    } else if (*eval_cmd) status = cmd_evaluate(c, preds, pred_gt, model, metric_classes);
    std::cout << status.dump() << std::endl;
    return 0;
  } catch (const Error& e) {
    std::cerr << json{{"status", "error"}, {"kind", to_string(e.kind())}, {"message", e.what()}}.dump() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"status", "error"}, {"kind", "io"}, {"message", e.what()}}.dump() << std::endl;
    return 1;
  }
}
