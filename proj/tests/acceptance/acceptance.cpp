// Acceptance run: one PASS/FAIL line per criterion; exits non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "../cli_support.hpp"
#include "../support.hpp"

namespace {

using namespace terrasemi;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (budget_s > 0 && secs >= budget_s) {
    o.pass = false;
    o.detail += "; over time budget of " + std::to_string(static_cast<int>(budget_s)) + " s";
  }
  if (!o.pass) ++g_failures;
  std::printf("%s  [%2d] %-34s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// 1 -------------------------------------------------------------------------
Outcome replay_exactness() {
  Rng rng(101, 1);
  std::size_t ok = 0, pixels = 0, bad_pixels = 0;
  for (int t = 0; t < 1000; ++t) {
    const Dims dims{2 + rng.uniform_int(23u), 2 + rng.uniform_int(23u)};
    const std::size_t k = 2 + rng.uniform_int(5u);
    const LabelMap labels = tst::random_labels(rng, dims.height, dims.width, k);
    const GeomRecord rec = tst::random_record(rng, dims);
    const LabelMap got = replay_on_labels(rec, labels);
    const LabelMap want = tst::oracle_replay_labels(rec, labels);
    bool same = got.height() == want.height() && got.width() == want.width();
    if (same) {
      for (std::size_t i = 0; i < got.pixels(); ++i) {
        if (got.data()[i] != want.data()[i]) {
          same = false;
          ++bad_pixels;
        }
      }
      pixels += got.pixels();
    }
    ok += same;
  }
  return {ok == 1000, fmt("%.0f/1000 records exact, %.0f mismatched of %.0f pixels", double(ok), double(bad_pixels),
                          double(pixels))};
}

// 2 -------------------------------------------------------------------------
Outcome identity_suite() {
  Rng rng(202, 2);
  std::size_t failed = 0;
  double worst_hsv = 0.0;
  const std::vector<BandList> layouts{rgb_bands(), rgbn_bands(), sar_bands(), generic_bands(5)};
  for (int t = 0; t < 10000; ++t) {
    const BandList bands = layouts[rng.uniform_int(static_cast<std::uint32_t>(layouts.size()))];
    const std::size_t h = 1 + rng.uniform_int(8u), w = 1 + rng.uniform_int(8u);
    const MultiBandImage img = tst::random_image(rng, h, w, bands);
    const MultiBandImage grid = tst::random_u8_image(rng, h, w, bands);
    bool ok = true;

    if (is_rgb(bands)) {
      ok &= tst::same_pixels(color_jitter_rgb(img, 0.0, rng), img);
      ok &= tst::same_pixels(brightness(img, 0.0, rng), img);
      ok &= tst::same_pixels(contrast(img, 0.0, rng), img);
      ok &= tst::same_pixels(saturation(img, 0.0, rng), img);
      ok &= tst::same_pixels(hue(img, 0.0, rng), img);
      // A full hue turn goes through HSV and back.
      const double d = tst::max_abs_diff(adjust_hue(img, 2.0), img);
      worst_hsv = std::max(worst_hsv, d);
      ok &= d <= 1e-6;
    }
    ok &= tst::same_pixels(color_jitter_general(img, 0.0, rng), img);
    ok &= tst::same_pixels(brightness_per_channel(img, 0.0, rng), img);
    ok &= tst::same_pixels(contrast_per_channel(img, 0.0, rng), img);
    ok &= tst::same_pixels(invert(invert(grid)), grid);
    ok &= tst::same_pixels(posterize(img, 8), img);
    ok &= tst::same_pixels(solarize(img, 255), img);

    MultiBandImage r = img;
    for (int i = 0; i < 4; ++i) r = apply_primitive(r, Rot90{1});
    ok &= tst::same_pixels(r, img);
    ok &= tst::same_pixels(apply_primitive(apply_primitive(img, FlipH{}), FlipH{}), img);

    const LabelMap lab = tst::random_labels(rng, h, w, 3);
    LabelMap lr = lab;
    for (int i = 0; i < 4; ++i) lr = apply_primitive(lr, Rot90{1});
    ok &= lr == lab;
    ok &= apply_primitive(apply_primitive(lab, FlipH{}), FlipH{}) == lab;

    failed += !ok;
  }
  return {failed == 0, fmt("%.0f/10000 cases failed, worst HSV round-trip error %.2e", double(failed), worst_hsv)};
}

// 3 -------------------------------------------------------------------------
Outcome crop_bound() {
  Rng rng(303, 3);
  std::size_t violations = 0;
  double lo = 10.0, hi = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const Dims out{1 + rng.uniform_int(400u), 1 + rng.uniform_int(400u)};
    const Dims src{out.height + out.height / 2 + rng.uniform_int(50u), out.width + out.width / 2 + rng.uniform_int(50u)};
    const Crop c = sample_distorted_crop(src, out, 0.5, rng);
    for (double f : {double(c.src_h) / double(out.height), double(c.src_w) / double(out.width)}) {
      lo = std::min(lo, f);
      hi = std::max(hi, f);
      violations += (f < 0.5 || f > 1.5);
    }
    violations += (c.top + c.src_h > src.height || c.left + c.src_w > src.width);
  }
  return {violations == 0, fmt("%.0f violations, stretch range [%.4f, %.4f]", double(violations), lo, hi)};
}

// 4 -------------------------------------------------------------------------
Outcome ntxent_oracle() {
  Rng rng(404, 4);
  double worst = 0.0, worst_scale = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.uniform_int(7u), d = 1 + rng.uniform_int(16u);
    const double tau = rng.uniform(0.05, 1.0);
    std::vector<std::vector<double>> z(2 * n, std::vector<double>(d));
    std::vector<double> flat;
    for (auto& row : z) {
      for (auto& v : row) v = rng.uniform(-1, 1);
      row[0] += 1e-3;  // keeps every norm away from zero
      flat.insert(flat.end(), row.begin(), row.end());
    }
    const double got = nt_xent_batch(EmbeddingBatch(2 * n, d, flat), Temperature(tau));
    worst = std::max(worst, std::abs(got - tst::brute_nt_xent(z, tau)));
    const double c = rng.uniform(0.01, 100.0);
    std::vector<double> scaled = flat;
    for (auto& v : scaled) v *= c;
    worst_scale = std::max(worst_scale, std::abs(nt_xent_batch(EmbeddingBatch(2 * n, d, scaled), Temperature(tau)) - got));
  }
  const double single = nt_xent_batch(EmbeddingBatch(2, 3, {0.2, -1, 3, 1, 0.5, 0.1}), Temperature(0.1));
  return {worst <= 1e-6 && worst_scale <= 1e-6 && single == 0.0,
          fmt("max |loss - reference| %.2e, max scale drift %.2e, N=1 loss %g", worst, worst_scale, single)};
}

// 5 -------------------------------------------------------------------------
Outcome threshold_monotonic() {
  Rng rng(505, 5);
  std::size_t bad = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t h = 1 + rng.uniform_int(16u), w = 1 + rng.uniform_int(16u), k = 2 + rng.uniform_int(5u);
    const ProbMap probs = tst::random_probs(rng, h, w, k, rng.uniform(0.5, 8.0));
    std::size_t prev = h * w + 1;
    for (double tau : kThresholdSweep) {
      const std::size_t n = pseudo_label(probs, tau).valid.count_valid();
      bad += n > prev;
      prev = n;
    }
  }
  return {bad == 0, fmt("%.0f increases over 500 maps x 5 thresholds", double(bad))};
}

// 6 -------------------------------------------------------------------------
Outcome gradient_check() {
  Rng rng(606, 6);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t k = 2 + rng.uniform_int(3u), c = 1 + rng.uniform_int(5u);
    ToyModel m = ToyModel::zeros(k, c);
    for (auto& v : m.weights) v = rng.uniform(-2, 2);
    for (auto& v : m.bias) v = rng.uniform(-1, 1);
    std::vector<MultiBandImage> imgs;
    std::vector<LabelMap> labs;
    std::vector<ValidityMask> masks;
    for (int i = 0; i < 4; ++i) {
      const std::size_t h = 1 + rng.uniform_int(8u), w = 1 + rng.uniform_int(8u);
      imgs.push_back(tst::random_image(rng, h, w, generic_bands(c)));
      labs.push_back(tst::random_labels(rng, h, w, k));
      ValidityMask v(h, w, true);
      for (std::size_t p = 0; p < h * w; ++p) v.set(p / w, p % w, rng.uniform() < 0.7);
      v.set(0, 0, true);
      masks.push_back(v);
    }
    const std::vector<LossSample> sup{{&imgs[0], &labs[0], nullptr}, {&imgs[1], &labs[1], nullptr}};
    const std::vector<LossSample> semi{{&imgs[2], &labs[2], &masks[2]}, {&imgs[3], &labs[3], &masks[3]}};
    const double lam = rng.uniform(0, 2), wd = rng.uniform(0, 0.01);
    const Objective o = objective(m, sup, semi, lam, wd);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < m.parameter_count(); ++i) {
      const double keep = m.param(i), eps = 1e-5;
      m.param(i) = keep + eps;
      const double up = objective(m, sup, semi, lam, wd).total;
      m.param(i) = keep - eps;
      const double down = objective(m, sup, semi, lam, wd).total;
      m.param(i) = keep;
      const double fd = (up - down) / (2 * eps);
      num += (fd - o.grad[i]) * (fd - o.grad[i]);
      den += o.grad[i] * o.grad[i];
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  return {worst < 1e-4, fmt("max relative error ||fd - analytic|| / ||analytic|| = %.2e", worst)};
}

// 7 -------------------------------------------------------------------------
Outcome synthetic_gain() {
  const SyntheticConfig sc;
  TrainConfig cfg = synthetic_train_config();
  cfg.threads = 1;
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  const ExperimentArm fm = run_arm("fixmatch", sc, cfg, seeds, true, false);
  const ExperimentArm sup = run_arm("supervised", sc, cfg, seeds, false, false);
  const ExperimentArm all = run_arm("supervised_all", sc, cfg, seeds, false, true);
  for (const auto* a : {&fm, &sup, &all}) {
    std::printf("      %-15s", a->name.c_str());
    for (double v : a->test_metrics) std::printf(" %.4f", v);
    std::printf("  median %.4f\n", a->median_metric);
  }
  return {fm.median_metric >= sup.median_metric && all.median_metric >= 0.99,
          fmt("median IoU fixmatch %.4f, supervised %.4f, all labels %.4f", fm.median_metric, sup.median_metric,
              all.median_metric)};
}

// 8 -------------------------------------------------------------------------
std::array<std::size_t, 3> reference_sizes(std::size_t n) {
  // 60:20:20 as integer weights 3:1:1 out of 5.
  const std::array<std::size_t, 3> w{3, 1, 1};
  std::array<std::size_t, 3> size{}, rem{};
  std::size_t used = 0;
  for (int i = 0; i < 3; ++i) {
    size[i] = n * w[i] / 5;
    rem[i] = n * w[i] % 5;
    used += size[i];
  }
  for (std::size_t left = n - used; left > 0; --left) {
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (rem[i] > rem[best]) best = i;
    ++size[best];
    rem[best] = 0;
  }
  return size;
}

Outcome split_protocol() {
  Rng rng(808, 8);
  std::size_t bad = 0;
  for (int t = 0; t < 100; ++t) {
    DatasetManifest m;
    const std::size_t n = 20 + rng.uniform_int(400u);
    for (std::size_t i = 0; i < n; ++i) {
      ManifestEntry e;
      e.id = "m" + std::to_string(t) + "_" + std::to_string(i);
      e.image = e.id + ".mbt";
      e.region = "r" + std::to_string(i % 4);
      m.samples.push_back(e);
    }
    const std::uint64_t seed = rng.next_u64();
    SplitPlan plan = iid_split(m, {0.6, 0.2, 0.2}, seed);
    const auto want = reference_sizes(n);
    bad += plan.ids_in(Split::kTrain).size() != want[0] || plan.ids_in(Split::kVal).size() != want[1] ||
           plan.ids_in(Split::kTest).size() != want[2];

    const std::size_t train = want[0];
    const double frac = std::vector<double>{0.01, 0.05, 0.1, 0.2}[rng.uniform_int(4u)];
    const std::size_t block = static_cast<std::size_t>(std::floor(frac * double(train) + 0.5));
    if (block == 0) continue;
    const std::size_t draws = std::min<std::size_t>({5, train / block, static_cast<std::size_t>(1.0 / frac + 1e-9)});
    plan = subsample_draws(plan, frac, draws, seed);
    const std::vector<std::string> train_ids = plan.ids_in(Split::kTrain);
    const std::set<std::string> train_set(train_ids.begin(), train_ids.end());
    std::set<std::string> seen;
    for (const Draw& d : plan.draws) {
      bad += d.ids.size() != block;
      for (const auto& id : d.ids) {
        bad += !seen.insert(id).second;
        bad += !train_set.count(id);
      }
    }
    bad += plan.draws.size() != draws;
    const std::string bytes = plan_to_jsonl(plan);
    bad += bytes != plan_to_jsonl(subsample_draws(iid_split(m, {0.6, 0.2, 0.2}, seed), frac, draws, seed));
    bad += plan_from_jsonl(bytes) != plan;
  }
  DatasetManifest big;
  for (std::size_t i = 0; i < 26112; ++i) big.samples.push_back({"b" + std::to_string(i), "x", std::nullopt, "r", 0, 0, {}});
  const SplitPlan p = iid_split(big, {0.6, 0.2, 0.2}, 7);
  const auto want = reference_sizes(26112);
  const bool big_ok = p.ids_in(Split::kTrain).size() == want[0] && p.ids_in(Split::kVal).size() == want[1] &&
                      p.ids_in(Split::kTest).size() == want[2];
  return {bad == 0 && big_ok, fmt("%.0f protocol violations over 100 manifests; 26112 -> %.0f/%.0f/", double(bad),
                                  double(p.ids_in(Split::kTrain).size()), double(p.ids_in(Split::kVal).size())) +
                                  std::to_string(p.ids_in(Split::kTest).size())};
}

// 9 -------------------------------------------------------------------------
Outcome metrics_oracle() {
  Rng rng(909, 9);
  std::size_t bad = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t k = 2 + rng.uniform_int(6u), h = 1 + rng.uniform_int(20u), w = 1 + rng.uniform_int(20u);
    const LabelMap pred = tst::random_labels(rng, h, w, k);
    LabelMap gt = tst::random_labels(rng, h, w, k);
    for (std::size_t p = 0; p < gt.pixels(); ++p)
      if (rng.uniform() < 0.1) gt.data()[p] = kIgnore;
    ConfusionMatrix cm(k);
    accumulate(cm, pred, gt);
    const auto ref = tst::oracle_confusion(pred, gt, k);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) bad += cm.at(a, b) != ref[a][b];
      bad += class_iou(cm, a) != tst::oracle_iou(ref, a);
    }
  }
  // Worked example: truth 0 -> {0,0,0,1}, truth 1 -> {0,0,1,1,1,1}.
  const std::vector<std::uint8_t> g{0, 0, 0, 0, 1, 1, 1, 1, 1, 1};
  const std::vector<std::uint8_t> q{0, 0, 0, 1, 0, 0, 1, 1, 1, 1};
  ConfusionMatrix cm(2);
  accumulate(cm, LabelMap(1, 10, 2, q), LabelMap(1, 10, 2, g));
  const double e0 = std::abs(*class_iou(cm, 0) - 0.5), e1 = std::abs(*class_iou(cm, 1) - 4.0 / 7.0);
  return {bad == 0 && e0 <= 1e-12 && e1 <= 1e-12,
          fmt("%.0f oracle mismatches; worked example IoU0 %.12f, IoU1 %.12f", double(bad), *class_iou(cm, 0),
              *class_iou(cm, 1))};
}

// 10 ------------------------------------------------------------------------
Outcome cli_reproducibility() {
  const auto root = tst::fresh_dir("acceptance_pipeline");
  const auto manifest = tst::write_tile_dataset(root / "input", 16, 24, 11);
  terrasemi::write_file_atomic(root / "input" / "policy.json", R"({"weak": {"crop_out": [16, 16]}})");
  const std::string input_bytes = tst::tree_bytes(root / "input");
  const std::string cfg = " --config \"" + (root / "input" / "policy.json").string() + "\"";
  auto q = [](const std::filesystem::path& p) { return "\"" + p.string() + "\""; };

  auto pipeline = [&](const std::string& run, const std::string& threads, const std::string& env) -> std::string {
    const auto d = root / run;
    std::filesystem::create_directories(d);
    const std::string t = threads.empty() ? "" : " --threads " + threads;
    const std::vector<std::string> steps{
        "split --seed 21 --manifest " + q(manifest) + " --draws 0.25:2 --out " + q(d / "plan.jsonl"),
        "train-toy --seed 21 --seeds 1 --steps 300 --preset synthetic --out " + q(d / "model") + t,
        "augment --seed 21" + cfg + " --manifest " + q(manifest) + " --plan " + q(d / "plan.jsonl") + " --split train --out " +
            q(d / "weak") + t,
        "strong --seed 21 --manifest " + q(d / "weak" / "manifest.jsonl") + " --out " + q(d / "strong") + t,
        "pseudo-label --manifest " + q(d / "weak" / "manifest.jsonl") + " --model " + q(d / "model" / "model.mbt") +
            " --threshold 0.9 --out " + q(d / "pseudo") + t,
        "replay --labels " + q(d / "pseudo" / "manifest.jsonl") + " --strong " + q(d / "strong" / "manifest.jsonl") +
            " --out " + q(d / "aligned") + t,
        "replay --labels " + q(d / "weak" / "manifest.jsonl") + " --strong " + q(d / "strong" / "manifest.jsonl") +
            " --out " + q(d / "aligned_gt") + t,
        "evaluate --gt " + q(d / "aligned_gt" / "manifest.jsonl") + " --pred " + q(d / "aligned" / "manifest.jsonl") +
            " --metric-classes 1 --out " + q(d / "eval.json") + t,
    };
    for (const auto& s : steps) {
      const auto r = tst::run_cli(s, env, d / "stderr.txt");
      if (r.code != 0) throw std::runtime_error("step failed (" + std::to_string(r.code) + "): " + s.substr(0, 40));
    }
    std::filesystem::remove(d / "stderr.txt");
    return tst::tree_bytes(d);
  };
  const std::string a = pipeline("run_a", "1", "");
  const std::string b = pipeline("run_b", "1", "");
  const std::string c = pipeline("run_c", "8", "");
  const std::string e = pipeline("run_env", "", "TERRASEMI_THREADS=8");
  const bool inputs_untouched = tst::tree_bytes(root / "input") == input_bytes;
  const auto report = nlohmann::json::parse(tst::slurp(root / "run_a" / "eval.json"));
  const double miou = report["draws"][0]["mean_iou"].is_null() ? -1.0 : report["draws"][0]["mean_iou"].get<double>();
  if (std::getenv("TERRASEMI_KEEP") == nullptr) std::filesystem::remove_all(root);
  return {a == b && a == c && a == e && inputs_untouched,
          std::string(a == b ? "repeat identical" : "repeat DIFFERS") + ", " +
              (a == c && a == e ? "threads 1 vs 8 identical" : "threads 1 vs 8 DIFFER") + ", " +
              (inputs_untouched ? "inputs untouched" : "inputs MODIFIED") +
              fmt(", %.0f artifact bytes, aligned pseudo-label IoU %.4f", double(a.size()), miou)};
}

}  // namespace

int main() {
  std::printf("terrasemi acceptance\n");
  criterion(1, "geometry replay exactness", 30, replay_exactness);
  criterion(2, "augmentation identities", 60, identity_suite);
  criterion(3, "crop distortion bound", 0, crop_bound);
  criterion(4, "NT-Xent oracle", 0, ntxent_oracle);
  criterion(5, "pseudo-label monotonicity", 0, threshold_monotonic);
  criterion(6, "gradient check", 60, gradient_check);
  criterion(7, "synthetic semi-supervised gain", 0, synthetic_gain);
  criterion(8, "split protocol", 0, split_protocol);
  criterion(9, "metrics oracle", 0, metrics_oracle);
  criterion(10, "CLI end-to-end reproducibility", 0, cli_reproducibility);
  std::printf("%d of 10 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
