// Prints one PASS/FAIL line per acceptance criterion; nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "aesthetic/aesthetic.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace aesthetic;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok{true};
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome eca_rule() {
  Outcome o;
  o.require(eca_kernel_size(1280) == 7, "C=1280 does not give k=7");
  std::size_t prev = 0;
  for (std::size_t c = 2; c <= (std::size_t{1} << 20); ++c) {
    const std::size_t k = eca_kernel_size(c);
    o.require(k % 2 == 1, "even k at C=" + std::to_string(c));
    o.require(k >= prev, "k decreases at C=" + std::to_string(c));
    prev = k;
  }
  return o;
}

Outcome metric_oracle() {
  Outcome o;
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(49);
    std::vector<PredictionPair> pairs(n);
    std::vector<double> p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Distinct by construction: a random permutation of 0..n-1 plus jitter below 1.
      p[i] = static_cast<double>(i) + 0.5 * rng.uniform();
      t[i] = static_cast<double>(i) + 0.5 * rng.uniform();
    }
    rng.shuffle(p);
    rng.shuffle(t);
    for (std::size_t i = 0; i < n; ++i) pairs[i] = {p[i], t[i]};
    const double want = oracle::pearson(oracle::ranks_by_counting(p), oracle::ranks_by_counting(t));
    o.require(std::abs(srocc(pairs) - want) <= 1e-12, "srocc differs from pearson on ranks, trial " + std::to_string(trial));
  }
  const std::vector<PredictionPair> reversed = {{1, 3}, {2, 2}, {3, 1}};
  o.require(srocc(reversed) == -1.0, "reversed N=3 is not exactly -1");
  return o;
}

Outcome golden_files() {
  Outcome o;
  const fs::path dir = fs::path(AESTHETIC_TEST_DATA) / "fixtures";
  for (const auto& f : fixtures::all()) {
    o.require(load_image(dir / (f.id + ".png")) == f.make(), "committed image differs from generator: " + f.id);
  }
  const std::string golden = slurp(dir / "golden.csv");
  o.require(!golden.empty(), "golden.csv missing");
  for (std::size_t workers : {1u, 8u}) {
    const fs::path out = fs::temp_directory_path() / ("aesthetic_acceptance_" + std::to_string(workers) + ".csv");
    ExtractOptions opt;
    opt.manifest = dir / "fixtures.jsonl";
    opt.out = out;
    opt.workers = workers;
    const auto report = run_extract(opt);
    o.require(report.failures.empty(), "extraction failures");
    o.require(slurp(out) == golden, "output differs from golden.csv with " + std::to_string(workers) + " workers");
    fs::remove(out);
  }
  // Hand-derived light/color prefixes.
  const std::vector<std::pair<std::string, std::string>> hand = {
      {"solid,", "solid,200.000000,0.000000,120.000000,0.000000,1.000000,1.000000,1.000000,1.000000,1.000000,1.000000,0.000000,"},
      {"two_tone,",
       "two_tone,255.000000,0.000000,127.500000,0.000000,1.000000,2.000000,0.500000,2.000000,0.500000,2.000000,126.000000,"},
      {"striped,",
       "striped,127.500000,127.500000,127.500000,127.500000,0.000000,2.000000,0.500000,2.000000,0.500000,0.000000,0.000000,"}};
  for (const auto& [key, prefix] : hand) {
    const auto at = golden.find("\n" + key);
    o.require(at != std::string::npos && golden.compare(at + 1, prefix.size(), prefix) == 0, "hand row mismatch: " + key);
  }
  return o;
}

Raster halves(Rgb left, Rgb right) {
  Raster img = Raster::filled(20, 10, left);
  for (std::size_t y = 0; y < 10; ++y)
    for (std::size_t x = 10; x < 20; ++x) img.set(x, y, right);
  return img;
}

Outcome hue_contrast() {
  Outcome o;
  // red is hue 0 (bin 0); (0,255,212) is hue 170 (bin 9); (255,102,0) is hue 24 (bin 1).
  const auto far = extract_color_features(halves({255, 0, 0}, {0, 255, 212}));
  const auto near = extract_color_features(halves({255, 0, 0}, {255, 102, 0}));
  o.require(far.f6 == 2.0 && far.f7 == 162.0, "bins 9 apart: f7=" + std::to_string(far.f7));
  o.require(near.f6 == 2.0 && near.f7 == 18.0, "bins 1 apart: f7=" + std::to_string(near.f7));
  return o;
}

Outcome gradient_checks() {
  Outcome o;
  Rng rng(55);
  const auto vec = [&rng](std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
  };
  for (std::size_t dim : {1u, 4u, 21u, 31u}) {
    for (std::size_t hidden : {0u, 1u, 2u, 10u}) {
      for (bool teacher : {false, true}) {
        if (teacher && hidden < 2) continue;  // a distribution needs two logits
        for (int trial = 0; trial < 10; ++trial) {
          RegressorHead h = RegressorHead::create(dim, hidden, rng.engine());
          for (std::size_t k = 0; k < dim; ++k) {
            h.input_mean[k] = rng.normal();
            h.input_scale[k] = 0.5 + rng.uniform();
          }
          const TrainingSample s{vec(dim), rng.uniform(), teacher ? vec(hidden) : std::vector<double>{}};
          const double err = gradient_check(h, s, 0.1);
          o.require(err < 1e-4, "dim " + std::to_string(dim) + " hidden " + std::to_string(hidden) +
                                    (teacher ? " +soft" : "") + ": rel err " + std::to_string(err));
        }
      }
    }
  }
  return o;
}

Outcome soft_loss_properties() {
  Outcome o;
  Rng rng(66);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 2 + rng.below(15);
    std::vector<double> t(n), s(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = 4.0 * rng.normal();
      s[i] = 4.0 * rng.normal();
    }
    const double l = soft_loss(t, s);
    o.require(l >= 0.0, "negative soft loss");
    o.require(soft_loss(t, t) <= 1e-12, "equal logits give nonzero loss");
    const bool same = softmax(t) == softmax(s);
    o.require(same || l > 0.0, "distinct distributions give zero loss");
    const double c = 10.0 * rng.normal(), d = 10.0 * rng.normal();
    std::vector<double> ts = t, ss = s;
    for (auto& v : ts) v += c;
    for (auto& v : ss) v += d;
    o.require(std::abs(soft_loss(ts, ss) - l) <= 1e-10, "logit shift changes loss");
  }
  return o;
}

Outcome fusion_efficacy() {
  Outcome o;
  Rng rng(77);
  std::vector<double> w(kFeatureCount);
  for (auto& x : w) x = rng.normal() / std::sqrt(static_cast<double>(kFeatureCount));
  const std::size_t n = 2000;
  std::vector<ManifestRecord> records;
  std::vector<std::vector<double>> features;
  std::vector<double> scores;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(kFeatureCount);
    double z = 0.0;
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      x[k] = rng.normal();
      z += w[k] * x[k];
    }
    const double y = std::clamp(sigmoid(z) + 0.05 * rng.normal(), 0.0, 1.0);
    features.push_back(std::move(x));
    scores.push_back(y);
    records.push_back({"s" + std::to_string(i), "unused", {}, std::nullopt});
  }
  records = split(records, {}, 7);

  std::vector<TrainingSample> tr, va, full_te, icpt_tr, icpt_va;
  std::vector<std::size_t> test_idx;
  for (std::size_t i = 0; i < n; ++i) {
    const TrainingSample s{features[i], scores[i], {}};
    const TrainingSample c{{0.0}, scores[i], {}};
    switch (*records[i].split) {
      case Split::Train: tr.push_back(s); icpt_tr.push_back(c); break;
      case Split::Val: va.push_back(s); icpt_va.push_back(c); break;
      case Split::Test: test_idx.push_back(i); break;
    }
  }
  TrainConfig cfg;
  cfg.max_epochs = 1000;
  const auto head = train(RegressorHead::create(kFeatureCount, 0, cfg.seed), tr, va, cfg).head;
  const auto base = train(RegressorHead::create(1, 0, cfg.seed), icpt_tr, icpt_va, cfg).head;

  std::vector<PredictionPair> fused, baseline;
  for (std::size_t i : test_idx) {
    fused.push_back({forward(head, features[i]), scores[i]});
    baseline.push_back({forward(base, std::vector<double>{0.0}), scores[i]});
  }
  const double s_fused = srocc(fused);
  const double s_base = srocc(baseline);
  o.require(s_fused > 0.9, "trained head SROCC " + std::to_string(s_fused));
  o.require(std::abs(s_base) < 0.1, "intercept-only SROCC " + std::to_string(s_base));
  if (o.ok) o.detail = "SROCC " + std::to_string(s_fused) + " vs baseline " + std::to_string(s_base);
  return o;
}

Outcome scheduler_rule() {
  Outcome o;
  std::vector<TrainingSample> flat(16, TrainingSample{{0.0, 0.0}, 0.5, {}});
  TrainConfig cfg;
  cfg.max_epochs = 12;
  const auto trace = train(RegressorHead::create(2, 0, 1), flat, {}, cfg).trace;
  double lr = cfg.learning_rate;
  for (std::size_t e = 0; e < trace.size(); ++e) {
    o.require(trace[e].learning_rate == lr, "epoch " + std::to_string(e) + " lr " + std::to_string(trace[e].learning_rate));
    // First epoch sets the best loss; every two flat epochs after it form one plateau.
    const bool expect_cut = e >= 2 && e % 2 == 0;
    o.require(trace[e].lr_reduced == expect_cut, "reduction flag at epoch " + std::to_string(e));
    if (trace[e].lr_reduced) lr *= 0.5;
  }
  return o;
}

Outcome split_determinism() {
  Outcome o;
  std::vector<ManifestRecord> recs;
  for (int i = 0; i < 100; ++i) recs.push_back({"r" + std::to_string(i), "x", {}, std::nullopt});
  const auto a = split(recs, parse_ratios("8:1:1"), 7);
  const auto b = split(recs, parse_ratios("8:1:1"), 7);
  std::size_t counts[3] = {0, 0, 0};
  for (std::size_t i = 0; i < a.size(); ++i) {
    o.require(a[i].split == b[i].split, "assignment differs between runs");
    ++counts[static_cast<int>(*a[i].split)];
  }
  o.require(counts[0] == 80 && counts[1] == 10 && counts[2] == 10, "sizes are not 80/10/10");
  return o;
}

Outcome composition_invariants() {
  Outcome o;
  Rng rng(99);
  const CompositionConfig cfg;
  const auto segment = [&rng](ImageExtent e) {
    LineSegment s{{rng.uniform(0, e.width), rng.uniform(0, e.height)}, {rng.uniform(0, e.width), rng.uniform(0, e.height)},
                  rng.uniform()};
    if (s.p1 == s.p2) s.p2.x += 1.0;
    return s;
  };
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t w = 8 + rng.below(90), h = 8 + rng.below(90);
    const Raster img = Raster::filled(w, h, {});
    const ImageExtent e = ImageExtent::of(img);
    PerceptionBundle b;
    b.saliency = {w, h, std::vector<double>(w * h)};
    for (auto& v : b.saliency.values) v = rng.below(4) == 0 ? rng.uniform() : 0.0;
    for (std::size_t i = rng.below(10); i > 0; --i) b.lines.push_back(segment(e));
    for (std::size_t i = rng.below(3); i > 0; --i)
      b.circles.push_back({{rng.uniform(0, e.width), rng.uniform(0, e.height)}, rng.uniform(0.5, e.short_side())});
    const auto f = extract_composition_features(img, b, cfg);
    for (double v : f.values()) o.require(v >= 0.0 && v <= 1.0, "feature outside [0,1]");
    for (double v : {f.f7, f.f8, f.f9, f.f10}) o.require(v == 0.0 || v == 1.0, "predicate not binary");
    o.require(f.f1 == 0.0 || f.f2 == 0.0, "f1 and f2 both nonzero");
  }
  for (const ImageExtent e : {ImageExtent{90, 60}, ImageExtent{100, 100}, ImageExtent{37, 211}}) {
    std::vector<LineSegment> all;
    for (const auto& t : thirds_templates(e)) all.push_back(t);
    for (const auto& t : diagonal_templates(e)) all.push_back(t);
    for (const auto& t : guideline_templates(e)) all.push_back(t);
    for (const auto& t : triangle_templates(e)) all.push_back(t);
    for (const auto& t : all) o.require(line_match_score(t, t, e) == 1.0, "template does not score 1 against itself");
    const auto feats = line_template_features(e, all);
    o.require(feats.thirds == 1.0 && feats.slant == 1.0 && feats.guideline == 1.0 && feats.triangle == 1.0,
              "exact templates do not give line features of 1");
  }
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"ECA kernel rule", 1.0, eca_rule},
      {"metric oracle equivalence", 10.0, metric_oracle},
      {"feature golden files", 30.0, golden_files},
      {"dominant hue contrast granularity", 5.0, hue_contrast},
      {"gradient check", 10.0, gradient_checks},
      {"soft-loss properties", 60.0, soft_loss_properties},
      {"fusion efficacy", 60.0, fusion_efficacy},
      {"scheduler plateau rule", 60.0, scheduler_rule},
      {"split determinism", 60.0, split_determinism},
      {"composition invariants", 60.0, composition_invariants},
  };
  int failures = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.ok && secs >= c.budget_s) {
      o.ok = false;
      o.detail = "over time budget";
    }
    failures += o.ok ? 0 : 1;
    std::printf("%s %2d %s (%.3f s)%s%s\n", o.ok ? "PASS" : "FAIL", index, c.name, secs, o.detail.empty() ? "" : ": ",
                o.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}
