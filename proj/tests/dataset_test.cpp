#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "aesthetic/config.hpp"
#include "aesthetic/dataset.hpp"
#include "oracles.hpp"

using namespace aesthetic;

namespace {

std::vector<ManifestRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_manifest(in);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::IoError;
}

std::vector<ManifestRecord> numbered(std::size_t n) {
  std::vector<ManifestRecord> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"img" + std::to_string(i), "x.png", {}, std::nullopt});
  return out;
}

}  // namespace

TEST(Manifest, ParsesRows) {
  const auto recs = parse(
      R"({"id":"a","path":"a.png","scores":{"overall":0.5,"light":0.2}})"
      "\n\n"
      R"({"id":"b","path":"b.jpg","scores":{},"split":"val"})"
      "\n"
      R"({"id":"c","path":"c.png"})"
      "\n");
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[0].scores.overall, 0.5);
  EXPECT_EQ(recs[0].scores.light, 0.2);
  EXPECT_FALSE(recs[0].scores.color);
  EXPECT_EQ(recs[1].split, Split::Val);
  EXPECT_FALSE(recs[2].split);
}

TEST(Manifest, ScoreOutOfRangeNamesRow) {
  try {
    parse(R"({"id":"a","path":"a.png","scores":{"overall":0.5}})"
          "\n"
          R"({"id":"b","path":"b.png","scores":{"overall":1.2}})"
          "\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ScoreOutOfRange);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos);
  }
  EXPECT_EQ(code_of([] { parse(R"({"id":"a","path":"a","scores":{"light":-0.01}})"); }), ErrorCode::ScoreOutOfRange);
}

TEST(Manifest, BoundaryScoresAccepted) {
  const auto recs = parse(R"({"id":"a","path":"a","scores":{"overall":0,"color":1}})");
  EXPECT_EQ(recs[0].scores.overall, 0.0);
  EXPECT_EQ(recs[0].scores.color, 1.0);
}

TEST(Manifest, DuplicateAndMalformed) {
  EXPECT_EQ(code_of([] { parse("{\"id\":\"a\",\"path\":\"p\"}\n{\"id\":\"a\",\"path\":\"q\"}\n"); }),
            ErrorCode::DuplicateId);
  for (const char* bad : {"{", "[1,2]", R"({"path":"p"})", R"({"id":"a"})", R"({"id":"a","path":"p","scores":{"mood":0.5}})",
                          R"({"id":"a","path":"p","scores":{"overall":"high"}})", R"({"id":"a","path":"p","split":"dev"})"}) {
    EXPECT_EQ(code_of([bad] { parse(bad); }), ErrorCode::ParseError) << bad;
  }
}

TEST(Manifest, WriteParseRoundTrip) {
  const auto recs = parse(R"({"id":"a","path":"a.png","scores":{"overall":0.125,"composition":0.75},"split":"test"})");
  std::ostringstream out;
  write_manifest(out, recs);
  const auto back = parse(out.str());
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].scores.overall, 0.125);
  EXPECT_EQ(back[0].scores.composition, 0.75);
  EXPECT_EQ(back[0].split, Split::Test);
}

TEST(LabelStats, Examples) {
  auto recs = numbered(4);
  const double v[] = {0.2, 0.4, 0.6, 0.8};
  for (std::size_t i = 0; i < 4; ++i) recs[i].scores.overall = v[i];
  recs[0].scores.light = 0.3;
  const auto s = label_stats(recs, Label::Overall);
  EXPECT_EQ(s.count, 4u);
  EXPECT_NEAR(s.mean, 0.5, 1e-15);
  EXPECT_NEAR(s.stddev, std::sqrt(0.05), 1e-15);
  const auto l = label_stats(recs, Label::Light);
  EXPECT_EQ(l.count, 1u);
  EXPECT_EQ(l.mean, 0.3);
  EXPECT_EQ(l.stddev, 0.0);
  EXPECT_EQ(code_of([&] { label_stats(recs, Label::Color); }), ErrorCode::NoSuchLabel);
}

TEST(LabelStats, MatchesMomentOracleAndIgnoresOrder) {
  aesthetic::Rng rng(81);
  auto recs = numbered(20);
  std::vector<double> truth;
  for (auto& r : recs) {
    if (rng.below(4) == 0) continue;
    r.scores.composition = rng.uniform();
    truth.push_back(*r.scores.composition);
  }
  const auto s = label_stats(recs, Label::Composition);
  const double m = oracle::mean(truth);
  const double var = oracle::variance_moments(truth);
  EXPECT_EQ(s.count, truth.size());
  EXPECT_NEAR(s.mean, m, 1e-12);
  EXPECT_NEAR(s.stddev, std::sqrt(var), 1e-12);
  for (int k = 0; k < 10; ++k) {
    rng.shuffle(recs);
    const auto p = label_stats(recs, Label::Composition);
    EXPECT_EQ(p.mean, s.mean);
    EXPECT_EQ(p.stddev, s.stddev);
  }
}

TEST(TenBin, Examples) {
  EXPECT_EQ(ten_bin_class(0.0), 0);
  EXPECT_EQ(ten_bin_class(0.09), 0);
  EXPECT_EQ(ten_bin_class(0.1), 1);
  EXPECT_EQ(ten_bin_class(0.55), 5);
  EXPECT_EQ(ten_bin_class(0.99), 9);
  EXPECT_EQ(ten_bin_class(1.0), 9);
  EXPECT_THROW(ten_bin_class(1.01), Error);
  EXPECT_THROW(ten_bin_class(-0.5), Error);
}

TEST(TenBin, MonotoneOverGrid) {
  int prev = 0;
  for (int i = 0; i <= 10000; ++i) {
    const int c = ten_bin_class(i / 10000.0);
    EXPECT_GE(c, prev);
    EXPECT_LE(c, 9);
    prev = c;
  }
}

TEST(Split, Counts) {
  const auto count = [](const std::vector<ManifestRecord>& recs) {
    std::map<Split, std::size_t> m;
    for (const auto& r : recs) ++m[*r.split];
    return m;
  };
  auto c = count(split(numbered(100), {}, 0));
  EXPECT_EQ(c[Split::Train], 80u);
  EXPECT_EQ(c[Split::Val], 10u);
  EXPECT_EQ(c[Split::Test], 10u);
  c = count(split(numbered(11), {}, 5));
  EXPECT_EQ(c[Split::Train], 9u);
  EXPECT_EQ(c[Split::Val], 1u);
  EXPECT_EQ(c[Split::Test], 1u);
  c = count(split(numbered(3), {}, 5));
  EXPECT_EQ(c[Split::Train], 3u);
}

TEST(Split, DeterministicInSeed) {
  const auto a = split(numbered(100), {}, 17);
  const auto b = split(numbered(100), {}, 17);
  const auto c = split(numbered(100), {}, 18);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].split, b[i].split);
    differs |= a[i].split != c[i].split;
  }
  EXPECT_TRUE(differs);
}

TEST(Split, PartitionProperty) {
  aesthetic::Rng rng(82);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = rng.below(200);
    const SplitRatios r{1.0 + rng.below(9), 1.0 + rng.below(3), 1.0 + rng.below(3)};
    const auto out = split(numbered(n), r, trial);
    ASSERT_EQ(out.size(), n);
    std::set<std::string> ids;
    std::size_t val = 0, test = 0;
    for (const auto& rec : out) {
      ASSERT_TRUE(rec.split);
      ids.insert(rec.id);
      val += *rec.split == Split::Val;
      test += *rec.split == Split::Test;
    }
    EXPECT_EQ(ids.size(), n);
    const double total = r.train + r.val + r.test;
    EXPECT_EQ(val, static_cast<std::size_t>(std::floor(n * r.val / total)));
    EXPECT_EQ(test, static_cast<std::size_t>(std::floor(n * r.test / total)));
  }
}

TEST(Split, ExistingAssignmentsKeptUnlessForced) {
  auto recs = numbered(20);
  for (std::size_t i = 0; i < 5; ++i) recs[i].split = Split::Test;
  const auto kept = split(recs, {}, 3);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(kept[i].split, Split::Test);
  std::size_t test = 0;
  for (const auto& r : kept) test += *r.split == Split::Test;
  EXPECT_EQ(test, 5u + 1u);  // 15 open records give one test row
  const auto forced = split(recs, {}, 3, true);
  test = 0;
  for (const auto& r : forced) test += *r.split == Split::Test;
  EXPECT_EQ(test, 2u);
}

TEST(Split, ParseRatios) {
  const auto r = parse_ratios("7:2:1");
  EXPECT_EQ(r.train, 7.0);
  EXPECT_EQ(r.val, 2.0);
  EXPECT_EQ(r.test, 1.0);
  EXPECT_EQ(parse_ratios("0.8:0.1:0.1").val, 0.1);
  for (const char* bad : {"", "8:1", "8:1:x", "8:0:1", "-1:1:1", "8:1:1:1"}) {
    EXPECT_EQ(code_of([bad] { parse_ratios(bad); }), ErrorCode::InvalidArgument) << bad;
  }
}

TEST(Config, OverridesAndErrors) {
  ToolkitConfig cfg;
  std::istringstream in("# tuning\ncolor.c1 = 0.02\ntrain.max_epochs=7\n\ntrain.standardize=false\nlight.order=lightness_first\n");
  apply_config(cfg, in);
  EXPECT_EQ(cfg.extraction.color.c1, 0.02);
  EXPECT_EQ(cfg.train.max_epochs, 7u);
  EXPECT_FALSE(cfg.train.standardize);
  EXPECT_EQ(cfg.extraction.light_order, LightOrder::LightnessFirst);
  for (const char* bad : {"nokey\n", "color.c9=1\n", "train.max_epochs=-3\n", "color.c1=abc\n", "train.learning_rate=0\n"}) {
    ToolkitConfig c;
    std::istringstream s(bad);
    EXPECT_EQ(code_of([&] { apply_config(c, s); }), ErrorCode::InvalidArgument) << bad;
  }
}
