#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "aesthetic/commands.hpp"
#include "fixtures.hpp"

using namespace aesthetic;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(AESTHETIC_TEST_DATA) / "fixtures";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string extract_with(std::size_t workers) {
  const fs::path out = fs::temp_directory_path() / ("aesthetic_golden_" + std::to_string(workers) + ".csv");
  ExtractOptions opt;
  opt.manifest = kFixtures / "fixtures.jsonl";
  opt.out = out;
  opt.workers = workers;
  const ExtractReport report = run_extract(opt);
  EXPECT_TRUE(report.failures.empty());
  const std::string text = slurp(out);
  fs::remove(out);
  return text;
}

std::map<std::string, std::vector<std::string>> golden_rows() {
  std::map<std::string, std::vector<std::string>> rows;
  std::istringstream in(slurp(kFixtures / "golden.csv"));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    auto cells = split_csv_line(line);
    rows[cells[0]] = cells;
  }
  return rows;
}

}  // namespace

TEST(Golden, CommittedImagesMatchGenerators) {
  for (const auto& f : fixtures::all()) {
    EXPECT_EQ(load_image(kFixtures / (f.id + ".png")), f.make()) << f.id;
  }
}

TEST(Golden, ExtractionReproducesCommittedCsv) {
  const std::string golden = slurp(kFixtures / "golden.csv");
  ASSERT_FALSE(golden.empty());
  EXPECT_EQ(extract_with(1), golden);
  EXPECT_EQ(extract_with(8), golden);
}

TEST(Golden, HandDerivedLightAndColor) {
  const auto rows = golden_rows();
  // solid (200,120,40): V = 200, L = (200 + 40) / 2; one bin in every histogram,
  // hue 20 deg with saturation 0.8 gives a single dominant hue.
  const std::vector<std::string> solid = {"200.000000", "0.000000", "120.000000", "0.000000", "1.000000", "1.000000",
                                          "1.000000",   "1.000000", "1.000000",   "1.000000", "0.000000"};
  // two_tone red | blue: V = 255 and L = 127.5 everywhere; two equal bins; hues
  // 0 and 240 land in bins 0 and 13, seven bins apart on the circle.
  const std::vector<std::string> two_tone = {"255.000000", "0.000000", "127.500000", "0.000000",
                                             "1.000000",   "2.000000", "0.500000",   "2.000000",
                                             "0.500000",   "2.000000", "126.000000"};
  // striped black | white: V and L are 0 or 255 in equal halves; gray pixels
  // give channel weight 0 and no saturated hue.
  const std::vector<std::string> striped = {"127.500000", "127.500000", "127.500000", "127.500000",
                                            "0.000000",   "2.000000",   "0.500000",   "2.000000",
                                            "0.500000",   "0.000000",   "0.000000"};
  for (const auto& [id, expect] : {std::pair{"solid", solid}, {"two_tone", two_tone}, {"striped", striped}}) {
    const auto& row = rows.at(id);
    for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_EQ(row[i + 1], expect[i]) << id << " column " << i + 1;
  }
}

TEST(Golden, HandDerivedComposition) {
  const auto rows = golden_rows();
  // Constant image: empty saliency puts the centroid at the center, no lines or circles.
  const auto& solid = rows.at("solid");
  for (std::size_t k = 0; k < 10; ++k) EXPECT_EQ(solid[12 + k], k == 1 ? "1.000000" : "0.000000") << k;
  EXPECT_EQ(rows.at("circle")[21], "1.000000");
  EXPECT_EQ(rows.at("diagonal")[19], "1.000000");
  for (const auto& [id, row] : rows) EXPECT_EQ(row.back(), "fallback") << id;
}
