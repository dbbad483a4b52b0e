#include <gtest/gtest.h>

#include <fstream>

#include "json.hpp"

#include "aesthetic/commands.hpp"
#include "aesthetic/metrics.hpp"
#include "oracles.hpp"

using namespace aesthetic;

namespace {

std::vector<PredictionPair> from(const std::vector<double>& pred, const std::vector<double>& truth) {
  std::vector<PredictionPair> out;
  for (std::size_t i = 0; i < pred.size(); ++i) out.push_back({pred[i], truth[i]});
  return out;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::IoError;
}

}  // namespace

TEST(Mse, SpecExamples) {
  EXPECT_EQ(mse(from({3, 4}, {3, 4})), 0.0);
  EXPECT_EQ(mse(std::vector<PredictionPair>{{5, 6}, {5, 4}}), 1.0);
  EXPECT_EQ(mse(std::vector<PredictionPair>{{0, 10}}), 100.0);
  EXPECT_EQ(code_of([] { mse({}); }), ErrorCode::EmptyInput);
}

TEST(Srocc, SpecExamples) {
  EXPECT_EQ(srocc(from({1, 2, 3, 4, 5}, {2, 4, 6, 8, 9})), 1.0);
  EXPECT_EQ(srocc(from({1, 2, 3}, {3, 2, 1})), -1.0);
  EXPECT_DOUBLE_EQ(srocc(from({1, 3, 2, 4}, {1, 2, 3, 4})), 0.8);
}

TEST(Srocc, Errors) {
  EXPECT_EQ(code_of([] { srocc({}); }), ErrorCode::EmptyInput);
  EXPECT_EQ(code_of([] { srocc(std::vector<PredictionPair>{{1, 2}}); }), ErrorCode::EmptyInput);
  EXPECT_EQ(code_of([] { srocc(from({2, 2, 2}, {5, 5, 5})); }), ErrorCode::DegenerateInput);
  EXPECT_EQ(srocc(from({2, 2, 2}, {1, 5, 3})), 0.0);
}

TEST(Srocc, TiesUsePearsonOnAverageRanks) {
  const std::vector<double> p = {1, 2, 2, 3, 5, 5, 5}, t = {2, 1, 4, 3, 7, 6, 6};
  EXPECT_NEAR(srocc(from(p, t)), oracle::pearson(oracle::ranks_by_counting(p), oracle::ranks_by_counting(t)), 1e-12);
  EXPECT_EQ(average_ranks(std::vector<double>{10, 20, 20, 30}), (std::vector<double>{1, 2.5, 2.5, 4}));
}

TEST(Srocc, RankFormulaMatchesPearsonOnRanksWithoutTies) {
  aesthetic::Rng rng(51);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.below(5);
    std::vector<double> p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<double>(i) + rng.uniform(0, 0.5);
      t[i] = static_cast<double>(i) + rng.uniform(0, 0.5);
    }
    rng.shuffle(p);
    rng.shuffle(t);
    const double r = srocc(from(p, t));
    EXPECT_NEAR(r, oracle::pearson(oracle::ranks_by_counting(p), oracle::ranks_by_counting(t)), 1e-12);
    EXPECT_NEAR(r, oracle::spearman_rank_formula(p, t), 1e-12);
  }
}

TEST(Srocc, MonotoneTransformAndSymmetry) {
  aesthetic::Rng rng(52);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.below(30);
    std::vector<double> p(n), t(n), cubed(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.uniform(0, 10);
      t[i] = rng.uniform(0, 10);
      cubed[i] = p[i] * p[i] * p[i] / 1000.0 * 10.0;
    }
    EXPECT_EQ(average_ranks(p), average_ranks(cubed));
    EXPECT_EQ(srocc(from(p, t)), srocc(from(cubed, t)));
    EXPECT_NEAR(srocc(from(p, t)), srocc(from(t, p)), 1e-15);
    const double r = srocc(from(p, t));
    EXPECT_GE(r, -1.0);
    EXPECT_LE(r, 1.0);
  }
}

TEST(Accuracy, SpecExamples) {
  EXPECT_EQ(binary_accuracy(from({6, 7, 9}, {8, 5, 6})), 1.0);
  EXPECT_EQ(binary_accuracy(std::vector<PredictionPair>{{4.9, 5.1}}), 0.0);
  EXPECT_EQ(binary_accuracy(std::vector<PredictionPair>{{6, 7}, {4, 6}, {3, 2}, {5, 5}}), 0.75);
  EXPECT_EQ(binary_accuracy(std::vector<PredictionPair>{{5, 5.0}, {4.999, 5}}), 0.5);
  EXPECT_EQ(code_of([] { binary_accuracy({}); }), ErrorCode::EmptyInput);
}

TEST(ToleranceAccuracy, SpecExamples) {
  EXPECT_EQ(tolerance_accuracy(from({1, 2}, {1, 2})), 1.0);
  EXPECT_EQ(tolerance_accuracy(std::vector<PredictionPair>{{5, 6.001}}), 0.0);
  EXPECT_EQ(tolerance_accuracy(std::vector<PredictionPair>{{5, 6}, {5, 3}}), 0.5);
  EXPECT_EQ(code_of([] { tolerance_accuracy({}); }), ErrorCode::EmptyInput);
}

TEST(Accuracy, PermutationInvariant) {
  aesthetic::Rng rng(53);
  std::vector<PredictionPair> pairs(40);
  for (auto& p : pairs) p = {rng.uniform(0, 10), rng.uniform(0, 10)};
  const double a = binary_accuracy(pairs), t = tolerance_accuracy(pairs);
  rng.shuffle(pairs);
  EXPECT_EQ(binary_accuracy(pairs), a);
  EXPECT_EQ(tolerance_accuracy(pairs), t);
}

TEST(Mse, ZeroIffEqual) {
  aesthetic::Rng rng(54);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PredictionPair> pairs(5);
    for (auto& p : pairs) p = {rng.uniform(0, 10), rng.uniform(0, 10)};
    EXPECT_GT(mse(pairs), 0.0);
    for (auto& p : pairs) p.predicted = p.truth;
    EXPECT_EQ(mse(pairs), 0.0);
  }
}

TEST(Evaluate, PerfectPredictions) {
  std::vector<PredictionPair> pairs;
  for (int i = 0; i < 10; ++i) pairs.push_back({i + 0.5, i + 0.5});
  const auto r = evaluate(pairs);
  EXPECT_EQ(r.mse, 0.0);
  EXPECT_EQ(r.srocc, 1.0);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.accuracy_within_1, 1.0);
  EXPECT_EQ(r.n, 10u);
}

TEST(Evaluate, ReversedWithSymmetricErrors) {
  // truths 2, 4, 6, 8 predicted as 8, 6, 4, 2
  const auto r = evaluate(from({8, 6, 4, 2}, {2, 4, 6, 8}));
  EXPECT_EQ(r.srocc, -1.0);
  EXPECT_EQ(r.mse, (36.0 + 4 + 4 + 36) / 4);
  EXPECT_EQ(r.accuracy, 0.0);
  EXPECT_EQ(r.accuracy_within_1, 0.0);
}

TEST(Evaluate, CommittedEightPairFixture) {
  const std::string dir = AESTHETIC_TEST_DATA "/eval/";
  std::ifstream pin(dir + "pairs.csv");
  const auto pairs = align_predictions(read_predictions(pin), load_manifest(dir + "manifest.jsonl"), Label::Overall);
  const auto r = evaluate(pairs);
  std::ifstream ein(dir + "expected.json");
  const auto expected = nlohmann::json::parse(ein);
  EXPECT_EQ(r.n, expected["n"].get<std::size_t>());
  EXPECT_NEAR(r.mse, expected["mse"].get<double>(), 1e-12);
  EXPECT_NEAR(r.srocc, expected["srocc"].get<double>(), 1e-12);
  EXPECT_EQ(r.accuracy, expected["accuracy"].get<double>());
  EXPECT_EQ(r.accuracy_within_1, expected["accuracy_within_1"].get<double>());
}
