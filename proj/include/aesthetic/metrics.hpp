#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "aesthetic/error.hpp"

namespace aesthetic {

/// Predicted and ground-truth scores on the 10-point scale.
struct PredictionPair {
  double predicted{0.0};
  double truth{0.0};
};

struct MetricsReport {
  double mse{0.0};
  double srocc{0.0};
  double accuracy{0.0};
  double accuracy_within_1{0.0};
  std::size_t n{0};
};

namespace detail {

inline void require_non_empty(std::span<const PredictionPair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "no prediction pairs");
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace detail

/// 1-based ranks; tied values share the mean of the ranks they span.
inline std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

inline bool has_ties(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

inline double mse(std::span<const PredictionPair> pairs) {
  detail::require_non_empty(pairs);
  double sum = 0.0;
  for (const auto& p : pairs) sum += (p.truth - p.predicted) * (p.truth - p.predicted);
  return sum / static_cast<double>(pairs.size());
}

/// Spearman rank correlation. Without ties: 1 - 6 sum(d^2) / (N^3 - N).
/// With ties: Pearson correlation of the average-rank vectors. When exactly
/// one side is constant there is no ordering to correlate and 0 is returned.
inline double srocc(std::span<const PredictionPair> pairs) {
  detail::require_non_empty(pairs);
  if (pairs.size() < 2) throw Error(ErrorCode::EmptyInput, "srocc needs at least two pairs");
  std::vector<double> pred, truth;
  pred.reserve(pairs.size());
  truth.reserve(pairs.size());
  for (const auto& p : pairs) {
    pred.push_back(p.predicted);
    truth.push_back(p.truth);
  }
  const auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  const bool pred_const = constant(pred), truth_const = constant(truth);
  if (pred_const && truth_const) {
    throw Error(ErrorCode::DegenerateInput, "srocc undefined: predictions and truths are both constant");
  }
  if (pred_const || truth_const) return 0.0;

  const std::vector<double> rp = average_ranks(pred);
  const std::vector<double> rt = average_ranks(truth);
  if (!has_ties(pred) && !has_ties(truth)) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < rp.size(); ++i) d2 += (rp[i] - rt[i]) * (rp[i] - rt[i]);
    const double n = static_cast<double>(rp.size());
    return 1.0 - 6.0 * d2 / (n * n * n - n);
  }
  return detail::pearson(rp, rt);
}

/// Fraction of pairs on the same side of `boundary` (>= is the positive side).
inline double binary_accuracy(std::span<const PredictionPair> pairs, double boundary = 5.0) {
  detail::require_non_empty(pairs);
  const auto agree = std::count_if(pairs.begin(), pairs.end(), [boundary](const PredictionPair& p) {
    return (p.truth >= boundary) == (p.predicted >= boundary);
  });
  return static_cast<double>(agree) / static_cast<double>(pairs.size());
}

inline double tolerance_accuracy(std::span<const PredictionPair> pairs, double tolerance = 1.0) {
  detail::require_non_empty(pairs);
  const auto close = std::count_if(pairs.begin(), pairs.end(), [tolerance](const PredictionPair& p) {
    return std::abs(p.truth - p.predicted) <= tolerance;
  });
  return static_cast<double>(close) / static_cast<double>(pairs.size());
}

inline MetricsReport evaluate(std::span<const PredictionPair> pairs) {
  if (pairs.size() < 2) throw Error(ErrorCode::EmptyInput, "evaluation needs at least two pairs");
  return {mse(pairs), srocc(pairs), binary_accuracy(pairs), tolerance_accuracy(pairs), pairs.size()};
}

}  // namespace aesthetic
