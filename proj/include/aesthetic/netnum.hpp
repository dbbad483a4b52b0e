#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "aesthetic/error.hpp"

namespace aesthetic {

struct EcaConfig {
  double gamma{2.0};
  double b{1.0};
};

/// C x H x W tensor, channel-major.
struct FeatureMap {
  std::size_t channels{0};
  std::size_t height{0};
  std::size_t width{0};
  std::vector<double> values;

  FeatureMap() = default;
  FeatureMap(std::size_t c, std::size_t h, std::size_t w, std::vector<double> v)
      : channels(c), height(h), width(w), values(std::move(v)) {
    if (c == 0 || h == 0 || w == 0) throw Error(ErrorCode::InvalidArgument, "feature map dimensions must be positive");
    if (values.size() != c * h * w) throw Error(ErrorCode::DimensionMismatch, "feature map buffer is not C*H*W");
  }

  std::size_t plane() const noexcept { return height * width; }
};

struct LossConfig {
  double lambda{0.1};
};

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Kernel size for the channel convolution: t = log2(C)/gamma + b/gamma,
/// rounded half-up to an integer and bumped to the next odd value when even.
inline std::size_t eca_kernel_size(std::size_t channels, const EcaConfig& cfg = {}) {
  if (channels == 0) throw Error(ErrorCode::InvalidArgument, "channel count must be positive");
  if (!(cfg.gamma >= 1.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be >= 1");
  const double t = std::log2(static_cast<double>(channels)) / cfg.gamma + cfg.b / cfg.gamma;
  auto k = static_cast<long>(std::floor(t + 0.5));
  if (k % 2 == 0) ++k;
  return static_cast<std::size_t>(std::max(1L, k));
}

inline std::vector<double> global_average_pool(const FeatureMap& map) {
  std::vector<double> gap(map.channels, 0.0);
  for (std::size_t c = 0; c < map.channels; ++c) {
    double sum = 0.0;
    for (std::size_t i = 0; i < map.plane(); ++i) sum += map.values[c * map.plane() + i];
    gap[c] = sum / static_cast<double>(map.plane());
  }
  return gap;
}

/// Sigmoid gates from a zero-padded, same-length 1-D correlation of the
/// channel averages with `kernel`.
inline std::vector<double> eca_gates(const FeatureMap& map, std::span<const double> kernel) {
  if (kernel.empty() || kernel.size() % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "channel kernel length must be odd");
  }
  if (kernel.size() > map.channels) {
    throw Error(ErrorCode::KernelTooLarge, "kernel length exceeds channel count");
  }
  const std::vector<double> gap = global_average_pool(map);
  const auto half = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  std::vector<double> gates(map.channels);
  for (std::size_t c = 0; c < map.channels; ++c) {
    double acc = 0.0;
    for (std::size_t j = 0; j < kernel.size(); ++j) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(c) + static_cast<std::ptrdiff_t>(j) - half;
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(map.channels)) continue;
      acc += kernel[j] * gap[static_cast<std::size_t>(src)];
    }
    gates[c] = sigmoid(acc);
  }
  return gates;
}

inline FeatureMap eca_reweight(const FeatureMap& map, std::span<const double> kernel) {
  const std::vector<double> gates = eca_gates(map, kernel);
  FeatureMap out = map;
  for (std::size_t c = 0; c < map.channels; ++c) {
    for (std::size_t i = 0; i < map.plane(); ++i) out.values[c * map.plane() + i] *= gates[c];
  }
  return out;
}

inline std::vector<double> log_softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  const double lse = m + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

inline std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out = log_softmax(logits);
  for (double& v : out) v = std::exp(v);
  return out;
}

namespace detail {

inline void check_logit_pair(std::span<const double> teacher, std::span<const double> student) {
  if (teacher.size() != student.size()) throw Error(ErrorCode::LengthMismatch, "teacher and student lengths differ");
  if (teacher.size() < 2) throw Error(ErrorCode::InvalidArgument, "soft loss needs at least two logits");
}

}  // namespace detail

/// KL(softmax(teacher) || softmax(student)).
inline double soft_loss(std::span<const double> teacher_logits, std::span<const double> student_logits) {
  detail::check_logit_pair(teacher_logits, student_logits);
  const std::vector<double> lp = log_softmax(teacher_logits);
  const std::vector<double> lq = log_softmax(student_logits);
  double kl = 0.0;
  for (std::size_t i = 0; i < lp.size(); ++i) kl += std::exp(lp[i]) * (lp[i] - lq[i]);
  return std::max(0.0, kl);
}

/// d soft_loss / d student_logits = softmax(student) - softmax(teacher).
/// The teacher is held fixed.
inline std::vector<double> soft_loss_gradient(std::span<const double> teacher_logits,
                                              std::span<const double> student_logits) {
  detail::check_logit_pair(teacher_logits, student_logits);
  const std::vector<double> p = softmax(teacher_logits);
  std::vector<double> q = softmax(student_logits);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] -= p[i];
  return q;
}

inline double combined_loss(double mse_value, double soft_value, const LossConfig& cfg = {}) {
  return mse_value + cfg.lambda * soft_value;
}

}  // namespace aesthetic
