#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "aesthetic/features.hpp"
#include "aesthetic/netnum.hpp"
#include "aesthetic/rng.hpp"

namespace aesthetic {

struct LayoutSegment {
  std::string name;
  std::size_t begin{0};
  std::size_t end{0};

  std::size_t size() const { return end - begin; }
  friend bool operator==(const LayoutSegment&, const LayoutSegment&) = default;
};

/// Concatenated feature vector plus the boundaries of each source segment.
struct FusedVector {
  std::vector<double> values;
  std::vector<LayoutSegment> layout;
};

struct SegmentSelection {
  bool light{true};
  bool color{true};
  bool composition{true};
};

/// learned || light || color || composition, present segments only.
inline FusedVector fuse(const FeatureBundle& external, const SegmentSelection& select,
                        std::span<const double> learned = {}) {
  FusedVector out;
  const auto append = [&out](const char* name, std::span<const double> v) {
    const std::size_t begin = out.values.size();
    out.values.insert(out.values.end(), v.begin(), v.end());
    out.layout.push_back({name, begin, out.values.size()});
  };
  if (!learned.empty()) append("learned", learned);
  if (select.light) append("light", external.light.values());
  if (select.color) append("color", external.color.values());
  if (select.composition) append("composition", external.composition.values());
  if (out.values.empty()) throw Error(ErrorCode::EmptySelection, "no feature segment selected");
  for (double v : out.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "fused vector has a non-finite value");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Regressor head

/// Affine (hidden == 0) or affine-ReLU-affine map followed by a sigmoid.
/// Inputs are standardized with fixed per-feature mean/scale first. All
/// trainable parameters live in one flat vector:
///   [W1 (hidden x input), b1 (hidden), w2 (hidden or input), b2].
struct RegressorHead {
  std::size_t input_dim{0};
  std::size_t hidden{0};
  std::vector<LayoutSegment> layout;
  std::vector<double> input_mean;
  std::vector<double> input_scale;
  std::vector<double> params;

  static RegressorHead create(std::size_t input_dim, std::size_t hidden, std::uint64_t seed,
                              std::vector<LayoutSegment> layout = {}) {
    if (input_dim == 0) throw Error(ErrorCode::InvalidArgument, "head input dimension must be positive");
    RegressorHead h;
    h.input_dim = input_dim;
    h.hidden = hidden;
    h.layout = std::move(layout);
    h.input_mean.assign(input_dim, 0.0);
    h.input_scale.assign(input_dim, 1.0);
    h.params.assign(h.parameter_count(), 0.0);
    Rng rng(seed);
    const auto xavier = [&rng](std::size_t fan_in, std::size_t fan_out) {
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      return rng.uniform(-limit, limit);
    };
    if (hidden > 0) {
      for (std::size_t i = 0; i < hidden * input_dim; ++i) h.params[i] = xavier(input_dim, hidden);
      for (std::size_t j = 0; j < hidden; ++j) h.params[h.b1_offset() + j] = 0.01;
      for (std::size_t j = 0; j < hidden; ++j) h.params[h.w2_offset() + j] = xavier(hidden, 1);
    } else {
      for (std::size_t j = 0; j < input_dim; ++j) h.params[h.w2_offset() + j] = xavier(input_dim, 1);
    }
    return h;
  }

  std::size_t w1_offset() const { return 0; }
  std::size_t b1_offset() const { return hidden * input_dim; }
  std::size_t w2_offset() const { return hidden * input_dim + hidden; }
  std::size_t w2_size() const { return hidden > 0 ? hidden : input_dim; }
  std::size_t b2_offset() const { return w2_offset() + w2_size(); }
  std::size_t parameter_count() const { return b2_offset() + 1; }

  friend bool operator==(const RegressorHead&, const RegressorHead&) = default;
};

struct ForwardTrace {
  std::vector<double> standardized;
  std::vector<double> pre;  // hidden pre-activations (the student logits)
  std::vector<double> act;
  double z{0.0};
  double output{0.0};
};

inline ForwardTrace forward_trace(const RegressorHead& head, std::span<const double> x) {
  if (x.size() != head.input_dim) {
    throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(x.size()) + " values, head expects " +
                                                  std::to_string(head.input_dim));
  }
  ForwardTrace t;
  t.standardized.resize(head.input_dim);
  for (std::size_t k = 0; k < head.input_dim; ++k) {
    t.standardized[k] = (x[k] - head.input_mean[k]) / head.input_scale[k];
  }
  const std::vector<double>& p = head.params;
  double z = p[head.b2_offset()];
  if (head.hidden > 0) {
    t.pre.resize(head.hidden);
    t.act.resize(head.hidden);
    for (std::size_t j = 0; j < head.hidden; ++j) {
      double a = p[head.b1_offset() + j];
      for (std::size_t k = 0; k < head.input_dim; ++k) a += p[j * head.input_dim + k] * t.standardized[k];
      t.pre[j] = a;
      t.act[j] = a > 0.0 ? a : 0.0;
      z += p[head.w2_offset() + j] * t.act[j];
    }
  } else {
    for (std::size_t k = 0; k < head.input_dim; ++k) z += p[head.w2_offset() + k] * t.standardized[k];
  }
  t.z = z;
  t.output = sigmoid(z);
  return t;
}

inline double forward(const RegressorHead& head, std::span<const double> x) { return forward_trace(head, x).output; }

inline double forward(const RegressorHead& head, const FusedVector& x) { return forward(head, std::span(x.values)); }

// ---------------------------------------------------------------------------
// Loss and gradients

struct TrainingSample {
  std::vector<double> features;
  double target{0.0};
  std::vector<double> teacher_logits;  // empty: no soft-loss term
};

namespace detail {

inline double kl_unclamped(std::span<const double> teacher, std::span<const double> student) {
  const std::vector<double> lp = log_softmax(teacher);
  const std::vector<double> lq = log_softmax(student);
  double kl = 0.0;
  for (std::size_t i = 0; i < lp.size(); ++i) kl += std::exp(lp[i]) * (lp[i] - lq[i]);
  return kl;
}

inline void check_teacher(const RegressorHead& head, const TrainingSample& s) {
  if (s.teacher_logits.empty()) return;
  if (head.hidden == 0) {
    throw Error(ErrorCode::InvalidArgument, "teacher logits need a head with a hidden layer");
  }
  if (s.teacher_logits.size() != head.hidden) {
    throw Error(ErrorCode::LengthMismatch, "teacher logits length differs from the hidden width");
  }
}

}  // namespace detail

/// (y - t)^2 + lambda * KL(teacher || softmax(hidden pre-activations)).
inline double sample_loss(const RegressorHead& head, const TrainingSample& s, double lambda) {
  detail::check_teacher(head, s);
  const ForwardTrace t = forward_trace(head, s.features);
  const double err = t.output - s.target;
  double loss = err * err;
  if (!s.teacher_logits.empty()) loss += lambda * detail::kl_unclamped(s.teacher_logits, t.pre);
  return loss;
}

/// Adds d sample_loss / d params into `grad`; returns the loss.
inline double accumulate_gradient(const RegressorHead& head, const TrainingSample& s, double lambda,
                                  std::vector<double>& grad) {
  detail::check_teacher(head, s);
  const ForwardTrace t = forward_trace(head, s.features);
  const double err = t.output - s.target;
  double loss = err * err;
  const double dz = 2.0 * err * t.output * (1.0 - t.output);
  grad[head.b2_offset()] += dz;
  if (head.hidden == 0) {
    for (std::size_t k = 0; k < head.input_dim; ++k) grad[head.w2_offset() + k] += dz * t.standardized[k];
    return loss;
  }
  std::vector<double> dpre(head.hidden);
  for (std::size_t j = 0; j < head.hidden; ++j) {
    grad[head.w2_offset() + j] += dz * t.act[j];
    dpre[j] = t.pre[j] > 0.0 ? dz * head.params[head.w2_offset() + j] : 0.0;
  }
  if (!s.teacher_logits.empty()) {
    loss += lambda * detail::kl_unclamped(s.teacher_logits, t.pre);
    const std::vector<double> g = soft_loss_gradient(s.teacher_logits, t.pre);
    for (std::size_t j = 0; j < head.hidden; ++j) dpre[j] += lambda * g[j];
  }
  for (std::size_t j = 0; j < head.hidden; ++j) {
    grad[head.b1_offset() + j] += dpre[j];
    for (std::size_t k = 0; k < head.input_dim; ++k) grad[j * head.input_dim + k] += dpre[j] * t.standardized[k];
  }
  return loss;
}

/// Largest relative disagreement between the analytic gradient and central
/// finite differences, |a - n| / max(|a| + |n|, 1e-6), over all parameters.
inline double gradient_check(const RegressorHead& head, const TrainingSample& sample, double lambda,
                             double epsilon = 1e-5) {
  std::vector<double> analytic(head.parameter_count(), 0.0);
  accumulate_gradient(head, sample, lambda, analytic);
  RegressorHead probe = head;
  double worst = 0.0;
  for (std::size_t i = 0; i < head.parameter_count(); ++i) {
    const double original = probe.params[i];
    probe.params[i] = original + epsilon;
    const double up = sample_loss(probe, sample, lambda);
    probe.params[i] = original - epsilon;
    const double down = sample_loss(probe, sample, lambda);
    probe.params[i] = original;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double rel = std::abs(analytic[i] - numeric) / std::max(std::abs(analytic[i]) + std::abs(numeric), 1e-6);
    worst = std::max(worst, rel);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Optimization

struct TrainConfig {
  double learning_rate{1e-4};
  double beta1{0.98};
  double beta2{0.999};
  double epsilon{1e-8};
  double weight_decay{1e-4};
  std::size_t batch_size{64};
  int plateau_patience{2};
  double lr_factor{0.5};
  double lambda{0.1};
  std::size_t max_epochs{100};
  std::size_t hidden{0};
  std::uint64_t seed{42};
  bool standardize{true};

  void validate() const {
    if (!(learning_rate > 0.0) || !(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0) ||
        !(epsilon > 0.0) || weight_decay < 0.0 || batch_size == 0 || plateau_patience < 1 ||
        !(lr_factor > 0.0 && lr_factor < 1.0) || lambda < 0.0 || max_epochs == 0) {
      throw Error(ErrorCode::InvalidArgument, "invalid training configuration");
    }
  }
};

/// Adaptive moment estimation with bias correction; weight decay is added to
/// the gradient as an L2 term.
class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t n, const TrainConfig& cfg)
      : beta1_(cfg.beta1), beta2_(cfg.beta2), eps_(cfg.epsilon), decay_(cfg.weight_decay), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::vector<double>& params, std::span<const double> grad, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grad[i] + decay_ * params[i];
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
      params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
  }

  std::uint64_t steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_, decay_;
  std::vector<double> m_, v_;
  std::uint64_t t_{0};
};

/// Multiplies the learning rate by `factor` once the monitored loss has gone
/// `patience` consecutive epochs without a strict decrease, then starts a
/// fresh count.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr, double factor, int patience) : lr_(lr), factor_(factor), patience_(patience) {}

  /// Returns true when this observation triggered a reduction.
  bool observe(double loss) {
    if (loss < best_) {
      best_ = loss;
      bad_epochs_ = 0;
      return false;
    }
    if (++bad_epochs_ >= patience_) {
      lr_ *= factor_;
      bad_epochs_ = 0;
      return true;
    }
    return false;
  }

  double learning_rate() const { return lr_; }

 private:
  double lr_;
  double factor_;
  int patience_;
  double best_{std::numeric_limits<double>::infinity()};
  int bad_epochs_{0};
};

struct EpochRecord {
  std::size_t epoch{0};
  double learning_rate{0.0};
  double train_loss{0.0};
  double val_mse{std::numeric_limits<double>::quiet_NaN()};
  bool lr_reduced{false};
};

struct TrainResult {
  RegressorHead head;
  std::vector<EpochRecord> trace;
};

namespace detail {

inline double mean_loss(const RegressorHead& head, const std::vector<TrainingSample>& data, double lambda) {
  double sum = 0.0;
  for (const auto& s : data) sum += sample_loss(head, s, lambda);
  return sum / static_cast<double>(data.size());
}

inline double mean_squared_error(const RegressorHead& head, const std::vector<TrainingSample>& data) {
  double sum = 0.0;
  for (const auto& s : data) {
    const double e = forward(head, s.features) - s.target;
    sum += e * e;
  }
  return sum / static_cast<double>(data.size());
}

inline void check_finite(const RegressorHead& head, double loss, std::size_t epoch) {
  const bool params_ok =
      std::all_of(head.params.begin(), head.params.end(), [](double p) { return std::isfinite(p); });
  if (!params_ok || !std::isfinite(loss)) {
    throw Error(ErrorCode::NonFiniteLoss, "non-finite loss or parameters after epoch " + std::to_string(epoch));
  }
}

}  // namespace detail

/// Per-feature mean and population std of the training inputs; constant
/// features keep scale 1.
inline void fit_standardization(RegressorHead& head, const std::vector<TrainingSample>& data) {
  const auto n = static_cast<double>(data.size());
  for (std::size_t k = 0; k < head.input_dim; ++k) {
    double sum = 0.0;
    for (const auto& s : data) sum += s.features[k];
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& s : data) sq += (s.features[k] - mean) * (s.features[k] - mean);
    const double sd = std::sqrt(sq / n);
    head.input_mean[k] = mean;
    head.input_scale[k] = sd > 1e-12 ? sd : 1.0;
  }
}

/// Mini-batch training of `head` on MSE plus lambda-weighted soft loss.
/// The plateau rule watches validation MSE when a validation set is given,
/// the training loss otherwise. Single-threaded and deterministic in the seed.
inline TrainResult train(RegressorHead head, const std::vector<TrainingSample>& train_set,
                         const std::vector<TrainingSample>& val_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
  for (const auto* set : {&train_set, &val_set}) {
    for (const auto& s : *set) {
      if (s.features.size() != head.input_dim) {
        throw Error(ErrorCode::DimensionMismatch, "sample feature length differs from the head input");
      }
      if (!(s.target >= 0.0 && s.target <= 1.0)) {
        throw Error(ErrorCode::ScoreOutOfRange, "training targets must lie in [0,1]");
      }
      detail::check_teacher(head, s);
    }
  }
  if (cfg.standardize) fit_standardization(head, train_set);

  Rng rng(cfg.seed);
  AdamOptimizer adam(head.parameter_count(), cfg);
  PlateauScheduler scheduler(cfg.learning_rate, cfg.lr_factor, cfg.plateau_patience);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(head.parameter_count());

  TrainResult result;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double lr = scheduler.learning_rate();
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < end; ++i) accumulate_gradient(head, train_set[order[i]], cfg.lambda, grad);
      const double inv = 1.0 / static_cast<double>(end - start);
      for (double& g : grad) g *= inv;
      adam.step(head.params, grad, lr);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = lr;
    rec.train_loss = detail::mean_loss(head, train_set, cfg.lambda);
    detail::check_finite(head, rec.train_loss, epoch);
    double monitored = rec.train_loss;
    if (!val_set.empty()) {
      rec.val_mse = detail::mean_squared_error(head, val_set);
      detail::check_finite(head, rec.val_mse, epoch);
      monitored = rec.val_mse;
    }
    rec.lr_reduced = scheduler.observe(monitored);
    result.trace.push_back(rec);
  }
  result.head = std::move(head);
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoint: line-oriented text, doubles as hex floats for exact round trips.

inline constexpr const char* kCheckpointMagic = "aesthetic-regressor-head";
inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline std::string hex_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  return std::string(buf, res.ptr);
}

inline double parse_hex_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  bool negative = false;
  if (first != last && *first == '-') {
    negative = true;
    ++first;
  }
  const auto res = std::from_chars(first, last, v, std::chars_format::hex);
  if (res.ec != std::errc() || res.ptr != last) {
    throw Error(ErrorCode::ParseError, "checkpoint: bad number '" + s + "'");
  }
  return negative ? -v : v;
}

inline void write_values(std::ostream& out, const char* key, const std::vector<double>& v) {
  out << key << ' ' << v.size();
  for (double x : v) out << ' ' << hex_double(x);
  out << '\n';
}

inline std::istringstream expect_line(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "checkpoint: missing '" + key + "'");
  std::istringstream ls(line);
  std::string got;
  ls >> got;
  if (got != key) throw Error(ErrorCode::ParseError, "checkpoint: expected '" + key + "', found '" + got + "'");
  return ls;
}

inline std::vector<double> read_values(std::istream& in, const char* key, std::size_t expected) {
  std::istringstream ls = expect_line(in, key);
  std::size_t n = 0;
  if (!(ls >> n) || n != expected) throw Error(ErrorCode::ParseError, std::string("checkpoint: bad count for ") + key);
  std::vector<double> v(n);
  for (auto& x : v) {
    std::string tok;
    if (!(ls >> tok)) throw Error(ErrorCode::ParseError, std::string("checkpoint: short ") + key);
    x = parse_hex_double(tok);
  }
  return v;
}

}  // namespace detail

inline void save_head(std::ostream& out, const RegressorHead& head) {
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "input_dim " << head.input_dim << '\n';
  out << "hidden " << head.hidden << '\n';
  out << "segments " << head.layout.size() << '\n';
  for (const auto& s : head.layout) out << "segment " << s.name << ' ' << s.begin << ' ' << s.end << '\n';
  detail::write_values(out, "input_mean", head.input_mean);
  detail::write_values(out, "input_scale", head.input_scale);
  detail::write_values(out, "params", head.params);
}

inline RegressorHead load_head(std::istream& in) {
  RegressorHead head;
  {
    std::istringstream ls = detail::expect_line(in, kCheckpointMagic);
    int version = 0;
    if (!(ls >> version) || version != kCheckpointVersion) {
      throw Error(ErrorCode::ParseError, "checkpoint: unsupported version");
    }
  }
  if (!(detail::expect_line(in, "input_dim") >> head.input_dim) || head.input_dim == 0) {
    throw Error(ErrorCode::ParseError, "checkpoint: bad input_dim");
  }
  if (!(detail::expect_line(in, "hidden") >> head.hidden)) throw Error(ErrorCode::ParseError, "checkpoint: bad hidden");
  std::size_t segments = 0;
  if (!(detail::expect_line(in, "segments") >> segments)) throw Error(ErrorCode::ParseError, "checkpoint: bad segments");
  for (std::size_t i = 0; i < segments; ++i) {
    LayoutSegment s;
    if (!(detail::expect_line(in, "segment") >> s.name >> s.begin >> s.end) || s.end < s.begin ||
        s.end > head.input_dim) {
      throw Error(ErrorCode::ParseError, "checkpoint: bad segment");
    }
    head.layout.push_back(s);
  }
  head.input_mean = detail::read_values(in, "input_mean", head.input_dim);
  head.input_scale = detail::read_values(in, "input_scale", head.input_dim);
  head.params = detail::read_values(in, "params", head.parameter_count());
  return head;
}

}  // namespace aesthetic
