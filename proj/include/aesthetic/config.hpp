#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <type_traits>
#include <string>

#include "aesthetic/features.hpp"
#include "aesthetic/fusion.hpp"

namespace aesthetic {

/// Every tunable default in one place, overridable from a key=value file.
struct ToolkitConfig {
  ExtractionConfig extraction;
  TrainConfig train;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidArgument, "config: '" + key + "' expects a number, got '" + v + "'");
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const unsigned long long n = std::stoull(v, &used);
      if (used == v.size()) return n;
    }
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidArgument, "config: '" + key + "' expects a non-negative integer, got '" + v + "'");
}

}  // namespace detail

/// Applies one override such as `color.c1=0.02` or `train.max_epochs=20`.
inline void apply_config_override(ToolkitConfig& cfg, const std::string& key, const std::string& value) {
  using Setter = std::function<void(ToolkitConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = [] {
    std::map<std::string, Setter> m;
    const auto real = [&m](const std::string& k, auto getter) {
      m[k] = [k, getter](ToolkitConfig& c, const std::string& v) { getter(c) = detail::parse_double(k, v); };
    };
    const auto count = [&m](const std::string& k, auto getter) {
      m[k] = [k, getter](ToolkitConfig& c, const std::string& v) {
        getter(c) = static_cast<std::remove_reference_t<decltype(getter(c))>>(detail::parse_unsigned(k, v));
      };
    };
    real("color.c1", [](ToolkitConfig& c) -> double& { return c.extraction.color.c1; });
    real("color.c2", [](ToolkitConfig& c) -> double& { return c.extraction.color.c2; });
    real("color.gray_diff_threshold", [](ToolkitConfig& c) -> double& { return c.extraction.color.gray_diff_threshold; });
    real("color.saturation_floor", [](ToolkitConfig& c) -> double& { return c.extraction.color.saturation_floor; });
    real("composition.line_score_threshold",
         [](ToolkitConfig& c) -> double& { return c.extraction.composition.line_score_threshold; });
    real("composition.angle_tolerance", [](ToolkitConfig& c) -> double& { return c.extraction.composition.angle_tolerance; });
    real("composition.orientation_gate",
         [](ToolkitConfig& c) -> double& { return c.extraction.composition.orientation_gate; });
    real("composition.intersection_radius_fraction",
         [](ToolkitConfig& c) -> double& { return c.extraction.composition.intersection_radius_fraction; });
    real("composition.circle_radius_fraction",
         [](ToolkitConfig& c) -> double& { return c.extraction.composition.circle_radius_fraction; });
    real("composition.diagonal_predicate_threshold",
         [](ToolkitConfig& c) -> double& { return c.extraction.composition.diagonal_predicate_threshold; });
    real("perception.sigma_center", [](ToolkitConfig& c) -> double& { return c.extraction.perception.sigma_center; });
    real("perception.sigma_surround", [](ToolkitConfig& c) -> double& { return c.extraction.perception.sigma_surround; });
    count("perception.max_lines", [](ToolkitConfig& c) -> std::size_t& { return c.extraction.perception.max_lines; });
    count("perception.max_working_side",
          [](ToolkitConfig& c) -> std::size_t& { return c.extraction.perception.max_working_side; });
    real("train.learning_rate", [](ToolkitConfig& c) -> double& { return c.train.learning_rate; });
    real("train.beta1", [](ToolkitConfig& c) -> double& { return c.train.beta1; });
    real("train.beta2", [](ToolkitConfig& c) -> double& { return c.train.beta2; });
    real("train.weight_decay", [](ToolkitConfig& c) -> double& { return c.train.weight_decay; });
    real("train.lr_factor", [](ToolkitConfig& c) -> double& { return c.train.lr_factor; });
    real("train.lambda", [](ToolkitConfig& c) -> double& { return c.train.lambda; });
    count("train.batch_size", [](ToolkitConfig& c) -> std::size_t& { return c.train.batch_size; });
    count("train.plateau_patience", [](ToolkitConfig& c) -> int& { return c.train.plateau_patience; });
    count("train.max_epochs", [](ToolkitConfig& c) -> std::size_t& { return c.train.max_epochs; });
    count("train.hidden", [](ToolkitConfig& c) -> std::size_t& { return c.train.hidden; });
    count("train.seed", [](ToolkitConfig& c) -> std::uint64_t& { return c.train.seed; });
    m["train.standardize"] = [](ToolkitConfig& c, const std::string& v) {
      if (v == "true" || v == "1") c.train.standardize = true;
      else if (v == "false" || v == "0") c.train.standardize = false;
      else throw Error(ErrorCode::InvalidArgument, "config: 'train.standardize' expects true or false");
    };
    m["light.order"] = [](ToolkitConfig& c, const std::string& v) {
      if (v == "value_first") c.extraction.light_order = LightOrder::ValueFirst;
      else if (v == "lightness_first") c.extraction.light_order = LightOrder::LightnessFirst;
      else throw Error(ErrorCode::InvalidArgument, "config: 'light.order' expects value_first or lightness_first");
    };
    return m;
  }();
  const auto it = setters.find(key);
  if (it == setters.end()) throw Error(ErrorCode::InvalidArgument, "config: unknown key '" + key + "'");
  it->second(cfg, value);
}

/// `key = value` lines; blank lines and `#` comments are ignored.
inline void apply_config(ToolkitConfig& cfg, std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "config line " + std::to_string(line_no) + ": expected key=value");
    }
    apply_config_override(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  cfg.extraction.color.validate();
  cfg.extraction.composition.validate();
  cfg.train.validate();
}

inline ToolkitConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  ToolkitConfig cfg;
  apply_config(cfg, in);
  return cfg;
}

}  // namespace aesthetic
