#pragma once

#include <array>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "aesthetic/color.hpp"
#include "aesthetic/composition.hpp"
#include "aesthetic/light.hpp"
#include "aesthetic/perception.hpp"

namespace aesthetic {

inline constexpr std::size_t kLightCount = 4;
inline constexpr std::size_t kColorCount = 7;
inline constexpr std::size_t kCompositionCount = 10;
inline constexpr std::size_t kFeatureCount = kLightCount + kColorCount + kCompositionCount;

/// The 21 hand-engineered attribute features of one image.
struct FeatureBundle {
  LightFeatures light;
  ColorFeatures color;
  CompositionFeatures composition;

  std::array<double, kFeatureCount> values() const {
    std::array<double, kFeatureCount> out{};
    const auto l = light.values();
    const auto c = color.values();
    const auto k = composition.values();
    std::copy(l.begin(), l.end(), out.begin());
    std::copy(c.begin(), c.end(), out.begin() + kLightCount);
    std::copy(k.begin(), k.end(), out.begin() + kLightCount + kColorCount);
    return out;
  }

  static FeatureBundle from_values(const std::array<double, kFeatureCount>& v) {
    FeatureBundle b;
    b.light = {v[0], v[1], v[2], v[3]};
    b.color = {v[4], v[5], v[6], v[7], v[8], v[9], v[10]};
    b.composition = {v[11], v[12], v[13], v[14], v[15], v[16], v[17], v[18], v[19], v[20]};
    return b;
  }
};

struct ExtractionConfig {
  LightOrder light_order{LightOrder::ValueFirst};
  ColorFeatureConfig color;
  CompositionConfig composition;
  PerceptionConfig perception;
};

inline FeatureBundle extract_features(const Raster& image, const PerceptionBundle& perception,
                                      const ExtractionConfig& cfg = {}) {
  return {extract_light_features(image, cfg.light_order), extract_color_features(image, cfg.color),
          extract_composition_features(image, perception, cfg.composition)};
}

// ---------------------------------------------------------------------------
// Feature CSV: id, 21 features with 6 decimals, perception provenance.

struct FeatureRow {
  std::string id;
  FeatureBundle features;
  PerceptionSource perception{PerceptionSource::Fallback};
};

inline std::string feature_csv_header() {
  std::string h = "id";
  for (std::size_t i = 1; i <= kLightCount; ++i) h += ",light_f" + std::to_string(i);
  for (std::size_t i = 1; i <= kColorCount; ++i) h += ",color_f" + std::to_string(i);
  for (std::size_t i = 1; i <= kCompositionCount; ++i) h += ",comp_f" + std::to_string(i);
  return h + ",perception";
}

inline std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  // Negative zero prints as 0.
  if (std::string_view(buf) == "-0.000000") return "0.000000";
  return buf;
}

inline std::string format_feature_row(const FeatureRow& row) {
  std::string line = row.id;
  for (double v : row.features.values()) line += "," + format_fixed6(v);
  line += row.perception == PerceptionSource::Sidecar ? ",sidecar" : ",fallback";
  return line;
}

inline void write_feature_csv(std::ostream& out, const std::vector<FeatureRow>& rows) {
  out << feature_csv_header() << '\n';
  for (const auto& r : rows) out << format_feature_row(r) << '\n';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline std::vector<FeatureRow> read_feature_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "feature CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != feature_csv_header()) throw Error(ErrorCode::ParseError, "unexpected feature CSV header");
  std::vector<FeatureRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != kFeatureCount + 2) {
      throw Error(ErrorCode::ParseError, "feature CSV line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(kFeatureCount + 2) + " columns");
    }
    std::array<double, kFeatureCount> v{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      try {
        std::size_t used = 0;
        v[i] = std::stod(cells[i + 1], &used);
        if (used != cells[i + 1].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "feature CSV line " + std::to_string(line_no) + ": bad number");
      }
    }
    FeatureRow row{cells[0], FeatureBundle::from_values(v), PerceptionSource::Fallback};
    if (cells.back() == "sidecar") row.perception = PerceptionSource::Sidecar;
    else if (cells.back() != "fallback") {
      throw Error(ErrorCode::ParseError, "feature CSV line " + std::to_string(line_no) + ": bad perception flag");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace aesthetic
