#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "aesthetic/error.hpp"
#include "aesthetic/rng.hpp"

namespace aesthetic {

enum class Label { Overall, Light, Color, Composition };

inline constexpr std::array<Label, 4> kAllLabels = {Label::Overall, Label::Light, Label::Color, Label::Composition};

inline std::string_view label_name(Label label) {
  switch (label) {
    case Label::Overall: return "overall";
    case Label::Light: return "light";
    case Label::Color: return "color";
    case Label::Composition: return "composition";
  }
  return "";
}

inline Label parse_label(std::string_view name) {
  for (Label l : kAllLabels) {
    if (label_name(l) == name) return l;
  }
  throw Error(ErrorCode::NoSuchLabel, "unknown label '" + std::string(name) + "'");
}

enum class Split { Train, Val, Test };

inline std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "";
}

struct ScoreSet {
  std::optional<double> overall;
  std::optional<double> light;
  std::optional<double> color;
  std::optional<double> composition;

  std::optional<double> get(Label l) const {
    switch (l) {
      case Label::Overall: return overall;
      case Label::Light: return light;
      case Label::Color: return color;
      case Label::Composition: return composition;
    }
    return std::nullopt;
  }
};

struct ManifestRecord {
  std::string id;
  std::string path;
  ScoreSet scores;
  std::optional<Split> split;
};

struct LabelStats {
  double mean{0.0};
  double stddev{0.0};
  std::size_t count{0};
};

namespace detail {

inline std::string row_prefix(std::size_t line_no) { return "row " + std::to_string(line_no) + ": "; }

inline ManifestRecord parse_manifest_row(const std::string& text, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, row_prefix(line_no) + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, row_prefix(line_no) + "expected a JSON object");
  const auto string_field = [&](const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
      throw Error(ErrorCode::ParseError, row_prefix(line_no) + "missing string field '" + key + "'");
    }
    return it->get<std::string>();
  };
  ManifestRecord rec;
  rec.id = string_field("id");
  rec.path = string_field("path");
  if (rec.id.empty()) throw Error(ErrorCode::ParseError, row_prefix(line_no) + "empty id");

  if (const auto it = j.find("scores"); it != j.end()) {
    if (!it->is_object()) throw Error(ErrorCode::ParseError, row_prefix(line_no) + "'scores' must be an object");
    for (const auto& [key, value] : it->items()) {
      Label label;
      try {
        label = parse_label(key);
      } catch (const Error&) {
        throw Error(ErrorCode::ParseError, row_prefix(line_no) + "unknown score '" + key + "'");
      }
      if (value.is_null()) continue;
      if (!value.is_number()) {
        throw Error(ErrorCode::ParseError, row_prefix(line_no) + "score '" + key + "' is not a number");
      }
      const double v = value.get<double>();
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::ScoreOutOfRange,
                    row_prefix(line_no) + "id '" + rec.id + "' score '" + key + "' = " + std::to_string(v) +
                        " outside [0,1]");
      }
      switch (label) {
        case Label::Overall: rec.scores.overall = v; break;
        case Label::Light: rec.scores.light = v; break;
        case Label::Color: rec.scores.color = v; break;
        case Label::Composition: rec.scores.composition = v; break;
      }
    }
  }
  if (const auto it = j.find("split"); it != j.end() && !it->is_null()) {
    const std::string s = it->is_string() ? it->get<std::string>() : std::string();
    if (s == "train") rec.split = Split::Train;
    else if (s == "val") rec.split = Split::Val;
    else if (s == "test") rec.split = Split::Test;
    else throw Error(ErrorCode::ParseError, row_prefix(line_no) + "split must be train, val or test");
  }
  return rec;
}

}  // namespace detail

inline std::vector<ManifestRecord> parse_manifest(std::istream& in) {
  std::vector<ManifestRecord> records;
  std::set<std::string> seen;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    ManifestRecord rec = detail::parse_manifest_row(text, line_no);
    if (!seen.insert(rec.id).second) {
      throw Error(ErrorCode::DuplicateId, detail::row_prefix(line_no) + "duplicate id '" + rec.id + "'");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open manifest " + path.string());
  return parse_manifest(in);
}

inline nlohmann::json to_json(const ManifestRecord& rec) {
  nlohmann::json j;
  j["id"] = rec.id;
  j["path"] = rec.path;
  nlohmann::json scores = nlohmann::json::object();
  for (Label l : kAllLabels) {
    if (const auto v = rec.scores.get(l)) scores[std::string(label_name(l))] = *v;
  }
  j["scores"] = scores;
  if (rec.split) j["split"] = std::string(split_name(*rec.split));
  return j;
}

inline void write_manifest(std::ostream& out, const std::vector<ManifestRecord>& records) {
  for (const auto& rec : records) out << to_json(rec).dump() << '\n';
}

/// Mean and population standard deviation over records carrying the label.
inline LabelStats label_stats(const std::vector<ManifestRecord>& records, Label label) {
  std::vector<double> v;
  for (const auto& r : records) {
    if (const auto s = r.scores.get(label)) v.push_back(*s);
  }
  if (v.empty()) {
    throw Error(ErrorCode::NoSuchLabel, "no record carries label '" + std::string(label_name(label)) + "'");
  }
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / static_cast<double>(v.size())), v.size()};
}

/// Coarse class floor(10 * score), with 1.0 folded into class 9.
inline int ten_bin_class(double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error(ErrorCode::ScoreOutOfRange, "score " + std::to_string(score) + " outside [0,1]");
  }
  return std::min(9, static_cast<int>(std::floor(score * 10.0)));
}

struct SplitRatios {
  double train{8.0};
  double val{1.0};
  double test{1.0};
};

inline SplitRatios parse_ratios(std::string_view text) {
  std::array<double, 3> parts{};
  std::size_t start = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t end = i < 2 ? text.find(':', start) : text.size();
    if (end == std::string_view::npos) throw Error(ErrorCode::InvalidArgument, "ratios must look like 8:1:1");
    try {
      std::size_t used = 0;
      const std::string piece(text.substr(start, end - start));
      parts[i] = std::stod(piece, &used);
      if (used != piece.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "ratios must look like 8:1:1");
    }
    start = end + 1;
  }
  if (!(parts[0] > 0 && parts[1] > 0 && parts[2] > 0)) throw Error(ErrorCode::InvalidArgument, "ratios must be positive");
  return {parts[0], parts[1], parts[2]};
}

/// Seeded shuffle then contiguous train/val/test blocks. val and test get
/// floor(N * r / sum) rows, train takes the remainder. Records that already
/// carry a split keep it unless `force`; only the rest are assigned.
inline std::vector<ManifestRecord> split(std::vector<ManifestRecord> records, const SplitRatios& ratios,
                                         std::uint64_t seed, bool force = false) {
  if (!(ratios.train > 0 && ratios.val > 0 && ratios.test > 0)) {
    throw Error(ErrorCode::InvalidArgument, "ratios must be positive");
  }
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (force || !records[i].split) open.push_back(i);
  }
  Rng rng(seed);
  rng.shuffle(open);
  const double total = ratios.train + ratios.val + ratios.test;
  const auto n = static_cast<double>(open.size());
  const auto n_val = static_cast<std::size_t>(std::floor(n * ratios.val / total));
  const auto n_test = static_cast<std::size_t>(std::floor(n * ratios.test / total));
  const std::size_t n_train = open.size() - n_val - n_test;
  for (std::size_t k = 0; k < open.size(); ++k) {
    Split s = k < n_train ? Split::Train : (k < n_train + n_val ? Split::Val : Split::Test);
    records[open[k]].split = s;
  }
  return records;
}

}  // namespace aesthetic
