#pragma once

// Batch operations behind the command-line tool. Each takes parsed options,
// reads and writes files, and reports through return values or Error.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "aesthetic/config.hpp"
#include "aesthetic/dataset.hpp"
#include "aesthetic/features.hpp"
#include "aesthetic/fusion.hpp"
#include "aesthetic/metrics.hpp"
#include "aesthetic/netnum.hpp"

namespace aesthetic {

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

inline std::ifstream open_input(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, std::string("cannot open ") + what + " " + path.string());
  return in;
}

// ---------------------------------------------------------------------------
// extract

struct ExtractOptions {
  std::filesystem::path manifest;
  std::filesystem::path out;
  std::optional<std::filesystem::path> detections;
  std::size_t workers{1};
  ExtractionConfig config;
};

struct ExtractFailure {
  std::string id;
  std::string message;
};

struct ExtractReport {
  std::vector<FeatureRow> rows;  // sorted by id
  std::vector<ExtractFailure> failures;
};

/// Features for one image; perception comes from the sidecar when it has an
/// entry for the id, from the fallback detectors otherwise.
inline FeatureRow extract_row(const std::string& id, const Raster& image, const Sidecar* sidecar,
                              const ExtractionConfig& cfg) {
  const PerceptionBundle perception = sidecar != nullptr && sidecar->contains(id)
                                          ? sidecar->bundle(id, image, cfg.perception)
                                          : fallback_perception(image, cfg.perception);
  return {id, extract_features(image, perception, cfg), perception.source};
}

inline ExtractReport run_extract(const ExtractOptions& opt) {
  const std::vector<ManifestRecord> records = load_manifest(opt.manifest);
  std::optional<Sidecar> sidecar;
  if (opt.detections) sidecar = Sidecar::load(*opt.detections);
  const std::filesystem::path base = opt.manifest.parent_path();

  std::vector<std::optional<FeatureRow>> slots(records.size());
  std::vector<std::optional<std::string>> errors(records.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      const ManifestRecord& rec = records[i];
      try {
        const std::filesystem::path rel(rec.path);
        const std::filesystem::path p = rel.is_absolute() ? rel : base / rel;
        const Raster image = load_image(p);
        slots[i] = extract_row(rec.id, image, sidecar ? &*sidecar : nullptr, opt.config);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(opt.workers, records.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  ExtractReport report;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (slots[i]) report.rows.push_back(std::move(*slots[i]));
    if (errors[i]) report.failures.push_back({records[i].id, *errors[i]});
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const FeatureRow& a, const FeatureRow& b) { return a.id < b.id; });
  std::sort(report.failures.begin(), report.failures.end(),
            [](const ExtractFailure& a, const ExtractFailure& b) { return a.id < b.id; });

  std::ostringstream csv;
  write_feature_csv(csv, report.rows);
  write_text_file(opt.out, csv.str());
  return report;
}

inline std::vector<FeatureRow> load_feature_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path, "feature CSV");
  return read_feature_csv(in);
}

// ---------------------------------------------------------------------------
// stats

struct StatsRow {
  Label label;
  LabelStats stats;
};

struct StatsReport {
  std::vector<StatsRow> rows;
  std::vector<std::string> warnings;
};

inline StatsReport run_stats(const std::vector<ManifestRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "manifest has no records");
  StatsReport report;
  for (Label l : kAllLabels) {
    try {
      report.rows.push_back({l, label_stats(records, l)});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoSuchLabel) throw;
      report.warnings.push_back("label '" + std::string(label_name(l)) + "' absent from every record; omitted");
    }
  }
  return report;
}

inline std::string format_stats_table(const StatsReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "label" << std::right << std::setw(8) << "count" << std::setw(12) << "mean"
      << std::setw(12) << "std" << '\n';
  for (const auto& r : report.rows) {
    out << std::left << std::setw(12) << label_name(r.label) << std::right << std::setw(8) << r.stats.count
        << std::setw(12) << format_fixed6(r.stats.mean) << std::setw(12) << format_fixed6(r.stats.stddev) << '\n';
  }
  return out.str();
}

inline std::string format_stats_csv(const StatsReport& report) {
  std::string out = "label,count,mean,std\n";
  for (const auto& r : report.rows) {
    out += std::string(label_name(r.label)) + "," + std::to_string(r.stats.count) + "," + format_fixed6(r.stats.mean) +
           "," + format_fixed6(r.stats.stddev) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// split

inline std::string run_split(const std::filesystem::path& manifest, const SplitRatios& ratios, std::uint64_t seed,
                             bool force) {
  const auto records = split(load_manifest(manifest), ratios, seed, force);
  std::ostringstream out;
  write_manifest(out, records);
  return out.str();
}

// ---------------------------------------------------------------------------
// predictions CSV: id,score with scores on the dataset's [0,1] scale

struct Prediction {
  std::string id;
  double score{0.0};
};

inline std::string format_predictions(std::vector<Prediction> preds) {
  std::sort(preds.begin(), preds.end(), [](const Prediction& a, const Prediction& b) { return a.id < b.id; });
  std::string out = "id,score\n";
  for (const auto& p : preds) out += p.id + "," + format_fixed6(p.score) + "\n";
  return out;
}

inline std::vector<Prediction> read_predictions(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "prediction CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "id,score") throw Error(ErrorCode::ParseError, "prediction CSV header must be 'id,score'");
  std::vector<Prediction> preds;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 2) throw Error(ErrorCode::ParseError, "prediction CSV line " + std::to_string(line_no));
    try {
      std::size_t used = 0;
      const double v = std::stod(cells[1], &used);
      if (used != cells[1].size()) throw std::invalid_argument("trailing");
      preds.push_back({cells[0], v});
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "prediction CSV line " + std::to_string(line_no) + ": bad score");
    }
  }
  return preds;
}

// ---------------------------------------------------------------------------
// eval

/// Pairs predictions with manifest truths for `label`, both moved to the
/// 10-point scale.
inline std::vector<PredictionPair> align_predictions(const std::vector<Prediction>& preds,
                                                     const std::vector<ManifestRecord>& records, Label label) {
  if (preds.empty()) throw Error(ErrorCode::EmptyIntersection, "no predictions to evaluate");
  std::map<std::string, const ManifestRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;
  std::vector<PredictionPair> pairs;
  for (const auto& p : preds) {
    const auto it = by_id.find(p.id);
    if (it == by_id.end()) throw Error(ErrorCode::MissingTruth, "prediction id '" + p.id + "' is not in the manifest");
    const auto truth = it->second->scores.get(label);
    if (!truth) {
      throw Error(ErrorCode::MissingTruth,
                  "record '" + p.id + "' has no '" + std::string(label_name(label)) + "' score");
    }
    pairs.push_back({10.0 * p.score, 10.0 * *truth});
  }
  return pairs;
}

inline nlohmann::json report_json(const MetricsReport& r, Label label) {
  return {{"attribute", std::string(label_name(label))}, {"n", r.n}, {"mse", r.mse}, {"srocc", r.srocc},
          {"accuracy", r.accuracy}, {"accuracy_within_1", r.accuracy_within_1}};
}

inline std::string format_report_table(const MetricsReport& r, Label label) {
  std::ostringstream out;
  out << std::left << std::setw(14) << "attribute" << std::right << std::setw(6) << "n" << std::setw(12) << "MSE"
      << std::setw(10) << "SROCC" << std::setw(10) << "Acc" << std::setw(12) << "Acc|e|<=1" << '\n';
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-14s%6zu%12.6f%10.4f%9.2f%%%11.2f%%\n", std::string(label_name(label)).c_str(), r.n,
                r.mse, r.srocc, 100.0 * r.accuracy, 100.0 * r.accuracy_within_1);
  out << buf;
  return out.str();
}

// ---------------------------------------------------------------------------
// train / predict

struct EmbeddingEntry {
  std::vector<double> learned;
  std::vector<double> teacher;
};

/// JSON lines: {"id": str, "learned"?: [float...], "teacher"?: [float...]}.
inline std::map<std::string, EmbeddingEntry> load_embeddings(const std::filesystem::path& path) {
  std::ifstream in = open_input(path, "embeddings");
  std::map<std::string, EmbeddingEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EmbeddingEntry e;
      if (j.contains("learned")) e.learned = j.at("learned").get<std::vector<double>>();
      if (j.contains("teacher")) e.teacher = j.at("teacher").get<std::vector<double>>();
      const std::string id = j.at("id").get<std::string>();
      if (!out.emplace(id, std::move(e)).second) {
        throw Error(ErrorCode::DuplicateId, "embeddings line " + std::to_string(line_no) + ": duplicate id '" + id + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, "embeddings line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline SegmentSelection parse_segments(const std::string& text) {
  SegmentSelection s{false, false, false};
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    if (part == "light") s.light = true;
    else if (part == "color") s.color = true;
    else if (part == "composition") s.composition = true;
    else throw Error(ErrorCode::InvalidArgument, "unknown feature segment '" + part + "'");
  }
  return s;
}

inline SegmentSelection selection_from_layout(const std::vector<LayoutSegment>& layout, bool& wants_learned) {
  SegmentSelection s{false, false, false};
  wants_learned = false;
  for (const auto& seg : layout) {
    if (seg.name == "light") s.light = true;
    else if (seg.name == "color") s.color = true;
    else if (seg.name == "composition") s.composition = true;
    else if (seg.name == "learned") wants_learned = true;
  }
  return s;
}

struct TrainOptions {
  std::filesystem::path features;
  std::filesystem::path manifest;
  Label attribute{Label::Overall};
  SegmentSelection segments;
  std::optional<std::filesystem::path> embeddings;
  std::filesystem::path checkpoint;
  std::filesystem::path trace;
  TrainConfig config;
};

struct TrainSummary {
  std::size_t train_size{0};
  std::size_t val_size{0};
  TrainResult result;
};

inline std::string format_trace_csv(const std::vector<EpochRecord>& trace) {
  std::string out = "epoch,learning_rate,train_loss,val_mse,lr_reduced\n";
  char buf[160];
  for (const auto& r : trace) {
    if (std::isnan(r.val_mse)) {
      std::snprintf(buf, sizeof(buf), "%zu,%.6e,%.6e,,%d\n", r.epoch, r.learning_rate, r.train_loss, r.lr_reduced ? 1 : 0);
    } else {
      std::snprintf(buf, sizeof(buf), "%zu,%.6e,%.6e,%.6e,%d\n", r.epoch, r.learning_rate, r.train_loss, r.val_mse,
                    r.lr_reduced ? 1 : 0);
    }
    out += buf;
  }
  return out;
}

/// Trains on manifest records in the train split (or without a split) and
/// monitors those in the val split. Rows lacking the attribute are skipped.
inline TrainSummary run_train(const TrainOptions& opt) {
  const auto rows = load_feature_csv(opt.features);
  const auto records = load_manifest(opt.manifest);
  std::map<std::string, const ManifestRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;
  std::map<std::string, EmbeddingEntry> embeddings;
  if (opt.embeddings) embeddings = load_embeddings(*opt.embeddings);

  std::vector<TrainingSample> train_set, val_set;
  std::vector<LayoutSegment> layout;
  for (const auto& row : rows) {
    const auto it = by_id.find(row.id);
    if (it == by_id.end()) continue;
    const auto target = it->second->scores.get(opt.attribute);
    if (!target) continue;
    const auto split_tag = it->second->split;
    if (split_tag == Split::Test) continue;
    std::vector<double> learned, teacher;
    if (opt.embeddings) {
      const auto e = embeddings.find(row.id);
      if (e == embeddings.end()) throw Error(ErrorCode::MissingEntry, "no embedding for '" + row.id + "'");
      learned = e->second.learned;
      teacher = e->second.teacher;
    }
    FusedVector fused = fuse(row.features, opt.segments, learned);
    if (layout.empty()) layout = fused.layout;
    if (fused.layout != layout) throw Error(ErrorCode::DimensionMismatch, "embedding lengths differ between rows");
    TrainingSample s{std::move(fused.values), *target, std::move(teacher)};
    (split_tag == Split::Val ? val_set : train_set).push_back(std::move(s));
  }
  if (train_set.empty()) throw Error(ErrorCode::EmptyDataset, "no training rows after joining features and manifest");

  RegressorHead head =
      RegressorHead::create(train_set.front().features.size(), opt.config.hidden, opt.config.seed, layout);
  TrainSummary summary{train_set.size(), val_set.size(), train(std::move(head), train_set, val_set, opt.config)};

  std::ostringstream ckpt;
  save_head(ckpt, summary.result.head);
  write_text_file(opt.checkpoint, ckpt.str());
  write_text_file(opt.trace, format_trace_csv(summary.result.trace));
  return summary;
}

inline RegressorHead load_head_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path, "checkpoint");
  return load_head(in);
}

inline std::vector<Prediction> run_predict(const RegressorHead& head, const std::vector<FeatureRow>& rows,
                                           const std::map<std::string, EmbeddingEntry>* embeddings = nullptr) {
  bool wants_learned = false;
  const SegmentSelection select = selection_from_layout(head.layout, wants_learned);
  if (head.layout.empty()) throw Error(ErrorCode::ParseError, "checkpoint carries no feature layout");
  std::vector<Prediction> preds;
  for (const auto& row : rows) {
    std::vector<double> learned;
    if (wants_learned) {
      const auto e = embeddings != nullptr ? embeddings->find(row.id) : decltype(embeddings->end()){};
      if (embeddings == nullptr || e == embeddings->end()) {
        throw Error(ErrorCode::MissingEntry, "no learned embedding for '" + row.id + "'");
      }
      learned = e->second.learned;
    }
    const FusedVector x = fuse(row.features, select, learned);
    preds.push_back({row.id, forward(head, x)});
  }
  std::sort(preds.begin(), preds.end(), [](const Prediction& a, const Prediction& b) { return a.id < b.id; });
  return preds;
}

}  // namespace aesthetic
