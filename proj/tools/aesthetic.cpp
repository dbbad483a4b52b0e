// aesthetic: batch feature extraction, dataset handling, training and
// evaluation for attribute-level image aesthetics.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "aesthetic/aesthetic.hpp"

namespace fs = std::filesystem;
using namespace aesthetic;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPartial = 2;
constexpr int kExitFatal = 3;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::NoSuchLabel:
    case ErrorCode::EmptySelection:
      return kExitUsage;
    default:
      return kExitFatal;
  }
}

void emit(const std::optional<fs::path>& out, const std::string& text) {
  if (out) write_text_file(*out, text);
  else std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attribute-level image aesthetics toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key=value file overriding default parameters")->check(CLI::ExistingFile);

  // extract
  auto* extract = app.add_subcommand("extract", "Compute the 21 attribute features for every manifest record");
  std::string ex_manifest, ex_out, ex_detections;
  std::size_t ex_workers = 1;
  extract->add_option("manifest", ex_manifest, "JSONL manifest")->required();
  extract->add_option("-o,--out", ex_out, "feature CSV to write")->required();
  extract->add_option("--detections", ex_detections, "perception sidecar JSON");
  extract->add_option("--workers", ex_workers, "extraction threads")->check(CLI::PositiveNumber);

  // stats
  auto* stats = app.add_subcommand("stats", "Per-label mean and standard deviation");
  std::string st_manifest, st_out;
  stats->add_option("manifest", st_manifest)->required();
  stats->add_option("-o,--out", st_out, "also write the table as CSV");

  // split
  auto* split_cmd = app.add_subcommand("split", "Assign train/val/test splits");
  std::string sp_manifest, sp_out, sp_ratios = "8:1:1";
  std::uint64_t sp_seed = 0;
  bool sp_force = false;
  split_cmd->add_option("manifest", sp_manifest)->required();
  split_cmd->add_option("--ratios", sp_ratios, "train:val:test");
  split_cmd->add_option("--seed", sp_seed);
  split_cmd->add_option("-o,--out", sp_out, "manifest to write (stdout if omitted)");
  split_cmd->add_flag("--force", sp_force, "reassign records that already carry a split");

  // eval
  auto* eval = app.add_subcommand("eval", "Score predictions against manifest truths");
  std::string ev_pred, ev_manifest, ev_attr = "overall", ev_out;
  eval->add_option("predictions", ev_pred, "CSV with header id,score")->required();
  eval->add_option("manifest", ev_manifest)->required();
  eval->add_option("--attribute", ev_attr, "overall, light, color or composition");
  eval->add_option("-o,--out", ev_out, "JSON report to write");

  // eca-k
  auto* eca = app.add_subcommand("eca-k", "Adaptive ECA kernel size for a channel count");
  std::size_t eca_channels = 0;
  eca->add_option("--channels", eca_channels)->required()->check(CLI::PositiveNumber);

  // train
  auto* train_cmd = app.add_subcommand("train", "Fit a regression head on extracted features");
  std::string tr_features, tr_manifest, tr_attr = "overall", tr_segments = "light,color,composition", tr_embeddings,
                                        tr_out = "head.txt", tr_trace = "trace.csv";
  train_cmd->add_option("features", tr_features, "feature CSV")->required();
  train_cmd->add_option("manifest", tr_manifest)->required();
  train_cmd->add_option("--attribute", tr_attr);
  train_cmd->add_option("--segments", tr_segments, "comma list of light,color,composition");
  train_cmd->add_option("--embeddings", tr_embeddings, "JSONL with learned vectors and teacher logits");
  train_cmd->add_option("-o,--out", tr_out, "checkpoint to write");
  train_cmd->add_option("--trace", tr_trace, "per-epoch loss CSV to write");

  // predict
  auto* predict = app.add_subcommand("predict", "Apply a trained head to a feature CSV");
  std::string pr_head, pr_features, pr_out, pr_embeddings;
  predict->add_option("head", pr_head, "checkpoint")->required();
  predict->add_option("features", pr_features, "feature CSV")->required();
  predict->add_option("-o,--out", pr_out, "prediction CSV (stdout if omitted)");
  predict->add_option("--embeddings", pr_embeddings);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  const auto opt_path = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<fs::path>(s); };

  try {
    ToolkitConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);

    if (*extract) {
      ExtractOptions opt{ex_manifest, ex_out, opt_path(ex_detections), ex_workers, cfg.extraction};
      const ExtractReport report = run_extract(opt);
      for (const auto& f : report.failures) std::cerr << "failed: " << f.id << ": " << f.message << '\n';
      std::cerr << report.rows.size() << " rows written to " << ex_out << '\n';
      return report.failures.empty() ? kExitOk : kExitPartial;
    }
    if (*stats) {
      const StatsReport report = run_stats(load_manifest(st_manifest));
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << format_stats_table(report);
      if (!st_out.empty()) write_text_file(st_out, format_stats_csv(report));
      return kExitOk;
    }
    if (*split_cmd) {
      emit(opt_path(sp_out), run_split(sp_manifest, parse_ratios(sp_ratios), sp_seed, sp_force));
      return kExitOk;
    }
    if (*eval) {
      const Label label = parse_label(ev_attr);
      std::ifstream in = open_input(ev_pred, "predictions");
      const auto pairs = align_predictions(read_predictions(in), load_manifest(ev_manifest), label);
      const MetricsReport report = evaluate(pairs);
      std::cout << format_report_table(report, label);
      const std::string json = report_json(report, label).dump(2) + "\n";
      if (!ev_out.empty()) write_text_file(ev_out, json);
      else std::cout << json;
      return kExitOk;
    }
    if (*eca) {
      std::cout << eca_kernel_size(eca_channels) << '\n';
      return kExitOk;
    }
    if (*train_cmd) {
      TrainOptions opt{tr_features, tr_manifest, parse_label(tr_attr), parse_segments(tr_segments),
                       opt_path(tr_embeddings), tr_out, tr_trace, cfg.train};
      const TrainSummary s = run_train(opt);
      const auto& last = s.result.trace.back();
      std::cerr << "trained on " << s.train_size << " rows (" << s.val_size << " val), " << s.result.trace.size()
                << " epochs, final loss " << last.train_loss << '\n';
      return kExitOk;
    }
    if (*predict) {
      const RegressorHead head = load_head_file(pr_head);
      std::map<std::string, EmbeddingEntry> emb;
      if (!pr_embeddings.empty()) emb = load_embeddings(pr_embeddings);
      const auto preds = run_predict(head, load_feature_csv(pr_features), pr_embeddings.empty() ? nullptr : &emb);
      emit(opt_path(pr_out), format_predictions(preds));
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFatal;
  }
  return kExitUsage;
}
