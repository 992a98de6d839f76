#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "emdlot/checkpoint.hpp"
#include "emdlot/config.hpp"
#include "emdlot/dataset.hpp"
#include "emdlot/interpret.hpp"
#include "emdlot/preprocess.hpp"
#include "emdlot/synth.hpp"
#include "emdlot/trainer.hpp"

namespace fs = std::filesystem;
using namespace emdlot;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

TrainConfig load_train_config(const std::string& path) {
  return path.empty() ? TrainConfig{} : TrainConfig::from_json_file(path);
}

// Shared preprocessing for every subcommand that consumes a data directory:
// pre-default exclusion followed by imputation.
Dataset load_and_prepare(const fs::path& dir, uint64_t impute_seed,
                         int exclude_quarters = 2) {
  auto ds = load_dataset_dir(dir);
  auto excluded = exclude_pre_default(ds, exclude_quarters);
  if (excluded.dropped_samples > 0)
    std::cerr << "warning: dropped " << excluded.dropped_samples
              << " non-performing samples with <= " << exclude_quarters
              << " steps\n";
  auto imputed = impute(excluded.dataset, impute_seed);
  for (const auto& w : imputed.warnings) std::cerr << "warning: " << w << "\n";
  return imputed.dataset;
}

nlohmann::json run_result_json(const RunResult& r) {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(r.config.to_json_text());
  j["metrics"] = nlohmann::json::parse(r.report.to_json());
  j["objective"] = r.objective;
  j["valid"] = r.valid;
  j["epochs_run"] = r.epochs_run;
  j["best_epoch"] = r.best_epoch;
  j["best_val_score"] = r.best_val_score;
  if (!r.variant.empty()) j["variant"] = r.variant;
  if (!r.checkpoint_path.empty()) j["checkpoint"] = r.checkpoint_path;
  nlohmann::json comp = nlohmann::json::array();
  for (const auto& row : r.composition.counts)
    comp.push_back({row[0], row[1], row[2]});
  j["composition"] = comp;
  return j;
}

void write_explain_outputs(const fs::path& out_dir, const EvalOutput& eval,
                           const std::vector<std::string>& feature_names,
                           int clusters) {
  auto modality = modality_report(eval.records);
  nlohmann::json mj;
  mj["numeric"] = modality.numeric;
  mj["text"] = modality.text;
  mj["records"] = modality.n_records;
  mj["numeric_vs_text_pct"] = modality.format();
  write_file(out_dir / "modality.json", mj.dump(2) + "\n");

  auto chapters = chapter_report(eval.records);
  nlohmann::json cj;
  cj["notice"] = chapters.notice;
  cj["risk"] = chapters.risk;
  cj["records"] = chapters.n_records;
  cj["risk_vs_notice_pct"] = chapters.format();
  write_file(out_dir / "chapters.json", cj.dump(2) + "\n");

  auto fin = feature_heatmaps(eval.records, eval.sample_ids, eval.assignments,
                              feature_names, clusters, FeatureGroup::kFinancial);
  for (const auto& grid : fin)
    write_heatmap_csv(grid, out_dir / ("heatmap_financial_cluster" +
                                       std::to_string(grid.cluster_id) + ".csv"));
  auto macro = feature_heatmaps(eval.records, eval.sample_ids, eval.assignments,
                                feature_names, clusters, FeatureGroup::kMacro);
  if (!macro.empty() && !macro[0].rows.empty())
    write_heatmap_csv(macro[0], out_dir / "heatmap_macro_population.csv");

  auto table = composition_table(eval.assignments, eval.labels, clusters);
  write_file(out_dir / "composition.csv", table.to_csv());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EMDLOT: multimodal multi-class default prediction over "
               "irregular quarterly series"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out_dir, checkpoint_path, variant;
  std::optional<uint64_t> seed_override;
  int jobs = 1, trials = 20, n_valid = 10;

  auto add_common = [&](CLI::App* cmd, bool needs_data, bool needs_out) {
    cmd->add_option("--config", config_path, "JSON config file");
    if (needs_data)
      cmd->add_option("--data", data_dir, "data directory")->required();
    auto* out = cmd->add_option("--out", out_dir, "output directory");
    if (needs_out) out->required();
    cmd->add_option("--seed", seed_override, "seed override");
  };

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  add_common(synth_cmd, false, true);

  auto* train_cmd = app.add_subcommand("train", "train and evaluate one model");
  add_common(train_cmd, true, true);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  eval_cmd->add_option("--data", data_dir, "data directory")->required();
  eval_cmd->add_option("--out", out_dir, "output directory");

  auto* tune_cmd = app.add_subcommand("tune", "random hyperparameter search");
  add_common(tune_cmd, true, true);
  tune_cmd->add_option("--trials", trials, "number of trials");
  tune_cmd->add_option("--jobs", jobs, "parallel trial workers");

  auto* ablate_cmd = app.add_subcommand("ablate", "run one ablation variant");
  add_common(ablate_cmd, true, true);
  ablate_cmd->add_option("--variant", variant, "ABL1 | ABL2 | ABL3")->required();

  auto* explain_cmd = app.add_subcommand("explain", "interpretability reports");
  explain_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  explain_cmd->add_option("--data", data_dir, "data directory")->required();
  explain_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* runs_cmd = app.add_subcommand("runs", "repeat until N valid runs, summarize");
  add_common(runs_cmd, true, true);
  runs_cmd->add_option("--n-valid", n_valid, "valid runs to collect");
  runs_cmd->add_option("--jobs", jobs, "parallel attempt workers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!out_dir.empty()) fs::create_directories(out_dir);

    if (synth_cmd->parsed()) {
      SynthConfig cfg =
          config_path.empty() ? SynthConfig{} : SynthConfig::from_json_file(config_path);
      const uint64_t seed = seed_override.value_or(1);
      auto ds = synthesize(cfg, seed);
      save_dataset_dir(ds, out_dir);
      auto counts = ds.class_counts();
      std::cerr << "synth: " << ds.size() << " firms (performing " << counts[0]
                << ", extended " << counts[1] << ", defaulted " << counts[2]
                << ") -> " << out_dir << "\n";
      return 0;
    }

    if (train_cmd->parsed()) {
      TrainConfig cfg = load_train_config(config_path);
      if (seed_override) cfg.seed = *seed_override;
      SeededRng pipeline(cfg.seed);
      const uint64_t impute_seed = pipeline.fork_seed();
      const uint64_t run_seed = pipeline.fork_seed();
      auto ds = load_and_prepare(data_dir, impute_seed);
      auto exec = run_once(cfg, ds, run_seed);
      const fs::path ckpt = fs::path(out_dir) / "best.ckpt";
      save_checkpoint(ckpt, exec.model, exec.result.config);
      exec.result.checkpoint_path = ckpt.string();
      write_file(fs::path(out_dir) / "metrics.json", exec.result.report.to_json() + "\n");
      write_file(fs::path(out_dir) / "run_result.json",
                 run_result_json(exec.result).dump(2) + "\n");
      std::cerr << "train: macro recall " << exec.result.report.recall
                << ", objective " << exec.result.objective << ", epochs "
                << exec.result.epochs_run << (exec.result.valid ? "" : " [invalid run]")
                << " -> " << out_dir << "\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      auto ck = load_checkpoint(checkpoint_path);
      SeededRng pipeline(ck.config.seed);
      const uint64_t impute_seed = pipeline.fork_seed();
      auto ds = load_and_prepare(data_dir, impute_seed);
      auto eval = evaluate_full(ck.model, ds);
      if (!out_dir.empty())
        write_file(fs::path(out_dir) / "metrics.json", eval.report.to_json() + "\n");
      std::cerr << "eval: macro recall " << eval.report.recall << ", composite "
                << composite_score(eval.report) << " on " << ds.size() << " samples\n";
      return 0;
    }

    if (tune_cmd->parsed()) {
      TrainConfig base = load_train_config(config_path);
      const uint64_t seed = seed_override.value_or(base.seed);
      SeededRng pipeline(seed);
      const uint64_t impute_seed = pipeline.fork_seed();
      const uint64_t tune_seed = pipeline.fork_seed();
      auto ds = load_and_prepare(data_dir, impute_seed);
      auto result = tune(SearchSpace{}, trials, ds, tune_seed, base, jobs);
      std::string log;
      for (const auto& t : result.trials) {
        nlohmann::json j;
        j["trial"] = t.trial;
        j["config"] = nlohmann::json::parse(t.config.to_json_text());
        j["objective"] = t.objective;
        j["valid"] = t.valid;
        j["epochs"] = t.epochs;
        log += j.dump() + "\n";
      }
      write_file(fs::path(out_dir) / "trials.jsonl", log);
      write_file(fs::path(out_dir) / "best_config.json",
                 result.best_config.to_json_text() + "\n");
      if (!result.any_valid)
        std::cerr << "warning: no trial predicted all three classes; best "
                     "config chosen by penalty score\n";
      std::cerr << "tune: best objective " << result.best_objective << " (trial "
                << result.best_trial << ") -> " << out_dir << "\n";
      return 0;
    }

    if (ablate_cmd->parsed()) {
      TrainConfig cfg = load_train_config(config_path);
      if (seed_override) cfg.seed = *seed_override;
      SeededRng pipeline(cfg.seed);
      const uint64_t impute_seed = pipeline.fork_seed();
      const uint64_t run_seed = pipeline.fork_seed();
      auto ds = load_and_prepare(data_dir, impute_seed);
      auto exec = ablate(parse_ablation_variant(variant), cfg, ds, run_seed);
      const fs::path ckpt = fs::path(out_dir) / (variant + ".ckpt");
      save_checkpoint(ckpt, exec.model, exec.result.config);
      exec.result.checkpoint_path = ckpt.string();
      write_file(fs::path(out_dir) / "run_result.json",
                 run_result_json(exec.result).dump(2) + "\n");
      std::cerr << "ablate " << variant << ": macro recall "
                << exec.result.report.recall << ", objective "
                << exec.result.objective << " -> " << out_dir << "\n";
      return 0;
    }

    if (explain_cmd->parsed()) {
      auto ck = load_checkpoint(checkpoint_path);
      SeededRng pipeline(ck.config.seed);
      const uint64_t impute_seed = pipeline.fork_seed();
      auto ds = load_and_prepare(data_dir, impute_seed);
      auto eval = evaluate_full(ck.model, ds, true);
      write_explain_outputs(out_dir, eval, ck.model.config().feature_names,
                            ck.model.config().clusters);
      std::cerr << "explain: modality numeric/text "
                << modality_report(eval.records).format() << " -> " << out_dir << "\n";
      return 0;
    }

    if (runs_cmd->parsed()) {
      TrainConfig cfg = load_train_config(config_path);
      if (seed_override) cfg.seed = *seed_override;
      SeededRng pipeline(cfg.seed);
      const uint64_t impute_seed = pipeline.fork_seed();
      cfg.seed = pipeline.fork_seed();
      auto ds = load_and_prepare(data_dir, impute_seed);
      auto summary = repeated_runs(cfg, ds, n_valid, jobs);
      nlohmann::json j;
      auto stats = [](const MetricStats& s) {
        return nlohmann::json{{"mean", s.mean}, {"sd", s.sd}};
      };
      j["recall"] = stats(summary.recall);
      j["f1"] = stats(summary.f1);
      j["map"] = stats(summary.map);
      j["auc"] = stats(summary.auc);
      j["objective"] = stats(summary.objective);
      j["attempts"] = summary.attempts;
      j["valid_runs"] = summary.valid_runs;
      j["reached_target"] = summary.reached_target;
      j["seeds"] = summary.seeds;
      write_file(fs::path(out_dir) / "runs_summary.json", j.dump(2) + "\n");
      if (!summary.reached_target)
        std::cerr << "warning: attempt cap reached with only " << summary.valid_runs
                  << " valid runs\n";
      std::cerr << "runs: recall " << summary.recall.mean << " (sd "
                << summary.recall.sd << ") over " << summary.valid_runs
                << " valid runs / " << summary.attempts << " attempts -> " << out_dir
                << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
