#ifndef EMDLOT_TRAINER_HPP
#define EMDLOT_TRAINER_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "emdlot/config.hpp"
#include "emdlot/dataset.hpp"
#include "emdlot/interpret.hpp"
#include "emdlot/metrics.hpp"
#include "emdlot/model.hpp"
#include "emdlot/preprocess.hpp"

namespace emdlot {

// Tracks the best validation score; stop once `patience` consecutive epochs
// pass without improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);
  // Feed one epoch's score (epochs are 1-based); returns true to stop.
  bool update(int epoch, double score);
  int best_epoch() const { return best_epoch_; }
  double best_score() const { return best_score_; }

 private:
  int patience_;
  int best_epoch_ = 0;
  double best_score_;
};

struct TrainHooks {
  // Test seam: replaces the composite validation score when set.
  std::function<double(int epoch, EmdlotModel& model)> validation_score;
  std::function<void(int epoch, double train_loss, double val_score)> on_epoch;
};

struct TrainOutcome {
  EmdlotModel model;  // best-epoch parameters restored
  TrainConfig config;
  MetricReport val_report;
  double best_val_score = 0.0;
  int best_epoch = 0;
  int epochs_run = 0;
  double warmup_identifier_accuracy = -1.0;  // -1 when warm-up did not run
  std::vector<double> epoch_train_loss;
  std::vector<double> epoch_val_score;
};

// Trains on SMOTE-augmented data (used as-is), monitoring the Appendix-C
// composite score on val_ds for early stopping; restores the best epoch.
// Throws on divergence, naming the epoch and batch.
TrainOutcome train(const TrainConfig& config, const Dataset& train_ds,
                   const Dataset& val_ds, const TrainHooks& hooks = {});

struct EvalOutput {
  MetricReport report;
  std::vector<ScoredPrediction> predictions;
  std::vector<int> assignments;  // argmax cluster per sample
  std::vector<int> labels;
  std::vector<std::string> sample_ids;
  AttentionSink records;
};

// Deterministic forward pass with dropout disabled.
EvalOutput evaluate_full(EmdlotModel& model, const Dataset& test_ds,
                         bool collect_records = false);
MetricReport evaluate(EmdlotModel& model, const Dataset& test_ds);

// Carves a stratified validation split from the non-synthetic samples;
// synthetic (SMOTE) samples always stay on the training side.
std::pair<Dataset, Dataset> carve_validation(const Dataset& train_ds,
                                             double val_fraction, uint64_t seed);

// Same carve on a SMOTE result, additionally dropping synthetics whose base
// or neighbor is a validation original so the oversampler cannot leak
// validation information into training.
std::pair<Dataset, Dataset> carve_validation(const SmoteResult& smoted,
                                             double val_fraction, uint64_t seed);

struct RunResult {
  TrainConfig config;  // seed filled with the run seed
  MetricReport report; // test-set metrics
  double objective = 0.0;
  bool valid = false;  // all three classes predicted on the test set
  int epochs_run = 0;
  int best_epoch = 0;
  double best_val_score = 0.0;
  CompositionTable composition;
  std::vector<int> assignments;
  std::vector<int> labels;
  std::vector<std::string> sample_ids;
  AttentionSink records;
  std::string checkpoint_path;  // set by callers that persist the model
  std::string variant;          // "" or ABL1/ABL2/ABL3
};

struct RunExecution {
  RunResult result;
  EmdlotModel model;
};

// One full experiment on a preprocessed dataset: stratified split, SMOTE on
// the training side, validation carve-out, training, test evaluation.
RunExecution run_once(const TrainConfig& config, const Dataset& ds, uint64_t seed);

struct MetricStats {
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation
};

struct RunsSummary {
  MetricStats recall, f1, map, auc, objective;
  int attempts = 0;
  int valid_runs = 0;
  bool reached_target = false;
  std::vector<RunResult> runs;  // the valid runs, in attempt order
  std::vector<uint64_t> seeds;  // seeds of the valid runs
};

// Repeats experiments with fresh derived seeds until n_valid valid runs are
// collected (capped at 5 * n_valid attempts) and summarizes mean/sd per
// metric over the valid runs. jobs > 1 parallelizes attempts; results are
// identical to the sequential order.
RunsSummary repeated_runs(const TrainConfig& config, const Dataset& ds,
                          int n_valid = 10, int jobs = 1);

// Random-search ranges; defaults match the documented search space.
struct SearchSpace {
  std::vector<int> hidden_sizes = {256, 512, 768, 1024};
  double dropout_min = 0.1, dropout_max = 0.7, dropout_step = 0.1;
  double lr_min = 1e-5, lr_max = 1e-2;  // log-uniform
  double wd_min = 1e-6, wd_max = 1e-3;  // log-uniform
  int clusters_min = 2, clusters_max = 8;
  double clw_min = 0.0005, clw_max = 0.005, clw_step = 0.0005;
  double dlw_min = 0.02, dlw_max = 0.08, dlw_step = 0.005;
  double modal_tau_min = 1.0, modal_tau_max = 3.0, modal_tau_step = 0.1;
  double feat_tau_min = 0.5, feat_tau_max = 0.99, feat_tau_step = 0.05;
  int patience_min = 5, patience_max = 20;
  std::vector<int> batch_sizes = {8, 16, 32};

  // Draws one config; non-searched fields come from base.
  TrainConfig sample(SeededRng& rng, const TrainConfig& base) const;
};

struct TrialRecord {
  int trial = 0;
  TrainConfig config;
  double objective = 0.0;
  bool valid = false;
  int epochs = 0;
};

struct TuneResult {
  TrainConfig best_config;
  double best_objective = 0.0;
  int best_trial = -1;
  bool any_valid = false;  // false → best-by-penalty-score with warning
  std::vector<TrialRecord> trials;
};

// Random search over the space: one shared split + SMOTE, one training run
// per trial, scored by the Appendix-C objective on the held-out split. Ties
// break toward the lower trial index.
TuneResult tune(const SearchSpace& space, int budget, const Dataset& ds,
                uint64_t seed, const TrainConfig& base, int jobs = 1);

enum class AblationVariant { kAbl1NoText, kAbl2NoCluster, kAbl3NoAttention };

AblationVariant parse_ablation_variant(const std::string& name);  // "ABL1".."ABL3"

// Applies exactly one ablation to the config and runs run_once; rejects
// configs that already carry an ablation.
RunExecution ablate(AblationVariant variant, const TrainConfig& config,
                    const Dataset& ds, uint64_t seed);

// Predicts the training-majority class for every test sample, scoring each
// class by its training frequency.
std::vector<ScoredPrediction> majority_baseline(const Dataset& train_ds,
                                                const Dataset& test_ds);

}  // namespace emdlot

#endif
