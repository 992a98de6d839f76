#include "emdlot/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include "emdlot/optimizer.hpp"
#include "emdlot/preprocess.hpp"

namespace emdlot {

namespace {

constexpr double kCentroidNormCap = 100.0;

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> threads;
  for (int j = 0; j < std::min(jobs, n); ++j) {
    threads.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

MetricStats stats_over(const std::vector<double>& xs) {
  MetricStats s;
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(var / static_cast<double>(xs.size()));
  return s;
}

}  // namespace

EarlyStopping::EarlyStopping(int patience)
    : patience_(patience), best_score_(-std::numeric_limits<double>::infinity()) {
  if (patience < 1) throw std::invalid_argument("EarlyStopping: patience >= 1");
}

bool EarlyStopping::update(int epoch, double score) {
  if (score > best_score_) {
    best_score_ = score;
    best_epoch_ = epoch;
    return false;
  }
  return epoch - best_epoch_ >= patience_;
}

TrainOutcome train(const TrainConfig& config, const Dataset& train_ds,
                   const Dataset& val_ds, const TrainHooks& hooks) {
  config.validate();
  if (train_ds.samples.empty()) throw std::invalid_argument("train: empty training set");
  if (!hooks.validation_score) {
    if (val_ds.samples.empty()) throw std::invalid_argument("train: empty validation set");
    for (size_t c : val_ds.class_counts())
      if (c == 0)
        throw std::invalid_argument(
            "train: validation set needs at least one sample per class");
  }

  SeededRng master(config.seed);
  const uint64_t init_seed = master.fork_seed();
  const uint64_t warm_seed = master.fork_seed();
  const uint64_t shuffle_seed = master.fork_seed();
  const uint64_t dropout_seed = master.fork_seed();

  TrainOutcome out;
  out.config = config;
  out.model = EmdlotModel(model_config(config, train_ds.num_features(), train_ds.d_ch,
                                       train_ds.feature_names));
  out.model.init(init_seed);
  EmdlotModel& model = out.model;

  // K-Means warm-up on the untrained encoder's fused embeddings.
  if (model.config().clusters > 1) {
    std::vector<std::vector<double>> embeddings;
    embeddings.reserve(train_ds.samples.size());
    for (const auto& s : train_ds.samples)
      embeddings.push_back(model.predict(s).z_fusion);
    auto stats = warm_start(model.cluster, embeddings, warm_seed, config.warmup_epochs,
                            config.learning_rate, config.weight_decay);
    out.warmup_identifier_accuracy = stats.identifier_accuracy;
  }

  auto params = model.params();
  AdamW opt(config.learning_rate, config.weight_decay);
  const LossWeights weights{config.dist_loss_weight, config.cluster_loss_weight};

  SeededRng shuffle_rng(shuffle_seed);
  SeededRng dropout_rng(dropout_seed);
  std::vector<size_t> order(train_ds.samples.size());
  std::iota(order.begin(), order.end(), 0);

  EarlyStopping stopper(config.patience);
  std::vector<Tensor> best_snapshot = model.snapshot_values();

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    int batches = 0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(config.batch_size)) {
      const size_t end =
          std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      std::vector<const Sample*> batch;
      batch.reserve(end - start);
      for (size_t i = start; i < end; ++i) batch.push_back(&train_ds.samples[order[i]]);

      Tape tape;
      EmdlotModel::ForwardOptions fwd;
      fwd.training = true;
      fwd.dropout_rng = &dropout_rng;
      auto nodes = model.training_loss(tape, batch, fwd, weights);
      const double loss = tape.value(nodes.loss);
      if (!std::isfinite(loss))
        throw std::runtime_error("training diverged (non-finite loss) at epoch " +
                                 std::to_string(epoch) + ", batch " +
                                 std::to_string(batches));
      for (Param* p : params) p->zero_grad();
      tape.backward(nodes.loss);
      opt.step(params);
      for (auto& c : model.cluster.centroids) clip_norm(c, kCentroidNormCap);
      loss_sum += loss;
      batches++;
    }
    out.epoch_train_loss.push_back(loss_sum / std::max(1, batches));

    double val_score;
    if (hooks.validation_score) {
      val_score = hooks.validation_score(epoch, model);
    } else {
      val_score = composite_score(evaluate(model, val_ds));
    }
    out.epoch_val_score.push_back(val_score);
    if (hooks.on_epoch) hooks.on_epoch(epoch, out.epoch_train_loss.back(), val_score);

    const bool improved = val_score > stopper.best_score();
    const bool stop = stopper.update(epoch, val_score);
    if (improved) best_snapshot = model.snapshot_values();
    out.epochs_run = epoch;
    if (stop) break;
  }

  model.restore_values(best_snapshot);
  out.best_epoch = stopper.best_epoch();
  out.best_val_score = stopper.best_score();
  if (!val_ds.samples.empty()) {
    bool all_classes = true;
    for (size_t c : val_ds.class_counts())
      if (c == 0) all_classes = false;
    if (all_classes || !hooks.validation_score)
      out.val_report = evaluate(model, val_ds);
  }
  return out;
}

EvalOutput evaluate_full(EmdlotModel& model, const Dataset& test_ds,
                         bool collect_records) {
  if (test_ds.samples.empty())
    throw std::invalid_argument("evaluate: empty test set");
  if (model.config().n_features != test_ds.num_features())
    throw std::runtime_error("evaluate: feature count mismatch (model " +
                             std::to_string(model.config().n_features) + ", data " +
                             std::to_string(test_ds.num_features()) + ")");
  if (model.config().d_ch != test_ds.d_ch)
    throw std::runtime_error("evaluate: text width mismatch");

  EvalOutput out;
  for (const auto& s : test_ds.samples) {
    auto pred = model.predict(s, false, collect_records ? &out.records : nullptr);
    out.predictions.push_back(make_scored(pred.probs, static_cast<int>(s.label)));
    const int cluster = static_cast<int>(
        std::max_element(pred.pi.begin(), pred.pi.end()) - pred.pi.begin());
    out.assignments.push_back(cluster);
    out.labels.push_back(static_cast<int>(s.label));
    out.sample_ids.push_back(s.series.firm_id);
  }
  out.report = compute_metrics(out.predictions);
  return out;
}

MetricReport evaluate(EmdlotModel& model, const Dataset& test_ds) {
  return evaluate_full(model, test_ds).report;
}

std::pair<Dataset, Dataset> carve_validation(const Dataset& train_ds,
                                             double val_fraction, uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw std::invalid_argument("carve_validation: fraction in (0,1)");
  Dataset rest, val;
  rest.feature_names = val.feature_names = train_ds.feature_names;
  rest.d_ch = val.d_ch = train_ds.d_ch;

  SeededRng rng(seed);
  for (int cls = 0; cls < kNumClasses; ++cls) {
    std::vector<size_t> originals;
    for (size_t i = 0; i < train_ds.samples.size(); ++i) {
      const auto& s = train_ds.samples[i];
      if (static_cast<int>(s.label) == cls && !s.synthetic) originals.push_back(i);
    }
    if (originals.empty()) continue;
    rng.shuffle(originals);
    size_t n_val = static_cast<size_t>(
        std::llround(val_fraction * static_cast<double>(originals.size())));
    if (originals.size() >= 2) n_val = std::clamp<size_t>(n_val, 1, originals.size() - 1);
    else n_val = 0;  // singleton classes stay in training
    for (size_t i = 0; i < originals.size(); ++i)
      (i < n_val ? val : rest).samples.push_back(train_ds.samples[originals[i]]);
  }
  for (const auto& s : train_ds.samples)
    if (s.synthetic) rest.samples.push_back(s);
  return {std::move(rest), std::move(val)};
}

std::pair<Dataset, Dataset> carve_validation(const SmoteResult& smoted,
                                             double val_fraction, uint64_t seed) {
  const Dataset& ds = smoted.dataset;
  const size_t n_orig = ds.samples.size() - smoted.synthetics.size();

  Dataset originals;
  originals.feature_names = ds.feature_names;
  originals.d_ch = ds.d_ch;
  originals.samples.assign(ds.samples.begin(),
                           ds.samples.begin() + static_cast<long>(n_orig));
  auto [rest, val] = carve_validation(originals, val_fraction, seed);

  std::set<std::string> val_ids;
  for (const auto& s : val.samples) val_ids.insert(s.series.firm_id);
  for (size_t i = 0; i < smoted.synthetics.size(); ++i) {
    const auto& rec = smoted.synthetics[i];
    const auto& base_id = ds.samples[rec.base_index].series.firm_id;
    const auto& nb_id = ds.samples[rec.neighbor_index].series.firm_id;
    if (val_ids.count(base_id) || val_ids.count(nb_id)) continue;
    rest.samples.push_back(ds.samples[n_orig + i]);
  }
  return {std::move(rest), std::move(val)};
}

RunExecution run_once(const TrainConfig& config, const Dataset& ds, uint64_t seed) {
  TrainConfig cfg = config;
  cfg.seed = seed;
  SeededRng master(seed);
  const uint64_t split_seed = master.fork_seed();
  const uint64_t smote_seed = master.fork_seed();
  const uint64_t carve_seed = master.fork_seed();

  auto parts = split(ds, cfg.train_frac, split_seed);
  auto smoted = smote(parts.train, 5, smote_seed);
  auto [train_part, val_part] = carve_validation(smoted, cfg.val_fraction, carve_seed);
  auto outcome = train(cfg, train_part, val_part);
  auto eval = evaluate_full(outcome.model, parts.test, true);

  RunExecution exec{{}, std::move(outcome.model)};
  RunResult& r = exec.result;
  r.config = cfg;
  r.report = eval.report;
  r.objective = objective_score(eval.report);
  r.valid = eval.report.unique_preds == kNumClasses;
  r.epochs_run = outcome.epochs_run;
  r.best_epoch = outcome.best_epoch;
  r.best_val_score = outcome.best_val_score;
  r.composition = composition_table(eval.assignments, eval.labels,
                                    exec.model.config().clusters);
  r.assignments = std::move(eval.assignments);
  r.labels = std::move(eval.labels);
  r.sample_ids = std::move(eval.sample_ids);
  r.records = std::move(eval.records);
  return exec;
}

RunsSummary repeated_runs(const TrainConfig& config, const Dataset& ds, int n_valid,
                          int jobs) {
  if (n_valid < 1) throw std::invalid_argument("repeated_runs: n_valid >= 1");
  const int cap = 5 * n_valid;
  SeededRng master(config.seed);
  std::vector<uint64_t> attempt_seeds(cap);
  for (auto& s : attempt_seeds) s = master.fork_seed();

  std::vector<std::optional<RunResult>> results(cap);
  int executed = 0;
  // Attempts are processed in index order so the outcome is independent of
  // the job count: the summary covers the shortest prefix holding n_valid
  // valid runs.
  while (executed < cap) {
    const int wave = std::min(std::max(1, jobs), cap - executed);
    parallel_for(wave, jobs, [&](int w) {
      const int idx = executed + w;
      results[idx] = run_once(config, ds, attempt_seeds[idx]).result;
    });
    executed += wave;
    int valid = 0;
    for (int i = 0; i < executed; ++i)
      if (results[i] && results[i]->valid) valid++;
    if (valid >= n_valid) break;
  }

  RunsSummary summary;
  std::vector<double> recalls, f1s, maps, aucs, objectives;
  int valid_seen = 0;
  for (int i = 0; i < executed && valid_seen < n_valid; ++i) {
    summary.attempts++;
    const RunResult& r = *results[i];
    if (!r.valid) continue;
    valid_seen++;
    recalls.push_back(r.report.recall);
    f1s.push_back(r.report.f1);
    maps.push_back(r.report.map);
    aucs.push_back(r.report.auc_ovr);
    objectives.push_back(r.objective);
    summary.seeds.push_back(r.config.seed);
    summary.runs.push_back(r);
  }
  summary.valid_runs = valid_seen;
  summary.reached_target = valid_seen >= n_valid;
  summary.recall = stats_over(recalls);
  summary.f1 = stats_over(f1s);
  summary.map = stats_over(maps);
  summary.auc = stats_over(aucs);
  summary.objective = stats_over(objectives);
  return summary;
}

namespace {

double sample_step_grid(SeededRng& rng, double lo, double hi, double step) {
  const int steps = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
  const int pick = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(steps + 1)));
  return lo + step * pick;
}

}  // namespace

TrainConfig SearchSpace::sample(SeededRng& rng, const TrainConfig& base) const {
  TrainConfig c = base;
  c.hidden_size = hidden_sizes[rng.uniform_int(hidden_sizes.size())];
  c.dropout = sample_step_grid(rng, dropout_min, dropout_max, dropout_step);
  c.learning_rate = std::exp(rng.uniform(std::log(lr_min), std::log(lr_max)));
  c.weight_decay = std::exp(rng.uniform(std::log(wd_min), std::log(wd_max)));
  c.num_clusters = clusters_min +
                   static_cast<int>(rng.uniform_int(clusters_max - clusters_min + 1));
  c.cluster_loss_weight = sample_step_grid(rng, clw_min, clw_max, clw_step);
  c.dist_loss_weight = sample_step_grid(rng, dlw_min, dlw_max, dlw_step);
  c.modal_temperature = sample_step_grid(rng, modal_tau_min, modal_tau_max, modal_tau_step);
  c.numeric_feature_temperature =
      sample_step_grid(rng, feat_tau_min, feat_tau_max, feat_tau_step);
  c.text_feature_temperature =
      sample_step_grid(rng, feat_tau_min, feat_tau_max, feat_tau_step);
  c.patience = patience_min +
               static_cast<int>(rng.uniform_int(patience_max - patience_min + 1));
  c.batch_size = batch_sizes[rng.uniform_int(batch_sizes.size())];
  c.seed = rng.fork_seed();
  return c;
}

TuneResult tune(const SearchSpace& space, int budget, const Dataset& ds, uint64_t seed,
                const TrainConfig& base, int jobs) {
  if (budget < 1) throw std::invalid_argument("tune: budget >= 1");
  SeededRng master(seed);
  const uint64_t split_seed = master.fork_seed();
  const uint64_t smote_seed = master.fork_seed();

  auto parts = split(ds, base.train_frac, split_seed);
  auto smoted = smote(parts.train, 5, smote_seed);

  // Sample every trial up front so results do not depend on scheduling.
  std::vector<TrainConfig> configs;
  configs.reserve(budget);
  for (int t = 0; t < budget; ++t) configs.push_back(space.sample(master, base));

  TuneResult res;
  res.trials.resize(budget);
  parallel_for(budget, jobs, [&](int t) {
    const TrainConfig& cfg = configs[t];
    SeededRng trial_rng(cfg.seed);
    auto [train_part, val_part] =
        carve_validation(smoted, cfg.val_fraction, trial_rng.fork_seed());
    auto outcome = train(cfg, train_part, val_part);
    auto report = evaluate(outcome.model, parts.test);
    TrialRecord rec;
    rec.trial = t;
    rec.config = cfg;
    rec.objective = objective_score(report);
    rec.valid = report.unique_preds == kNumClasses;
    rec.epochs = outcome.epochs_run;
    res.trials[t] = std::move(rec);
  });

  for (const auto& rec : res.trials) {
    if (rec.valid) res.any_valid = true;
    if (res.best_trial < 0 || rec.objective > res.best_objective) {
      res.best_trial = rec.trial;
      res.best_objective = rec.objective;
      res.best_config = rec.config;
    }
  }
  return res;
}

AblationVariant parse_ablation_variant(const std::string& name) {
  if (name == "ABL1") return AblationVariant::kAbl1NoText;
  if (name == "ABL2") return AblationVariant::kAbl2NoCluster;
  if (name == "ABL3") return AblationVariant::kAbl3NoAttention;
  throw std::invalid_argument("unknown ablation variant '" + name +
                              "' (expected ABL1, ABL2 or ABL3)");
}

RunExecution ablate(AblationVariant variant, const TrainConfig& config,
                    const Dataset& ds, uint64_t seed) {
  if (!config.ablation.empty())
    throw std::invalid_argument("ablate: config already carries an ablation; "
                                "variants run one at a time");
  TrainConfig cfg = config;
  std::string tag;
  switch (variant) {
    case AblationVariant::kAbl1NoText:
      cfg.ablation.insert("no_text");
      tag = "ABL1";
      break;
    case AblationVariant::kAbl2NoCluster:
      cfg.ablation.insert("no_cluster");
      cfg.num_clusters = 1;
      cfg.cluster_loss_weight = 0.0;
      cfg.dist_loss_weight = 0.0;
      tag = "ABL2";
      break;
    case AblationVariant::kAbl3NoAttention:
      cfg.ablation.insert("no_attention");
      tag = "ABL3";
      break;
  }
  auto exec = run_once(cfg, ds, seed);
  exec.result.variant = tag;
  return exec;
}

std::vector<ScoredPrediction> majority_baseline(const Dataset& train_ds,
                                                const Dataset& test_ds) {
  auto counts = train_ds.class_counts();
  const size_t total = train_ds.samples.size();
  std::vector<double> probs(kNumClasses, 1.0 / kNumClasses);
  if (total > 0)
    for (int c = 0; c < kNumClasses; ++c)
      probs[c] = static_cast<double>(counts[c]) / static_cast<double>(total);
  std::vector<ScoredPrediction> preds;
  preds.reserve(test_ds.samples.size());
  for (const auto& s : test_ds.samples)
    preds.push_back(make_scored(probs, static_cast<int>(s.label)));
  return preds;
}

}  // namespace emdlot
