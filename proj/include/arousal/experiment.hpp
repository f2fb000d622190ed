#pragma once

#include "arousal/common.hpp"
#include "arousal/model.hpp"
#include "arousal/nn/optimizer.hpp"
#include "arousal/windows.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace arousal {

struct ExperimentConfig {
  Mode mode = Mode::classifier;
  Modality modality = Modality::both;
  double window_s = 0.5;
  double epsilon = 0.2;
  double delta = 0.6;
  nn::OptimizerConfig optimizer{};
  Index patience = 30;
  Index validation_sessions = 4;
  std::uint64_t seed = 0;
  /// Fold-level parallelism; results do not depend on it.
  int jobs = 1;

  /// The label threshold that applies to `mode` (epsilon or delta).
  double threshold() const { return mode == Mode::classifier ? epsilon : delta; }
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

struct Split {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::string test;
};

/// One fold per session (in input order) as test; `validation` sessions are
/// drawn from the rest with seed `seed + fold`; the remainder trains.
std::vector<Split> lovo_splits(std::span<const std::string> session_ids, Index validation = 4, std::uint64_t seed = 0);

/// Examples of one fold role. Classifier data pairs each segment with a label;
/// ranker data holds preference pairs indexing into `segments`.
struct TrainingData {
  std::vector<const Segment*> segments;
  std::vector<int> labels;
  std::vector<PreferencePair> pairs;

  Index size(Mode mode) const {
    return static_cast<Index>(mode == Mode::classifier ? labels.size() : pairs.size());
  }
};

/// Labeled (epsilon) or paired (delta) examples from the given sessions'
/// segments, in session order.
TrainingData build_training_data(std::span<const std::vector<Segment>* const> sessions, const ExperimentConfig& cfg);

struct EarlyStoppingResult {
  Index epochs_trained = 0;
  Index best_epoch = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<double> history;
};

/// Runs `train_epoch()` then `validate()` once per epoch, snapshots the model
/// whenever the validation score strictly improves, and stops after
/// `patience` epochs without improvement or at `max_epochs`. The best
/// snapshot is restored before returning.
template <typename TrainEpoch, typename Validate, typename Snapshot, typename Restore>
EarlyStoppingResult run_early_stopping(Index max_epochs, Index patience, TrainEpoch&& train_epoch, Validate&& validate,
                                       Snapshot&& snapshot, Restore&& restore) {
  EarlyStoppingResult r;
  for (Index epoch = 1; epoch <= max_epochs; ++epoch) {
    train_epoch();
    const double score = validate();
    r.history.push_back(score);
    r.epochs_trained = epoch;
    if (score > r.best_score) {
      r.best_score = score;
      r.best_epoch = epoch;
      snapshot();
    }
    if (epoch - r.best_epoch >= patience) break;
  }
  if (r.best_epoch > 0) restore();
  return r;
}

/// Trains with mini-batches (shuffled per epoch with `seed`) and early stopping
/// on validation accuracy (pairwise accuracy for rankers).
EarlyStoppingResult train_with_early_stopping(ArousalNet<double>& net, const TrainingData& train,
                                              const TrainingData& validation, const ExperimentConfig& cfg,
                                              std::uint64_t seed);

/// Scores every segment; see `predict_score`.
std::vector<double> score_segments(const ArousalNet<double>& net, std::span<const Segment* const> segments);

/// Classification accuracy, or pairwise accuracy for ranker data.
double evaluate_accuracy(const ArousalNet<double>& net, const TrainingData& data);

/// Test-label frequency of the training majority class (ties pick class 0).
/// Ranker mode always yields 0.5.
double baseline_accuracy(std::span<const int> train_labels, std::span<const int> test_labels,
                         Mode mode = Mode::classifier);

/// Kendall tau-b between two equally long sequences. Empty when fewer than two
/// items or when either side is entirely tied.
std::optional<double> kendall_tau(std::span<const double> truth, std::span<const double> predicted);

struct FoldResult {
  std::string test_session;
  double accuracy = 0.0;
  double baseline = 0.0;
  std::optional<double> kendall_tau;
  Index epochs_trained = 0;
  Index best_epoch = 0;
  double validation_accuracy = 0.0;
  Index train_examples = 0;
  Index validation_examples = 0;
  Index test_examples = 0;
  bool leakage_free = true;
  bool failed = false;
  std::string error;
};

struct Summary {
  Index folds = 0;
  Index failed_folds = 0;
  double mean_accuracy = 0.0;
  double accuracy_ci = 0.0;
  double mean_baseline = 0.0;
  std::optional<double> mean_tau;
  double tau_ci = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<FoldResult> folds;
  Summary summary;
  /// Dataset size per threshold value (epsilon or delta axis) at this window.
  std::vector<std::pair<double, Index>> dataset_sizes;
};

/// Mean and 1.96 * sample std / sqrt(n) half-width.
std::pair<double, double> mean_with_ci(std::span<const double> values);

Summary summarize(std::span<const FoldResult> folds);

nlohmann::json to_json(const ExperimentReport& report);

/// Segments of every session at one window length.
struct SegmentedDataset {
  std::vector<std::string> ids;
  std::vector<std::vector<Segment>> segments;
  Resolution resolution{};
  double fps = 30.0;
};

/// Throws DataError when sessions disagree on resolution or frame rate.
SegmentedDataset segment_dataset(std::span<const PreparedSession> dataset, double window_s);

/// Trains and tests one fold. Errors are recorded in the result rather than
/// thrown. `trained`, when given, receives the best-validation network.
FoldResult run_fold(const SegmentedDataset& data, const Split& split, std::size_t fold, const ExperimentConfig& cfg,
                    std::unique_ptr<ArousalNet<double>>* trained = nullptr);

struct RunOptions {
  /// Receives one line per finished fold when set.
  std::function<void(const std::string&)> log;
};

/// Leave-one-video-out run over prepared sessions.
ExperimentReport run_experiment(std::span<const PreparedSession> dataset, const ExperimentConfig& cfg,
                                const RunOptions& options = {});

enum class SweepAxis { epsilon, delta, window, modality };

SweepAxis parse_sweep_axis(const std::string& s);
std::string to_string(SweepAxis axis);
std::vector<std::string> default_sweep_values(SweepAxis axis);
ExperimentConfig apply_sweep_value(ExperimentConfig cfg, SweepAxis axis, const std::string& value);

std::vector<ExperimentReport> sweep(std::span<const PreparedSession> dataset, const ExperimentConfig& base,
                                    SweepAxis axis, const std::vector<std::string>& values,
                                    const RunOptions& options = {});

/// `value,mean_acc,ci,baseline,mean_tau` rows, one per report.
std::string curve_csv(SweepAxis axis, std::span<const ExperimentReport> reports);

/// Labeled-example (classifier) or pair (ranker) counts over the whole
/// dataset for each threshold value.
std::vector<std::pair<double, Index>> dataset_sizes(std::span<const std::vector<Segment>> segments, Mode mode,
                                                    std::span<const double> thresholds);

struct CleaningVerdict {
  std::string id;
  double duration_s = 0.0;
  std::optional<double> dtw_distance;
  bool retained = true;
  std::string reason;  // "short" or "outlier" when dropped
};

struct CleanedDataset {
  std::vector<PreparedSession> sessions;
  std::vector<CleaningVerdict> verdicts;
};

/// Drops sessions shorter than `min_duration_s`, computes each survivor's DTW
/// distance to the median trace, drops outliers when `dtw_threshold` is set,
/// and prepares the rest. Verdicts follow input order.
CleanedDataset clean_dataset(std::vector<RawSession> sessions, double min_duration_s = 15.0,
                             std::optional<double> dtw_threshold = std::nullopt);

}  // namespace arousal
