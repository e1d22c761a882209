#pragma once

#include <map>
#include <optional>
#include <vector>

#include "wsvm/dataset.hpp"
#include "wsvm/ladder.hpp"
#include "wsvm/schemes.hpp"
#include "wsvm/tuning.hpp"

namespace wsvm {

struct FitConfig {
  SchemeKind scheme = SchemeKind::Baseline1;
  Criterion criterion = Criterion::Egkl;
  /// Weight grid size M; unset uses floor(sqrt(n_train)).
  std::optional<int> m;
  /// Empty lists use the default ladder and the sigma_M multiples of the training set.
  std::vector<double> lambdas;
  std::vector<double> sigmas;
  VoteRule vote_rule = VoteRule::GreaterThanHalf;
  bool normalize_ova = false;
  SolverOptions solver;
  int workers = 1;
};

struct TaskFit {
  TuneReport report;
  ClassifierLadder ladder;
  /// Tuning plus the final ladder at the selected (lambda, sigma).
  double seconds = 0.0;
};

/// Tunes and trains binary tasks on one train/tune split, caching by canonical task so that
/// several schemes fitted on the same split share work. Pair tasks are always trained with the
/// smaller label on the positive side.
class TaskFitter {
 public:
  /// tune_truth (n_tune x K) enables GKL scores; it is required for Criterion::Gkl.
  TaskFitter(const LabeledDataset& train, const LabeledDataset& tune, const FitConfig& config,
             const Eigen::MatrixXd* tune_truth = nullptr);

  /// Result for a task under a criterion. Tuning is shared between criteria when truth is known.
  const TaskFit& fit(const BinaryTask& task, Criterion criterion);

  const LabeledDataset& train() const { return train_; }
  const TuneGrid& grid() const { return grid_; }
  const WeightGrid& weights() const { return weights_; }

 private:
  const LabeledDataset& train_;
  const LabeledDataset& tune_;
  const Eigen::MatrixXd* tune_truth_;
  TuneGrid grid_;
  WeightGrid weights_;
  SolverOptions solver_;
  int workers_;
  std::map<BinaryTask, TuneReport> reports_;
  std::map<std::pair<BinaryTask, Criterion>, TaskFit> fits_;
};

struct FitResult {
  MulticlassModel model;
  /// One per ladder, same order.
  std::vector<TuneReport> reports;
  /// Sum of the scheme's task times plus baseline selection.
  double seconds = 0.0;
  double baseline_seconds = 0.0;
};

/// Fits one scheme through the cache.
FitResult fit_scheme(TaskFitter& fitter, SchemeKind scheme, Criterion criterion, VoteRule vote_rule,
                     bool normalize_ova);

/// One-shot fit of config.scheme.
FitResult fit(const LabeledDataset& train, const LabeledDataset& tune, const FitConfig& config,
              const Eigen::MatrixXd* tune_truth = nullptr);

}  // namespace wsvm
