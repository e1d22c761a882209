#pragma once

#include <span>
#include <string>
#include <vector>

#include "wsvm/dataset.hpp"
#include "wsvm/ladder.hpp"

namespace wsvm {

enum class Criterion { Gkl, Egkl };
std::string to_string(Criterion c);
Criterion parse_criterion(const std::string& text);

struct TuneGrid {
  std::vector<double> lambdas;
  std::vector<double> sigmas;
  Criterion criterion = Criterion::Egkl;

  std::size_t size() const { return lambdas.size() * sigmas.size(); }
};

/// {1, 5.5} x 10^k for k = -8..7 plus 10^8: 33 values from 1e-8 to 1e8, ascending.
std::vector<double> default_lambda_ladder();

/// sigmas = i * sigma_M / 4 for i = 1..6 with sigma_M from median_sigma; lambdas from the ladder.
TuneGrid default_tune_grid(const LabeledDataset& dataset, Criterion criterion = Criterion::Egkl);

/// Mean over points of q log(q / q_hat) + (1 - q) log((1 - q) / (1 - q_hat)).
double gkl(std::span<const double> q_true, std::span<const double> q_hat);

/// -(1 / 2n) sum_i [(1 + R_i) log q_hat_i + (1 - R_i) log(1 - q_hat_i)] with R_i in {+1, -1}.
double egkl(std::span<const int> labels_pm, std::span<const double> q_hat);

struct CandidateScore {
  double lambda = 0.0;
  double sigma = 0.0;
  double egkl = 0.0;
  /// NaN unless true probabilities were supplied.
  double gkl = 0.0;
  bool failed = false;
  std::string failure;

  double score(Criterion c) const { return c == Criterion::Gkl ? gkl : egkl; }
};

/// Minimal score under the criterion; ties go to the smaller lambda, then the smaller sigma.
/// Returns the index into scores; throws when every candidate failed or has no score.
std::size_t select_candidate(std::span<const CandidateScore> scores, Criterion criterion);

struct TuneReport {
  BinaryTask task;
  Criterion criterion = Criterion::Egkl;
  std::vector<CandidateScore> scores;
  double lambda = 0.0;
  double sigma = 0.0;
  double seconds = 0.0;

  /// Re-selects under another criterion without retraining (both scores are kept when available).
  TuneReport reselect(Criterion c) const;
};

struct TuneOptions {
  SolverOptions solver;
  int workers = 1;
  /// n_tune x K true probabilities of the tuning points; enables GKL scoring.
  const Eigen::MatrixXd* tune_truth = nullptr;
};

/// True conditional probability of the task's positive side from full class probabilities.
double task_truth(const BinaryTask& task, std::span<const double> p);

/// Grid search: for each (lambda, sigma) train the ladder on train, estimate q on the task's
/// tuning points and score it. Candidate failures are recorded; if all fail the first error
/// is rethrown.
TuneReport tune_task(const LabeledDataset& train, const LabeledDataset& tune, const BinaryTask& task,
                     const TuneGrid& grid, const WeightGrid& weights, const TuneOptions& options = {});

}  // namespace wsvm
