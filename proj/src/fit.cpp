#include "wsvm/fit.hpp"

#include <chrono>

#include "wsvm/kernel.hpp"

namespace wsvm {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

TaskFitter::TaskFitter(const LabeledDataset& train, const LabeledDataset& tune, const FitConfig& config,
                       const Eigen::MatrixXd* tune_truth)
    : train_(train), tune_(tune), tune_truth_(tune_truth), solver_(config.solver), workers_(config.workers) {
  if (train.num_classes() != tune.num_classes()) {
    throw InvalidInput("training and tuning sets disagree on the number of classes");
  }
  if (train.dim() != tune.dim()) throw InvalidInput("training and tuning sets differ in dimension");
  if (config.criterion == Criterion::Gkl && tune_truth == nullptr) {
    throw InvalidInput("GKL tuning needs true probabilities for the tuning set");
  }
  if (config.lambdas.empty() || config.sigmas.empty()) grid_ = default_tune_grid(train);
  if (!config.lambdas.empty()) grid_.lambdas = config.lambdas;
  if (!config.sigmas.empty()) grid_.sigmas = config.sigmas;
  for (double v : grid_.lambdas) {
    if (!(v > 0.0)) throw InvalidInput("lambda grid values must be positive");
  }
  for (double v : grid_.sigmas) {
    if (!(v > 0.0)) throw InvalidInput("sigma grid values must be positive");
  }
  weights_ = config.m ? make_weight_grid(*config.m) : default_weight_grid(train.size());
}

const TaskFit& TaskFitter::fit(const BinaryTask& task, Criterion criterion) {
  const BinaryTask key = task.canonical();
  if (auto it = fits_.find({key, criterion}); it != fits_.end()) return it->second;
  if (criterion == Criterion::Gkl && tune_truth_ == nullptr) {
    throw InvalidInput("GKL tuning needs true probabilities for the tuning set");
  }

  auto rep = reports_.find(key);
  if (rep == reports_.end()) {
    TuneOptions options;
    options.solver = solver_;
    options.workers = workers_;
    options.tune_truth = tune_truth_;
    TuneGrid grid = grid_;
    grid.criterion = criterion;
    rep = reports_.emplace(key, tune_task(train_, tune_, key, grid, weights_, options)).first;
  }

  const auto start = std::chrono::steady_clock::now();
  TaskFit out;
  out.report = rep->second.reselect(criterion);
  out.ladder = train_ladder(train_, key, weights_, out.report.lambda, KernelSpec::rbf(out.report.sigma), solver_);
  // Shared tuning is charged in full to every scheme that uses the task.
  out.seconds = rep->second.seconds + seconds_since(start);
  return fits_.emplace(std::pair{key, criterion}, std::move(out)).first->second;
}

FitResult fit_scheme(TaskFitter& fitter, SchemeKind scheme, Criterion criterion, VoteRule vote_rule,
                     bool normalize_ova) {
  const LabeledDataset& train = fitter.train();
  FitResult out;
  out.model.scheme = scheme;
  out.model.num_classes = train.num_classes();
  out.model.dim = train.dim();
  out.model.vote_rule = vote_rule;
  out.model.normalize_ova = normalize_ova && scheme == SchemeKind::OneVsAll;

  std::optional<Label> k_star;
  if (uses_fixed_baseline(scheme)) {
    const auto start = std::chrono::steady_clock::now();
    const bool median = scheme == SchemeKind::Baseline2 || scheme == SchemeKind::BaselinePairwise2;
    out.model.baseline =
        select_baseline(train, median ? BaselineMethod::MedianAggDistance : BaselineMethod::LargestClass);
    k_star = out.model.baseline->k_star;
    out.baseline_seconds = seconds_since(start);
  }
  out.seconds = out.baseline_seconds;
  for (const BinaryTask& task : required_tasks(scheme, train.num_classes(), k_star)) {
    const TaskFit& tf = fitter.fit(task, criterion);
    out.model.ladders.push_back(tf.ladder);
    out.reports.push_back(tf.report);
    out.seconds += tf.seconds;
  }
  return out;
}

FitResult fit(const LabeledDataset& train, const LabeledDataset& tune, const FitConfig& config,
              const Eigen::MatrixXd* tune_truth) {
  TaskFitter fitter(train, tune, config, tune_truth);
  return fit_scheme(fitter, config.scheme, config.criterion, config.vote_rule, config.normalize_ova);
}

}  // namespace wsvm
