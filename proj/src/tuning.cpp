#include "wsvm/tuning.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "wsvm/kernel.hpp"
#include "wsvm/parallel.hpp"

namespace wsvm {

namespace {

void check_open(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw InvalidInput("estimated probability must lie in (0, 1), got " + std::to_string(q));
  }
}

}  // namespace

std::string to_string(Criterion c) { return c == Criterion::Gkl ? "gkl" : "egkl"; }

Criterion parse_criterion(const std::string& text) {
  if (text == "gkl") return Criterion::Gkl;
  if (text == "egkl") return Criterion::Egkl;
  throw InvalidInput("unknown criterion '" + text + "' (expected egkl|gkl)");
}

std::vector<double> default_lambda_ladder() {
  std::vector<double> out;
  for (int e = -8; e <= 7; ++e) {
    const double base = std::pow(10.0, e);
    out.push_back(base);
    out.push_back(5.5 * base);
  }
  out.push_back(1e8);
  return out;
}

TuneGrid default_tune_grid(const LabeledDataset& dataset, Criterion criterion) {
  const double sm = median_sigma(dataset);
  TuneGrid grid;
  grid.lambdas = default_lambda_ladder();
  for (int i = 1; i <= 6; ++i) grid.sigmas.push_back(i * sm / 4.0);
  grid.criterion = criterion;
  return grid;
}

double gkl(std::span<const double> q_true, std::span<const double> q_hat) {
  if (q_true.size() != q_hat.size() || q_true.empty()) {
    throw InvalidInput("gkl needs equal, nonempty lengths");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < q_true.size(); ++i) {
    const double q = q_true[i], h = q_hat[i];
    check_open(h);
    if (q > 0.0) s += q * std::log(q / h);
    if (q < 1.0) s += (1.0 - q) * std::log((1.0 - q) / (1.0 - h));
  }
  return s / static_cast<double>(q_true.size());
}

double egkl(std::span<const int> labels_pm, std::span<const double> q_hat) {
  if (labels_pm.size() != q_hat.size() || q_hat.empty()) {
    throw InvalidInput("egkl needs equal, nonempty lengths");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < q_hat.size(); ++i) {
    check_open(q_hat[i]);
    const double r = labels_pm[i];
    s += (1.0 + r) * std::log(q_hat[i]) + (1.0 - r) * std::log(1.0 - q_hat[i]);
  }
  return -s / (2.0 * static_cast<double>(q_hat.size()));
}

std::size_t select_candidate(std::span<const CandidateScore> scores, Criterion criterion) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& c = scores[i];
    const double s = c.score(criterion);
    if (c.failed || std::isnan(s)) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = scores[*best];
    const double bs = b.score(criterion);
    if (s < bs || (s == bs && (c.lambda < b.lambda || (c.lambda == b.lambda && c.sigma < b.sigma)))) {
      best = i;
    }
  }
  if (!best) throw InvalidInput("no tuning candidate has a usable " + to_string(criterion) + " score");
  return *best;
}

TuneReport TuneReport::reselect(Criterion c) const {
  TuneReport out = *this;
  const auto i = select_candidate(scores, c);
  out.criterion = c;
  out.lambda = scores[i].lambda;
  out.sigma = scores[i].sigma;
  return out;
}

double task_truth(const BinaryTask& task, std::span<const double> p) {
  const double pj = p[static_cast<std::size_t>(task.positive - 1)];
  if (task.pooled()) return pj;
  return pj / (pj + p[static_cast<std::size_t>(task.negative - 1)]);
}

TuneReport tune_task(const LabeledDataset& train, const LabeledDataset& tune, const BinaryTask& task,
                     const TuneGrid& grid, const WeightGrid& weights, const TuneOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (grid.lambdas.empty() || grid.sigmas.empty()) throw InvalidInput("tuning grid is empty");
  const bool have_truth = options.tune_truth != nullptr;
  if (grid.criterion == Criterion::Gkl && !have_truth) {
    throw InvalidInput("GKL tuning needs the true probabilities of the tuning points");
  }
  if (have_truth && static_cast<std::size_t>(options.tune_truth->rows()) != tune.size()) {
    throw InvalidInput("tuning truth rows do not match the tuning set");
  }

  const TaskView train_view = task_view(train, task);
  const TaskView tune_view = task_view(tune, task);
  const LabeledDataset train_sub = train.subset(train_view.indices);
  const LabeledDataset tune_sub = tune.subset(tune_view.indices);

  std::vector<double> q_true;
  if (have_truth) {
    const auto& truth = *options.tune_truth;
    q_true.resize(tune_view.indices.size());
    std::vector<double> row(static_cast<std::size_t>(truth.cols()));
    for (std::size_t i = 0; i < q_true.size(); ++i) {
      for (Eigen::Index j = 0; j < truth.cols(); ++j) {
        row[static_cast<std::size_t>(j)] = truth(static_cast<Eigen::Index>(tune_view.indices[i]), j);
      }
      q_true[i] = task_truth(task, row);
    }
  }

  // Kernel blocks per sigma are shared by every lambda.
  const std::size_t ns = grid.sigmas.size();
  std::vector<GramMatrix> train_gram(ns), cross_gram(ns);
  parallel_for(ns, options.workers, [&](std::size_t s) {
    const KernelSpec kernel = KernelSpec::rbf(grid.sigmas[s]);
    train_gram[s] = gram(train_sub.features(), kernel);
    cross_gram[s] = gram(tune_sub.features(), train_sub.features(), kernel);
  });

  const std::size_t nl = grid.lambdas.size();
  std::vector<CandidateScore> scores(ns * nl);
  std::vector<std::exception_ptr> errors(ns * nl);
  parallel_for(ns * nl, options.workers, [&](std::size_t c) {
    const std::size_t s = c / nl, l = c % nl;
    CandidateScore& out = scores[c];
    out.lambda = grid.lambdas[l];
    out.sigma = grid.sigmas[s];
    out.gkl = std::numeric_limits<double>::quiet_NaN();
    try {
      const auto fits = train_rungs(train_gram[s], train_view.signs, weights, out.lambda, options.solver);
      const auto n_tune = cross_gram[s].rows();
      Eigen::MatrixXd coef(static_cast<Eigen::Index>(train_view.signs.size()),
                           static_cast<Eigen::Index>(fits.size()));
      for (std::size_t r = 0; r < fits.size(); ++r) coef.col(static_cast<Eigen::Index>(r)) = fits[r].coeffs;
      const Eigen::MatrixXd values = cross_gram[s] * coef;
      std::vector<double> q(static_cast<std::size_t>(n_tune));
      std::vector<double> row(fits.size());
      for (Eigen::Index i = 0; i < n_tune; ++i) {
        for (std::size_t r = 0; r < fits.size(); ++r) {
          row[r] = values(i, static_cast<Eigen::Index>(r)) + fits[r].intercept;
        }
        q[static_cast<std::size_t>(i)] = prob_from_rung_values(weights, row);
      }
      out.egkl = egkl(tune_view.signs, q);
      if (have_truth) out.gkl = gkl(q_true, q);
    } catch (const SolverError& e) {
      out.failed = true;
      out.failure = e.what();
      errors[c] = std::current_exception();
    }
  });

  TuneReport report;
  report.task = task;
  report.criterion = grid.criterion;
  report.scores = std::move(scores);
  bool any_ok = false;
  for (const auto& c : report.scores) any_ok |= !c.failed;
  if (!any_ok) {
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  const auto best = select_candidate(report.scores, grid.criterion);
  report.lambda = report.scores[best].lambda;
  report.sigma = report.scores[best].sigma;
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace wsvm
