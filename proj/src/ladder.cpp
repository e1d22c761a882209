#include "wsvm/ladder.hpp"

#include <cmath>
#include <map>

namespace wsvm {

WeightGrid make_weight_grid(int m) {
  if (m < 2) throw InvalidInput("weight grid needs M >= 2, got " + std::to_string(m));
  WeightGrid grid;
  grid.m = m;
  grid.pis.resize(static_cast<std::size_t>(m) + 1);
  for (int j = 0; j <= m; ++j) grid.pis[static_cast<std::size_t>(j)] = static_cast<double>(j) / m;
  return grid;
}

WeightGrid default_weight_grid(std::size_t n_train) {
  if (n_train < 4) throw InvalidInput("default weight grid needs at least 4 training points");
  auto m = static_cast<int>(std::sqrt(static_cast<double>(n_train)));
  // Guard against sqrt rounding just below an exact square.
  while (static_cast<std::size_t>(m + 1) * static_cast<std::size_t>(m + 1) <= n_train) ++m;
  while (static_cast<std::size_t>(m) * static_cast<std::size_t>(m) > n_train) --m;
  return make_weight_grid(m);
}

BinaryTask BinaryTask::canonical() const {
  if (pooled() || positive < negative) return *this;
  return {negative, positive};
}

std::string BinaryTask::name() const {
  return std::to_string(positive) + (pooled() ? "-vs-rest" : "-vs-" + std::to_string(negative));
}

TaskView task_view(const LabeledDataset& dataset, const BinaryTask& task) {
  if (task.positive < 1 || task.positive > dataset.num_classes() ||
      (!task.pooled() && (task.negative < 1 || task.negative > dataset.num_classes())) ||
      task.positive == task.negative) {
    throw InvalidInput("task " + task.name() + " is not valid for " +
                       std::to_string(dataset.num_classes()) + " classes");
  }
  TaskView view;
  std::size_t npos = 0, nneg = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Label y = dataset.label(i);
    if (y == task.positive) {
      view.indices.push_back(i);
      view.signs.push_back(1);
      ++npos;
    } else if (task.pooled() || y == task.negative) {
      view.indices.push_back(i);
      view.signs.push_back(-1);
      ++nneg;
    }
  }
  if (npos == 0 || nneg == 0) {
    throw InvalidInput("task " + task.name() + " has an empty side in the dataset");
  }
  return view;
}

std::vector<double> rung_weights(std::span<const int> signs, double pi) {
  std::vector<double> w(signs.size());
  for (std::size_t i = 0; i < signs.size(); ++i) w[i] = signs[i] > 0 ? 1.0 - pi : pi;
  return w;
}

double prob_from_rung_values(const WeightGrid& grid, std::span<const double> rung_values) {
  if (rung_values.size() != grid.num_rungs()) {
    throw InvalidInput("expected " + std::to_string(grid.num_rungs()) + " rung values");
  }
  double lowest_negative = 1.0;  // pi_{M+1} is negative by convention
  double highest_positive = 0.0; // pi_1 is positive by convention
  const auto interior = grid.interior();
  for (std::size_t r = 0; r < rung_values.size(); ++r) {
    if (rung_values[r] > 0.0) {
      highest_positive = std::max(highest_positive, interior[r]);
    } else {
      lowest_negative = std::min(lowest_negative, interior[r]);
    }
  }
  return 0.5 * (lowest_negative + highest_positive);
}

bool rung_signs_non_monotone(std::span<const double> rung_values) {
  bool seen_negative = false;
  for (const double v : rung_values) {
    if (v > 0.0 && seen_negative) return true;
    if (v <= 0.0) seen_negative = true;
  }
  return false;
}

RungError::RungError(const SolverError& cause, double pi)
    : SolverError(cause.kind(), std::string(cause.what()) + " at pi = " + std::to_string(pi)),
      pi_(pi) {}

std::vector<DualFit> train_rungs(const GramMatrix& gram, std::span<const int> signs,
                                 const WeightGrid& grid, double lambda, const SolverOptions& options) {
  std::vector<DualFit> fits;
  fits.reserve(grid.num_rungs());
  for (const double pi : grid.interior()) {
    const std::vector<double> w = rung_weights(signs, pi);
    const WeightedBinaryProblem problem{gram, signs, w, lambda};
    try {
      fits.push_back(solve_dual(problem, options));
    } catch (const SolverError& e) {
      throw RungError(e, pi);
    }
  }
  return fits;
}

ClassifierLadder train_ladder(const LabeledDataset& dataset, const BinaryTask& task,
                              const WeightGrid& grid, double lambda, const KernelSpec& kernel,
                              const SolverOptions& options) {
  if (!(lambda > 0.0)) throw InvalidInput("lambda must be positive");
  const TaskView view = task_view(dataset, task);
  const LabeledDataset sub = dataset.subset(view.indices);
  const GramMatrix k = gram(sub.features(), kernel);
  const std::vector<DualFit> fits = train_rungs(k, view.signs, grid, lambda, options);

  ClassifierLadder ladder{task, grid, lambda, kernel, {}};
  ladder.rungs.reserve(fits.size());
  for (const DualFit& fit : fits) {
    ladder.rungs.push_back(make_decision_function(fit, sub.features(), kernel));
  }
  return ladder;
}

double pairwise_prob(const ClassifierLadder& ladder, std::span<const double> x) {
  std::vector<double> values(ladder.rungs.size());
  for (std::size_t r = 0; r < ladder.rungs.size(); ++r) values[r] = ladder.rungs[r].evaluate(x);
  return prob_from_rung_values(ladder.grid, values);
}

std::vector<double> pairwise_prob(const ClassifierLadder& ladder, const Matrix& points) {
  const auto npts = points.rows();
  if (ladder.rungs.empty()) throw InvalidInput("ladder has no rungs");
  const Eigen::Index p = points.cols();

  // Rungs share training points, so evaluate one kernel block against the union of supports.
  std::map<std::vector<double>, Eigen::Index> slot;
  std::vector<std::vector<Eigen::Index>> rung_slots(ladder.rungs.size());
  for (std::size_t r = 0; r < ladder.rungs.size(); ++r) {
    const Matrix& s = ladder.rungs[r].support();
    if (s.rows() > 0 && s.cols() != p) {
      throw InvalidInput("ladder expects dimension " + std::to_string(s.cols()) + ", got " +
                         std::to_string(p));
    }
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      std::vector<double> key(s.row(i).data(), s.row(i).data() + p);
      auto [it, inserted] = slot.try_emplace(std::move(key), static_cast<Eigen::Index>(slot.size()));
      rung_slots[r].push_back(it->second);
    }
  }
  Eigen::MatrixXd values(npts, static_cast<Eigen::Index>(ladder.rungs.size()));
  if (slot.empty()) {
    for (std::size_t r = 0; r < ladder.rungs.size(); ++r) {
      values.col(static_cast<Eigen::Index>(r)).setConstant(ladder.rungs[r].intercept());
    }
  } else {
    Matrix uni(static_cast<Eigen::Index>(slot.size()), p);
    for (const auto& [key, idx] : slot) {
      for (Eigen::Index c = 0; c < p; ++c) uni(idx, c) = key[static_cast<std::size_t>(c)];
    }
    Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(uni.rows(), values.cols());
    for (std::size_t r = 0; r < ladder.rungs.size(); ++r) {
      const Vector& c = ladder.rungs[r].coeffs();
      for (std::size_t t = 0; t < rung_slots[r].size(); ++t) {
        coef(rung_slots[r][t], static_cast<Eigen::Index>(r)) += c[static_cast<Eigen::Index>(t)];
      }
    }
    const GramMatrix cross = gram(points, uni, ladder.kernel);
    values.noalias() = cross * coef;
    for (std::size_t r = 0; r < ladder.rungs.size(); ++r) {
      values.col(static_cast<Eigen::Index>(r)).array() += ladder.rungs[r].intercept();
    }
  }
  std::vector<double> q(static_cast<std::size_t>(npts));
  std::vector<double> row(ladder.rungs.size());
  for (Eigen::Index i = 0; i < npts; ++i) {
    for (std::size_t r = 0; r < row.size(); ++r) row[r] = values(i, static_cast<Eigen::Index>(r));
    q[static_cast<std::size_t>(i)] = prob_from_rung_values(ladder.grid, row);
  }
  return q;
}

}  // namespace wsvm
