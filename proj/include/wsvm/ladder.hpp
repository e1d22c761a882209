#pragma once

#include <span>
#include <string>
#include <vector>

#include "wsvm/dataset.hpp"
#include "wsvm/solver.hpp"

namespace wsvm {

/// pi_j = (j - 1) / M for j = 1..M+1; pis.front() == 0 and pis.back() == 1.
struct WeightGrid {
  int m = 2;
  std::vector<double> pis;

  /// The trained weights pi_2..pi_M.
  std::span<const double> interior() const { return {pis.data() + 1, pis.size() - 2}; }
  std::size_t num_rungs() const { return pis.size() - 2; }
  double spacing() const { return 1.0 / m; }
};

WeightGrid make_weight_grid(int m);

/// M = floor(sqrt(n_train)).
WeightGrid default_weight_grid(std::size_t n_train);

/// One binary problem: `positive` against either class `negative` or, when negative == kPooled,
/// the pooled complement of `positive`.
struct BinaryTask {
  static constexpr Label kPooled = 0;

  Label positive = 1;
  Label negative = 2;

  static BinaryTask pair(Label j, Label k) { return {j, k}; }
  static BinaryTask one_vs_rest(Label j) { return {j, kPooled}; }

  bool pooled() const { return negative == kPooled; }
  /// Pair tasks with the smaller label on the positive side; pooled tasks unchanged.
  BinaryTask canonical() const;
  std::string name() const;

  bool operator==(const BinaryTask&) const = default;
  auto operator<=>(const BinaryTask&) const = default;
};

/// Rows of a dataset taking part in a task, with their +1/-1 labels.
struct TaskView {
  std::vector<std::size_t> indices;
  std::vector<int> signs;
};

/// Throws InvalidInput when either side is empty.
TaskView task_view(const LabeledDataset& dataset, const BinaryTask& task);

/// Rung m weights: 1 - pi on the positive side, pi on the negative side.
std::vector<double> rung_weights(std::span<const int> signs, double pi);

/// The M-1 classifiers of one task trained at a shared (lambda, sigma).
struct ClassifierLadder {
  BinaryTask task;
  WeightGrid grid;
  double lambda = 1.0;
  KernelSpec kernel;
  std::vector<DecisionFunction> rungs;  // rungs[r] is trained at grid.interior()[r]
};

/// Sign-pattern estimate from the rung values at one point:
///   1/2 [ min{pi_m : f_m(x) < 0} + max{pi_m : f_m(x) > 0} ]
/// with f(pi_1 = 0) > 0, f(pi_{M+1} = 1) < 0 and f_m(x) == 0 counted as negative.
double prob_from_rung_values(const WeightGrid& grid, std::span<const double> rung_values);

/// Solver failure on one rung, tagged with the offending weight.
class RungError : public SolverError {
 public:
  RungError(const SolverError& cause, double pi);
  double pi() const { return pi_; }

 private:
  double pi_;
};

/// Dual fits for every rung on a precomputed training Gram matrix. Rungs are independent solves.
std::vector<DualFit> train_rungs(const GramMatrix& gram, std::span<const int> signs,
                                 const WeightGrid& grid, double lambda,
                                 const SolverOptions& options = {});

ClassifierLadder train_ladder(const LabeledDataset& dataset, const BinaryTask& task,
                              const WeightGrid& grid, double lambda, const KernelSpec& kernel,
                              const SolverOptions& options = {});

/// Estimate of P(Y = task.positive | x, Y in task) at one point.
double pairwise_prob(const ClassifierLadder& ladder, std::span<const double> x);

/// Same estimate at every row of points.
std::vector<double> pairwise_prob(const ClassifierLadder& ladder, const Matrix& points);

/// True when the rung signs at x are not non-increasing in pi (diagnostic only).
bool rung_signs_non_monotone(std::span<const double> rung_values);

}  // namespace wsvm
