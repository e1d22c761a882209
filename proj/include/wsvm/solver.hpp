#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wsvm/kernel.hpp"

namespace wsvm {

/// One weighted binary SVM on precomputed kernel values.
///
/// Minimizes (1/n) sum_i w_i [1 - y_i f(x_i)]_+ + lambda * c'Kc over f = d + sum_i c_i K(x_i, .).
/// Callers own the referenced storage; the view must not outlive it.
struct WeightedBinaryProblem {
  const GramMatrix& gram;
  std::span<const int> labels;      // +1 / -1
  std::span<const double> weights;  // nonnegative, in [0, 1]
  double lambda;

  std::size_t size() const { return labels.size(); }
  void validate() const;
};

struct SolverOptions {
  double tolerance = 1e-6;
  /// Cap on two-variable updates per solve.
  std::int64_t max_iterations = 100000;
  double jitter = 1e-10;
  /// Record the dual objective after every update (testing aid, O(n) per update).
  bool record_objective = false;
};

struct DualSolution {
  Vector alphas;  // 0 <= alpha_i <= w_i / n
  double kkt_residual = 0.0;
  std::int64_t iterations = 0;
  double objective = 0.0;
  std::vector<double> objective_trace;
};

/// Representer coefficients and intercept of the trained function, indexed like the problem.
struct DualFit {
  Vector coeffs;
  double intercept = 0.0;
  DualSolution dual;
};

class SolverError : public std::runtime_error {
 public:
  enum class Kind { Infeasible, NotConverged };
  SolverError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Solves the box- and equality-constrained dual
///   max sum(alpha) - 1/(4 lambda) alpha'(Y K Y) alpha,  0 <= alpha_i <= w_i/n,  sum alpha_i y_i = 0
/// by two-variable working-set descent with second-order pair selection.
/// Every few updates an exact minimization over the current free set (active-set steps) speeds up
/// the ill-conditioned small-lambda regime.
DualFit solve_dual(const WeightedBinaryProblem& problem, const SolverOptions& options = {});

/// Dual objective at alpha (no diagonal jitter).
double dual_objective(const WeightedBinaryProblem& problem, const Vector& alphas);

/// Weighted hinge loss plus lambda * c'Kc at (coeffs, intercept).
double primal_objective(const WeightedBinaryProblem& problem, const Vector& coeffs, double intercept);

/// f(x_i) for every training point of the problem.
Vector fitted_values(const WeightedBinaryProblem& problem, const Vector& coeffs, double intercept);

/// f(x) = d + sum_i c_i K(x_i, x) over the retained support points.
class DecisionFunction {
 public:
  DecisionFunction() = default;
  DecisionFunction(Matrix support, Vector coeffs, double intercept, KernelSpec kernel);

  double evaluate(std::span<const double> x) const;
  /// Values at every row of points.
  Vector evaluate(const Matrix& points) const;
  /// Values from a precomputed kernel block gram(points, support()).
  Vector evaluate_from_gram(const GramMatrix& cross) const;

  const Matrix& support() const { return support_; }
  const Vector& coeffs() const { return coeffs_; }
  double intercept() const { return intercept_; }
  const KernelSpec& kernel() const { return kernel_; }
  std::size_t dim() const { return static_cast<std::size_t>(support_.cols()); }

 private:
  Matrix support_;
  Vector coeffs_;
  double intercept_ = 0.0;
  KernelSpec kernel_;
};

/// Keeps the training points with nonzero coefficients as the support set.
DecisionFunction make_decision_function(const DualFit& fit, const Matrix& training_points,
                                        const KernelSpec& kernel);

struct SolveResult {
  DecisionFunction function;
  DualSolution dual;
};

/// Builds the Gram matrix and solves; convenience entry for one-off problems.
SolveResult solve(const Matrix& points, std::span<const int> labels, std::span<const double> weights,
                  double lambda, const KernelSpec& kernel, const SolverOptions& options = {});

}  // namespace wsvm
