#include "wsvm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

namespace wsvm {

namespace {

constexpr double kTau = 1e-12;
constexpr double kFrozenBound = 1e-15;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void WeightedBinaryProblem::validate() const {
  const auto n = labels.size();
  if (n == 0) throw InvalidInput("weighted problem has no points");
  if (weights.size() != n) throw InvalidInput("weights and labels differ in length");
  if (static_cast<std::size_t>(gram.rows()) != n || static_cast<std::size_t>(gram.cols()) != n) {
    throw InvalidInput("Gram matrix must be " + std::to_string(n) + " x " + std::to_string(n));
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 1 && labels[i] != -1) throw InvalidInput("binary labels must be +1 or -1");
    if (!(weights[i] >= 0.0 && weights[i] <= 1.0)) throw InvalidInput("weights must lie in [0, 1]");
  }
}

DualFit solve_dual(const WeightedBinaryProblem& problem, const SolverOptions& options) {
  problem.validate();
  const auto n = static_cast<Eigen::Index>(problem.size());
  const double dn = static_cast<double>(n);
  const GramMatrix& k = problem.gram;

  // Scaled variables beta = alpha / (2 lambda) turn the problem into
  //   min 1/2 beta'Q beta - sum(beta),  0 <= beta_i <= C_i = w_i / (2 lambda n),  y'beta = 0
  // with Q = Y K Y, and the representer coefficients become c_i = y_i beta_i.
  Vector y(n), upper(n), kdiag(n);
  std::vector<char> active(static_cast<std::size_t>(n));
  bool has_pos = false, has_neg = false;
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    y[t] = problem.labels[ut];
    active[ut] = problem.weights[ut] / dn >= kFrozenBound;
    upper[t] = active[ut] ? problem.weights[ut] / (2.0 * problem.lambda * dn) : 0.0;
    kdiag[t] = k(t, t) + options.jitter;
    if (active[ut]) (y[t] > 0 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) {
    throw SolverError(SolverError::Kind::Infeasible,
                      "weighted problem needs a positively weighted point on each side");
  }

  Vector beta = Vector::Zero(n);
  Vector grad = Vector::Constant(n, -1.0);

  const double eps = options.tolerance;

  auto is_upper = [&](Eigen::Index t) { return beta[t] >= upper[t]; };
  auto is_lower = [&](Eigen::Index t) { return beta[t] <= 0.0; };
  auto dual_value = [&] {
    // 1/2 beta'Q beta - sum(beta) = 1/2 beta'(grad - 1)
    const double f = 0.5 * beta.dot(grad - Vector::Ones(n));
    return -2.0 * problem.lambda * f;
  };

  auto refresh_gradient = [&] {
    Vector v = Vector::Zero(n);
    for (Eigen::Index t = 0; t < n; ++t) {
      if (beta[t] != 0.0) v += (y[t] * beta[t]) * k.col(t);
    }
    grad = y.cwiseProduct(v) + options.jitter * beta - Vector::Ones(n);
  };

  // Exact minimization over the current free set with the bounded variables held fixed, followed
  // by the longest step toward that minimizer that stays inside the box.
  // Returns 0 when no step was taken, 1 when a bound blocked the step, 2 on a full step.
  auto subspace_step = [&]() -> int {
    std::vector<Eigen::Index> free;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (active[static_cast<std::size_t>(t)] && !is_upper(t) && !is_lower(t)) free.push_back(t);
    }
    const auto nf = static_cast<Eigen::Index>(free.size());
    if (nf < 2) return 0;
    Eigen::MatrixXd a(nf, nf);
    Vector rhs(nf), yf(nf), bf(nf);
    for (Eigen::Index r = 0; r < nf; ++r) {
      const Eigen::Index t = free[static_cast<std::size_t>(r)];
      yf[r] = y[t];
      bf[r] = beta[t];
      // grad_t restricted to the fixed variables: grad_t - (Q_FF beta_F)_t
      rhs[r] = -grad[t];
      for (Eigen::Index c = 0; c < nf; ++c) {
        const Eigen::Index u = free[static_cast<std::size_t>(c)];
        a(r, c) = y[t] * y[u] * k(t, u);
      }
      a(r, r) += options.jitter;
    }
    rhs += a * bf;
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) return 0;
    const Vector ar = llt.solve(rhs);
    const Vector ay = llt.solve(yf);
    const double yay = yf.dot(ay);
    if (!(yay > 0.0)) return 0;
    const double b = (yf.dot(ar) - yf.dot(bf)) / yay;
    const Vector target = ar - b * ay;
    if (!target.allFinite()) return 0;
    Vector dir = target - bf;
    // Ill-conditioned blocks lose the equality constraint to round-off; restore y'dir = 0.
    dir -= yf * (yf.dot(dir) / static_cast<double>(nf));
    Vector gf(nf);
    for (Eigen::Index r = 0; r < nf; ++r) gf[r] = grad[free[static_cast<std::size_t>(r)]];
    const double slope = gf.dot(dir), curve = dir.dot(a * dir);
    if (!(slope < 0.0)) return 0;
    double step = curve > 0.0 ? std::min(1.0, -slope / curve) : 1.0;
    Eigen::Index blocker = -1;
    for (Eigen::Index r = 0; r < nf; ++r) {
      const Eigen::Index t = free[static_cast<std::size_t>(r)];
      double limit = kInf;
      if (dir[r] < 0.0) limit = -bf[r] / dir[r];
      else if (dir[r] > 0.0) limit = (upper[t] - bf[r]) / dir[r];
      if (limit < step) {
        step = limit;
        blocker = r;
      }
    }
    if (step <= 0.0) return 0;
    for (Eigen::Index r = 0; r < nf; ++r) {
      const Eigen::Index t = free[static_cast<std::size_t>(r)];
      beta[t] = std::clamp(bf[r] + step * dir[r], 0.0, upper[t]);
    }
    if (blocker >= 0) {
      const Eigen::Index t = free[static_cast<std::size_t>(blocker)];
      beta[t] = dir[blocker] < 0.0 ? 0.0 : upper[t];
    }
    refresh_gradient();
    return blocker >= 0 ? 1 : 2;
  };

  DualFit out;
  std::int64_t iter = 0;
  std::int64_t next_subspace = n;
  double gap = kInf;
  while (true) {
    // Maximal violating index i from I_up, partner j by second-order gain.
    double gmax = -kInf;
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!active[static_cast<std::size_t>(t)]) continue;
      const bool up = y[t] > 0 ? !is_upper(t) : !is_lower(t);
      if (up && -y[t] * grad[t] > gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    }
    double gmax2 = -kInf;
    Eigen::Index j = -1;
    double best_gain = kInf;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!active[static_cast<std::size_t>(t)]) continue;
      const bool low = y[t] > 0 ? !is_lower(t) : !is_upper(t);
      if (!low) continue;
      const double v = y[t] * grad[t];
      gmax2 = std::max(gmax2, v);
      if (i < 0) continue;
      const double b = gmax + v;
      if (b > 0.0) {
        double a = kdiag[i] + kdiag[t] - 2.0 * k(i, t);
        if (a <= 0.0) a = kTau;
        const double gain = -(b * b) / a;
        if (gain < best_gain) {
          best_gain = gain;
          j = t;
        }
      }
    }
    gap = gmax + gmax2;
    if (i < 0 || j < 0 || gap < eps) break;
    if (iter >= options.max_iterations) {
      throw SolverError(SolverError::Kind::NotConverged,
                        "solver hit the iteration cap (" + std::to_string(options.max_iterations) +
                            ") with KKT gap " + std::to_string(gap));
    }
    ++iter;

    if (iter >= next_subspace) {
      next_subspace = iter + std::max<Eigen::Index>(20, n / 25);
      int taken = 0;
      for (Eigen::Index rep = 0; rep < n; ++rep) {
        const int status = subspace_step();
        if (status == 0) break;
        taken = status;
        if (options.record_objective) out.dual.objective_trace.push_back(dual_value());
        if (status == 2) break;
      }
      if (taken != 0) continue;
    }

    const double ci = upper[i], cj = upper[j];
    const double old_i = beta[i], old_j = beta[j];
    const double kij = k(i, j);
    double quad = kdiag[i] + kdiag[j] - 2.0 * kij;
    if (quad <= 0.0) quad = kTau;

    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = beta[i] - beta[j];
      beta[i] += delta;
      beta[j] += delta;
      if (diff > 0.0) {
        if (beta[j] < 0.0) {
          beta[j] = 0.0;
          beta[i] = diff;
        }
      } else if (beta[i] < 0.0) {
        beta[i] = 0.0;
        beta[j] = -diff;
      }
      if (diff > ci - cj) {
        if (beta[i] > ci) {
          beta[i] = ci;
          beta[j] = ci - diff;
        }
      } else if (beta[j] > cj) {
        beta[j] = cj;
        beta[i] = cj + diff;
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = beta[i] + beta[j];
      beta[i] -= delta;
      beta[j] += delta;
      if (sum > ci) {
        if (beta[i] > ci) {
          beta[i] = ci;
          beta[j] = sum - ci;
        }
      } else if (beta[j] < 0.0) {
        beta[j] = 0.0;
        beta[i] = sum;
      }
      if (sum > cj) {
        if (beta[j] > cj) {
          beta[j] = cj;
          beta[i] = sum - cj;
        }
      } else if (beta[i] < 0.0) {
        beta[i] = 0.0;
        beta[j] = sum;
      }
    }

    // grad_t += Q_ti d_i + Q_tj d_j with Q_ts = y_t y_s K_ts (jitter only on the diagonal).
    const double si = y[i] * (beta[i] - old_i);
    const double sj = y[j] * (beta[j] - old_j);
    const double* ki = k.col(i).data();
    const double* kj = k.col(j).data();
    for (Eigen::Index t = 0; t < n; ++t) grad[t] += y[t] * (ki[t] * si + kj[t] * sj);
    grad[i] += y[i] * options.jitter * si;
    grad[j] += y[j] * options.jitter * sj;

    if (options.record_objective) out.dual.objective_trace.push_back(dual_value());
  }

  // Intercept: average over free points, otherwise the midpoint of the KKT-feasible interval.
  double ub = kInf, lb = -kInf, sum_free = 0.0;
  int nr_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (!active[static_cast<std::size_t>(t)]) continue;
    const double yg = y[t] * grad[t];
    if (is_upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (is_lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++nr_free;
      sum_free += yg;
    }
  }
  double rho;
  if (nr_free > 0) rho = sum_free / nr_free;
  else if (std::isfinite(ub) && std::isfinite(lb)) rho = 0.5 * (ub + lb);
  else rho = std::isfinite(ub) ? ub : lb;

  out.coeffs = y.cwiseProduct(beta);
  out.intercept = -rho;
  out.dual.alphas = 2.0 * problem.lambda * beta;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double cap = problem.weights[static_cast<std::size_t>(t)] / dn;
    if (is_upper(t) || out.dual.alphas[t] > cap) out.dual.alphas[t] = active[static_cast<std::size_t>(t)] ? cap : 0.0;
  }
  out.dual.kkt_residual = std::max(0.0, gap);
  out.dual.iterations = iter;
  out.dual.objective = dual_value();
  return out;
}

double dual_objective(const WeightedBinaryProblem& problem, const Vector& alphas) {
  const auto n = static_cast<Eigen::Index>(problem.size());
  Vector ya(n);
  for (Eigen::Index t = 0; t < n; ++t) ya[t] = problem.labels[static_cast<std::size_t>(t)] * alphas[t];
  return alphas.sum() - ya.dot(problem.gram * ya) / (4.0 * problem.lambda);
}

Vector fitted_values(const WeightedBinaryProblem& problem, const Vector& coeffs, double intercept) {
  return (problem.gram * coeffs).array() + intercept;
}

double primal_objective(const WeightedBinaryProblem& problem, const Vector& coeffs, double intercept) {
  const Vector f = fitted_values(problem, coeffs, intercept);
  double loss = 0.0;
  for (std::size_t t = 0; t < problem.size(); ++t) {
    const double margin = problem.labels[t] * f[static_cast<Eigen::Index>(t)];
    loss += problem.weights[t] * std::max(0.0, 1.0 - margin);
  }
  return loss / static_cast<double>(problem.size()) +
         problem.lambda * coeffs.dot(problem.gram * coeffs);
}

DecisionFunction::DecisionFunction(Matrix support, Vector coeffs, double intercept, KernelSpec kernel)
    : support_(std::move(support)), coeffs_(std::move(coeffs)), intercept_(intercept), kernel_(kernel) {
  if (support_.rows() != coeffs_.size()) throw InvalidInput("support rows and coefficients differ");
  kernel_.validate();
}

double DecisionFunction::evaluate(std::span<const double> x) const {
  if (x.size() != dim() && support_.rows() > 0) {
    throw InvalidInput("decision function expects dimension " + std::to_string(dim()) + ", got " +
                       std::to_string(x.size()));
  }
  double f = intercept_;
  for (Eigen::Index i = 0; i < support_.rows(); ++i) {
    const std::span<const double> s(support_.data() + i * support_.cols(), dim());
    f += coeffs_[i] * kernel_eval(kernel_, s, x);
  }
  return f;
}

Vector DecisionFunction::evaluate(const Matrix& points) const {
  if (support_.rows() == 0) return Vector::Constant(points.rows(), intercept_);
  if (static_cast<std::size_t>(points.cols()) != dim()) {
    throw InvalidInput("decision function expects dimension " + std::to_string(dim()) + ", got " +
                       std::to_string(points.cols()));
  }
  return evaluate_from_gram(gram(points, support_, kernel_));
}

Vector DecisionFunction::evaluate_from_gram(const GramMatrix& cross) const {
  if (support_.rows() == 0) return Vector::Constant(cross.rows(), intercept_);
  return (cross * coeffs_).array() + intercept_;
}

DecisionFunction make_decision_function(const DualFit& fit, const Matrix& training_points,
                                        const KernelSpec& kernel) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < fit.coeffs.size(); ++i) {
    if (fit.coeffs[i] != 0.0) keep.push_back(i);
  }
  Matrix support(static_cast<Eigen::Index>(keep.size()), training_points.cols());
  Vector coeffs(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    support.row(static_cast<Eigen::Index>(r)) = training_points.row(keep[r]);
    coeffs[static_cast<Eigen::Index>(r)] = fit.coeffs[keep[r]];
  }
  return DecisionFunction(std::move(support), std::move(coeffs), fit.intercept, kernel);
}

SolveResult solve(const Matrix& points, std::span<const int> labels, std::span<const double> weights,
                  double lambda, const KernelSpec& kernel, const SolverOptions& options) {
  const GramMatrix k = gram(points, kernel);
  const WeightedBinaryProblem problem{k, labels, weights, lambda};
  DualFit fit = solve_dual(problem, options);
  return {make_decision_function(fit, points, kernel), std::move(fit.dual)};
}

}  // namespace wsvm
