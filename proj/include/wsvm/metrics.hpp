#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsvm/dataset.hpp"

namespace wsvm {

// Probability losses over n_test points; rows of p_true and p_hat are aligned K-vectors.

/// (1/n) sum_i sum_j |p_hat_ij - p_ij|
double l1_error(const Eigen::MatrixXd& p_true, const Eigen::MatrixXd& p_hat);
/// (1/n) sum_i sum_j (p_hat_ij - p_ij)^2
double l2_error(const Eigen::MatrixXd& p_true, const Eigen::MatrixXd& p_hat);
/// (1/n) sum_i sum_j p_ij log(p_ij / p_hat_ij); +inf when some p_hat_ij = 0 < p_ij.
double egkl_loss(const Eigen::MatrixXd& p_true, const Eigen::MatrixXd& p_hat);
/// egkl_loss plus the (1 - p) log((1 - p) / (1 - p_hat)) complement terms.
double gkl_loss(const Eigen::MatrixXd& p_true, const Eigen::MatrixXd& p_hat);

/// Misclassification fraction.
double test_error(std::span<const Label> labels_true, std::span<const Label> labels_pred);

/// One evaluated run of one scheme. Losses are stored unscaled; reports multiply by 100.
struct EvalResult {
  std::string scheme;
  std::string source;  // example or dataset identity
  std::uint64_t seed = 0;
  double l1 = 0.0, l2 = 0.0, egkl = 0.0, gkl = 0.0;
  double te1 = 0.0;
  std::optional<double> te2;
  double runtime_seconds = 0.0;
  std::optional<int> k_star;
};

/// Mean and standard error sigma / sqrt(n) (sample standard deviation). Any +inf input gives +inf
/// mean and NaN error, printed as Inf (NaN).
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};
MeanSe mean_se(std::span<const double> values);

/// Report formatting with the x100 convention: "47.9 (0.2)", "Inf (NaN)", "NA (NA)".
std::string format_scaled(const MeanSe& v, double scale = 100.0, int digits = 1);

}  // namespace wsvm
