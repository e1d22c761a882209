#pragma once

#include <span>

#include "wsvm/dataset.hpp"

namespace wsvm {

enum class KernelKind { Rbf, Linear };

/// Kernel choice. The RBF form is exp(-||x - z||^2 / sigma^2); sigma is unused for Linear.
struct KernelSpec {
  KernelKind kind = KernelKind::Rbf;
  double sigma = 1.0;

  static KernelSpec rbf(double sigma) { return {KernelKind::Rbf, sigma}; }
  static KernelSpec linear() { return {KernelKind::Linear, 1.0}; }

  /// Throws InvalidInput when an RBF bandwidth is not a positive finite number.
  void validate() const;

  bool operator==(const KernelSpec&) const = default;
};

/// Dense n x m kernel matrix, column-major so that columns are contiguous.
using GramMatrix = Eigen::MatrixXd;

double rbf_eval(std::span<const double> x, std::span<const double> z, double sigma);
double linear_eval(std::span<const double> x, std::span<const double> z);
double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> z);

/// values(i, j) = K(a_i, b_j). Entry-wise fill, so the result does not depend on threading.
GramMatrix gram(const Matrix& points_a, const Matrix& points_b, const KernelSpec& spec);
GramMatrix gram(const Matrix& points, const KernelSpec& spec);

/// Median of the cross-class pairwise distances {||x_s - x_t|| : y_s != y_t}.
/// Even counts average the two central order statistics.
double median_sigma(const LabeledDataset& dataset);

}  // namespace wsvm
