#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wsvm {

/// Row-major feature matrix: one observation per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Class labels are 1-based throughout the library.
using Label = int;

/// Raised for malformed inputs: bad shapes, labels out of range, empty classes.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// n points in R^p with labels in {1..K} and the per-class index sets.
class LabeledDataset {
 public:
  LabeledDataset() = default;

  /// num_classes == 0 infers K from the largest label.
  LabeledDataset(Matrix features, std::vector<Label> labels, int num_classes = 0);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features_.cols()); }
  int num_classes() const { return num_classes_; }

  const Matrix& features() const { return features_; }
  const std::vector<Label>& labels() const { return labels_; }
  Label label(std::size_t i) const { return labels_[i]; }

  std::span<const double> point(std::size_t i) const {
    return {features_.data() + i * dim(), dim()};
  }

  /// Indices of the points in class j (1-based label), ascending.
  const std::vector<std::size_t>& class_indices(Label j) const;
  std::size_t class_size(Label j) const { return class_indices(j).size(); }

  /// Number of labels j with a nonempty S_j.
  int num_present_classes() const;

  /// Rows selected in the given order; K is preserved.
  LabeledDataset subset(std::span<const std::size_t> indices) const;

 private:
  Matrix features_;
  std::vector<Label> labels_;
  int num_classes_ = 0;
  std::vector<std::vector<std::size_t>> class_index_;
};

double euclidean_distance(std::span<const double> a, std::span<const double> b);

}  // namespace wsvm
