#include "wsvm/dataset.hpp"

#include <algorithm>
#include <cmath>

namespace wsvm {

LabeledDataset::LabeledDataset(Matrix features, std::vector<Label> labels, int num_classes)
    : features_(std::move(features)), labels_(std::move(labels)), num_classes_(num_classes) {
  if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
    throw InvalidInput("feature rows (" + std::to_string(features_.rows()) +
                       ") do not match label count (" + std::to_string(labels_.size()) + ")");
  }
  if (num_classes_ == 0 && !labels_.empty()) {
    num_classes_ = *std::max_element(labels_.begin(), labels_.end());
  }
  if (num_classes_ < 0) throw InvalidInput("number of classes must be nonnegative");
  class_index_.assign(static_cast<std::size_t>(num_classes_), {});
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const Label y = labels_[i];
    if (y < 1 || y > num_classes_) {
      throw InvalidInput("label " + std::to_string(y) + " at row " + std::to_string(i) +
                         " outside 1.." + std::to_string(num_classes_));
    }
    class_index_[static_cast<std::size_t>(y - 1)].push_back(i);
  }
}

const std::vector<std::size_t>& LabeledDataset::class_indices(Label j) const {
  if (j < 1 || j > num_classes_) {
    throw InvalidInput("class " + std::to_string(j) + " outside 1.." + std::to_string(num_classes_));
  }
  return class_index_[static_cast<std::size_t>(j - 1)];
}

int LabeledDataset::num_present_classes() const {
  return static_cast<int>(std::count_if(class_index_.begin(), class_index_.end(),
                                        [](const auto& s) { return !s.empty(); }));
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  Matrix x(static_cast<Eigen::Index>(indices.size()), features_.cols());
  std::vector<Label> y(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= size()) throw InvalidInput("subset index out of range");
    x.row(static_cast<Eigen::Index>(r)) = features_.row(static_cast<Eigen::Index>(indices[r]));
    y[r] = labels_[indices[r]];
  }
  return LabeledDataset(std::move(x), std::move(y), num_classes_);
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace wsvm
