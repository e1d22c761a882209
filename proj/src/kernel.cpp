#include "wsvm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace wsvm {

namespace {

void check_dims(std::span<const double> x, std::span<const double> z) {
  if (x.size() != z.size()) {
    throw InvalidInput("kernel arguments have dimensions " + std::to_string(x.size()) + " and " +
                       std::to_string(z.size()));
  }
}

double squared_distance(const double* x, const double* z, std::size_t p) {
  double s = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    const double d = x[k] - z[k];
    s += d * d;
  }
  return s;
}

double dot(const double* x, const double* z, std::size_t p) {
  double s = 0.0;
  for (std::size_t k = 0; k < p; ++k) s += x[k] * z[k];
  return s;
}

}  // namespace

void KernelSpec::validate() const {
  if (kind == KernelKind::Rbf && !(sigma > 0.0 && std::isfinite(sigma))) {
    throw InvalidInput("RBF bandwidth must be positive, got " + std::to_string(sigma));
  }
}

double rbf_eval(std::span<const double> x, std::span<const double> z, double sigma) {
  check_dims(x, z);
  if (!(sigma > 0.0)) throw InvalidInput("RBF bandwidth must be positive");
  return std::exp(-squared_distance(x.data(), z.data(), x.size()) / (sigma * sigma));
}

double linear_eval(std::span<const double> x, std::span<const double> z) {
  check_dims(x, z);
  return dot(x.data(), z.data(), x.size());
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> z) {
  return spec.kind == KernelKind::Rbf ? rbf_eval(x, z, spec.sigma) : linear_eval(x, z);
}

GramMatrix gram(const Matrix& points_a, const Matrix& points_b, const KernelSpec& spec) {
  spec.validate();
  if (points_a.rows() == 0 || points_b.rows() == 0) throw InvalidInput("gram: empty point list");
  if (points_a.cols() != points_b.cols()) {
    throw InvalidInput("gram: point sets have dimensions " + std::to_string(points_a.cols()) +
                       " and " + std::to_string(points_b.cols()));
  }
  const auto n = points_a.rows();
  const auto m = points_b.rows();
  const auto p = static_cast<std::size_t>(points_a.cols());
  const double inv_s2 = 1.0 / (spec.sigma * spec.sigma);
  GramMatrix values(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double* b = points_b.data() + j * points_b.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double* a = points_a.data() + i * points_a.cols();
      values(i, j) = spec.kind == KernelKind::Rbf ? std::exp(-squared_distance(a, b, p) * inv_s2)
                                                  : dot(a, b, p);
    }
  }
  return values;
}

GramMatrix gram(const Matrix& points, const KernelSpec& spec) {
  spec.validate();
  if (points.rows() == 0) throw InvalidInput("gram: empty point list");
  const auto n = points.rows();
  const auto p = static_cast<std::size_t>(points.cols());
  const double inv_s2 = 1.0 / (spec.sigma * spec.sigma);
  GramMatrix values(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double* b = points.data() + j * points.cols();
    for (Eigen::Index i = j; i < n; ++i) {
      const double* a = points.data() + i * points.cols();
      const double v = spec.kind == KernelKind::Rbf ? std::exp(-squared_distance(a, b, p) * inv_s2)
                                                    : dot(a, b, p);
      values(i, j) = v;
      values(j, i) = v;
    }
  }
  return values;
}

double median_sigma(const LabeledDataset& dataset) {
  if (dataset.num_present_classes() < 2) {
    throw InvalidInput("median_sigma needs at least two distinct labels");
  }
  std::vector<double> dists;
  const std::size_t n = dataset.size();
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = s + 1; t < n; ++t) {
      if (dataset.label(s) != dataset.label(t)) {
        dists.push_back(euclidean_distance(dataset.point(s), dataset.point(t)));
      }
    }
  }
  const std::size_t mid = dists.size() / 2;
  std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
  const double upper = dists[mid];
  if (dists.size() % 2 == 1) return upper;
  const double lower = *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace wsvm
