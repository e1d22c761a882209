#include "wsvm/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace wsvm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_aligned(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInput("probability tables are " + std::to_string(a.rows()) + "x" +
                       std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                       std::to_string(b.cols()));
  }
  if (a.rows() == 0) throw InvalidInput("probability tables are empty");
}

/// p log(p / q) with 0 log 0 = 0 and +inf when q = 0 < p.
double kl_term(double p, double q) {
  if (p <= 0.0) return 0.0;
  if (q <= 0.0) return kInf;
  return p * std::log(p / q);
}

}  // namespace

double l1_error(const Eigen::MatrixXd& p_true, const Eigen::MatrixXd& p_hat) {
  check_aligned(p_true, p_hat);
  return (p_hat - p_true).cwiseAbs().sum() / static_cast<double>(p_true.rows());
}

double l2_error(const Eigen::MatrixXd& p_true, const Eigen::MatrixXd& p_hat) {
  check_aligned(p_true, p_hat);
  return (p_hat - p_true).squaredNorm() / static_cast<double>(p_true.rows());
}

double egkl_loss(const Eigen::MatrixXd& p_true, const Eigen::MatrixXd& p_hat) {
  check_aligned(p_true, p_hat);
  double s = 0.0;
  for (Eigen::Index i = 0; i < p_true.rows(); ++i) {
    for (Eigen::Index j = 0; j < p_true.cols(); ++j) s += kl_term(p_true(i, j), p_hat(i, j));
  }
  return s / static_cast<double>(p_true.rows());
}

double gkl_loss(const Eigen::MatrixXd& p_true, const Eigen::MatrixXd& p_hat) {
  check_aligned(p_true, p_hat);
  double s = 0.0;
  for (Eigen::Index i = 0; i < p_true.rows(); ++i) {
    for (Eigen::Index j = 0; j < p_true.cols(); ++j) {
      const double p = p_true(i, j), q = p_hat(i, j);
      s += kl_term(p, q) + kl_term(1.0 - p, 1.0 - q);
    }
  }
  return s / static_cast<double>(p_true.rows());
}

double test_error(std::span<const Label> labels_true, std::span<const Label> labels_pred) {
  if (labels_true.size() != labels_pred.size()) {
    throw InvalidInput("label lists differ in length (" + std::to_string(labels_true.size()) + " vs " +
                       std::to_string(labels_pred.size()) + ")");
  }
  if (labels_true.empty()) throw InvalidInput("label lists are empty");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < labels_true.size(); ++i) wrong += labels_true[i] != labels_pred[i];
  return static_cast<double>(wrong) / static_cast<double>(labels_true.size());
}

MeanSe mean_se(std::span<const double> values) {
  MeanSe out;
  out.count = values.size();
  if (values.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), 0};
  double s = 0.0;
  for (const double v : values) {
    if (std::isinf(v)) return {kInf, std::numeric_limits<double>::quiet_NaN(), values.size()};
    s += v;
  }
  out.mean = s / static_cast<double>(values.size());
  if (values.size() < 2) {
    out.se = 0.0;
    return out;
  }
  double ss = 0.0;
  for (const double v : values) ss += (v - out.mean) * (v - out.mean);
  out.se = std::sqrt(ss / static_cast<double>(values.size() - 1)) / std::sqrt(static_cast<double>(values.size()));
  return out;
}

std::string format_scaled(const MeanSe& v, double scale, int digits) {
  auto one = [&](double x) -> std::string {
    if (std::isnan(x)) return "NaN";
    if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x * scale);
    return buf;
  };
  if (v.count == 0) return "NA (NA)";
  return one(v.mean) + " (" + one(v.se) + ")";
}

}  // namespace wsvm
