#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wsvm/metrics.hpp"

using namespace wsvm;

namespace {

Eigen::MatrixXd row(std::initializer_list<double> v) {
  Eigen::MatrixXd m(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index j = 0;
  for (double x : v) m(0, j++) = x;
  return m;
}

Eigen::MatrixXd random_simplex_rows(oracle::Gen& gen, int n, int k) {
  Eigen::MatrixXd m(n, k);
  for (int i = 0; i < n; ++i) {
    const auto p = gen.simplex(k);
    for (int j = 0; j < k; ++j) m(i, j) = p[j];
  }
  return m;
}

}  // namespace

TEST_CASE("probability losses on hand examples") {
  const Eigen::MatrixXd p = row({0.5, 0.3, 0.2}), q = row({0.4, 0.4, 0.2});
  CHECK(l1_error(p, q) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(l2_error(p, q) == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(l1_error(p, p) == 0.0);
  CHECK(l2_error(p, p) == 0.0);

  const Eigen::MatrixXd a = row({0.5, 0.5}), b = row({0.25, 0.75});
  CHECK(egkl_loss(a, b) == doctest::Approx(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3)).epsilon(1e-12));
  CHECK(egkl_loss(a, b) == doctest::Approx(0.143841).epsilon(1e-6));
  CHECK(gkl_loss(a, b) == doctest::Approx(0.287682).epsilon(1e-6));
  CHECK(gkl_loss(a, b) == doctest::Approx(2 * egkl_loss(a, b)).epsilon(1e-12));
  CHECK(egkl_loss(a, a) == 0.0);
  CHECK(gkl_loss(a, a) == 0.0);

  CHECK(std::isinf(egkl_loss(a, row({0.0, 1.0}))));
  CHECK(std::isinf(gkl_loss(a, row({0.0, 1.0}))));
  CHECK(std::isinf(gkl_loss(row({0.5, 0.5, 0.0}), row({0.5, 0.5, 1.0}))));
  // A zero estimate where the truth is zero contributes nothing.
  CHECK(std::isfinite(egkl_loss(row({1.0, 0.0}), row({0.9, 0.0}))));

  CHECK_THROWS_AS(l1_error(p, a), InvalidInput);
  CHECK_THROWS_AS(l2_error(Eigen::MatrixXd(2, 3), p), InvalidInput);
}

TEST_CASE("test error") {
  const std::vector<Label> a{1, 2, 3, 4}, b{1, 2, 3, 4}, c{2, 3, 4, 1}, d{1, 2, 4, 3};
  CHECK(test_error(a, b) == 0.0);
  CHECK(test_error(a, c) == 1.0);
  CHECK(test_error(a, d) == 0.5);
  const std::vector<Label> shorter{1, 2};
  CHECK_THROWS_AS(test_error(a, shorter), InvalidInput);
}

TEST_CASE("property: loss orderings and zero at equality") {
  oracle::Gen gen(71);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = gen.integer(1, 30), k = gen.integer(2, 9);
    const Eigen::MatrixXd p = random_simplex_rows(gen, n, k);
    const Eigen::MatrixXd q = random_simplex_rows(gen, n, k);
    const double l1 = l1_error(p, q), l2 = l2_error(p, q);
    CHECK(l1 <= 2.0 + 1e-12);
    CHECK(l2 <= l1 + 1e-15);
    CHECK(l1 > 0.0);
    CHECK(egkl_loss(p, q) >= 0.0);
    CHECK(gkl_loss(p, q) >= egkl_loss(p, q));
    CHECK(std::abs(l1_error(p, p)) <= 1e-12);
    CHECK(std::abs(l2_error(p, p)) <= 1e-12);
    CHECK(std::abs(egkl_loss(p, p)) <= 1e-12);
    CHECK(std::abs(gkl_loss(p, p)) <= 1e-12);
  }
}

TEST_CASE("mean and standard error") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const MeanSe m = mean_se(v);
  CHECK(m.mean == 2.5);
  CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-14));
  CHECK(m.count == 4);
  const std::vector<double> one{0.3};
  CHECK(mean_se(one).se == 0.0);
  const std::vector<double> inf{0.1, INFINITY};
  const MeanSe mi = mean_se(inf);
  CHECK(std::isinf(mi.mean));
  CHECK(std::isnan(mi.se));
}

TEST_CASE("x100 formatting") {
  CHECK(format_scaled({0.479, 0.002, 10}) == "47.9 (0.2)");
  CHECK(format_scaled({INFINITY, NAN, 10}) == "Inf (NaN)");
  CHECK(format_scaled({0.0, 0.0, 0}) == "NA (NA)");
  CHECK(format_scaled({0.12345, 0.0, 3}, 100.0, 2) == "12.35 (0.00)");
}
