#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wsvm/kernel.hpp"

using namespace wsvm;

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> init) {
  Matrix m(static_cast<Eigen::Index>(init.size()), static_cast<Eigen::Index>(init.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : init) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

std::span<const double> pt(const std::vector<double>& v) { return {v.data(), v.size()}; }

}  // namespace

TEST_CASE("rbf_eval values") {
  const std::vector<double> x{0.3, -1.2, 4.0};
  CHECK(rbf_eval(pt(x), pt(x), 1.0) == 1.0);
  const std::vector<double> a{0, 0}, b{1, 0};
  CHECK(rbf_eval(pt(a), pt(b), 1.0) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
  CHECK(rbf_eval(pt(a), pt(b), 1e8) == doctest::Approx(1.0).epsilon(1e-15));
  // exp(-d^2 / sigma^2), not exp(-d^2 / (2 sigma^2))
  CHECK(rbf_eval(pt(a), pt(b), 2.0) == doctest::Approx(std::exp(-0.25)));
}

TEST_CASE("rbf_eval rejects bad input") {
  const std::vector<double> a{0, 0}, b{1, 0, 2};
  CHECK_THROWS_AS(rbf_eval(pt(a), pt(b), 1.0), InvalidInput);
  CHECK_THROWS_AS(rbf_eval(pt(a), pt(a), 0.0), InvalidInput);
  CHECK_THROWS_AS(rbf_eval(pt(a), pt(a), -1.0), InvalidInput);
  CHECK_THROWS_AS(KernelSpec::rbf(std::nan("")).validate(), InvalidInput);
}

TEST_CASE("gram examples") {
  const GramMatrix one = gram(rows({{2.0, 3.0}}), KernelSpec::rbf(0.7));
  REQUIRE(one.rows() == 1);
  CHECK(one(0, 0) == 1.0);

  const GramMatrix g = gram(rows({{0, 0}, {1, 0}}), KernelSpec::rbf(1.0));
  CHECK(g(0, 0) == 1.0);
  CHECK(g(1, 1) == 1.0);
  CHECK(g(0, 1) == doctest::Approx(std::exp(-1.0)));
  CHECK(g(1, 0) == g(0, 1));

  const GramMatrix lin = gram(rows({{1, 2}, {3, 4}}), KernelSpec::linear());
  CHECK(lin(0, 0) == 5.0);
  CHECK(lin(0, 1) == 11.0);
  CHECK(lin(1, 0) == 11.0);
  CHECK(lin(1, 1) == 25.0);

  const GramMatrix cross = gram(rows({{0, 0}, {1, 0}, {0, 2}}), rows({{1, 0}}), KernelSpec::rbf(1.0));
  CHECK(cross.rows() == 3);
  CHECK(cross.cols() == 1);
  CHECK(cross(1, 0) == 1.0);
  CHECK(cross(2, 0) == doctest::Approx(std::exp(-5.0)));
}

TEST_CASE("gram errors") {
  CHECK_THROWS_AS(gram(Matrix(0, 2), KernelSpec::rbf(1.0)), InvalidInput);
  CHECK_THROWS_AS(gram(rows({{0, 0}}), rows({{0, 0, 0}}), KernelSpec::rbf(1.0)), InvalidInput);
}

TEST_CASE("median_sigma examples") {
  CHECK(median_sigma(LabeledDataset(rows({{0, 0}, {3, 0}}), {1, 2})) == 3.0);
  CHECK(median_sigma(LabeledDataset(rows({{0}, {1}, {5}}), {1, 2, 2})) == 3.0);
  CHECK_THROWS_AS(median_sigma(LabeledDataset(rows({{0}, {1}}), {1, 1})), InvalidInput);
}

TEST_CASE("property: rbf gram is symmetric PSD with unit diagonal") {
  oracle::Gen gen(11);
  for (int trial = 0; trial < 25; ++trial) {
    const Matrix x = gen.points(20, gen.integer(1, 4), gen.uniform(0.1, 3.0));
    const double sigma = gen.uniform(0.05, 5.0);
    const GramMatrix g = gram(x, KernelSpec::rbf(sigma));
    CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index i = 0; i < g.rows(); ++i) CHECK(g(i, i) == 1.0);
    CHECK(g.minCoeff() >= 0.0);
    CHECK(g.maxCoeff() <= 1.0);
    const double low = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().minCoeff();
    CHECK(low >= -1e-8);
  }
}

TEST_CASE("property: rbf is translation and rotation invariant") {
  oracle::Gen gen(12);
  for (int trial = 0; trial < 200; ++trial) {
    const double sigma = gen.uniform(0.1, 4.0);
    std::vector<double> x{gen.normal(), gen.normal()}, z{gen.normal(), gen.normal()};
    const double base = rbf_eval(pt(x), pt(z), sigma);
    const double t0 = gen.uniform(-50, 50), t1 = gen.uniform(-50, 50);
    std::vector<double> xs{x[0] + t0, x[1] + t1}, zs{z[0] + t0, z[1] + t1};
    CHECK(std::abs(rbf_eval(pt(xs), pt(zs), sigma) - base) <= 1e-12);
    const double th = gen.uniform(0, 6.3), c = std::cos(th), s = std::sin(th);
    std::vector<double> xr{c * x[0] - s * x[1], s * x[0] + c * x[1]}, zr{c * z[0] - s * z[1], s * z[0] + c * z[1]};
    CHECK(std::abs(rbf_eval(pt(xr), pt(zr), sigma) - base) <= 1e-12);
  }
}

TEST_CASE("property: median_sigma against brute force, permutation and scale") {
  oracle::Gen gen(13);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = gen.integer(2, 25), k = gen.integer(2, std::min(n, 4));
    const Matrix x = gen.points(n, gen.integer(1, 3));
    const std::vector<int> y = gen.labels(n, k);

    std::vector<double> d;
    for (int s = 0; s < n; ++s)
      for (int t = s + 1; t < n; ++t)
        if (y[s] != y[t]) d.push_back((x.row(s) - x.row(t)).norm());
    std::sort(d.begin(), d.end());
    const std::size_t m = d.size();
    const double expect = m % 2 ? d[m / 2] : 0.5 * (d[m / 2 - 1] + d[m / 2]);
    const double got = median_sigma(LabeledDataset(x, y));
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), gen.eng);
    Matrix xp(x.rows(), x.cols());
    std::vector<int> yp(n);
    for (int i = 0; i < n; ++i) {
      xp.row(i) = x.row(perm[i]);
      yp[i] = y[perm[i]];
    }
    CHECK(median_sigma(LabeledDataset(xp, yp)) == doctest::Approx(got).epsilon(1e-12));

    const double c = gen.uniform(0.1, 10.0);
    CHECK(median_sigma(LabeledDataset(Matrix(c * x), y)) == doctest::Approx(c * got).epsilon(1e-12));
  }
}
