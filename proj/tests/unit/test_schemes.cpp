#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wsvm/data.hpp"
#include "wsvm/schemes.hpp"

using namespace wsvm;

namespace {

LabeledDataset line_classes(std::initializer_list<std::initializer_list<double>> classes) {
  std::vector<double> xs;
  std::vector<Label> ys;
  Label j = 1;
  for (const auto& c : classes) {
    for (double v : c) {
      xs.push_back(v);
      ys.push_back(j);
    }
    ++j;
  }
  Matrix x(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = xs[i];
  return LabeledDataset(x, ys);
}

PairwiseProbTable table_from(const std::vector<double>& p) {
  const int k = static_cast<int>(p.size());
  PairwiseProbTable t(k);
  for (int j = 1; j <= k; ++j)
    for (int l = j + 1; l <= k; ++l) t.set(j, l, p[j - 1] / (p[j - 1] + p[l - 1]));
  return t;
}

std::map<BinaryTask, double> pair_map(const PairwiseProbTable& t) {
  std::map<BinaryTask, double> q;
  for (int j = 1; j <= t.num_classes(); ++j)
    for (int l = j + 1; l <= t.num_classes(); ++l) q[BinaryTask::pair(j, l)] = t.q(j, l);
  return q;
}

MulticlassModel bare_model(SchemeKind scheme, int k, std::optional<Label> k_star = std::nullopt) {
  MulticlassModel m;
  m.scheme = scheme;
  m.num_classes = k;
  m.dim = 1;
  if (k_star) m.baseline = BaselineChoice{*k_star, BaselineMethod::LargestClass, {}};
  return m;
}

// Independent D_agg computation straight from the definitions.
std::vector<double> d_agg_reference(const Matrix& x, const std::vector<int>& y, int k) {
  auto dist = [&](int a, int b) { return (x.row(a) - x.row(b)).norm(); };
  std::vector<std::vector<int>> members(k + 1);
  for (int i = 0; i < static_cast<int>(y.size()); ++i) members[y[i]].push_back(i);
  std::vector<double> dcp(k + 1);
  for (int j = 1; j <= k; ++j) {
    const auto& s = members[j];
    std::vector<double> d(s.size(), 0.0);
    for (std::size_t a = 0; a < s.size(); ++a)
      for (std::size_t b = 0; b < s.size(); ++b) d[a] += dist(s[a], s[b]);
    std::vector<double> sorted = d;
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[(sorted.size() - 1) / 2];
    std::size_t centre = 0;
    while (d[centre] != med) ++centre;
    for (int t : s) dcp[j] = std::max(dcp[j], dist(t, s[centre]));
  }
  std::vector<double> out;
  for (int j = 1; j <= k; ++j) {
    double sum = 0.0;
    for (int l = 1; l <= k; ++l) {
      if (l == j) continue;
      double best = INFINITY;
      for (int a : members[j])
        for (int b : members[l]) best = std::min(best, dist(a, b));
      sum += best;
    }
    out.push_back(sum / k / dcp[j]);
  }
  return out;
}

}  // namespace

TEST_CASE("scheme names") {
  for (auto s : {SchemeKind::Pairwise, SchemeKind::Baseline1, SchemeKind::Baseline2, SchemeKind::BaselinePairwise1,
                 SchemeKind::BaselinePairwise2, SchemeKind::OneVsAll}) {
    CHECK(parse_scheme(to_string(s)) == s);
  }
  CHECK(display_name(SchemeKind::OneVsAll) == "A-SVM");
  CHECK_THROWS_AS(parse_scheme("svm"), InvalidInput);
  CHECK(parse_vote_rule("gt-half") == VoteRule::GreaterThanHalf);
  CHECK(parse_vote_rule("min-denominator") == VoteRule::MinDenominator);
}

TEST_CASE("largest-class baseline") {
  Matrix x = Matrix::Zero(60, 1);
  std::vector<Label> y;
  for (int i = 0; i < 10; ++i) y.push_back(1);
  for (int i = 0; i < 30; ++i) y.push_back(2);
  for (int i = 0; i < 20; ++i) y.push_back(3);
  CHECK(select_baseline_b1(LabeledDataset(x, y)).k_star == 2);
  std::vector<Label> even;
  for (int i = 0; i < 30; ++i) even.push_back(i % 3 + 1);
  CHECK(select_baseline_b1(LabeledDataset(Matrix::Zero(30, 1), even)).k_star == 1);
  const BaselineChoice c = select_baseline_b1(LabeledDataset(x, y));
  CHECK(c.diagnostics == std::vector<double>{10, 30, 20});
  CHECK_THROWS_AS(select_baseline_b1(LabeledDataset(Matrix::Zero(4, 1), {1, 2, 1, 2})), InvalidInput);
}

TEST_CASE("compactness and between-class distance") {
  const LabeledDataset d = line_classes({{0, 1, 2}, {5, 6, 7}, {10, 11, 12}});
  CHECK(class_compactness(d, 1) == 2.0);
  const LabeledDataset sym = line_classes({{-1.5, 1.5}, {9}});
  CHECK(class_compactness(sym, 1) == 3.0);
  CHECK(between_class_distance(d, 1, 2) == 3.0);
  CHECK(between_class_distance(d, 2, 1) == 3.0);
  CHECK(between_class_distance(d, 1, 3) == 8.0);
  const LabeledDataset dup = line_classes({{0, 4}, {4, 9}});
  CHECK(between_class_distance(dup, 1, 2) == 0.0);
  CHECK_THROWS_AS(class_compactness(sym, 2), InvalidInput);
}

TEST_CASE("median aggregated distance baseline") {
  const LabeledDataset d = line_classes({{0, 1, 2}, {5, 6, 7}, {10, 11, 12}});
  const BaselineChoice c = select_baseline_b2(d);
  REQUIRE(c.diagnostics.size() == 3);
  CHECK(c.diagnostics[0] == doctest::Approx(11.0 / 6));
  CHECK(c.diagnostics[1] == doctest::Approx(1.0));
  CHECK(c.diagnostics[2] == doctest::Approx(11.0 / 6));
  CHECK(c.k_star == 1);
  CHECK(c.method == BaselineMethod::MedianAggDistance);

  CHECK_THROWS_AS(select_baseline_b2(line_classes({{0, 1}, {5}, {9, 10}})), InvalidInput);
  CHECK_THROWS_AS(select_baseline_b2(line_classes({{0, 0}, {5, 6}, {9, 10}})), InvalidInput);
}

TEST_CASE("property: compactness scales, distances are symmetric, D_agg matches brute force") {
  oracle::Gen gen(41);
  for (int trial = 0; trial < 40; ++trial) {
    const int k = gen.integer(3, 6);
    const int n = gen.integer(2 * k, 40);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) y[i] = i < 2 * k ? i / 2 + 1 : gen.integer(1, k);
    const Matrix x = gen.points(n, gen.integer(1, 3));
    const LabeledDataset d(x, y);
    const double c = gen.uniform(0.2, 5.0);
    const LabeledDataset scaled(Matrix(c * x), y);
    for (int j = 1; j <= k; ++j) {
      CHECK(class_compactness(scaled, j) == doctest::Approx(c * class_compactness(d, j)).epsilon(1e-12));
      for (int l = 1; l <= k; ++l) CHECK(between_class_distance(d, j, l) == between_class_distance(d, l, j));
    }
    const auto ref = d_agg_reference(x, y, k);
    const BaselineChoice b2 = select_baseline_b2(d);
    for (int j = 0; j < k; ++j) CHECK(b2.diagnostics[j] == doctest::Approx(ref[j]).epsilon(1e-12));
    std::vector<double> sorted = ref;
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[(k - 1) / 2];
    int expect = 1;
    while (ref[expect - 1] != med) ++expect;
    CHECK(b2.k_star == expect);
  }
}

TEST_CASE("baseline probabilities") {
  const std::vector<double> half{0.5, 0.5, 0.0};
  const ProbEstimate u = baseline_probs(half, 3);
  CHECK(u.probs[0] == doctest::Approx(1.0 / 3));
  CHECK(u.probs[2] == doctest::Approx(1.0 / 3));
  const std::vector<double> q{2.0 / 3, 0.5, 0.0};
  const ProbEstimate p = baseline_probs(q, 3);
  CHECK(p.probs[0] == doctest::Approx(0.5));
  CHECK(p.probs[1] == doctest::Approx(0.25));
  CHECK(p.probs[2] == doctest::Approx(0.25));
  const std::vector<double> bad{1.0, 0.5, 0.0};
  CHECK_THROWS_AS(baseline_probs(bad, 3), InvalidInput);
}

TEST_CASE("pairwise reconstruction") {
  CHECK(reconstruct_pairwise(0.5, 0.5) == 0.5);
  CHECK(reconstruct_pairwise(2.0 / 3, 0.5) == doctest::Approx(2.0 / 3));
  for (double q : {0.01, 0.2, 0.77, 0.999}) CHECK(reconstruct_pairwise(q, q) == doctest::Approx(0.5));
  CHECK_THROWS_AS(reconstruct_pairwise(0.0, 0.0), InvalidInput);
}

TEST_CASE("dynamic baseline and voting") {
  PairwiseProbTable t(3);
  t.set(1, 2, 0.9);
  t.set(1, 3, 0.8);
  t.set(2, 3, 0.6);
  CHECK(dynamic_baseline(t) == 1);
  CHECK(t.q(2, 1) == doctest::Approx(0.1));
  PairwiseProbTable flat(4);
  for (int j = 1; j <= 4; ++j)
    for (int l = j + 1; l <= 4; ++l) flat.set(j, l, 0.5);
  CHECK(dynamic_baseline(flat) == 1);
  CHECK(classify_max_vote(flat) == 1);
  CHECK(classify_max_vote(table_from({0.5, 0.3, 0.2})) == 1);
  PairwiseProbTable partial(3);
  partial.set(1, 2, 0.4);
  CHECK_FALSE(partial.complete());
  CHECK_THROWS_AS(partial.q(1, 3), InvalidInput);
}

TEST_CASE("pairwise coupling recovers consistent probabilities for every baseline") {
  const std::vector<double> p{0.5, 0.3, 0.2};
  const PairwiseProbTable t = table_from(p);
  for (Label k = 1; k <= 3; ++k) {
    const ProbEstimate e = pairwise_coupling_probs(t, k);
    for (int j = 0; j < 3; ++j) CHECK(e.probs[j] == doctest::Approx(p[j]).epsilon(1e-12));
  }
  PairwiseProbTable flat(3);
  flat.set(1, 2, 0.5);
  flat.set(1, 3, 0.5);
  flat.set(2, 3, 0.5);
  const ProbEstimate u = pairwise_coupling_probs(flat, 2);
  for (double v : u.probs) CHECK(v == doctest::Approx(1.0 / 3));
}

TEST_CASE("classification rules") {
  CHECK(classify_max_prob({{0.2, 0.5, 0.3}}) == 2);
  CHECK(classify_max_prob({{0.4, 0.4, 0.2}}) == 1);
  CHECK(classify_max_prob({{4.0, 10.0, 6.0}}) == 2);
}

TEST_CASE("property: round trips through consistent tables") {
  oracle::Gen gen(42);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = gen.integer(3, 9);
    const auto p = gen.simplex(k);
    const PairwiseProbTable t = table_from(p);
    for (Label b = 1; b <= k; ++b) {
      const ProbEstimate e = pairwise_coupling_probs(t, b);
      for (int j = 0; j < k; ++j) CHECK(std::abs(e.probs[j] - p[j]) <= 1e-12);

      std::vector<double> col(k, 0.0);
      for (Label j = 1; j <= k; ++j)
        if (j != b) col[j - 1] = t.q(j, b);
      const PairwiseProbTable rebuilt = reconstruct_table(col, b);
      for (Label j = 1; j <= k; ++j)
        for (Label l = 1; l <= k; ++l)
          if (j != l) CHECK(std::abs(rebuilt.q(j, l) - t.q(j, l)) <= 1e-12);
      const ProbEstimate be = baseline_probs(col, b);
      double s = 0.0;
      for (int j = 0; j < k; ++j) {
        CHECK(std::abs(be.probs[j] - p[j]) <= 1e-12);
        s += be.probs[j];
      }
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
    CHECK(classify_max_vote(t) == classify_max_prob({p}));
    const double a = gen.uniform(0.001, 0.999), c = gen.uniform(0.001, 0.999);
    CHECK(std::abs(reconstruct_pairwise(a, c) + reconstruct_pairwise(c, a) - 1.0) <= 1e-12);
  }
}

TEST_CASE("property: pairwise scheme is permutation equivariant and sums to one") {
  oracle::Gen gen(43);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = gen.integer(3, 7);
    PairwiseProbTable t(k);
    for (int j = 1; j <= k; ++j)
      for (int l = j + 1; l <= k; ++l) t.set(j, l, gen.uniform(0.02, 0.98));
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 1);
    std::shuffle(perm.begin(), perm.end(), gen.eng);
    PairwiseProbTable tp(k);
    for (int j = 1; j <= k; ++j)
      for (int l = j + 1; l <= k; ++l) tp.set(perm[j - 1], perm[l - 1], t.q(j, l));

    for (auto rule : {VoteRule::GreaterThanHalf, VoteRule::MinDenominator}) {
      MulticlassModel m = bare_model(SchemeKind::Pairwise, k);
      m.vote_rule = rule;
      const ProbEstimate a = combine(m, pair_map(t));
      const ProbEstimate b = combine(m, pair_map(tp));
      double s = 0.0;
      for (int j = 1; j <= k; ++j) {
        CHECK(std::abs(a.probs[j - 1] - b.probs[perm[j - 1] - 1]) <= 1e-12);
        s += a.probs[j - 1];
      }
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
    CHECK(perm[classify_max_vote(t) - 1] == classify_max_vote(tp));
  }
}

TEST_CASE("schemes agree on a consistent table") {
  const std::vector<double> p{0.5, 0.3, 0.2};
  const PairwiseProbTable t = table_from(p);
  std::map<BinaryTask, double> q = pair_map(t);
  const ProbEstimate pw = combine(bare_model(SchemeKind::Pairwise, 3), q);
  for (Label ks = 1; ks <= 3; ++ks) {
    for (auto s : {SchemeKind::Baseline1, SchemeKind::Baseline2, SchemeKind::BaselinePairwise1,
                   SchemeKind::BaselinePairwise2}) {
      const ProbEstimate e = combine(bare_model(s, 3, ks), q);
      for (int j = 0; j < 3; ++j) CHECK(e.probs[j] == doctest::Approx(pw.probs[j]).epsilon(1e-12));
    }
  }
  for (int j = 0; j < 3; ++j) CHECK(pw.probs[j] == doctest::Approx(p[j]).epsilon(1e-12));
}

TEST_CASE("baseline-pairwise equals the baseline column pushed through reconstruction and coupling") {
  oracle::Gen gen(44);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = gen.integer(3, 6);
    const Label ks = gen.integer(1, k);
    std::map<BinaryTask, double> q;
    std::vector<double> col(k, 0.0);
    for (Label j = 1; j <= k; ++j) {
      if (j == ks) continue;
      col[j - 1] = gen.uniform(0.05, 0.95);
      // Ladders are stored with the smaller label positive.
      if (j < ks) q[BinaryTask::pair(j, ks)] = col[j - 1];
      else q[BinaryTask::pair(ks, j)] = 1.0 - col[j - 1];
    }
    Label vote = 0;
    const ProbEstimate bp = combine(bare_model(SchemeKind::BaselinePairwise1, k, ks), q, &vote);
    const PairwiseProbTable table = reconstruct_table(col, ks);
    const ProbEstimate ref = pairwise_coupling_probs(table, dynamic_baseline(table));
    for (int j = 0; j < k; ++j) CHECK(bp.probs[j] == doctest::Approx(ref.probs[j]).epsilon(1e-12));
    CHECK(vote == classify_max_vote(table));
    const ProbEstimate b = combine(bare_model(SchemeKind::Baseline1, k, ks), q);
    const ProbEstimate direct = baseline_probs(col, ks);
    for (int j = 0; j < k; ++j) CHECK(b.probs[j] == doctest::Approx(direct.probs[j]).epsilon(1e-12));
  }
}

TEST_CASE("one-vs-all is raw unless normalized") {
  std::map<BinaryTask, double> q{{BinaryTask::one_vs_rest(1), 0.9},
                                 {BinaryTask::one_vs_rest(2), 0.1},
                                 {BinaryTask::one_vs_rest(3), 0.1}};
  MulticlassModel m = bare_model(SchemeKind::OneVsAll, 3);
  const ProbEstimate raw = combine(m, q);
  CHECK_FALSE(raw.normalized);
  CHECK(raw.probs == std::vector<double>{0.9, 0.1, 0.1});
  m.normalize_ova = true;
  const ProbEstimate norm = combine(m, q);
  CHECK(norm.normalized);
  CHECK(norm.probs[0] == doctest::Approx(0.9 / 1.1));
  q.erase(BinaryTask::one_vs_rest(2));
  CHECK_THROWS_AS(combine(m, q), InvalidInput);
}

TEST_CASE("required tasks") {
  CHECK(required_tasks(SchemeKind::Pairwise, 4).size() == 6);
  CHECK(required_tasks(SchemeKind::OneVsAll, 4).size() == 4);
  const auto b = required_tasks(SchemeKind::Baseline1, 4, 2);
  REQUIRE(b.size() == 3);
  for (const auto& t : b) CHECK((t.positive == 2 || t.negative == 2));
  CHECK_THROWS_AS(required_tasks(SchemeKind::Baseline1, 4), InvalidInput);
}

TEST_CASE("batched predict matches pointwise estimates") {
  const Simulation sim = gen_example1(210, 9);
  const Simulation test = gen_example1(50, 10);
  const WeightGrid g = make_weight_grid(6);
  for (auto scheme : {SchemeKind::Pairwise, SchemeKind::Baseline1, SchemeKind::BaselinePairwise2, SchemeKind::OneVsAll}) {
    MulticlassModel m = bare_model(scheme, 7, uses_fixed_baseline(scheme) ? std::optional<Label>(3) : std::nullopt);
    m.dim = 2;
    for (const auto& task : required_tasks(scheme, 7, m.baseline ? std::optional<Label>(3) : std::nullopt)) {
      m.ladders.push_back(train_ladder(sim.data, task.canonical(), g, 1e-2, KernelSpec::rbf(1.5)));
    }
    const Prediction pred = predict(m, test.data.features());
    CHECK(pred.max_vote.empty() == !has_pairwise_table(scheme));
    for (std::size_t i = 0; i < test.data.size(); ++i) {
      const ProbEstimate e = estimate(m, test.data.point(i));
      for (int j = 0; j < 7; ++j) CHECK(pred.probs(i, j) == e.probs[j]);
      CHECK(pred.max_prob[i] == classify_max_prob(e));
    }
    const Matrix wrong = Matrix::Zero(2, 3);
    CHECK_THROWS_AS(predict(m, wrong), InvalidInput);
  }
}
