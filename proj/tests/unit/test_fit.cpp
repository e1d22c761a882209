#include <cmath>

#include "doctest.h"
#include "wsvm/benchmark.hpp"
#include "wsvm/data.hpp"
#include "wsvm/fit.hpp"

using namespace wsvm;

namespace {

struct Split2 {
  LabeledDataset train, tune;
  Eigen::MatrixXd tune_truth;
};

Split2 make_split(const Simulation& sim, std::uint64_t seed) {
  SplitSpec spec;
  spec.seed = seed;
  const Split s = stratified_split(sim.data, spec);
  Split2 out{sim.data.subset(s.train), sim.data.subset(s.tune), {}};
  out.tune_truth = sim.truth.evaluate(out.tune.features());
  return out;
}

FitConfig small_config() {
  FitConfig c;
  c.m = 6;
  c.lambdas = {1e-3, 1e-2, 1e-1};
  c.sigmas = {1.5, 3.0};
  return c;
}

}  // namespace

TEST_CASE("task fitter shares tasks between schemes") {
  const Split2 d = make_split(gen_example3(220, 31), 1);
  TaskFitter fitter(d.train, d.tune, small_config(), &d.tune_truth);
  const FitResult b1 = fit_scheme(fitter, SchemeKind::Baseline1, Criterion::Egkl, VoteRule::GreaterThanHalf, false);
  const FitResult bp1 = fit_scheme(fitter, SchemeKind::BaselinePairwise1, Criterion::Egkl, VoteRule::GreaterThanHalf, false);
  REQUIRE(b1.model.ladders.size() == 4);
  REQUIRE(bp1.model.ladders.size() == 4);
  for (std::size_t l = 0; l < 4; ++l) {
    CHECK(b1.model.ladders[l].task == bp1.model.ladders[l].task);
    CHECK(b1.model.ladders[l].rungs[0].coeffs() == bp1.model.ladders[l].rungs[0].coeffs());
    // Pair ladders keep the smaller label on the positive side.
    CHECK(b1.model.ladders[l].task.positive < b1.model.ladders[l].task.negative);
  }
  CHECK(b1.seconds >= b1.baseline_seconds);
  CHECK(b1.reports.size() == b1.model.ladders.size());

  const FitResult pw = fit_scheme(fitter, SchemeKind::Pairwise, Criterion::Egkl, VoteRule::GreaterThanHalf, false);
  CHECK(pw.model.ladders.size() == 10);
  const FitResult b2 = fit_scheme(fitter, SchemeKind::Baseline2, Criterion::Egkl, VoteRule::GreaterThanHalf, false);
  REQUIRE(b2.model.baseline);
  CHECK(b2.model.baseline->method == BaselineMethod::MedianAggDistance);
  const FitResult ova = fit_scheme(fitter, SchemeKind::OneVsAll, Criterion::Egkl, VoteRule::GreaterThanHalf, true);
  CHECK(ova.model.normalize_ova);
  CHECK(ova.model.ladders.size() == 5);
  // normalization only applies to one-vs-all
  CHECK_FALSE(fit_scheme(fitter, SchemeKind::Pairwise, Criterion::Egkl, VoteRule::GreaterThanHalf, true).model.normalize_ova);
}

TEST_CASE("criteria share tuning and select by their own score") {
  const Split2 d = make_split(gen_example1(280, 32), 2);
  TaskFitter fitter(d.train, d.tune, small_config(), &d.tune_truth);
  const TaskFit& e = fitter.fit(BinaryTask::pair(2, 1), Criterion::Egkl);
  const TaskFit& g = fitter.fit(BinaryTask::pair(1, 2), Criterion::Gkl);
  REQUIRE(e.report.scores.size() == g.report.scores.size());
  for (std::size_t i = 0; i < e.report.scores.size(); ++i) {
    CHECK(e.report.scores[i].egkl == g.report.scores[i].egkl);
    CHECK(std::isfinite(e.report.scores[i].gkl));
  }
  const std::size_t be = select_candidate(e.report.scores, Criterion::Egkl);
  const std::size_t bg = select_candidate(g.report.scores, Criterion::Gkl);
  CHECK(e.report.lambda == e.report.scores[be].lambda);
  CHECK(g.report.sigma == g.report.scores[bg].sigma);
  CHECK(&fitter.fit(BinaryTask::pair(1, 2), Criterion::Egkl) == &e);
}

TEST_CASE("fit validation") {
  const Split2 d = make_split(gen_example3(120, 33), 3);
  FitConfig c = small_config();
  c.criterion = Criterion::Gkl;
  CHECK_THROWS_AS(fit(d.train, d.tune, c), InvalidInput);
  c.criterion = Criterion::Egkl;
  c.lambdas = {1e-2, -1.0};
  CHECK_THROWS_AS(fit(d.train, d.tune, c), InvalidInput);
  c = small_config();
  c.sigmas = {0.0};
  CHECK_THROWS_AS(fit(d.train, d.tune, c), InvalidInput);

  Matrix x(6, 1);
  x << 0, 1, 2, 3, 4, 5;
  const LabeledDataset two(x, {1, 1, 1, 2, 2, 2});
  FitConfig b = small_config();
  b.m = 2;
  b.scheme = SchemeKind::Baseline1;
  CHECK_THROWS_AS(fit(two, two, b), InvalidInput);
  b.scheme = SchemeKind::Pairwise;
  CHECK(fit(two, two, b).model.ladders.size() == 1);
}

TEST_CASE("default grid fills in from the training set") {
  const Split2 d = make_split(gen_example3(100, 34), 4);
  FitConfig c;
  c.m = 4;
  c.lambdas = {1e-2};
  TaskFitter fitter(d.train, d.tune, c);
  CHECK(fitter.grid().sigmas.size() == 6);
  CHECK(fitter.grid().sigmas[3] == doctest::Approx(median_sigma(d.train)));
  CHECK(fitter.grid().lambdas.size() == 1);
  FitConfig dflt;
  TaskFitter full(d.train, d.tune, dflt);
  CHECK(full.grid().size() == 198);
  CHECK(full.weights().m == static_cast<int>(std::floor(std::sqrt(static_cast<double>(d.train.size())))));
}

TEST_CASE("fits are deterministic across worker counts") {
  const Split2 d = make_split(gen_example3(200, 35), 5);
  FitConfig c = small_config();
  c.scheme = SchemeKind::Pairwise;
  const FitResult a = fit(d.train, d.tune, c);
  c.workers = 4;
  const FitResult b = fit(d.train, d.tune, c);
  const Simulation test = gen_example3(100, 36);
  CHECK(predict(a.model, test.data.features()).probs == predict(b.model, test.data.features()).probs);
}

TEST_CASE("benchmark seeding and aggregation") {
  const DataSource ex3 = DataSource::parse("example3");
  CHECK(ex3.example == 3);
  CHECK(DataSource::parse("3").name() == "example3");
  const DataSource ring = DataSource::parse("ring:4:2:1.1");
  CHECK(ring.num_classes == 4);
  CHECK(ring.radius == 2.0);
  CHECK(ring.name() == "ring:4:2:1.1");
  CHECK_THROWS_AS(DataSource::parse("ring:1:2:1"), InvalidInput);
  CHECK_THROWS_AS(DataSource::parse("example9"), InvalidInput);
  CHECK(run_seed(1, ex3, 0) == run_seed(1, ex3, 0));
  CHECK(run_seed(1, ex3, 0) != run_seed(1, ex3, 1));
  CHECK(run_seed(1, ex3, 0) != run_seed(1, ring, 0));

  BenchmarkConfig bc;
  bc.sources = {ring};
  bc.schemes = {SchemeKind::Baseline1, SchemeKind::OneVsAll};
  bc.criteria = {Criterion::Egkl, Criterion::Gkl};
  bc.runs = 3;
  bc.n = 120;
  bc.n_test = 200;
  bc.m = 5;
  bc.lambdas = {1e-2};
  bc.sigmas = {2.0};
  const BenchmarkReport r = run_benchmark(bc);
  CHECK(r.runs.size() == 12);
  CHECK(r.aggregate.size() == 4);
  const AggregateRow* row = r.find("ring:4:2:1.1", SchemeKind::Baseline1, Criterion::Egkl);
  REQUIRE(row != nullptr);
  CHECK(row->runs_ok == 3);
  CHECK(row->k_star_mode.has_value());
  CHECK_FALSE(row->te2.has_value());
  std::vector<double> l1;
  for (const auto& run : r.runs)
    if (run.scheme == SchemeKind::Baseline1 && run.criterion == Criterion::Egkl) l1.push_back(run.eval.l1);
  CHECK(row->l1.mean == doctest::Approx(mean_se(l1).mean).epsilon(1e-14));

  BenchmarkConfig threaded = bc;
  threaded.workers = 3;
  const BenchmarkReport t = run_benchmark(threaded);
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    CHECK(r.runs[i].eval.l1 == t.runs[i].eval.l1);
    CHECK(r.runs[i].eval.egkl == t.runs[i].eval.egkl);
  }
  const nlohmann::json doc = to_json(r);
  for (const char* key : {"config", "per_run", "aggregate", "timings"}) CHECK(doc.contains(key));
  CHECK(doc["aggregate"].contains("mean"));
  CHECK(doc["aggregate"].contains("se"));
  CHECK(doc["config"]["lambdas"].size() == 1);
}
