// Command-line front end: simulate, fit, predict, eval, benchmark.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "wsvm/benchmark.hpp"
#include "wsvm/data.hpp"
#include "wsvm/fit.hpp"
#include "wsvm/metrics.hpp"
#include "wsvm/model.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wsvm;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || !(v > 0.0) || !std::isfinite(v)) {
      throw UsageError(std::string("bad ") + what + " value '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    if (std::find(out.begin(), out.end(), item) != out.end()) throw UsageError("'" + item + "' is listed twice");
    out.push_back(item);
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

fs::path sibling(const fs::path& path, const std::string& suffix) {
  return path.parent_path() / (path.stem().string() + suffix + path.extension().string());
}

// Options shared by fit and benchmark.
struct FitFlags {
  std::string scheme = "b1";
  std::string criterion = "egkl";
  int m = 0;
  std::string lambdas;
  std::string sigmas;
  bool normalize = false;
  std::string vote_rule = "gt-half";
  double tolerance = 1e-6;
  std::int64_t max_iterations = 100000;

  void add(CLI::App* app, bool scheme_flag) {
    if (scheme_flag) {
      app->add_option("--scheme", scheme, "pairwise|b1|b2|bp1|bp2|ova")
          ->check(CLI::IsMember({"pairwise", "b1", "b2", "bp1", "bp2", "ova"}));
      app->add_option("--criterion", criterion, "egkl|gkl")->check(CLI::IsMember({"egkl", "gkl"}));
    }
    app->add_option("--m-grid", m, "weight grid size M (default floor(sqrt(n_train)))")->check(CLI::Range(2, 1000000));
    app->add_option("--lambda-grid", lambdas, "comma-separated lambda values");
    app->add_option("--sigma-grid", sigmas, "comma-separated RBF bandwidths");
    app->add_flag("--normalize", normalize, "normalize One-vs-All probabilities to sum to one");
    app->add_option("--vote-rule", vote_rule, "gt-half|min-denominator")
        ->check(CLI::IsMember({"gt-half", "min-denominator"}));
    app->add_option("--tol", tolerance, "solver KKT tolerance")->check(CLI::PositiveNumber);
    app->add_option("--max-iter", max_iterations, "solver iteration cap")->check(CLI::PositiveNumber);
  }

  FitConfig config(int workers) const {
    FitConfig c;
    c.scheme = parse_scheme(scheme);
    c.criterion = parse_criterion(criterion);
    if (m > 0) c.m = m;
    c.lambdas = parse_list(lambdas, "lambda");
    c.sigmas = parse_list(sigmas, "sigma");
    c.vote_rule = parse_vote_rule(vote_rule);
    c.normalize_ova = normalize;
    c.solver.tolerance = tolerance;
    c.solver.max_iterations = max_iterations;
    c.workers = workers;
    return c;
  }
};

int cmd_simulate(const std::string& source_text, std::size_t n, std::uint64_t seed, const fs::path& out,
                 fs::path truth_out) {
  DataSource source;
  try {
    source = DataSource::parse(source_text);
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
  const Simulation sim = source.simulate(n, seed);
  if (truth_out.empty()) truth_out = sibling(out, "_truth");
  save_csv(out, sim.data);
  save_prob_csv(truth_out, sim.truth.evaluate(sim.data.features()));
  std::cout << "wrote " << out.string() << " (" << sim.data.size() << " rows, K=" << sim.data.num_classes()
            << ") and " << truth_out.string() << '\n';
  return 0;
}

int cmd_fit(const FitFlags& flags, const fs::path& train_path, const fs::path& tune_path,
            const fs::path& truth_path, double train_fraction, std::uint64_t seed, int workers,
            const fs::path& out) {
  FitConfig config = flags.config(workers);
  const LabeledDataset full = load_csv(train_path);
  std::optional<Eigen::MatrixXd> truth;
  if (!truth_path.empty()) truth = load_prob_csv(truth_path);

  LabeledDataset train = full, tune = full;
  std::optional<Eigen::MatrixXd> tune_truth;
  if (!tune_path.empty()) {
    tune = load_csv(tune_path, CsvSchema{full.num_classes()});
    train = full;
    if (truth) {
      if (static_cast<std::size_t>(truth->rows()) != tune.size()) {
        throw InvalidInput("truth file rows must match the tuning file");
      }
      tune_truth = truth;
    }
  } else {
    SplitSpec spec;
    spec.train = train_fraction;
    spec.tune = 1.0 - train_fraction;
    spec.seed = seed;
    const Split split = stratified_split(full, spec);
    train = full.subset(split.train);
    tune = full.subset(split.tune);
    if (truth) {
      if (static_cast<std::size_t>(truth->rows()) != full.size()) {
        throw InvalidInput("truth file rows must match the data file");
      }
      Eigen::MatrixXd t(static_cast<Eigen::Index>(split.tune.size()), truth->cols());
      for (std::size_t i = 0; i < split.tune.size(); ++i) {
        t.row(static_cast<Eigen::Index>(i)) = truth->row(static_cast<Eigen::Index>(split.tune[i]));
      }
      tune_truth = t;
    }
  }
  if (config.criterion == Criterion::Gkl && !tune_truth) {
    throw UsageError("--criterion gkl needs --truth with the true probabilities of the tuning points");
  }
  if (config.normalize_ova && config.scheme != SchemeKind::OneVsAll) {
    throw UsageError("--normalize only applies to --scheme ova");
  }

  const FitResult result = fit(train, tune, config, tune_truth ? &*tune_truth : nullptr);
  json tuning = json::array();
  for (const auto& r : result.reports) tuning.push_back(to_json(r));
  save_model(out, result.model, tuning);
  std::cout << display_name(result.model.scheme) << ": " << result.model.ladders.size() << " ladders, M="
            << result.model.ladders.front().grid.m << ", n_train=" << train.size() << ", n_tune=" << tune.size();
  if (result.model.baseline) std::cout << ", k*=" << result.model.baseline->k_star;
  std::cout << ", fit " << num(result.seconds) << " s\n";
  for (const auto& r : result.reports) {
    std::cout << "  " << r.task.name() << ": lambda=" << num(r.lambda) << " sigma=" << num(r.sigma) << '\n';
  }
  std::cout << "wrote " << out.string() << '\n';
  return 0;
}

int cmd_predict(const fs::path& model_path, const fs::path& data_path, const fs::path& out) {
  const MulticlassModel model = load_model(model_path);
  const LabeledDataset data = load_csv(data_path, CsvSchema{model.num_classes});
  const Prediction pred = predict(model, data.features());
  std::ofstream os(out);
  if (!os) throw InvalidInput("cannot write " + out.string());
  for (int j = 1; j <= model.num_classes; ++j) os << (j > 1 ? "," : "") << 'p' << j;
  os << ",label";
  if (!pred.max_vote.empty()) os << ",vote_label";
  os << '\n';
  for (Eigen::Index i = 0; i < pred.probs.rows(); ++i) {
    for (Eigen::Index j = 0; j < pred.probs.cols(); ++j) os << (j ? "," : "") << num(pred.probs(i, j));
    os << ',' << pred.max_prob[static_cast<std::size_t>(i)];
    if (!pred.max_vote.empty()) os << ',' << pred.max_vote[static_cast<std::size_t>(i)];
    os << '\n';
  }
  if (!os) throw InvalidInput("failed writing " + out.string());
  std::cout << "wrote " << out.string() << " (" << pred.probs.rows() << " rows)\n";
  return 0;
}

int cmd_eval(const fs::path& probs_path, const fs::path& truth_path, const fs::path& data_path,
             const std::string& metrics_text, const fs::path& out) {
  std::map<std::string, std::vector<double>> extra;
  const Eigen::MatrixXd probs = load_prob_csv(probs_path, &extra);
  std::vector<std::string> metrics = split_names(metrics_text);
  const bool explicit_metrics = !metrics.empty();
  if (!explicit_metrics) metrics = {"l1", "l2", "egkl", "gkl", "te1", "te2"};
  for (const auto& m : metrics) {
    if (m != "l1" && m != "l2" && m != "egkl" && m != "gkl" && m != "te1" && m != "te2") {
      throw UsageError("unknown metric '" + m + "'");
    }
  }
  std::optional<Eigen::MatrixXd> truth;
  if (!truth_path.empty()) truth = load_prob_csv(truth_path);
  std::optional<LabeledDataset> data;
  if (!data_path.empty()) data = load_csv(data_path, CsvSchema{static_cast<int>(probs.cols())});
  if (truth && (truth->rows() != probs.rows() || truth->cols() != probs.cols())) {
    throw InvalidInput("probability and truth files are misaligned");
  }
  if (data && static_cast<Eigen::Index>(data->size()) != probs.rows()) {
    throw InvalidInput("probability and data files are misaligned");
  }

  json result = json::object();
  std::ostringstream table;
  auto emit = [&](const std::string& name, std::optional<double> v) {
    result[name] = v ? number_or_flag(*v) : json(nullptr);
    table << name << ' ' << (v ? (std::isinf(*v) ? std::string("Inf") : num(std::round(*v * 1000.0) / 10.0)) : "NA")
          << '\n';
  };
  for (const auto& m : metrics) {
    const bool needs_truth = m == "l1" || m == "l2" || m == "egkl" || m == "gkl";
    if (needs_truth && !truth) {
      if (explicit_metrics) throw UsageError("metric " + m + " needs --truth");
      continue;
    }
    if (!needs_truth && !data) {
      if (explicit_metrics) throw UsageError("metric " + m + " needs --data with true labels");
      continue;
    }
    if (m == "l1") emit(m, l1_error(*truth, probs));
    if (m == "l2") emit(m, l2_error(*truth, probs));
    if (m == "egkl") emit(m, egkl_loss(*truth, probs));
    if (m == "gkl") emit(m, gkl_loss(*truth, probs));
    if (m == "te1") {
      std::vector<Label> pred(static_cast<std::size_t>(probs.rows()));
      for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        ProbEstimate p;
        for (Eigen::Index j = 0; j < probs.cols(); ++j) p.probs.push_back(probs(i, j));
        pred[static_cast<std::size_t>(i)] = classify_max_prob(p);
      }
      emit(m, test_error(data->labels(), pred));
    }
    if (m == "te2") {
      auto it = extra.find("vote_label");
      if (it == extra.end()) {
        emit(m, std::nullopt);
        continue;
      }
      std::vector<Label> pred(it->second.begin(), it->second.end());
      emit(m, test_error(data->labels(), pred));
    }
  }
  std::cout << "metric x100\n" << table.str();
  if (!out.empty()) {
    write_json(out, result);
    std::cout << "wrote " << out.string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiclass probability estimation with weighted SVMs"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  int workers = 1;
  fs::path out;

  auto shared = [&](CLI::App* sub, bool out_required) {
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--workers", workers, "parallel worker threads")->check(CLI::PositiveNumber);
    auto* o = sub->add_option("--out", out, "output path");
    if (out_required) o->required();
  };

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw a synthetic data set with its true probabilities");
  int example = 0;
  std::string source;
  std::size_t n = 500;
  fs::path truth_out;
  sim->add_option("--example", example, "example generator 1..4");
  sim->add_option("--source", source, "generator: example1..example4 or ring:K:radius:sd");
  sim->add_option("--n", n, "number of points")->check(CLI::PositiveNumber);
  sim->add_option("--truth-out", truth_out, "truth CSV path (default <out>_truth.csv)");
  shared(sim, true);

  // fit
  auto* fitc = app.add_subcommand("fit", "tune and train a multiclass probability model");
  FitFlags flags;
  fs::path train_path, tune_path, truth_path;
  double train_fraction = 0.5;
  fitc->add_option("--data", train_path, "training CSV (split into train/tune unless --tune is given)")->required();
  fitc->add_option("--tune", tune_path, "separate tuning CSV");
  fitc->add_option("--truth", truth_path, "true probabilities of the tuning points (rows of --tune, else of --data)");
  fitc->add_option("--train-fraction", train_fraction, "training share of --data when splitting")
      ->check(CLI::Range(0.0, 1.0));
  flags.add(fitc, true);
  shared(fitc, true);

  // predict
  auto* pred = app.add_subcommand("predict", "class probabilities for new points");
  fs::path model_path, data_path;
  pred->add_option("--model", model_path, "model bundle JSON")->required();
  pred->add_option("--data", data_path, "data CSV")->required();
  shared(pred, true);

  // eval
  auto* ev = app.add_subcommand("eval", "score probabilities against truth and labels");
  fs::path probs_path, eval_truth, eval_data;
  std::string metrics;
  ev->add_option("--probs", probs_path, "probability CSV")->required();
  ev->add_option("--truth", eval_truth, "true probability CSV");
  ev->add_option("--data", eval_data, "labeled data CSV for test errors");
  ev->add_option("--metrics", metrics, "comma-separated subset of l1,l2,egkl,gkl,te1,te2");
  shared(ev, false);

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Monte Carlo comparison of schemes on simulated data");
  std::string sources = "example3", schemes = "b1,pairwise,ova", criteria = "egkl";
  int runs = 10;
  std::size_t bench_n = 1000, n_test = 10000;
  double bench_train_fraction = 0.5;
  fs::path csv_out;
  bench->add_option("--sources", sources, "comma-separated generators (example1..example4, ring:K:r:sd)");
  bench->add_option("--schemes", schemes, "comma-separated schemes");
  bench->add_option("--criteria", criteria, "comma-separated tuning criteria (egkl,gkl)");
  bench->add_option("--runs", runs, "Monte Carlo runs per source")->check(CLI::PositiveNumber);
  bench->add_option("--n", bench_n, "points per run before the train/tune split")->check(CLI::PositiveNumber);
  bench->add_option("--n-test", n_test, "independent test points per run")->check(CLI::PositiveNumber);
  bench->add_option("--train-fraction", bench_train_fraction, "training share of each run")
      ->check(CLI::Range(0.0, 1.0));
  bench->add_option("--csv", csv_out, "per-run CSV path (default <out>_runs.csv)");
  flags.add(bench, false);
  shared(bench, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      if (example != 0 && !source.empty()) throw UsageError("give either --example or --source");
      if (example != 0) {
        if (example < 1 || example > 4) throw UsageError("--example must be 1..4");
        source = "example" + std::to_string(example);
      }
      if (source.empty()) throw UsageError("simulate needs --example or --source");
      return cmd_simulate(source, n, seed, out, truth_out);
    }
    if (*fitc) return cmd_fit(flags, train_path, tune_path, truth_path, train_fraction, seed, workers, out);
    if (*pred) return cmd_predict(model_path, data_path, out);
    if (*ev) return cmd_eval(probs_path, eval_truth, eval_data, metrics, out);
    if (*bench) {
      BenchmarkConfig config;
      for (const auto& s : split_names(sources)) config.sources.push_back(DataSource::parse(s));
      for (const auto& s : split_names(schemes)) config.schemes.push_back(parse_scheme(s));
      config.criteria.clear();
      for (const auto& s : split_names(criteria)) config.criteria.push_back(parse_criterion(s));
      const FitConfig fc = flags.config(workers);
      config.runs = runs;
      config.n = bench_n;
      config.n_test = n_test;
      config.train_fraction = bench_train_fraction;
      config.m = fc.m;
      config.lambdas = fc.lambdas;
      config.sigmas = fc.sigmas;
      config.vote_rule = fc.vote_rule;
      config.normalize_ova = fc.normalize_ova;
      config.solver = fc.solver;
      config.seed = seed;
      config.workers = workers;
      const BenchmarkReport report = run_benchmark(config, [](const RunRecord& r) {
        std::cerr << r.source << " run " << r.run << ' ' << display_name(r.scheme) << '/' << to_string(r.criterion);
        if (r.failed) {
          std::cerr << " FAILED: " << r.error << '\n';
        } else {
          std::cerr << " L1=" << num(r.eval.l1) << " TE1=" << num(r.eval.te1) << " fit " << num(r.eval.runtime_seconds)
                    << " s\n";
        }
      });
      write_json(out, to_json(report));
      if (csv_out.empty()) csv_out = sibling(out, "_runs").replace_extension(".csv");
      write_runs_csv(csv_out, report);
      for (const auto& s : config.sources) std::cout << format_table(report, s.name()) << '\n';
      std::cout << "wrote " << out.string() << " and " << csv_out.string() << '\n';
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
