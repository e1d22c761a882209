#include "wsvm/benchmark.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "wsvm/model.hpp"

namespace wsvm {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double parse_double(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw InvalidInput("bad " + what + " '" + s + "'");
  return v;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

json mean_se_json(const MeanSe& v) {
  return {{"mean", number_or_flag(v.mean)}, {"se", number_or_flag(v.se)}, {"count", v.count}};
}

}  // namespace

DataSource DataSource::parse(const std::string& text) {
  std::string t = text;
  if (t.rfind("example", 0) == 0) t = t.substr(7);
  if (t.size() == 1 && t[0] >= '1' && t[0] <= '4') return DataSource{t[0] - '0'};
  if (text.rfind("ring:", 0) == 0) {
    std::vector<std::string> parts;
    std::stringstream ss(text.substr(5));
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw InvalidInput("ring source must be ring:K:radius:sd, got '" + text + "'");
    DataSource s;
    s.example = 0;
    const double k = parse_double(parts[0], "class count");
    if (k < 2 || k != static_cast<int>(k)) throw InvalidInput("ring class count must be an integer >= 2");
    s.num_classes = static_cast<int>(k);
    s.radius = parse_double(parts[1], "radius");
    s.sd = parse_double(parts[2], "standard deviation");
    if (!(s.sd > 0.0)) throw InvalidInput("ring standard deviation must be positive");
    return s;
  }
  throw InvalidInput("unknown data source '" + text + "' (expected example1..example4 or ring:K:r:sd)");
}

std::string DataSource::name() const {
  if (example > 0) return "example" + std::to_string(example);
  std::ostringstream os;
  os << "ring:" << num_classes << ':' << radius << ':' << sd;
  return os.str();
}

Simulation DataSource::simulate(std::size_t n, std::uint64_t seed) const {
  if (example > 0) return simulate_example(example, n, seed);
  return gen_gaussian_ring(num_classes, radius, sd, n, seed);
}

const AggregateRow* BenchmarkReport::find(const std::string& source, SchemeKind scheme,
                                          Criterion criterion) const {
  for (const auto& row : aggregate) {
    if (row.source == source && row.scheme == scheme && row.criterion == criterion) return &row;
  }
  return nullptr;
}

std::uint64_t run_seed(std::uint64_t seed, const DataSource& source, int run) {
  return derive_seed(derive_seed(seed, fnv1a(source.name())), static_cast<std::uint64_t>(run));
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config, const std::function<void(const RunRecord&)>& progress) {
  if (config.runs < 1) throw InvalidInput("benchmark needs at least one run");
  if (config.sources.empty() || config.schemes.empty() || config.criteria.empty()) {
    throw InvalidInput("benchmark needs at least one source, scheme and criterion");
  }
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw InvalidInput("train fraction must lie in (0, 1)");
  }
  const auto start = std::chrono::steady_clock::now();
  BenchmarkReport report;
  report.config = config;

  FitConfig fit_config;
  fit_config.m = config.m;
  fit_config.lambdas = config.lambdas;
  fit_config.sigmas = config.sigmas;
  fit_config.solver = config.solver;
  fit_config.workers = config.workers;

  for (const DataSource& source : config.sources) {
    for (int run = 0; run < config.runs; ++run) {
      const std::uint64_t seed = run_seed(config.seed, source, run);
      auto record_base = [&] {
        RunRecord r;
        r.source = source.name();
        r.run = run;
        r.seed = seed;
        return r;
      };
      std::vector<RunRecord> rows;
      try {
        const Simulation sim = source.simulate(config.n, derive_seed(seed, 1));
        SplitSpec spec;
        spec.train = config.train_fraction;
        spec.tune = 1.0 - config.train_fraction;
        spec.seed = derive_seed(seed, 2);
        const Split split = stratified_split(sim.data, spec);
        const LabeledDataset train = sim.data.subset(split.train);
        const LabeledDataset tune = sim.data.subset(split.tune);
        const Eigen::MatrixXd tune_truth = sim.truth.evaluate(tune.features());
        const Simulation test = source.simulate(config.n_test, derive_seed(seed, 3));
        const Eigen::MatrixXd test_truth = test.truth.evaluate(test.data.features());

        TaskFitter fitter(train, tune, fit_config, &tune_truth);
        for (const SchemeKind scheme : config.schemes) {
          for (const Criterion criterion : config.criteria) {
            RunRecord r = record_base();
            r.scheme = scheme;
            r.criterion = criterion;
            r.n_train = train.size();
            r.m = fitter.weights().m;
            r.eval.scheme = display_name(scheme);
            r.eval.source = r.source;
            r.eval.seed = seed;
            try {
              const FitResult fr = fit_scheme(fitter, scheme, criterion, config.vote_rule, config.normalize_ova);
              const Prediction pred = predict(fr.model, test.data.features());
              r.eval.l1 = l1_error(test_truth, pred.probs);
              r.eval.l2 = l2_error(test_truth, pred.probs);
              r.eval.egkl = egkl_loss(test_truth, pred.probs);
              r.eval.gkl = gkl_loss(test_truth, pred.probs);
              r.eval.te1 = test_error(test.data.labels(), pred.max_prob);
              if (!pred.max_vote.empty()) r.eval.te2 = test_error(test.data.labels(), pred.max_vote);
              r.eval.runtime_seconds = fr.seconds;
              if (fr.model.baseline) r.eval.k_star = fr.model.baseline->k_star;
              for (const auto& rep : fr.reports) r.selected.push_back({rep.task, rep.lambda, rep.sigma});
            } catch (const std::exception& e) {
              r.failed = true;
              r.error = e.what();
            }
            rows.push_back(std::move(r));
          }
        }
      } catch (const std::exception& e) {
        rows.clear();
        for (const SchemeKind scheme : config.schemes) {
          for (const Criterion criterion : config.criteria) {
            RunRecord r = record_base();
            r.scheme = scheme;
            r.criterion = criterion;
            r.failed = true;
            r.error = e.what();
            rows.push_back(std::move(r));
          }
        }
      }
      for (auto& r : rows) {
        if (progress) progress(r);
        report.runs.push_back(std::move(r));
      }
    }
  }
  report.aggregate = aggregate_runs(report.runs);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<AggregateRow> aggregate_runs(const std::vector<RunRecord>& runs) {
  std::vector<AggregateRow> out;
  std::vector<std::vector<const RunRecord*>> groups;
  for (const auto& r : runs) {
    std::size_t g = 0;
    for (; g < out.size(); ++g) {
      if (out[g].source == r.source && out[g].scheme == r.scheme && out[g].criterion == r.criterion) break;
    }
    if (g == out.size()) {
      AggregateRow row;
      row.source = r.source;
      row.scheme = r.scheme;
      row.criterion = r.criterion;
      out.push_back(row);
      groups.emplace_back();
    }
    groups[g].push_back(&r);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    AggregateRow& row = out[g];
    std::vector<double> l1, l2, egkl, gkl, te1, te2, secs;
    std::map<int, int> k_counts;
    for (const RunRecord* r : groups[g]) {
      if (r->failed) {
        ++row.runs_failed;
        continue;
      }
      ++row.runs_ok;
      l1.push_back(r->eval.l1);
      l2.push_back(r->eval.l2);
      egkl.push_back(r->eval.egkl);
      gkl.push_back(r->eval.gkl);
      te1.push_back(r->eval.te1);
      if (r->eval.te2) te2.push_back(*r->eval.te2);
      secs.push_back(r->eval.runtime_seconds);
      if (r->eval.k_star) ++k_counts[*r->eval.k_star];
    }
    row.l1 = mean_se(l1);
    row.l2 = mean_se(l2);
    row.egkl = mean_se(egkl);
    row.gkl = mean_se(gkl);
    row.te1 = mean_se(te1);
    row.fit_seconds = mean_se(secs);
    if (!te2.empty()) row.te2 = mean_se(te2);
    int best = 0;
    for (const auto& [k, c] : k_counts) {
      if (c > best) {
        best = c;
        row.k_star_mode = k;
      }
    }
  }
  return out;
}

json to_json(const BenchmarkConfig& c) {
  json sources = json::array(), schemes = json::array(), criteria = json::array();
  for (const auto& s : c.sources) sources.push_back(s.name());
  for (const auto s : c.schemes) schemes.push_back(to_string(s));
  for (const auto s : c.criteria) criteria.push_back(to_string(s));
  return {{"sources", sources},
          {"schemes", schemes},
          {"criteria", criteria},
          {"runs", c.runs},
          {"n", c.n},
          {"train_fraction", c.train_fraction},
          {"n_test", c.n_test},
          {"m", c.m ? json(*c.m) : json("floor(sqrt(n_train))")},
          {"lambdas", c.lambdas.empty() ? default_lambda_ladder() : c.lambdas},
          {"sigmas", c.sigmas.empty() ? json("i * sigma_M / 4, i = 1..6") : json(c.sigmas)},
          {"vote_rule", to_string(c.vote_rule)},
          {"normalize_ova", c.normalize_ova},
          {"solver",
           {{"tolerance", c.solver.tolerance}, {"max_iterations", c.solver.max_iterations}, {"jitter", c.solver.jitter}}},
          {"seed", c.seed},
          {"workers", c.workers}};
}

json to_json(const BenchmarkReport& report) {
  json per_run = json::array();
  for (const auto& r : report.runs) {
    json row = {{"source", r.source},          {"run", r.run}, {"seed", r.seed},
                {"scheme", to_string(r.scheme)}, {"criterion", to_string(r.criterion)}};
    if (r.failed) {
      row["failed"] = true;
      row["error"] = r.error;
    } else {
      row["n_train"] = r.n_train;
      row["m"] = r.m;
      row["l1"] = number_or_flag(r.eval.l1);
      row["l2"] = number_or_flag(r.eval.l2);
      row["egkl"] = number_or_flag(r.eval.egkl);
      row["gkl"] = number_or_flag(r.eval.gkl);
      row["te1"] = r.eval.te1;
      row["te2"] = r.eval.te2 ? json(*r.eval.te2) : json(nullptr);
      row["k_star"] = r.eval.k_star ? json(*r.eval.k_star) : json(nullptr);
      row["fit_seconds"] = r.eval.runtime_seconds;
      json sel = json::array();
      for (const auto& s : r.selected) sel.push_back({{"task", s.task.name()}, {"lambda", s.lambda}, {"sigma", s.sigma}});
      row["selected"] = std::move(sel);
    }
    per_run.push_back(std::move(row));
  }
  json mean = json::array(), se = json::array(), timings = json::array();
  for (const auto& a : report.aggregate) {
    json key = {{"source", a.source}, {"scheme", to_string(a.scheme)}, {"criterion", to_string(a.criterion)}};
    json m = key, s = key;
    m["runs_ok"] = a.runs_ok;
    m["runs_failed"] = a.runs_failed;
    m["flagged"] = a.runs_failed > 0;
    const std::pair<const char*, const MeanSe*> cols[] = {
        {"l1", &a.l1}, {"l2", &a.l2}, {"egkl", &a.egkl}, {"gkl", &a.gkl}, {"te1", &a.te1}};
    for (const auto& [name, v] : cols) {
      m[name] = number_or_flag(v->mean);
      s[name] = number_or_flag(v->se);
    }
    m["te2"] = a.te2 ? number_or_flag(a.te2->mean) : json(nullptr);
    s["te2"] = a.te2 ? number_or_flag(a.te2->se) : json(nullptr);
    m["k_star"] = a.k_star_mode ? json(*a.k_star_mode) : json(nullptr);
    mean.push_back(std::move(m));
    se.push_back(std::move(s));
    json t = key;
    t["fit_seconds"] = mean_se_json(a.fit_seconds);
    timings.push_back(std::move(t));
  }
  return {{"config", to_json(report.config)},
          {"per_run", std::move(per_run)},
          {"aggregate", {{"mean", std::move(mean)}, {"se", std::move(se)}}},
          {"timings", {{"per_scheme", std::move(timings)}, {"wall_seconds", report.wall_seconds}}}};
}

void write_runs_csv(const std::filesystem::path& path, const BenchmarkReport& report) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "source,run,seed,scheme,criterion,failed,l1,l2,egkl,gkl,te1,te2,k_star,fit_seconds\n";
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(17);
    if (std::isinf(v)) return std::string(v > 0 ? "Inf" : "-Inf");
    os << v;
    return os.str();
  };
  for (const auto& r : report.runs) {
    out << r.source << ',' << r.run << ',' << r.seed << ',' << to_string(r.scheme) << ','
        << to_string(r.criterion) << ',' << (r.failed ? 1 : 0);
    if (r.failed) {
      out << ",,,,,,,,\n";
      continue;
    }
    out << ',' << num(r.eval.l1) << ',' << num(r.eval.l2) << ',' << num(r.eval.egkl) << ',' << num(r.eval.gkl)
        << ',' << num(r.eval.te1) << ',' << (r.eval.te2 ? num(*r.eval.te2) : "NA") << ','
        << (r.eval.k_star ? std::to_string(*r.eval.k_star) : "NA") << ',' << num(r.eval.runtime_seconds) << '\n';
  }
  if (!out) throw InvalidInput("failed writing " + path.string());
}

std::string format_table(const BenchmarkReport& report, const std::string& source) {
  std::vector<const AggregateRow*> cols;
  for (const auto& a : report.aggregate) {
    if (a.source == source) cols.push_back(&a);
  }
  std::ostringstream os;
  auto cell = [&](const std::string& s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%-16s", s.c_str());
    os << buf;
  };
  cell(source);
  for (const auto* c : cols) cell(display_name(c->scheme) + "/" + to_string(c->criterion));
  os << '\n';
  cell("Time (min)");
  for (const auto* c : cols) {
    cell(fmt("%.1f", c->fit_seconds.mean / 60.0) + " (" + fmt("%.1f", c->fit_seconds.se / 60.0) + ")");
  }
  os << '\n';
  const std::pair<const char*, MeanSe AggregateRow::*> rows[] = {
      {"L1", &AggregateRow::l1}, {"L2", &AggregateRow::l2}, {"EGKL", &AggregateRow::egkl},
      {"GKL", &AggregateRow::gkl}, {"TE1", &AggregateRow::te1}};
  for (const auto& [name, member] : rows) {
    cell(name);
    for (const auto* c : cols) cell(format_scaled(c->*member));
    os << '\n';
  }
  cell("TE2");
  for (const auto* c : cols) cell(c->te2 ? format_scaled(*c->te2) : "NA (NA)");
  os << '\n';
  cell("k*");
  for (const auto* c : cols) cell(c->k_star_mode ? std::to_string(*c->k_star_mode) : "NA");
  os << '\n';
  cell("failed runs");
  for (const auto* c : cols) cell(std::to_string(c->runs_failed));
  os << '\n';
  return os.str();
}

}  // namespace wsvm
