#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wsvm/data.hpp"
#include "wsvm/fit.hpp"
#include "wsvm/metrics.hpp"

namespace wsvm {

/// A simulation generator: "example1".."example4" (or just "1".."4"), or "ring:K:radius:sd" for a
/// K-class Gaussian ring.
struct DataSource {
  int example = 0;  // 0 for a ring
  int num_classes = 3;
  double radius = 1.5;
  double sd = 1.2;

  static DataSource parse(const std::string& text);
  std::string name() const;
  Simulation simulate(std::size_t n, std::uint64_t seed) const;
};

struct BenchmarkConfig {
  std::vector<DataSource> sources;
  std::vector<SchemeKind> schemes;
  std::vector<Criterion> criteria{Criterion::Egkl};
  int runs = 10;
  /// Points drawn per run and split into training and tuning parts.
  std::size_t n = 1000;
  double train_fraction = 0.5;
  std::size_t n_test = 10000;
  std::optional<int> m;
  std::vector<double> lambdas;
  std::vector<double> sigmas;
  VoteRule vote_rule = VoteRule::GreaterThanHalf;
  bool normalize_ova = false;
  SolverOptions solver;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct SelectedParams {
  BinaryTask task;
  double lambda = 0.0;
  double sigma = 0.0;
};

struct RunRecord {
  std::string source;
  int run = 0;
  std::uint64_t seed = 0;
  SchemeKind scheme = SchemeKind::Pairwise;
  Criterion criterion = Criterion::Egkl;
  bool failed = false;
  std::string error;
  EvalResult eval;
  std::size_t n_train = 0;
  int m = 0;
  std::vector<SelectedParams> selected;
};

struct AggregateRow {
  std::string source;
  SchemeKind scheme = SchemeKind::Pairwise;
  Criterion criterion = Criterion::Egkl;
  MeanSe l1, l2, egkl, gkl, te1, fit_seconds;
  std::optional<MeanSe> te2;
  std::optional<int> k_star_mode;
  int runs_ok = 0;
  int runs_failed = 0;
};

struct BenchmarkReport {
  BenchmarkConfig config;
  std::vector<RunRecord> runs;
  std::vector<AggregateRow> aggregate;
  double wall_seconds = 0.0;

  const AggregateRow* find(const std::string& source, SchemeKind scheme, Criterion criterion) const;
};

/// Seed of one Monte Carlo run; depends only on the base seed, the source name and the run index.
std::uint64_t run_seed(std::uint64_t seed, const DataSource& source, int run);

/// Runs every (source, run): simulate, split, fit each scheme under each criterion through a shared
/// task cache, predict an independent test sample and score it. Failures are recorded per row.
BenchmarkReport run_benchmark(const BenchmarkConfig& config,
                              const std::function<void(const RunRecord&)>& progress = {});

std::vector<AggregateRow> aggregate_runs(const std::vector<RunRecord>& runs);

nlohmann::json to_json(const BenchmarkConfig& config);
nlohmann::json to_json(const BenchmarkReport& report);
/// One line per run record.
void write_runs_csv(const std::filesystem::path& path, const BenchmarkReport& report);
/// Table with one column per (scheme, criterion) and the x100 convention; time in minutes.
std::string format_table(const BenchmarkReport& report, const std::string& source);

}  // namespace wsvm
