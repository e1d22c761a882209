#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "wsvm/dataset.hpp"

namespace wsvm {

/// Portable random stream: 64-bit Mersenne Twister (output fixed by the standard) with uniform and
/// normal variates derived by hand, so draws are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent child seed from a parent seed and a stream tag (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// True class probabilities p_j(x) of a generator.
struct TruthOracle {
  std::string name;
  int num_classes = 0;
  std::function<std::vector<double>(std::span<const double>)> p_true;

  std::vector<double> operator()(std::span<const double> x) const { return p_true(x); }
  /// n x K matrix of p_true at every row.
  Eigen::MatrixXd evaluate(const Matrix& points) const;
};

struct Simulation {
  LabeledDataset data;
  TruthOracle truth;
};

/// K Gaussian classes with equal priors, means r (cos 2 y pi / K, sin 2 y pi / K), covariance s^2 I.
Simulation gen_gaussian_ring(int num_classes, double radius, double sd, std::size_t n, std::uint64_t seed);
/// Truth oracle of gen_gaussian_ring without drawing data.
TruthOracle gaussian_ring_truth(int num_classes, double radius, double sd);

Simulation gen_example1(std::size_t n, std::uint64_t seed);  // K = 7, r = 1.5, s = 1.2
Simulation gen_example2(std::size_t n, std::uint64_t seed);  // K = 9, r = 2.5, s = 1.5
Simulation gen_example3(std::size_t n, std::uint64_t seed);  // K = 5, quadratic softmax on [-5, 5]^2
Simulation gen_example4(std::size_t n, std::uint64_t seed);  // K = 5, t2-probit softmax on a disc
/// Dispatch by example number 1..4.
Simulation simulate_example(int example, std::size_t n, std::uint64_t seed);
TruthOracle example_truth(int example);

/// The five Example 3 scores f_j(x).
std::vector<double> example3_scores(std::span<const double> x);
/// The five Example 4 inputs h_j(x).
std::vector<double> example4_h(std::span<const double> x);
/// CDF of Student's t with 2 degrees of freedom, closed form.
double t2_cdf(double t);
/// Standard normal quantile.
double normal_quantile(double p);
/// exp(f_j) / sum_l exp(f_l), shifted by max f for stability.
std::vector<double> softmax(std::span<const double> f);

struct SplitSpec {
  double train = 0.5;
  double tune = 0.5;
  double test = 0.0;
  bool stratified = true;
  std::uint64_t seed = 1;
};

struct Split {
  std::vector<std::size_t> train, tune, test;
};

/// Per-class shuffle (or global shuffle when not stratified) and cut by the fractions.
/// The cut points are the cumulative fractions times n_j rounded half up, so fractions that sum to
/// one use every point. Throws when a requested part of some class would be empty.
Split stratified_split(const LabeledDataset& dataset, const SplitSpec& spec);

class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct CsvSchema {
  /// 0 infers K from the largest label.
  int num_classes = 0;
};

/// Header row x1..xp,y; feature columns real, last column an integer label in 1..K.
LabeledDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
void save_csv(const std::filesystem::path& path, const LabeledDataset& dataset);

/// Columns p1..pK, one row per data row. Numeric columns after pK are returned by name in extra.
Eigen::MatrixXd load_prob_csv(const std::filesystem::path& path,
                              std::map<std::string, std::vector<double>>* extra = nullptr);
void save_prob_csv(const std::filesystem::path& path, const Eigen::MatrixXd& probs);

struct FeatureRanking {
  std::vector<std::size_t> order;  // feature indices, most relevant first
  std::vector<double> scores;      // BW(g), indexed by feature
  std::vector<std::size_t> degenerate;  // features with zero within-class spread (score +inf)
};

/// Between-group over within-group sum of squares per feature, sorted descending; ties by index.
FeatureRanking bw_rank(const LabeledDataset& dataset);

}  // namespace wsvm
