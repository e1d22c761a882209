#include "wsvm/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

namespace wsvm {

// --- Random numbers --------------------------------------------------------------------------

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform_open() {
  double u;
  do {
    u = uniform();
  } while (u == 0.0);
  return u;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw InvalidInput("Rng::below needs n > 0");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Eigen::MatrixXd TruthOracle::evaluate(const Matrix& points) const {
  Eigen::MatrixXd out(points.rows(), num_classes);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const std::span<const double> x(points.data() + i * points.cols(), static_cast<std::size_t>(points.cols()));
    const auto p = p_true(x);
    for (int j = 0; j < num_classes; ++j) out(i, j) = p[static_cast<std::size_t>(j)];
  }
  return out;
}

// --- Generators ------------------------------------------------------------------------------

std::vector<double> softmax(std::span<const double> f) {
  const double top = *std::max_element(f.begin(), f.end());
  std::vector<double> p(f.size());
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    p[j] = std::exp(f[j] - top);
    s += p[j];
  }
  for (double& v : p) v /= s;
  return p;
}

namespace {

Label sample_label(Rng& rng, const std::vector<double>& p) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    acc += p[j];
    if (u < acc) return static_cast<Label>(j) + 1;
  }
  return static_cast<Label>(p.size());
}

std::vector<std::array<double, 2>> ring_means(int k, double radius) {
  std::vector<std::array<double, 2>> mu(static_cast<std::size_t>(k));
  for (int y = 1; y <= k; ++y) {
    const double a = 2.0 * y * std::numbers::pi / k;
    mu[static_cast<std::size_t>(y - 1)] = {radius * std::cos(a), radius * std::sin(a)};
  }
  return mu;
}

void check_n(std::size_t n, int k) {
  if (n < static_cast<std::size_t>(k)) {
    throw InvalidInput("simulation needs n >= K (" + std::to_string(k) + "), got " + std::to_string(n));
  }
}

}  // namespace

TruthOracle gaussian_ring_truth(int num_classes, double radius, double sd) {
  const auto mu = ring_means(num_classes, radius);
  const double inv2s2 = 1.0 / (2.0 * sd * sd);
  TruthOracle t;
  t.name = "gaussian-ring-K" + std::to_string(num_classes);
  t.num_classes = num_classes;
  t.p_true = [mu, inv2s2](std::span<const double> x) {
    std::vector<double> logit(mu.size());
    for (std::size_t j = 0; j < mu.size(); ++j) {
      const double d0 = x[0] - mu[j][0], d1 = x[1] - mu[j][1];
      logit[j] = -(d0 * d0 + d1 * d1) * inv2s2;
    }
    return softmax(logit);
  };
  return t;
}

Simulation gen_gaussian_ring(int num_classes, double radius, double sd, std::size_t n, std::uint64_t seed) {
  check_n(n, num_classes);
  const auto mu = ring_means(num_classes, radius);
  Rng rng(seed);
  Matrix x(static_cast<Eigen::Index>(n), 2);
  std::vector<Label> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<Label>(rng.below(static_cast<std::uint64_t>(num_classes))) + 1;
    y[i] = label;
    const auto& m = mu[static_cast<std::size_t>(label - 1)];
    const double z0 = rng.normal();
    const double z1 = rng.normal();
    x(static_cast<Eigen::Index>(i), 0) = m[0] + sd * z0;
    x(static_cast<Eigen::Index>(i), 1) = m[1] + sd * z1;
  }
  return {LabeledDataset(std::move(x), std::move(y), num_classes),
          gaussian_ring_truth(num_classes, radius, sd)};
}

Simulation gen_example1(std::size_t n, std::uint64_t seed) {
  auto sim = gen_gaussian_ring(7, 1.5, 1.2, n, seed);
  sim.truth.name = "example1";
  return sim;
}

Simulation gen_example2(std::size_t n, std::uint64_t seed) {
  auto sim = gen_gaussian_ring(9, 2.5, 1.5, n, seed);
  sim.truth.name = "example2";
  return sim;
}

std::vector<double> example3_scores(std::span<const double> x) {
  const double a = x[0], b = x[1];
  return {-1.5 * a + 0.2 * a * a - 0.1 * b * b + 0.2,
          0.3 * a * a + 0.2 * b * b - a * b + 0.2,
          1.5 * a + 0.2 * a * a - 0.1 * b * b + 0.2,
          -0.1 * a * a + 0.2 * b * b - 1.5 * b + a + 0.1 * a * b,
          0.1 * a * a + 0.1 * b * b + a * b - 0.2};
}

double t2_cdf(double t) {
  // T(t) = 1/2 + t / (2 sqrt(t^2 + 2)); the lower tail is rewritten to avoid cancellation.
  if (t >= 0.0) return 0.5 + t / (2.0 * std::sqrt(t * t + 2.0));
  const double h = -t;
  const double s = std::sqrt(h * h + 2.0);
  return 1.0 / (s * (s + h));
}

double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

std::vector<double> example4_h(std::span<const double> x) {
  const double a = x[0], b = x[1];
  return {-3.0 * a * std::sqrt(5.0) + 3.0 * b,
          -3.0 * a * std::sqrt(5.0) - 3.0 * b,
          b * std::sqrt(3.0) - 1.2 * a,
          2.0 * b * std::sqrt(3.0) + 1.2 * a,
          std::sqrt(std::abs(a * b) + 1.0)};
}

namespace {

double probit_t2(double h) {
  // Phi^{-1}(T2(h)) = -Phi^{-1}(T2(-h)); evaluate on the lower tail for accuracy.
  if (h > 0.0) return -normal_quantile(t2_cdf(-h));
  return normal_quantile(t2_cdf(h));
}

TruthOracle example3_truth() {
  return {"example3", 5, [](std::span<const double> x) { return softmax(example3_scores(x)); }};
}

TruthOracle example4_truth() {
  return {"example4", 5, [](std::span<const double> x) {
            auto h = example4_h(x);
            for (double& v : h) v = probit_t2(v);
            return softmax(h);
          }};
}

Simulation sample_from_truth(TruthOracle truth, std::size_t n, std::uint64_t seed, bool disc) {
  check_n(n, truth.num_classes);
  Rng rng(seed);
  Matrix x(static_cast<Eigen::Index>(n), 2);
  std::vector<Label> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double a, b;
    if (disc) {
      do {
        a = -10.0 + 20.0 * rng.uniform();
        b = -10.0 + 20.0 * rng.uniform();
      } while (a * a + b * b > 100.0);
    } else {
      a = -5.0 + 10.0 * rng.uniform();
      b = -5.0 + 10.0 * rng.uniform();
    }
    x(static_cast<Eigen::Index>(i), 0) = a;
    x(static_cast<Eigen::Index>(i), 1) = b;
    const double pt[2] = {a, b};
    y[i] = sample_label(rng, truth(pt));
  }
  const int k = truth.num_classes;
  return {LabeledDataset(std::move(x), std::move(y), k), std::move(truth)};
}

}  // namespace

Simulation gen_example3(std::size_t n, std::uint64_t seed) {
  return sample_from_truth(example3_truth(), n, seed, false);
}

Simulation gen_example4(std::size_t n, std::uint64_t seed) {
  return sample_from_truth(example4_truth(), n, seed, true);
}

Simulation simulate_example(int example, std::size_t n, std::uint64_t seed) {
  switch (example) {
    case 1: return gen_example1(n, seed);
    case 2: return gen_example2(n, seed);
    case 3: return gen_example3(n, seed);
    case 4: return gen_example4(n, seed);
    default: throw InvalidInput("example must be 1..4, got " + std::to_string(example));
  }
}

TruthOracle example_truth(int example) {
  switch (example) {
    case 1: {
      auto t = gaussian_ring_truth(7, 1.5, 1.2);
      t.name = "example1";
      return t;
    }
    case 2: {
      auto t = gaussian_ring_truth(9, 2.5, 1.5);
      t.name = "example2";
      return t;
    }
    case 3: return example3_truth();
    case 4: return example4_truth();
    default: throw InvalidInput("example must be 1..4, got " + std::to_string(example));
  }
}

// --- Splitting -------------------------------------------------------------------------------

namespace {

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

void cut(const std::vector<std::size_t>& pool, const SplitSpec& spec, Split& out, const std::string& what) {
  const double n = static_cast<double>(pool.size());
  const auto b1 = static_cast<std::size_t>(std::floor(spec.train * n + 0.5));
  const auto b2 = static_cast<std::size_t>(std::floor((spec.train + spec.tune) * n + 0.5));
  const auto b3 = static_cast<std::size_t>(std::floor((spec.train + spec.tune + spec.test) * n + 0.5));
  const std::size_t end = std::min(b3, pool.size());
  const std::pair<double, std::size_t> parts[3] = {{spec.train, b1}, {spec.tune, b2 - b1}, {spec.test, end - std::min(b2, end)}};
  for (const auto& [frac, count] : parts) {
    if (frac > 0.0 && count == 0 && !pool.empty()) {
      throw InvalidInput(what + " is too small for the requested split fractions");
    }
  }
  out.train.insert(out.train.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(b1));
  out.tune.insert(out.tune.end(), pool.begin() + static_cast<std::ptrdiff_t>(b1),
                  pool.begin() + static_cast<std::ptrdiff_t>(b2));
  out.test.insert(out.test.end(), pool.begin() + static_cast<std::ptrdiff_t>(std::min(b2, end)),
                  pool.begin() + static_cast<std::ptrdiff_t>(end));
}

}  // namespace

Split stratified_split(const LabeledDataset& dataset, const SplitSpec& spec) {
  if (spec.train < 0 || spec.tune < 0 || spec.test < 0 || spec.train + spec.tune + spec.test <= 0 ||
      spec.train + spec.tune + spec.test > 1.0 + 1e-12) {
    throw InvalidInput("split fractions must be nonnegative with a positive sum no larger than 1");
  }
  Rng rng(spec.seed);
  Split out;
  if (spec.stratified) {
    for (Label j = 1; j <= dataset.num_classes(); ++j) {
      std::vector<std::size_t> pool = dataset.class_indices(j);
      shuffle(pool, rng);
      cut(pool, spec, out, "class " + std::to_string(j));
    }
  } else {
    std::vector<std::size_t> pool(dataset.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    shuffle(pool, rng);
    cut(pool, spec, out, "dataset");
  }
  return out;
}

// --- CSV -------------------------------------------------------------------------------------

ParseError::ParseError(const std::string& path, std::size_t line, const std::string& what)
    : InvalidInput(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) fields.push_back(cur);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

bool parse_int(const std::string& text, int& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size();
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  return out;
}

}  // namespace

LabeledDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  auto in = open_in(path);
  const std::string name = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ParseError(name, 1, "missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  if (header.size() < 2 || trim(header.back()) != "y") {
    throw ParseError(name, 1, "header must be x1,...,xp,y");
  }
  const std::size_t p = header.size() - 1;
  for (std::size_t c = 0; c < p; ++c) {
    if (trim(header[c]) != "x" + std::to_string(c + 1)) {
      throw ParseError(name, 1, "feature column " + std::to_string(c + 1) + " must be named x" +
                                    std::to_string(c + 1));
    }
  }
  std::vector<double> values;
  std::vector<Label> labels;
  std::vector<std::size_t> line_of;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != p + 1) {
      throw ParseError(name, lineno, "expected " + std::to_string(p + 1) + " fields, got " +
                                         std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < p; ++c) {
      double v;
      if (!parse_double(fields[c], v)) {
        throw ParseError(name, lineno, "malformed number '" + fields[c] + "' in column x" + std::to_string(c + 1));
      }
      values.push_back(v);
    }
    int y;
    if (!parse_int(fields[p], y)) throw ParseError(name, lineno, "non-integer label '" + fields[p] + "'");
    if (y < 1 || (schema.num_classes > 0 && y > schema.num_classes)) {
      throw ParseError(name, lineno, "label " + std::to_string(y) + " out of range");
    }
    labels.push_back(y);
    line_of.push_back(lineno);
  }
  Matrix x(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(p));
  std::copy(values.begin(), values.end(), x.data());
  return LabeledDataset(std::move(x), std::move(labels), schema.num_classes);
}

void save_csv(const std::filesystem::path& path, const LabeledDataset& dataset) {
  auto out = open_out(path);
  for (std::size_t c = 0; c < dataset.dim(); ++c) out << 'x' << (c + 1) << ',';
  out << "y\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (const double v : dataset.point(i)) out << format_double(v) << ',';
    out << dataset.label(i) << '\n';
  }
  if (!out) throw InvalidInput("failed writing " + path.string());
}

Eigen::MatrixXd load_prob_csv(const std::filesystem::path& path, std::map<std::string, std::vector<double>>* extra) {
  auto in = open_in(path);
  const std::string name = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ParseError(name, 1, "missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  std::size_t k = 0;
  while (k < header.size() && trim(header[k]) == "p" + std::to_string(k + 1)) ++k;
  if (k == 0) throw ParseError(name, 1, "header must start with p1,...,pK");
  std::vector<double> values;
  std::size_t rows = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError(name, lineno, "expected " + std::to_string(header.size()) + " fields");
    }
    for (std::size_t c = 0; c < k; ++c) {
      double v;
      if (!parse_double(fields[c], v)) throw ParseError(name, lineno, "malformed probability '" + fields[c] + "'");
      values.push_back(v);
    }
    if (extra != nullptr) {
      for (std::size_t c = k; c < fields.size(); ++c) {
        double v;
        if (!parse_double(fields[c], v)) throw ParseError(name, lineno, "malformed value '" + fields[c] + "'");
        (*extra)[trim(header[c])].push_back(v);
      }
    }
    ++rows;
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(k));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * k + c];
    }
  }
  return out;
}

void save_prob_csv(const std::filesystem::path& path, const Eigen::MatrixXd& probs) {
  auto out = open_out(path);
  for (Eigen::Index j = 0; j < probs.cols(); ++j) out << (j ? "," : "") << 'p' << (j + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    for (Eigen::Index j = 0; j < probs.cols(); ++j) out << (j ? "," : "") << format_double(probs(i, j));
    out << '\n';
  }
  if (!out) throw InvalidInput("failed writing " + path.string());
}

// --- Feature ranking -------------------------------------------------------------------------

FeatureRanking bw_rank(const LabeledDataset& dataset) {
  const int k = dataset.num_classes();
  const std::size_t p = dataset.dim();
  if (p == 0) throw InvalidInput("bw_rank needs at least one feature");
  for (Label j = 1; j <= k; ++j) {
    if (dataset.class_size(j) == 0) throw InvalidInput("bw_rank: class " + std::to_string(j) + " is empty");
  }
  const Matrix& x = dataset.features();
  FeatureRanking out;
  out.scores.resize(p);
  for (std::size_t g = 0; g < p; ++g) {
    const auto col = x.col(static_cast<Eigen::Index>(g));
    const double grand = col.mean();
    double between = 0.0, within = 0.0;
    for (Label j = 1; j <= k; ++j) {
      const auto& idx = dataset.class_indices(j);
      double mean = 0.0;
      for (const std::size_t i : idx) mean += col[static_cast<Eigen::Index>(i)];
      mean /= static_cast<double>(idx.size());
      between += static_cast<double>(idx.size()) * (mean - grand) * (mean - grand);
      for (const std::size_t i : idx) {
        const double d = col[static_cast<Eigen::Index>(i)] - mean;
        within += d * d;
      }
    }
    if (between == 0.0) {
      out.scores[g] = 0.0;
    } else if (within == 0.0) {
      out.scores[g] = std::numeric_limits<double>::infinity();
      out.degenerate.push_back(g);
    } else {
      out.scores[g] = between / within;
    }
  }
  out.order.resize(p);
  for (std::size_t g = 0; g < p; ++g) out.order[g] = g;
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t a, std::size_t b) { return out.scores[a] > out.scores[b]; });
  return out;
}

}  // namespace wsvm
