#include "wsvm/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wsvm {

namespace {

void check_open_unit(double q, const char* what) {
  if (!(q > 0.0 && q < 1.0)) {
    throw InvalidInput(std::string(what) + " must lie in (0, 1), got " + std::to_string(q));
  }
}

struct VoteTally {
  int votes = 0;
  double sum = 0.0;
  double min_q = std::numeric_limits<double>::infinity();
};

std::vector<VoteTally> tally(const PairwiseProbTable& table) {
  const int k = table.num_classes();
  std::vector<VoteTally> out(static_cast<std::size_t>(k));
  for (Label a = 1; a <= k; ++a) {
    auto& t = out[static_cast<std::size_t>(a - 1)];
    for (Label b = 1; b <= k; ++b) {
      if (a == b) continue;
      const double q = table.q(a, b);
      if (q > 0.5) ++t.votes;
      t.sum += q;
      t.min_q = std::min(t.min_q, q);
    }
  }
  return out;
}

}  // namespace

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Pairwise: return "pairwise";
    case SchemeKind::Baseline1: return "b1";
    case SchemeKind::Baseline2: return "b2";
    case SchemeKind::BaselinePairwise1: return "bp1";
    case SchemeKind::BaselinePairwise2: return "bp2";
    case SchemeKind::OneVsAll: return "ova";
  }
  return "?";
}

SchemeKind parse_scheme(const std::string& text) {
  for (const auto kind : {SchemeKind::Pairwise, SchemeKind::Baseline1, SchemeKind::Baseline2,
                          SchemeKind::BaselinePairwise1, SchemeKind::BaselinePairwise2,
                          SchemeKind::OneVsAll}) {
    if (to_string(kind) == text) return kind;
  }
  throw InvalidInput("unknown scheme '" + text + "' (expected pairwise|b1|b2|bp1|bp2|ova)");
}

std::string display_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Pairwise: return "P-SVM";
    case SchemeKind::Baseline1: return "B1-SVM";
    case SchemeKind::Baseline2: return "B2-SVM";
    case SchemeKind::BaselinePairwise1: return "BP1-SVM";
    case SchemeKind::BaselinePairwise2: return "BP2-SVM";
    case SchemeKind::OneVsAll: return "A-SVM";
  }
  return "?";
}

bool uses_fixed_baseline(SchemeKind kind) {
  return kind == SchemeKind::Baseline1 || kind == SchemeKind::Baseline2 ||
         kind == SchemeKind::BaselinePairwise1 || kind == SchemeKind::BaselinePairwise2;
}

bool has_pairwise_table(SchemeKind kind) {
  return kind == SchemeKind::Pairwise || kind == SchemeKind::BaselinePairwise1 ||
         kind == SchemeKind::BaselinePairwise2;
}

std::string to_string(VoteRule rule) {
  return rule == VoteRule::GreaterThanHalf ? "gt-half" : "min-denominator";
}

VoteRule parse_vote_rule(const std::string& text) {
  if (text == "gt-half") return VoteRule::GreaterThanHalf;
  if (text == "min-denominator") return VoteRule::MinDenominator;
  throw InvalidInput("unknown vote rule '" + text + "' (expected gt-half|min-denominator)");
}

// --- PairwiseProbTable -----------------------------------------------------------------------

PairwiseProbTable::PairwiseProbTable(int num_classes)
    : k_(num_classes),
      values_(static_cast<std::size_t>(num_classes * num_classes), 0.0),
      present_(static_cast<std::size_t>(num_classes * num_classes), 0) {
  if (num_classes < 2) throw InvalidInput("pairwise table needs at least two classes");
}

std::size_t PairwiseProbTable::at(Label j, Label k) const {
  if (j < 1 || j > k_ || k < 1 || k > k_ || j == k) {
    throw InvalidInput("pair (" + std::to_string(j) + ", " + std::to_string(k) + ") is not valid");
  }
  return static_cast<std::size_t>((j - 1) * k_ + (k - 1));
}

void PairwiseProbTable::set(Label j, Label k, double value) {
  check_open_unit(value, "pairwise probability");
  values_[at(j, k)] = value;
  values_[at(k, j)] = 1.0 - value;
  present_[at(j, k)] = present_[at(k, j)] = 1;
}

bool PairwiseProbTable::has(Label j, Label k) const { return present_[at(j, k)] != 0; }

double PairwiseProbTable::q(Label j, Label k) const {
  const std::size_t i = at(j, k);
  if (!present_[i]) {
    throw InvalidInput("pairwise table is missing pair (" + std::to_string(j) + ", " +
                       std::to_string(k) + ")");
  }
  return values_[i];
}

bool PairwiseProbTable::complete() const {
  for (Label j = 1; j <= k_; ++j) {
    for (Label k = j + 1; k <= k_; ++k) {
      if (!has(j, k)) return false;
    }
  }
  return true;
}

// --- Baseline selection ----------------------------------------------------------------------

BaselineChoice select_baseline_b1(const LabeledDataset& dataset) {
  const int k = dataset.num_classes();
  if (k < 3) throw InvalidInput("baseline selection needs K >= 3");
  BaselineChoice choice{1, BaselineMethod::LargestClass, {}};
  std::size_t best = 0;
  for (Label j = 1; j <= k; ++j) {
    const std::size_t sz = dataset.class_size(j);
    if (sz == 0) throw InvalidInput("class " + std::to_string(j) + " is empty");
    choice.diagnostics.push_back(static_cast<double>(sz));
    if (sz > best) {
      best = sz;
      choice.k_star = j;
    }
  }
  return choice;
}

double class_compactness(const LabeledDataset& dataset, Label j) {
  const auto& idx = dataset.class_indices(j);
  if (idx.size() < 2) {
    throw InvalidInput("class " + std::to_string(j) + " needs at least two points for compactness");
  }
  std::vector<double> d(idx.size(), 0.0);
  for (std::size_t t = 0; t < idx.size(); ++t) {
    for (std::size_t s = 0; s < idx.size(); ++s) {
      if (s != t) d[t] += euclidean_distance(dataset.point(idx[s]), dataset.point(idx[t]));
    }
  }
  std::vector<double> sorted = d;
  std::sort(sorted.begin(), sorted.end());
  const double median_value = sorted[(sorted.size() - 1) / 2];
  const auto median_pos = static_cast<std::size_t>(std::find(d.begin(), d.end(), median_value) - d.begin());
  const auto centre = dataset.point(idx[median_pos]);
  double dm = 0.0;
  for (const std::size_t s : idx) dm = std::max(dm, euclidean_distance(dataset.point(s), centre));
  return dm;
}

double between_class_distance(const LabeledDataset& dataset, Label j, Label j2) {
  const auto& a = dataset.class_indices(j);
  const auto& b = dataset.class_indices(j2);
  if (a.empty() || b.empty()) throw InvalidInput("between-class distance needs nonempty classes");
  // Iterate in label order so the result is bit-identical for (j, j2) and (j2, j).
  const auto& first = j <= j2 ? a : b;
  const auto& second = j <= j2 ? b : a;
  double best = std::numeric_limits<double>::infinity();
  for (const std::size_t s : first) {
    for (const std::size_t t : second) {
      best = std::min(best, euclidean_distance(dataset.point(s), dataset.point(t)));
    }
  }
  return best;
}

BaselineChoice select_baseline_b2(const LabeledDataset& dataset) {
  const int k = dataset.num_classes();
  if (k < 3) throw InvalidInput("baseline selection needs K >= 3");
  std::vector<double> cp(static_cast<std::size_t>(k));
  for (Label j = 1; j <= k; ++j) {
    if (dataset.class_size(j) < 2) {
      throw InvalidInput("B2 baseline selection needs at least two points in class " + std::to_string(j));
    }
    cp[static_cast<std::size_t>(j - 1)] = class_compactness(dataset, j);
    if (cp[static_cast<std::size_t>(j - 1)] == 0.0) {
      throw InvalidInput("class " + std::to_string(j) + " has zero compactness (all points identical)");
    }
  }
  BaselineChoice choice{1, BaselineMethod::MedianAggDistance, {}};
  for (Label j = 1; j <= k; ++j) {
    double bc = 0.0;
    for (Label j2 = 1; j2 <= k; ++j2) {
      if (j2 != j) bc += between_class_distance(dataset, j, j2);
    }
    choice.diagnostics.push_back(bc / cp[static_cast<std::size_t>(j - 1)] / k);
  }
  std::vector<double> sorted = choice.diagnostics;
  std::sort(sorted.begin(), sorted.end());
  const double lower_median = sorted[(sorted.size() - 1) / 2];
  const auto pos = std::find(choice.diagnostics.begin(), choice.diagnostics.end(), lower_median);
  choice.k_star = static_cast<Label>(pos - choice.diagnostics.begin()) + 1;
  return choice;
}

BaselineChoice select_baseline(const LabeledDataset& dataset, BaselineMethod method) {
  return method == BaselineMethod::LargestClass ? select_baseline_b1(dataset)
                                                : select_baseline_b2(dataset);
}

// --- Probability assembly --------------------------------------------------------------------

ProbEstimate baseline_probs(std::span<const double> q_col, Label k_star) {
  const auto k = static_cast<int>(q_col.size());
  if (k_star < 1 || k_star > k) throw InvalidInput("baseline class outside 1..K");
  std::vector<double> ratio(q_col.size(), 1.0);
  double total = 0.0;
  for (Label j = 1; j <= k; ++j) {
    const auto i = static_cast<std::size_t>(j - 1);
    if (j != k_star) {
      check_open_unit(q_col[i], "baseline pairwise probability");
      ratio[i] = q_col[i] / (1.0 - q_col[i]);
    }
    total += ratio[i];
  }
  ProbEstimate out{std::vector<double>(q_col.size()), SchemeKind::Baseline1, true};
  double rest = 0.0;
  for (Label j = 1; j <= k; ++j) {
    if (j == k_star) continue;
    const auto i = static_cast<std::size_t>(j - 1);
    out.probs[i] = ratio[i] / total;
    rest += out.probs[i];
  }
  out.probs[static_cast<std::size_t>(k_star - 1)] = 1.0 - rest;
  return out;
}

double reconstruct_pairwise(double q_j, double q_j2) {
  check_open_unit(q_j, "q_j");
  check_open_unit(q_j2, "q_j2");
  const double den = q_j + q_j2 - 2.0 * q_j * q_j2;
  if (den < 1e-15) throw InvalidInput("pairwise reconstruction denominator vanishes");
  return (q_j - q_j * q_j2) / den;
}

PairwiseProbTable reconstruct_table(std::span<const double> q_col, Label k_star) {
  const auto k = static_cast<int>(q_col.size());
  if (k_star < 1 || k_star > k) throw InvalidInput("baseline class outside 1..K");
  PairwiseProbTable table(k);
  for (Label j = 1; j <= k; ++j) {
    if (j == k_star) continue;
    const double qj = q_col[static_cast<std::size_t>(j - 1)];
    table.set(j, k_star, qj);
    for (Label j2 = j + 1; j2 <= k; ++j2) {
      if (j2 == k_star) continue;
      table.set(j, j2, reconstruct_pairwise(qj, q_col[static_cast<std::size_t>(j2 - 1)]));
    }
  }
  return table;
}

Label dynamic_baseline(const PairwiseProbTable& table, VoteRule rule) {
  const auto t = tally(table);
  Label best = 1;
  for (Label a = 2; a <= table.num_classes(); ++a) {
    const auto& c = t[static_cast<std::size_t>(a - 1)];
    const auto& b = t[static_cast<std::size_t>(best - 1)];
    bool better;
    if (rule == VoteRule::GreaterThanHalf) {
      better = c.votes > b.votes || (c.votes == b.votes && c.sum > b.sum);
    } else {
      better = c.min_q > b.min_q || (c.min_q == b.min_q && c.sum > b.sum);
    }
    if (better) best = a;
  }
  return best;
}

ProbEstimate pairwise_coupling_probs(const PairwiseProbTable& table, Label baseline) {
  const int k = table.num_classes();
  if (baseline < 1 || baseline > k) throw InvalidInput("baseline class outside 1..K");
  std::vector<double> ratio(static_cast<std::size_t>(k), 1.0);
  double total = 0.0;
  for (Label j = 1; j <= k; ++j) {
    const auto i = static_cast<std::size_t>(j - 1);
    if (j != baseline) ratio[i] = table.q(j, baseline) / table.q(baseline, j);
    total += ratio[i];
  }
  ProbEstimate out{std::move(ratio), SchemeKind::Pairwise, true};
  for (double& v : out.probs) v /= total;
  return out;
}

Label classify_max_prob(const ProbEstimate& p) {
  const auto it = std::max_element(p.probs.begin(), p.probs.end());
  return static_cast<Label>(it - p.probs.begin()) + 1;
}

Label classify_max_vote(const PairwiseProbTable& table) {
  if (!table.complete()) throw InvalidInput("max voting needs a complete pairwise table");
  return dynamic_baseline(table, VoteRule::GreaterThanHalf);
}

// --- Model-level estimation ------------------------------------------------------------------

std::vector<BinaryTask> required_tasks(SchemeKind scheme, int num_classes, std::optional<Label> k_star) {
  std::vector<BinaryTask> tasks;
  if (scheme == SchemeKind::Pairwise) {
    for (Label j = 1; j <= num_classes; ++j) {
      for (Label k = j + 1; k <= num_classes; ++k) tasks.push_back(BinaryTask::pair(j, k));
    }
  } else if (scheme == SchemeKind::OneVsAll) {
    for (Label j = 1; j <= num_classes; ++j) tasks.push_back(BinaryTask::one_vs_rest(j));
  } else {
    if (!k_star) throw InvalidInput("baseline schemes need a baseline class");
    for (Label j = 1; j <= num_classes; ++j) {
      if (j != *k_star) tasks.push_back(BinaryTask::pair(j, *k_star));
    }
  }
  return tasks;
}

namespace {

/// q_{j|(j,k)} from whichever orientation of the pair was trained.
double lookup_pair(const std::map<BinaryTask, double>& q_by_task, Label j, Label k) {
  if (auto it = q_by_task.find(BinaryTask::pair(j, k)); it != q_by_task.end()) return it->second;
  if (auto it = q_by_task.find(BinaryTask::pair(k, j)); it != q_by_task.end()) return 1.0 - it->second;
  throw InvalidInput("no ladder for task " + BinaryTask::pair(j, k).name());
}

std::vector<double> baseline_column(const MulticlassModel& model,
                                    const std::map<BinaryTask, double>& q_by_task) {
  const Label ks = model.baseline->k_star;
  std::vector<double> col(static_cast<std::size_t>(model.num_classes), 1.0);
  for (Label j = 1; j <= model.num_classes; ++j) {
    if (j != ks) col[static_cast<std::size_t>(j - 1)] = lookup_pair(q_by_task, j, ks);
  }
  return col;
}

}  // namespace

ProbEstimate combine(const MulticlassModel& model, const std::map<BinaryTask, double>& q_by_task,
                     Label* vote_label) {
  const int k = model.num_classes;
  if (uses_fixed_baseline(model.scheme) && !model.baseline) {
    throw InvalidInput("model for scheme " + to_string(model.scheme) + " has no baseline class");
  }
  switch (model.scheme) {
    case SchemeKind::OneVsAll: {
      ProbEstimate out{std::vector<double>(static_cast<std::size_t>(k)), model.scheme, false};
      for (Label j = 1; j <= k; ++j) {
        const auto it = q_by_task.find(BinaryTask::one_vs_rest(j));
        if (it == q_by_task.end()) throw InvalidInput("no ladder for task " + BinaryTask::one_vs_rest(j).name());
        out.probs[static_cast<std::size_t>(j - 1)] = it->second;
      }
      if (model.normalize_ova) {
        double s = 0.0;
        for (const double v : out.probs) s += v;
        for (double& v : out.probs) v /= s;
        out.normalized = true;
      }
      return out;
    }
    case SchemeKind::Baseline1:
    case SchemeKind::Baseline2: {
      ProbEstimate out = baseline_probs(baseline_column(model, q_by_task), model.baseline->k_star);
      out.scheme = model.scheme;
      return out;
    }
    case SchemeKind::BaselinePairwise1:
    case SchemeKind::BaselinePairwise2:
    case SchemeKind::Pairwise: {
      PairwiseProbTable table(k);
      if (model.scheme == SchemeKind::Pairwise) {
        for (Label j = 1; j <= k; ++j) {
          for (Label j2 = j + 1; j2 <= k; ++j2) table.set(j, j2, lookup_pair(q_by_task, j, j2));
        }
      } else {
        table = reconstruct_table(baseline_column(model, q_by_task), model.baseline->k_star);
      }
      ProbEstimate out = pairwise_coupling_probs(table, dynamic_baseline(table, model.vote_rule));
      out.scheme = model.scheme;
      if (vote_label) *vote_label = classify_max_vote(table);
      return out;
    }
  }
  throw InvalidInput("unknown scheme");
}

ProbEstimate estimate(const MulticlassModel& model, std::span<const double> x) {
  if (x.size() != model.dim) {
    throw InvalidInput("model expects dimension " + std::to_string(model.dim) + ", got " +
                       std::to_string(x.size()));
  }
  std::map<BinaryTask, double> q;
  for (const auto& ladder : model.ladders) q[ladder.task] = pairwise_prob(ladder, x);
  return combine(model, q);
}

Prediction predict(const MulticlassModel& model, const Matrix& points) {
  if (static_cast<std::size_t>(points.cols()) != model.dim) {
    throw InvalidInput("model expects dimension " + std::to_string(model.dim) + ", got " +
                       std::to_string(points.cols()));
  }
  const auto n = static_cast<std::size_t>(points.rows());
  std::vector<std::vector<double>> per_ladder;
  per_ladder.reserve(model.ladders.size());
  for (const auto& ladder : model.ladders) per_ladder.push_back(pairwise_prob(ladder, points));

  Prediction out;
  out.probs.resize(points.rows(), model.num_classes);
  out.max_prob.resize(n);
  const bool votes = has_pairwise_table(model.scheme);
  if (votes) out.max_vote.resize(n);
  std::map<BinaryTask, double> q;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < model.ladders.size(); ++l) q[model.ladders[l].task] = per_ladder[l][i];
    Label vote = 0;
    const ProbEstimate p = combine(model, q, votes ? &vote : nullptr);
    for (int j = 0; j < model.num_classes; ++j) {
      out.probs(static_cast<Eigen::Index>(i), j) = p.probs[static_cast<std::size_t>(j)];
    }
    out.max_prob[i] = classify_max_prob(p);
    if (votes) out.max_vote[i] = vote;
    out.normalized = p.normalized;
  }
  if (n == 0) out.normalized = model.scheme != SchemeKind::OneVsAll || model.normalize_ova;
  return out;
}

}  // namespace wsvm
