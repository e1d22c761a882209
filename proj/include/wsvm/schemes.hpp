#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsvm/dataset.hpp"
#include "wsvm/ladder.hpp"

namespace wsvm {

enum class SchemeKind { Pairwise, Baseline1, Baseline2, BaselinePairwise1, BaselinePairwise2, OneVsAll };

/// "pairwise", "b1", "b2", "bp1", "bp2", "ova".
std::string to_string(SchemeKind kind);
SchemeKind parse_scheme(const std::string& text);
/// Report column names: P-SVM, B1-SVM, ..., A-SVM.
std::string display_name(SchemeKind kind);

bool uses_fixed_baseline(SchemeKind kind);
/// Schemes whose estimate runs through a full pairwise table (P, BP1, BP2).
bool has_pairwise_table(SchemeKind kind);

/// Rule for the per-point baseline of the pairwise-table schemes.
enum class VoteRule {
  GreaterThanHalf,  // most pairwise wins with q > 1/2
  MinDenominator,   // largest min_j q_{k|(j,k)}
};
std::string to_string(VoteRule rule);
VoteRule parse_vote_rule(const std::string& text);

/// q_{j|(j,k)} for every ordered pair at one evaluation point; q(j,k) + q(k,j) = 1.
class PairwiseProbTable {
 public:
  explicit PairwiseProbTable(int num_classes);

  int num_classes() const { return k_; }
  /// Sets q_{j|(j,k)} = value and q_{k|(j,k)} = 1 - value.
  void set(Label j, Label k, double value);
  bool has(Label j, Label k) const;
  /// Throws InvalidInput for a missing pair.
  double q(Label j, Label k) const;
  bool complete() const;

 private:
  std::size_t at(Label j, Label k) const;
  int k_;
  std::vector<double> values_;
  std::vector<char> present_;
};

struct ProbEstimate {
  std::vector<double> probs;
  SchemeKind scheme = SchemeKind::Pairwise;
  bool normalized = true;
};

enum class BaselineMethod { LargestClass, MedianAggDistance };

struct BaselineChoice {
  Label k_star = 1;
  BaselineMethod method = BaselineMethod::LargestClass;
  /// Class sizes (LargestClass) or D_agg values (MedianAggDistance), index j - 1.
  std::vector<double> diagnostics;
};

/// k* = the largest class; ties go to the smallest label.
BaselineChoice select_baseline_b1(const LabeledDataset& dataset);

/// Within-class compactness D_cp: the largest distance from the class's median point. The median
/// point is the one whose summed intra-class distance is the lower median (smallest index on ties).
double class_compactness(const LabeledDataset& dataset, Label j);

/// Minimum distance between a point of class j and a point of class j2.
double between_class_distance(const LabeledDataset& dataset, Label j, Label j2);

/// k* = the class at the lower median of D_agg(j) = (1/K) sum_{j' != j} D_bc(j, j') / D_cp(j).
BaselineChoice select_baseline_b2(const LabeledDataset& dataset);

BaselineChoice select_baseline(const LabeledDataset& dataset, BaselineMethod method);

/// Class probabilities from q_{j|(j,k*)} (index j - 1; the k* entry is ignored).
/// p_{k*} is taken as 1 minus the other entries.
ProbEstimate baseline_probs(std::span<const double> q_col, Label k_star);

/// q_{j|(j,j')} from q_{j|(j,k*)} and q_{j'|(j',k*)}.
double reconstruct_pairwise(double q_j, double q_j2);

/// Full table from one baseline column (index j - 1; the k* entry is ignored).
PairwiseProbTable reconstruct_table(std::span<const double> q_col, Label k_star);

/// Per-point baseline: most votes, then larger probability sum, then smaller label.
Label dynamic_baseline(const PairwiseProbTable& table, VoteRule rule = VoteRule::GreaterThanHalf);

/// p_j proportional to q_{j|(j,k)} / q_{k|(j,k)} with the baseline ratio equal to 1.
ProbEstimate pairwise_coupling_probs(const PairwiseProbTable& table, Label baseline);

/// Smallest label among the argmax entries.
Label classify_max_prob(const ProbEstimate& p);

/// Label with the most pairwise wins; ties by probability sum, then smaller label.
Label classify_max_vote(const PairwiseProbTable& table);

/// Trained ladders plus everything needed to turn their outputs into class probabilities.
struct MulticlassModel {
  SchemeKind scheme = SchemeKind::Pairwise;
  int num_classes = 0;
  std::size_t dim = 0;
  std::optional<BaselineChoice> baseline;
  std::vector<ClassifierLadder> ladders;
  VoteRule vote_rule = VoteRule::GreaterThanHalf;
  bool normalize_ova = false;
};

/// The task set a scheme trains: all pairs, the K-1 pairs against k*, or K one-vs-rest tasks.
std::vector<BinaryTask> required_tasks(SchemeKind scheme, int num_classes,
                                       std::optional<Label> k_star = std::nullopt);

/// Probabilities at one point.
ProbEstimate estimate(const MulticlassModel& model, std::span<const double> x);

struct Prediction {
  Eigen::MatrixXd probs;            // n x K
  std::vector<Label> max_prob;      // argmax rule
  std::vector<Label> max_vote;      // empty unless the scheme has a full pairwise table
  bool normalized = true;
};

/// Batched estimate at every row of points.
Prediction predict(const MulticlassModel& model, const Matrix& points);

/// Combines per-point ladder outputs; q_by_task holds the positive-class estimate of each ladder.
ProbEstimate combine(const MulticlassModel& model, const std::map<BinaryTask, double>& q_by_task,
                     Label* vote_label = nullptr);

}  // namespace wsvm
