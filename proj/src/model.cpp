#include "wsvm/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>

namespace wsvm {

using nlohmann::json;

namespace {

std::string method_name(BaselineMethod m) {
  return m == BaselineMethod::LargestClass ? "largest-class" : "median-agg-distance";
}

BaselineMethod parse_method(const std::string& s) {
  if (s == "largest-class") return BaselineMethod::LargestClass;
  if (s == "median-agg-distance") return BaselineMethod::MedianAggDistance;
  throw InvalidInput("unknown baseline method '" + s + "'");
}

json task_json(const BinaryTask& t) {
  return {{"positive", t.positive}, {"negative", t.pooled() ? json("rest") : json(t.negative)}};
}

BinaryTask task_from(const json& j) {
  const Label pos = j.at("positive").get<Label>();
  const json& neg = j.at("negative");
  if (neg.is_string()) {
    if (neg.get<std::string>() != "rest") throw InvalidInput("task negative side must be a label or \"rest\"");
    return BinaryTask::one_vs_rest(pos);
  }
  return BinaryTask::pair(pos, neg.get<Label>());
}

json kernel_json(const KernelSpec& k) {
  if (k.kind == KernelKind::Linear) return {{"kind", "linear"}};
  return {{"kind", "rbf"}, {"sigma", k.sigma}};
}

KernelSpec kernel_from(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "linear") return KernelSpec::linear();
  if (kind == "rbf") return KernelSpec::rbf(j.at("sigma").get<double>());
  throw InvalidInput("unknown kernel kind '" + kind + "'");
}

json ladder_json(const ClassifierLadder& ladder) {
  // Rows are keyed by their exact coordinates so shared support points are stored once.
  std::map<std::vector<double>, std::size_t> index;
  json points = json::array();
  json rungs = json::array();
  const auto interior = ladder.grid.interior();
  for (std::size_t r = 0; r < ladder.rungs.size(); ++r) {
    const DecisionFunction& f = ladder.rungs[r];
    const Matrix& sup = f.support();
    std::vector<std::size_t> rows;
    for (Eigen::Index i = 0; i < sup.rows(); ++i) {
      std::vector<double> row(sup.row(i).data(), sup.row(i).data() + sup.cols());
      auto [it, inserted] = index.emplace(row, index.size());
      if (inserted) points.push_back(row);
      rows.push_back(it->second);
    }
    std::vector<double> coeffs(f.coeffs().data(), f.coeffs().data() + f.coeffs().size());
    rungs.push_back({{"pi", interior[r]}, {"support", rows}, {"coeffs", coeffs}, {"intercept", f.intercept()}});
  }
  return {{"task", task_json(ladder.task)}, {"m", ladder.grid.m},         {"lambda", ladder.lambda},
          {"kernel", kernel_json(ladder.kernel)}, {"points", std::move(points)}, {"rungs", std::move(rungs)}};
}

ClassifierLadder ladder_from(const json& j, std::size_t dim) {
  ClassifierLadder ladder;
  ladder.task = task_from(j.at("task"));
  ladder.grid = make_weight_grid(j.at("m").get<int>());
  ladder.lambda = j.at("lambda").get<double>();
  ladder.kernel = kernel_from(j.at("kernel"));
  const auto points = j.at("points").get<std::vector<std::vector<double>>>();
  for (const auto& p : points) {
    if (p.size() != dim) throw InvalidInput("support point dimension does not match the model");
  }
  const json& rungs = j.at("rungs");
  if (rungs.size() != ladder.grid.num_rungs()) throw InvalidInput("ladder rung count does not match its grid");
  for (const json& r : rungs) {
    const auto rows = r.at("support").get<std::vector<std::size_t>>();
    const auto coeffs = r.at("coeffs").get<std::vector<double>>();
    if (rows.size() != coeffs.size()) throw InvalidInput("rung support and coefficient counts differ");
    Matrix sup(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    Vector c(static_cast<Eigen::Index>(coeffs.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] >= points.size()) throw InvalidInput("rung refers to a missing support point");
      for (std::size_t d = 0; d < dim; ++d) {
        sup(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = points[rows[i]][d];
      }
      c[static_cast<Eigen::Index>(i)] = coeffs[i];
    }
    ladder.rungs.emplace_back(std::move(sup), std::move(c), r.at("intercept").get<double>(), ladder.kernel);
  }
  return ladder;
}

}  // namespace

json number_or_flag(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "NaN";
  return v > 0 ? "Inf" : "-Inf";
}

json model_to_json(const MulticlassModel& model) {
  json doc = {{"format", "wsvmprob-model"},
              {"version", kModelFormatVersion},
              {"scheme", to_string(model.scheme)},
              {"num_classes", model.num_classes},
              {"dim", model.dim},
              {"vote_rule", to_string(model.vote_rule)},
              {"normalize_ova", model.normalize_ova}};
  if (model.baseline) {
    doc["baseline"] = {{"k_star", model.baseline->k_star},
                       {"method", method_name(model.baseline->method)},
                       {"diagnostics", model.baseline->diagnostics}};
  } else {
    doc["baseline"] = nullptr;
  }
  json ladders = json::array();
  for (const auto& l : model.ladders) ladders.push_back(ladder_json(l));
  doc["ladders"] = std::move(ladders);
  return doc;
}

MulticlassModel model_from_json(const json& doc) {
  try {
    if (doc.value("format", "") != "wsvmprob-model") throw InvalidInput("not a wsvmprob model document");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw InvalidInput("unsupported model format version " + std::to_string(version));
    }
    MulticlassModel model;
    model.scheme = parse_scheme(doc.at("scheme").get<std::string>());
    model.num_classes = doc.at("num_classes").get<int>();
    model.dim = doc.at("dim").get<std::size_t>();
    model.vote_rule = parse_vote_rule(doc.at("vote_rule").get<std::string>());
    model.normalize_ova = doc.at("normalize_ova").get<bool>();
    if (const json& b = doc.at("baseline"); !b.is_null()) {
      model.baseline = BaselineChoice{b.at("k_star").get<Label>(), parse_method(b.at("method").get<std::string>()),
                                      b.at("diagnostics").get<std::vector<double>>()};
    }
    for (const json& l : doc.at("ladders")) model.ladders.push_back(ladder_from(l, model.dim));
    return model;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed model document: ") + e.what());
  }
}

json to_json(const TuneReport& report) {
  json scores = json::array();
  for (const auto& c : report.scores) {
    json row = {{"lambda", c.lambda}, {"sigma", c.sigma}};
    if (c.failed) {
      row["failed"] = true;
      row["error"] = c.failure;
    } else {
      row["egkl"] = number_or_flag(c.egkl);
      if (!std::isnan(c.gkl)) row["gkl"] = number_or_flag(c.gkl);
    }
    scores.push_back(std::move(row));
  }
  return {{"task", task_json(report.task)},
          {"criterion", to_string(report.criterion)},
          {"selected", {{"lambda", report.lambda}, {"sigma", report.sigma}}},
          {"seconds", report.seconds},
          {"scores", std::move(scores)}};
}

void save_model(const std::filesystem::path& path, const MulticlassModel& model, const json& tuning) {
  json doc = model_to_json(model);
  if (!tuning.is_null()) doc["tuning"] = tuning;
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << doc.dump(1) << '\n';
  if (!out) throw InvalidInput("failed writing " + path.string());
}

MulticlassModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace wsvm
