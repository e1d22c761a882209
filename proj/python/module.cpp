#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "wsvm/benchmark.hpp"
#include "wsvm/data.hpp"
#include "wsvm/fit.hpp"
#include "wsvm/kernel.hpp"
#include "wsvm/metrics.hpp"
#include "wsvm/model.hpp"

namespace py = pybind11;
using namespace wsvm;

namespace {

LabeledDataset make_dataset(const Matrix& x, const std::vector<Label>& y, int num_classes) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw InvalidInput("X and y have different lengths");
  return LabeledDataset(x, y, num_classes);
}

py::tuple sim_tuple(const Simulation& sim) {
  return py::make_tuple(sim.data.features(), sim.data.labels(), sim.truth.evaluate(sim.data.features()));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multiclass probability estimation with weighted SVMs.";

  m.def("simulate", [](const std::string& source, std::size_t n, std::uint64_t seed) {
    return sim_tuple(DataSource::parse(source).simulate(n, seed));
  }, py::arg("source"), py::arg("n"), py::arg("seed") = 1,
     "Draw (X, y, p_true) from 'example1'..'example4' or 'ring:K:radius:sd'.");
  m.def("true_probs", [](const std::string& source, const Matrix& x) {
    const DataSource src = DataSource::parse(source);
    const TruthOracle truth = src.example == 0 ? gaussian_ring_truth(src.num_classes, src.radius, src.sd)
                                               : example_truth(src.example);
    return truth.evaluate(x);
  }, py::arg("source"), py::arg("X"));

  m.def("rbf_gram", [](const Matrix& a, const Matrix& b, double sigma) {
    return gram(a, b, KernelSpec::rbf(sigma));
  }, py::arg("A"), py::arg("B"), py::arg("sigma"));
  m.def("median_sigma", [](const Matrix& x, const std::vector<Label>& y) {
    return median_sigma(make_dataset(x, y, 0));
  }, py::arg("X"), py::arg("y"));

  m.def("stratified_split", [](const std::vector<Label>& y, double train, double tune, double test,
                               std::uint64_t seed) {
    Matrix x = Matrix::Zero(static_cast<Eigen::Index>(y.size()), 1);
    SplitSpec spec{train, tune, test, true, seed};
    const Split s = stratified_split(make_dataset(x, y, 0), spec);
    return py::make_tuple(s.train, s.tune, s.test);
  }, py::arg("y"), py::arg("train") = 0.5, py::arg("tune") = 0.5, py::arg("test") = 0.0, py::arg("seed") = 1);

  m.def("l1_error", &l1_error, py::arg("p_true"), py::arg("p_hat"));
  m.def("l2_error", &l2_error, py::arg("p_true"), py::arg("p_hat"));
  m.def("egkl_loss", &egkl_loss, py::arg("p_true"), py::arg("p_hat"));
  m.def("gkl_loss", &gkl_loss, py::arg("p_true"), py::arg("p_hat"));

  py::class_<MulticlassModel>(m, "Model")
      .def_property_readonly("scheme", [](const MulticlassModel& mm) { return to_string(mm.scheme); })
      .def_readonly("num_classes", &MulticlassModel::num_classes)
      .def_readonly("dim", &MulticlassModel::dim)
      .def_property_readonly("k_star", [](const MulticlassModel& mm) -> std::optional<int> {
        if (!mm.baseline) return std::nullopt;
        return mm.baseline->k_star;
      })
      .def_property_readonly("num_ladders", [](const MulticlassModel& mm) { return mm.ladders.size(); })
      .def("predict_proba", [](const MulticlassModel& mm, const Matrix& x) { return predict(mm, x).probs; },
           py::arg("X"))
      .def("predict", [](const MulticlassModel& mm, const Matrix& x) { return predict(mm, x).max_prob; },
           py::arg("X"))
      .def("to_json", [](const MulticlassModel& mm) { return model_to_json(mm).dump(); })
      .def_static("from_json", [](const std::string& text) {
        nlohmann::json doc;
        try {
          doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
          throw InvalidInput(e.what());
        }
        return model_from_json(doc);
      }, py::arg("text"))
      .def("save", [](const MulticlassModel& mm, const std::filesystem::path& p) { save_model(p, mm); },
           py::arg("path"))
      .def_static("load", &load_model, py::arg("path"));

  m.def("fit", [](const Matrix& x, const std::vector<Label>& y, const Matrix& x_tune,
                  const std::vector<Label>& y_tune, const std::string& scheme, const std::string& criterion,
                  std::optional<int> m_grid, std::vector<double> lambdas, std::vector<double> sigmas,
                  const std::string& vote_rule, bool normalize, std::optional<Eigen::MatrixXd> tune_truth,
                  int workers) {
    FitConfig config;
    config.scheme = parse_scheme(scheme);
    config.criterion = parse_criterion(criterion);
    config.m = m_grid;
    config.lambdas = std::move(lambdas);
    config.sigmas = std::move(sigmas);
    config.vote_rule = parse_vote_rule(vote_rule);
    config.normalize_ova = normalize;
    config.workers = workers;
    int k = 0;
    for (Label l : y) k = std::max(k, l);
    for (Label l : y_tune) k = std::max(k, l);
    const LabeledDataset train = make_dataset(x, y, k);
    const LabeledDataset tune = make_dataset(x_tune, y_tune, k);
    py::gil_scoped_release release;
    return fit(train, tune, config, tune_truth ? &*tune_truth : nullptr).model;
  }, py::arg("X"), py::arg("y"), py::arg("X_tune"), py::arg("y_tune"), py::arg("scheme") = "b1",
     py::arg("criterion") = "egkl", py::arg("m") = py::none(), py::arg("lambdas") = std::vector<double>{},
     py::arg("sigmas") = std::vector<double>{}, py::arg("vote_rule") = "gt-half", py::arg("normalize") = false,
     py::arg("tune_truth") = py::none(), py::arg("workers") = 1);
}
