#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "anchorda/anchor_regression.hpp"
#include "anchorda/detection.hpp"
#include "anchorda/error.hpp"
#include "anchorda/model_io.hpp"
#include "anchorda/model_selection.hpp"
#include "anchorda/scm_sim.hpp"
#include "cli.hpp"

namespace py = pybind11;
using namespace anchorda;

namespace {

SolverPath path_arg(const std::string& s) { return solver_path_from_string(s); }

SCMConfig config_from(const py::dict& overrides) {
  KeyValues kv;
  for (const auto& [k, v] : overrides) kv.set(py::str(k), py::str(v));
  return SCMConfig::from_key_values(kv);
}

py::dict dataset_dict(const Dataset& ds) {
  py::dict d;
  d["x"] = ds.x.values();
  d["y"] = ds.y.values();
  d["model_ids"] = ds.x.model_ids();
  d["scenarios"] = ds.x.scenarios();
  d["years"] = ds.x.years();
  d["grid"] = py::make_tuple(ds.x.grid().n_lon, ds.x.grid().n_lat);
  if (ds.anchors) {
    d["anchors"] = ds.anchors->values();
    d["anchor_names"] = ds.anchors->names();
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Anchor regression for robust detection and attribution";

  static py::exception<Error> base(m, "AnchordaError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string(to_string(e.kind())) + ": " + e.what();
      py::set_error(base, msg.c_str());
    }
  });

  py::class_<LinearModel>(m, "LinearModel")
      .def_readonly("beta", &LinearModel::beta)
      .def_readonly("intercept", &LinearModel::intercept)
      .def_readonly("gamma", &LinearModel::gamma)
      .def_readonly("lambda_", &LinearModel::lambda)
      .def_readonly("min_norm", &LinearModel::min_norm)
      .def_property_readonly("solver", [](const LinearModel& lm) { return std::string(to_string(lm.solver)); })
      .def_property_readonly("target_mean", [](const LinearModel& lm) { return lm.stats.target_mean; })
      .def_property_readonly("target_scale", [](const LinearModel& lm) { return lm.stats.target_scale; })
      .def("predict", [](const LinearModel& lm, const Eigen::MatrixXd& x) { return predict(lm, x); })
      .def("to_json", [](const LinearModel& lm) { return format_model(lm); })
      .def_static("from_json", [](const std::string& s) { return parse_model(s); })
      .def("__eq__", [](const LinearModel& a, const LinearModel& b) { return a == b; });

  m.def(
      "fit_anchor",
      [](Eigen::MatrixXd x, Eigen::VectorXd y, const Eigen::MatrixXd& anchors, double gamma, double lambda,
         const std::string& solver) {
        return fit_anchor(std::move(x), std::move(y), anchors, gamma, lambda, path_arg(solver));
      },
      py::arg("x"), py::arg("y"), py::arg("anchors"), py::arg("gamma"), py::arg("lambda_"),
      py::arg("solver") = "auto", py::call_guard<py::gil_scoped_release>(),
      "Anchor regression on raw matrices; no standardization.");
  m.def(
      "fit_ridge",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, const std::string& solver) {
        return fit_ridge(x, y, lambda, path_arg(solver));
      },
      py::arg("x"), py::arg("y"), py::arg("lambda_"), py::arg("solver") = "auto",
      py::call_guard<py::gil_scoped_release>());
  m.def("predict", &predict, py::arg("model"), py::arg("x"));
  m.def(
      "anchor_transform",
      [](Eigen::MatrixXd x, Eigen::VectorXd y, const Eigen::MatrixXd& anchors, double gamma) {
        auto t = anchor_transform(std::move(x), std::move(y), anchor_projection(anchors), gamma);
        return py::make_tuple(t.x, t.y);
      },
      py::arg("x"), py::arg("y"), py::arg("anchors"), py::arg("gamma"));
  m.def(
      "project",
      [](const Eigen::MatrixXd& anchors, const Eigen::MatrixXd& v) { return anchor_projection(anchors).apply(v); },
      py::arg("anchors"), py::arg("v"), "Projection of v onto span(1, anchors).");
  m.def(
      "anchor_objective",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& anchors, double gamma,
         double lambda, const Eigen::VectorXd& beta) {
        return anchor_objective(x, y, anchor_projection(anchors), gamma, lambda, beta);
      },
      py::arg("x"), py::arg("y"), py::arg("anchors"), py::arg("gamma"), py::arg("lambda_"), py::arg("beta"));
  m.def(
      "residual_diagnostics",
      [](const LinearModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
         const Eigen::MatrixXd& anchors) {
        const auto d = residual_anchor_diagnostics(model, x, y, anchors);
        py::dict out;
        out["correlation"] = d.correlation;
        out["projected_norm"] = d.projected_norm;
        out["degenerate"] = d.degenerate;
        return out;
      },
      py::arg("model"), py::arg("x"), py::arg("y"), py::arg("anchors"));

  m.def(
      "grouped_kfold",
      [](const std::vector<std::string>& ids, std::size_t k, std::uint64_t seed) {
        return grouped_kfold(ids, k, seed).fold_of;
      },
      py::arg("model_ids"), py::arg("k"), py::arg("seed"), "Fold index per model id.");
  m.def(
      "split_models",
      [](const std::vector<std::string>& ids, double fraction, std::uint64_t seed) {
        const auto s = split_models(ids, fraction, seed);
        return py::make_tuple(s.train_models, s.test_models);
      },
      py::arg("model_ids"), py::arg("fraction"), py::arg("seed"));
  m.def(
      "metrics",
      [](const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
        const auto r = metrics(y_true, y_pred);
        return py::make_tuple(r.rmse, r.r2);
      },
      py::arg("y_true"), py::arg("y_pred"), "(rmse, r2); r2 is nan for a constant truth.");

  m.def(
      "detect",
      [](const std::vector<int>& years, const Eigen::VectorXd& y_pred, std::optional<Eigen::VectorXd> y_true,
         const std::vector<double>& sigma, double z, bool persistent, double attribution_threshold) {
        const std::vector<std::string> scen(years.size(), "series");
        DetectionOptions o{z, persistent, attribution_threshold};
        const auto r = detect_and_attribute(years, y_pred, y_true, sigma, scen, o);
        std::vector<bool> flags;
        for (const auto& d : r.years) flags.push_back(d.detected);
        py::dict out;
        out["detected"] = flags;
        out["first_detection_year"] = r.first_detection_year;
        out["attribution_fraction"] = r.attribution_fraction;
        out["attribution_ok"] = r.attribution_ok;
        return out;
      },
      py::arg("years"), py::arg("y_pred"), py::arg("y_true") = py::none(), py::arg("sigma"), py::arg("z") = 2.0,
      py::arg("persistent") = true, py::arg("attribution_threshold") = 0.95);

  m.def(
      "simulate",
      [](std::uint64_t seed, const py::dict& config, std::size_t threads, bool anomalies) {
        const auto cfg = config_from(config);
        SimOutput sim = [&] {
          py::gil_scoped_release release;
          return simulate(cfg, seed, threads);
        }();
        py::dict out = dataset_dict(anomalies ? compute_anomalies(sim.data, cfg.baseline) : sim.data);
        out["forcings"] = sim.forcings;
        out["loadings"] = sim.loadings;
        return out;
      },
      py::arg("seed"), py::arg("config") = py::dict(), py::arg("threads") = 1, py::arg("anomalies") = false,
      "Simulate the structural causal model. `config` takes the same keys as the CLI.");
  m.def(
      "worst_case_risk",
      [](const LinearModel& model, std::vector<double> deltas, std::uint64_t seed, const py::dict& config,
         const std::string& forcing, std::vector<std::string> eval_models) {
        RiskOptions ro;
        ro.forcing = forcing_from_string(forcing);
        ro.eval_models = {eval_models.begin(), eval_models.end()};
        const auto c = worst_case_risk(model, config_from(config), deltas, seed, ro);
        return py::make_tuple(c.mse, c.supremum, c.argmax_delta);
      },
      py::arg("model"), py::arg("deltas"), py::arg("seed"), py::arg("config") = py::dict(),
      py::arg("forcing") = "volcanic", py::arg("eval_models") = std::vector<std::string>{},
      "(mse per delta, supremum, argmax delta) on anomalies of shifted simulations.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a command-line invocation in-process; returns (exit code, stdout, stderr).");
}
