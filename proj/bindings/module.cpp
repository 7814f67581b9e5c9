#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "rieszreg/balancing.hpp"
#include "rieszreg/config.hpp"
#include "rieszreg/errors.hpp"
#include "rieszreg/verify.hpp"

namespace py = pybind11;

namespace {

using namespace rieszreg;

Layout parse_layout(const std::string& layout) {
    if (layout == "generic") return Layout::Generic;
    if (layout == "treatment_first") return Layout::TreatmentFirst;
    throw ValidationError("layout: expected generic or treatment_first, got '" + layout + "'");
}

Dataset make_dataset(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const std::string& layout, const py::object& target) {
    Dataset data;
    data.layout = parse_layout(layout);
    data.x = x;
    data.y = y;
    if (!target.is_none()) data.target = target.cast<Eigen::MatrixXd>();
    data.validate();
    return data;
}

RunConfig config_from_json(const std::string& text) {
    if (text.empty()) return RunConfig{};
    return parse_run_config(text);
}

py::dict fit_dict(const RunConfig& rc, const Dataset& data) {
    FitResult fit = fit_riesz(rc.fit, data, rc.functional);
    py::dict out;
    out["alpha"] = fit.alpha;
    out["params"] = fit.model->params();
    out["objective"] = fit.objective;
    out["grad_norm"] = fit.grad_norm;
    out["iters"] = fit.iters;
    out["converged"] = fit.converged;
    const BasisSpec* basis = nullptr;
    if (const auto* linear = dynamic_cast<const LinearModel*>(fit.model.get()))
        basis = &linear->basis();
    else if (const auto* kernel = dynamic_cast<const KernelModel*>(fit.model.get()))
        basis = &kernel->basis();
    if (basis) {
        const BalanceReport report = balance_residuals(fit, data, rc.functional, *basis);
        out["balance_residuals"] = report.residuals;
        out["balance_bound"] = report.bound;
        out["balance_max_violation"] = report.max_violation;
    }
    return out;
}

py::list estimate_list(const RunConfig& rc, const Dataset& data) {
    py::list out;
    for (const EstimateReport& report :
         estimate_suite(data, rc.fit, rc.gamma, rc.functional, rc.folds, rc.methods)) {
        py::dict row;
        row["method"] = report.method;
        row["theta"] = report.theta_hat;
        row["se"] = report.se;
        row["ci_low"] = report.ci_low;
        row["ci_high"] = report.ci_high;
        row["n"] = report.n;
        row["folds"] = report.crossfit_folds;
        out.append(row);
    }
    return out;
}

py::dict synthetic_dict(const std::string& name, std::uint64_t seed, int n, int n_target, int dim,
                        double shift) {
    SyntheticDraw draw;
    if (name == "synthetic_ate")
        draw = gen_synthetic_ate(seed, n);
    else if (name == "covariate_shift")
        draw = gen_covariate_shift(seed, n, n_target, dim, shift);
    else
        throw ValidationError("name: expected synthetic_ate or covariate_shift, got '" + name +
                              "'");
    py::dict out;
    out["x"] = draw.data.x;
    out["y"] = draw.data.y;
    out["layout"] = draw.data.layout == Layout::TreatmentFirst ? "treatment_first" : "generic";
    if (draw.data.has_target()) out["target"] = draw.data.target;
    out["theta0"] = draw.oracle.theta;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Riesz representer regression: Bregman-divergence representer fits, "
              "debiased estimators, covariate balance, and the Monte Carlo benchmark.";

    py::register_exception<ValidationError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
    py::register_exception<FitDomainError>(m, "FitDomainError", PyExc_RuntimeError);

    m.def(
        "fit",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::string& config,
           const std::string& layout, const py::object& target) {
            return fit_dict(config_from_json(config), make_dataset(x, y, layout, target));
        },
        py::arg("x"), py::arg("y"), py::arg("config") = "",
        py::arg("layout") = "treatment_first", py::arg("target") = py::none(),
        "Fit a Riesz representer; returns alpha at the rows, the fitted parameters, "
        "solver diagnostics, and balance residuals for linear-in-basis models. "
        "config is the JSON schema's fit/functional blocks.");

    m.def(
        "estimate",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::string& config,
           const std::string& layout, const py::object& target) {
            return estimate_list(config_from_json(config), make_dataset(x, y, layout, target));
        },
        py::arg("x"), py::arg("y"), py::arg("config") = "",
        py::arg("layout") = "treatment_first", py::arg("target") = py::none(),
        "Debiased estimates (dm/ipw/aipw/tmle, optionally cross-fitted) with Wald "
        "intervals; one dict per method.");

    m.def(
        "benchmark",
        [](const std::string& config) {
            const RunConfig rc = config_from_json(config);
            validate(rc.benchmark);
            const BenchmarkReport report = run_benchmark(rc.benchmark);
            py::list rows;
            for (const BenchmarkRow& row : report.rows) {
                py::dict r;
                r["variant"] = row.variant;
                r["method"] = row.method;
                r["mse"] = row.mse;
                r["coverage"] = row.coverage;
                r["mean_ci_width"] = row.mean_ci_width;
                r["replications"] = row.replications;
                r["failures"] = row.failures;
                rows.append(r);
            }
            py::dict out;
            out["rows"] = rows;
            out["theta0"] = report.theta0;
            out["failures"] = report.failure_log;
            return out;
        },
        py::arg("config") = "", "Monte Carlo benchmark over fit variants; see the JSON schema.");

    m.def(
        "verify",
        [](std::uint64_t seed) {
            py::list out;
            for (const OracleCheck& check : run_all_checks(seed)) {
                py::dict row;
                row["name"] = check.name;
                row["statistic"] = check.statistic;
                row["threshold"] = check.threshold;
                row["passed"] = check.passed;
                row["description"] = check.description;
                out.append(row);
            }
            return out;
        },
        py::arg("seed") = 1, "Re-run the oracle checks; one dict per check.");

    m.def(
        "synthetic",
        [](const std::string& name, std::uint64_t seed, int n, int n_target, int dim,
           double shift) { return synthetic_dict(name, seed, n, n_target, dim, shift); },
        py::arg("name") = "synthetic_ate", py::arg("seed") = 1, py::arg("n") = 500,
        py::arg("n_target") = 500, py::arg("dim") = 3, py::arg("shift") = 0.5,
        "Draw a synthetic dataset (synthetic_ate or covariate_shift) with its true theta0.");

    m.def(
        "nn_matching_ate",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int m_neighbors) {
            return nn_matching_ate(make_dataset(x, y, "treatment_first", py::none()), m_neighbors);
        },
        py::arg("x"), py::arg("y"), py::arg("m") = 1,
        "Nearest-neighbor matching ATE (matched-count form) on a treatment-first matrix.");
}
