#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rieszreg/benchmark.hpp"
#include "rieszreg/data.hpp"
#include "rieszreg/estimators.hpp"
#include "rieszreg/fit.hpp"
#include "rieszreg/functionals.hpp"

namespace rieszreg {

// Where a run's data comes from: CSV files when train_csv is set, otherwise
// one of the named generators ("synthetic_ate", "covariate_shift").
struct DataSource {
    std::string train_csv;
    std::string target_csv;  // optional extra target sample (x1,...,xK header)
    Layout layout = Layout::TreatmentFirst;
    std::string dgp = "synthetic_ate";
    int n = 500;
    int n_target = 500;  // covariate_shift only
    int dim = 3;
    double shift = 0.5;  // covariate_shift only
};

Dataset realize_data(const DataSource& source, std::uint64_t seed);

// Everything a CLI run needs. JSON schema (all keys optional, flat defaults):
//   seed, out,
//   data:       {train_csv, target_csv, layout, dgp, n, n_target, dim, shift}
//   functional: {kind: ate|ame|covariate_shift, coordinate}
//   fit:        {loss:   {kind: sq|ukl|bkl|bp|pu, c, delta, c_tilde},
//                link:   {kind: raw|linear_sq|log_branch|power_branch|
//                               exponential|ate_propensity_logit|canonical,
//                         c, delta, branch: always_positive|treatment_sign},
//                model:  {kind: linear|kernel|mlp,
//                         basis: {kind: raw|polynomial, degree, on_z_only},
//                         kernel_centers, kernel_bandwidth_scale,
//                         kernel_on_z_only, mlp_hidden},
//                penalty:   {order: l1|l2|rkhs, lambda},
//                optimizer: {max_iters, grad_tol, lbfgs_memory},
//                nn_correction, nn_clamp_c}
//   estimate:   {methods: [dm|ipw|aipw|tmle, ...], folds,
//                gamma: {basis: {...}, ridge}}
//   benchmark:  {replications, n, folds, jobs, lambda, gamma_ridge,
//                variants: [...], methods: [...]}
// link.kind "canonical" resolves to the loss's canonical pair at parse time.
struct RunConfig {
    std::uint64_t seed = 1;
    std::string out = "run";  // output path stem
    DataSource data;
    Functional functional;
    FitConfig fit;
    GammaConfig gamma;
    std::vector<Method> methods = {Method::AIPW};
    int folds = 1;
    BenchmarkConfig benchmark;
};

// Both throw ValidationError on malformed JSON, unknown keys inside the
// recognized blocks, or out-of-range values.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// Deterministic JSON echo of the resolved fit configuration plus the fitted
// parameters; the artifact run_fit writes next to the balance CSV.
std::string fit_artifact_json(const FitConfig& config, const FitResult& result);

}  // namespace rieszreg
