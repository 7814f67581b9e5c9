#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "rieszreg/estimators.hpp"

namespace rieszreg {

// Monte Carlo study of the ATE estimators on the synthetic design: per
// replication a fresh draw, a two-fold cross-fit of every configured
// representer variant, and MSE / coverage / CI-width aggregation against the
// oracle parameter.
//
// Representer variants (all on a degree-2 polynomial basis):
//   true       oracle nuisances, the infeasible baseline
//   sq_linear  squared loss, identity link, features of the full X = (D, Z)
//   sq_logit   squared loss through the propensity-logit link, features of Z
//   ukl_z      unnormalized-KL loss, canonical log link, features of Z
//   ukl_x      same, features of the full X (treatment-dependent)
//   bkl_mle    logistic MLE of the propensity plugged into the ATE weights
struct BenchmarkConfig {
    int replications = 100;
    int n = 3000;
    int folds = 2;
    int jobs = 1;  // worker threads; 0 = hardware concurrency
    std::uint64_t seed = 1;
    double lambda = 1e-4;       // L2 penalty for the representer fits
    double gamma_ridge = 1e-6;  // ridge for the outcome regression
    std::vector<std::string> variants = {"true",  "sq_linear", "sq_logit",
                                         "ukl_z", "ukl_x",     "bkl_mle"};
    std::vector<Method> methods = {Method::DM, Method::IPW, Method::AIPW};
};

void validate(const BenchmarkConfig& config);

struct BenchmarkRow {
    std::string variant;
    std::string method;
    double mse = 0.0;
    double coverage = 0.0;  // fraction of replications whose CI contains theta_0
    double mean_ci_width = 0.0;
    int replications = 0;  // successful replications behind the aggregates
    int failures = 0;
};

struct BenchmarkReport {
    std::vector<BenchmarkRow> rows;  // one per (variant, method), config order
    double theta0 = 0.0;
    std::vector<std::string> failure_log;  // "rep R variant V: message"
};

// Per-replication seeds come from SplitMix64::split(seed, rep), so results
// are identical for any jobs count; failed replications are dropped from the
// affected variant's rows and logged, the run continues.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

// CSV: variant,method,mse,coverage,mean_ci_width,replications,failures.
void write_benchmark_csv(const BenchmarkReport& report, std::ostream& os);

// The nuisance constructions behind a variant name; exposed for tests.
NuisanceFactory benchmark_factory(const std::string& variant, const SyntheticDraw& draw,
                                  const BenchmarkConfig& config);

}  // namespace rieszreg
