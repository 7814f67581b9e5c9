#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "rieszreg/data.hpp"
#include "rieszreg/fit.hpp"
#include "rieszreg/functionals.hpp"
#include "rieszreg/models.hpp"

namespace rieszreg {

enum class Method { DM, IPW, AIPW, TMLE };

std::string method_name(Method method);
Method parse_method(const std::string& name);

// Per-observation Neyman orthogonal score values m(W_i, gamma) +
// alpha(X_i)(Y_i - gamma(X_i)).
struct ScoreSet {
    Eigen::VectorXd psi;
    std::string method;
};

inline constexpr double kWaldZ = 1.959964;  // 97.5% normal quantile

struct EstimateReport {
    double theta_hat = 0.0;
    double se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int n = 0;
    std::string method;
    int crossfit_folds = 1;
};

// CSV rendering: header method,theta,se,ci_low,ci_high,n,folds.
void write_estimates_csv(const std::vector<EstimateReport>& reports, std::ostream& os);

// Outcome-regression learner: least squares of Y on phi(X) with a ridge.
struct GammaConfig {
    BasisSpec basis;
    double ridge = 0.0;
};

// Point estimators. Wald intervals use the plug-in score variance (sample
// sd with the n-1 convention over sqrt(n)) uniformly. Covariate-shift
// reports average the regression part over the target sample and the
// correction part over the source sample, with the two variances combined;
// the DM estimate is that regression part alone, so AIPW with alpha = 0
// reduces to it exactly.
EstimateReport dm_estimate(const Dataset& data, const EvaluableFn& gamma_hat,
                           const Functional& fn);
EstimateReport ipw_estimate(const Dataset& data, const EvaluableFn& alpha_hat,
                            const Functional& fn);
EstimateReport aipw_estimate(const Dataset& data, const EvaluableFn& alpha_hat,
                             const EvaluableFn& gamma_hat, const Functional& fn);
ScoreSet aipw_scores(const Dataset& data, const EvaluableFn& alpha_hat,
                     const EvaluableFn& gamma_hat, const Functional& fn);
// One-step fluctuation gamma1 = gamma0 + eps alpha with
// eps = sum alpha (Y - gamma0) / sum alpha^2, then the plug-in at gamma1;
// the updated weighted residual sum is zero by construction. An identically
// zero alpha is a degenerate fluctuation (ValidationError).
EstimateReport tmle_estimate(const Dataset& data, const EvaluableFn& alpha_hat,
                             const EvaluableFn& gamma0_hat, const Functional& fn);

// Factories so cross-fitting can wrap any nuisance construction (fitted,
// oracle, plug-in propensity); each gets the training rows.
struct NuisanceFactory {
    std::function<EvaluableFn(const Dataset& train)> alpha;
    std::function<EvaluableFn(const Dataset& train)> gamma;
};

// k-fold cross-fitting (k >= 2; k = n is leave-one-out): nuisances fit per
// training complement, scores on held-out rows, pooled; fold assignment is
// seeded. Covariate-shift folds split the source rows and average the
// target-side predictions across folds. TMLE refits its fluctuation per
// evaluation fold.
EstimateReport crossfit_with(const Dataset& data, const NuisanceFactory& make,
                             const Functional& fn, int k, Method method, std::uint64_t seed);

// Same fold split and nuisance fits shared across all requested methods
// (one nuisance fit per fold, not per method).
std::vector<EstimateReport> crossfit_suite(const Dataset& data, const NuisanceFactory& make,
                                           const Functional& fn, int k,
                                           const std::vector<Method>& methods,
                                           std::uint64_t seed);

// folds = 1 fits the nuisances once on the full sample and runs the plain
// estimators; folds >= 2 cross-fits.
std::vector<EstimateReport> suite_with(const Dataset& data, const NuisanceFactory& make,
                                       const Functional& fn, int folds,
                                       const std::vector<Method>& methods, std::uint64_t seed);

EstimateReport crossfit_estimate(const Dataset& data, const FitConfig& fit_config,
                                 const GammaConfig& gamma_config, const Functional& fn, int k,
                                 Method method);

// folds = 1 runs the plain estimators on full-sample nuisances; folds >= 2
// cross-fits. One report per requested method.
std::vector<EstimateReport> estimate_suite(const Dataset& data, const FitConfig& fit_config,
                                           const GammaConfig& gamma_config, const Functional& fn,
                                           int folds, const std::vector<Method>& methods);

// (1/n) sum_i [ alpha(X_i)(Y_i - gamma(X_i)) + m(W_i, gamma) - m(W_i, gamma0) ],
// the estimation error of the orthogonal score against the oracle regression.
double neyman_error(const Dataset& data, const EvaluableFn& alpha_hat,
                    const EvaluableFn& gamma_hat, const EvaluableFn& oracle_gamma,
                    const Functional& fn);

}  // namespace rieszreg
