#pragma once

#include <Eigen/Core>
#include <ostream>
#include <vector>

#include "rieszreg/data.hpp"
#include "rieszreg/fit.hpp"
#include "rieszreg/functionals.hpp"
#include "rieszreg/models.hpp"

namespace rieszreg {

// Covariate-balance diagnostics for a fitted representer:
//   residual_j = (1/n) sum_i [ alpha_hat(X_i) phi_j(X_i) - m(W_i, phi_j) ]
// with the bound lambda |beta_j|^{a-1} (a = 1: |beta|^0 = 1 even at 0;
// RKHS penalty: lambda |(K beta)_j|, its stationarity value). satisfied_j
// means |residual_j| <= bound_j + tol with tol = 10 x the fit's grad_tol.
struct BalanceReport {
    Eigen::VectorXd residuals;
    Eigen::VectorXd bound;
    std::vector<bool> satisfied;
    double max_violation = 0.0;  // max_j of (|residual_j| - bound_j), floored at 0
    double tol = 0.0;
};

// Requires the basis the model was fitted on (dimension mismatch is an
// error); also stores the residuals into fit.balance_residuals.
BalanceReport balance_residuals(FitResult& fit, const Dataset& data, const Functional& fn,
                                const BasisSpec& basis);

// CSV rendering: header j,residual,bound,satisfied.
void write_balance_csv(const BalanceReport& report, std::ostream& os);

// Entropy-balancing-style weights read off an ATE fit: w_i = alpha_hat(X_i)
// on treated rows and -alpha_hat(X_i) on control rows.
Eigen::VectorXd extract_dual_weights(const FitResult& fit, const Dataset& data);

// Nearest-neighbor matching on Z with Euclidean distance, ties broken by
// lower index. match_sets[i] holds the M nearest opposite-arm units of i;
// matched_counts[i] counts how often i appears in opposite-arm match sets.
struct MatchStructure {
    int m_neighbors = 1;
    std::vector<std::vector<int>> match_sets;
    std::vector<int> matched_counts;
};

MatchStructure nn_match(const Dataset& data, int m);

// (1/n) sum_i (2 D_i - 1) (1 + K_M(i)/M) Y_i, the matched-count form of the
// matching estimator (equal to the difference of imputed means).
double nn_matching_ate(const Dataset& data, int m);

// Per unit, solves the one-parameter LSIF problem over the indicator basis
// of the unit's own catchment cell (lambda = 0): the same-arm cell count is
// the M nearest same-arm points of Z_i (the unit itself included at zero
// distance), the opposite-arm count re-evaluates the matching relation pair
// by pair. Returns max_i |r_lsif(i) - (1 + K_M(i)/M)|.
double nn_lsif_equivalence(const Dataset& data, int m);

}  // namespace rieszreg
