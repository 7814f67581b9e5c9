#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "rieszreg/losses.hpp"

namespace rieszreg {

// One executable oracle: an identity or approximation statement reduced to a
// scalar statistic with a pinned threshold.
struct OracleCheck {
    std::string name;
    double statistic = 0.0;
    double threshold = 0.0;
    bool passed = false;  // statistic <= threshold
    std::string description;
};

// Analytic objective gradients against central finite differences, one check
// per loss/link/model combination the library can anchor at a feasible
// parameter point, >= 20 random points each. Relative sup-norm error;
// thresholds 1e-6 for linear and kernel models, 1e-4 for the MLP.
std::vector<OracleCheck> check_gradients(std::uint64_t seed);

// Grid-refinement minimization of the penalized objective over the dual
// coefficients (p <= 3), compared pointwise to fit_riesz's solution on the
// data rows; the L1-penalized objective is the Lagrangian dual of balancing
// under |residual_j| <= lambda constraints. Threshold 1e-3.
OracleCheck check_dual_bruteforce(LossKind loss, double lambda, int n, int p,
                                  std::uint64_t seed);

// Huge lambda slackens every constraint: the fitted representer collapses to
// the pointwise minimizer of g on each branch.
OracleCheck check_dual_slack(LossKind loss, std::uint64_t seed);

// The structural identities: BP at delta = 1 matches the SQ fit, BP at
// delta -> 0 approximates the UKL objective, canonical balance makes
// AIPW = IPW, the treated/control split solves two independent LSIF
// problems, and the matching estimator forms and LSIF weights agree.
std::vector<OracleCheck> check_identities(std::uint64_t seed);

std::vector<OracleCheck> run_all_checks(std::uint64_t seed);

bool all_passed(const std::vector<OracleCheck>& checks);

// CSV: name,statistic,threshold,passed,description.
void write_checks_csv(const std::vector<OracleCheck>& checks, std::ostream& os);

}  // namespace rieszreg
