#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>

#include "rieszreg/data.hpp"
#include "rieszreg/functionals.hpp"
#include "rieszreg/links.hpp"
#include "rieszreg/losses.hpp"
#include "rieszreg/models.hpp"

namespace rieszreg {

// Penalty lambda * J(f): L1 is lambda |beta|_1, L2 is (lambda/2) |beta|^2,
// Rkhs is (lambda/2) beta' K beta with the kernel model's Gram matrix.
enum class PenaltyOrder { L1, L2, Rkhs };

struct PenaltySpec {
    PenaltyOrder order = PenaltyOrder::L2;
    double lambda = 0.0;
};

// The norm exponent a behind the balance bound lambda |beta_j|^{a-1}.
double penalty_exponent(PenaltyOrder order);

struct OptimizerSpec {
    int max_iters = 500;
    // 0 picks the model default: 1e-8 for linear/kernel, 1e-5 for mlp.
    double grad_tol = 0.0;
    int lbfgs_memory = 10;
};

struct FitConfig {
    LossSpec loss;
    LinkSpec link;
    ModelSpec model;
    PenaltySpec penalty;
    OptimizerSpec optimizer;
    // Clamps the source-minus-scaled-target divergence component at zero
    // (density-ratio functionals only). nn_clamp_c = 0 keeps the clamp
    // component nonnegative by itself, reproducing the plain objective.
    bool nn_correction = false;
    double nn_clamp_c = 0.0;
    std::uint64_t seed = 1;  // kernel center subsample / mlp init
};

// Config-only checks (penalty/optimizer ranges, L1-with-mlp and
// Rkhs-without-kernel rejections); data-dependent checks live in fit_riesz.
void validate(const FitConfig& config);

struct FitResult {
    std::shared_ptr<Model> model;
    LossSpec loss;
    LinkSpec link;
    PenaltySpec penalty;
    double objective = 0.0;  // penalized, at exit
    double grad_norm = 0.0;  // sup norm; gradient-mapping norm under L1
    double grad_tol = 1e-8;  // the tolerance the solver actually used
    int iters = 0;
    bool converged = false;
    Eigen::VectorXd alpha;               // representer at the data rows
    Eigen::VectorXd balance_residuals;   // filled by the balancing module

    // alpha_hat(x) = link(xi(x), f(x)).
    double alpha_at(const Eigen::VectorXd& x) const;
    EvaluableFn representer() const;  // self-contained, safe past this object
};

// The empirical objective of the fitted representer family, unpenalized:
//   (1/n) sum_i [ -g(alpha(X_i)) + dg(alpha(X_i)) alpha(X_i) ] - m-average of dg o alpha
// For SQ the simplified form (1/n) sum_i alpha^2 - 2 m-average(alpha) is
// returned instead; it differs from the general form by the constant
// -C^2 + 2C m(W, 1). Out-of-domain evaluations throw FitDomainError naming
// the offending observation.
double empirical_bregman(const FitConfig& config, const Dataset& data, const Functional& fn,
                         const Model& model);
// Always the general form, for the constant-difference cross-check.
double empirical_bregman_general(const FitConfig& config, const Dataset& data,
                                 const Functional& fn, const Model& model);
// Exact parameter gradient of the objective (chain rule through link and
// model); identical for the general and simplified SQ forms.
Eigen::VectorXd empirical_bregman_grad(const FitConfig& config, const Dataset& data,
                                       const Functional& fn, const Model& model);

// Objective with the nonnegative divergence-from-zero component clamped at
// zero from below:
//   max(0, E_src[D_g(0,alpha)] - c E_tgt[D_g(0,alpha)]) + c E_tgt[D_g(0,alpha)]
//     - E_tgt[dg(alpha)]
// with c = nn_clamp_c and the target averages taken through the m-plan.
// Requires a covariate-shift functional and a loss with C = 0 (so g(0) = 0
// and D_g(0, t) = dg(t) t - g(t) pointwise).
double nn_corrected_objective(const FitConfig& config, const Dataset& data,
                              const Functional& fn, const Model& model);

// Penalized minimization: L-BFGS with Armijo backtracking for smooth
// penalties, proximal gradient with soft-thresholding for L1, both with the
// domain guard (a step is accepted only when every representer evaluation
// stays at least 1e-7 inside its branch). Accepted steps never increase the
// penalized objective. Infeasible initialization throws FitDomainError; the
// mlp init shrinks its output layer until feasible before giving up.
FitResult fit_riesz(const FitConfig& config, const Dataset& data, const Functional& fn);

// Ridge-penalized logistic regression of the treatment on phi(z):
//   min (1/n) sum_i [ log(1 + e^{v_i}) - D_i v_i ] + (lambda/2) |beta|^2.
// The plug-in representer is the propensity-logit link over this model.
LinearModel fit_propensity_mle(const BasisSpec& basis, const Dataset& data, double lambda,
                               const OptimizerSpec& optimizer = {});

// Density-ratio-by-classification: pooled logistic regression of the sample
// label (source 0 / target 1) on phi(x), intercept shifted by log(n/m) so
// that exp(f(x)) estimates the target/source ratio. The basis must carry an
// intercept (raw or polynomial).
LinearModel fit_cs_classifier(const BasisSpec& basis, const Dataset& data, double lambda,
                              const OptimizerSpec& optimizer = {});

}  // namespace rieszreg
