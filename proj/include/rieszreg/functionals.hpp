#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>

#include "rieszreg/data.hpp"

namespace rieszreg {

enum class FunctionalKind { ATE, AME, APE, CovariateShift };

// The linear functional m(W, h) defining the target parameter
// theta_0 = E[m(W, gamma_0)]:
//   ATE             h(1, Z) - h(0, Z)
//   AME             d/dx_j h(X) at the configured coordinate j
//   APE             mean over P_1 draws minus mean over P_{-1} draws
//   CovariateShift  h at the paired target draw (source i pairs with
//                   target i mod m; the estimators use separate averages)
struct Functional {
    FunctionalKind kind = FunctionalKind::ATE;
    int ame_coordinate = 0;
    // Sample representations of the APE shift measures P_1 and P_{-1}.
    Eigen::MatrixXd ape_plus;
    Eigen::MatrixXd ape_minus;
};

std::string functional_name(FunctionalKind kind);

// Layout/shape compatibility with a dataset; throws ValidationError.
void validate(const Functional& fn, const Dataset& data);

// A function handed to m: pointwise value plus an optional analytic partial
// derivative. Without the partial, AME falls back to central differences
// with step 1e-5 * (1 + |x_j|).
struct EvaluableFn {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<double(const Eigen::VectorXd&, int)> partial;

    double partial_or_fd(const Eigen::VectorXd& x, int j) const;
};

// m(W_i, h) for observation i of the dataset.
double apply_m(const Functional& fn, const Dataset& data, int i, const EvaluableFn& h);

// | mean_i m(W_i, h) - mean_i alpha_0(X_i) h(X_i) |, the Monte Carlo
// statistic for the Riesz representation property.
double riesz_identity_check(const Functional& fn, const OracleNuisance& oracle,
                            const EvaluableFn& h, const Dataset& data);

// The aggregate m-average reduced to weighted point evaluations:
//   (1/n) sum_i m(W_i, q) = sum_k weights_k q(points.row(k))        (point form)
//   (1/n) sum_i m(W_i, q) = sum_k weights_k dq/dx_j(points.row(k))  (AME form)
// This is what the objective and its gradient need; per-observation values
// go through apply_m.
struct MPlan {
    Eigen::MatrixXd points;
    Eigen::VectorXd weights;
    bool derivative = false;
    int deriv_coord = 0;
};

MPlan build_m_plan(const Functional& fn, const Dataset& data);

}  // namespace rieszreg
