#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rieszreg/errors.hpp"

namespace rieszreg {

enum class Layout { Generic, TreatmentFirst };

// Observations W_i = (X_i, Y_i), stored row-wise. Under TreatmentFirst the
// first regressor column is a binary treatment D and the rest are covariates Z.
// An optional target sample carries the shifted covariate draws used by the
// covariate-shift functional. Immutable after construction by convention.
struct Dataset {
    Eigen::MatrixXd x;       // n x d regressors
    Eigen::VectorXd y;       // n outcomes
    Layout layout = Layout::Generic;
    Eigen::MatrixXd target;  // covariate-shift target sample (0 rows if unused)

    int n() const { return static_cast<int>(x.rows()); }
    int dim() const { return static_cast<int>(x.cols()); }
    int target_n() const { return static_cast<int>(target.rows()); }
    bool has_target() const { return target.rows() > 0; }

    double treat(int i) const { return x(i, 0); }
    // Covariates of row i under TreatmentFirst (everything after the treatment).
    Eigen::VectorXd z(int i) const { return x.row(i).tail(dim() - 1); }
    // The two counterfactual arms (d, Z_i) of row i.
    Eigen::VectorXd with_treatment(int i, double d) const {
        Eigen::VectorXd v = x.row(i);
        v(0) = d;
        return v;
    }

    // Checks finiteness, nonemptiness and the binary first column when
    // TreatmentFirst; throws DataError on violation.
    void validate() const;
};

// True nuisance functions attached to a synthetic draw.
struct OracleNuisance {
    std::function<double(const Eigen::VectorXd&)> representer;  // alpha_0(x)
    std::function<double(const Eigen::VectorXd&)> regression;   // gamma_0(x)
    std::function<double(const Eigen::VectorXd&)> propensity;   // e_0(z), ATE designs
    double theta = 0.0;
};

struct SyntheticDraw {
    Dataset data;
    OracleNuisance oracle;
};

// ATE design: Z in R^3 standard normal; treatment from a logistic propensity
// whose index has linear, quadratic and all pairwise interaction terms with
// coefficients ~ N(0, 0.5), drawn once per seed; outcome
//   Y = 1 + (Z'a)^2 + sigmoid(sum_j Z_j^2 b_j) + 5 D + eps,   eps ~ N(0,1).
// The propensity is clamped to [1e-4, 1-1e-4]. theta = 5.
SyntheticDraw gen_synthetic_ate(std::uint64_t seed, int n);

// Covariate-shift design: source X ~ N(0, I_d), target X ~ N(shift*1, I_d),
// outcome Y = gamma_0(X) + eps with a fixed quadratic gamma_0. The oracle
// representer is the closed-form Gaussian ratio exp(mu'x - |mu|^2/2);
// shift = 0 makes it identically 1.
SyntheticDraw gen_covariate_shift(std::uint64_t seed, int n_source, int n_target,
                                  int dim = 3, double shift = 0.5);

struct FoldSplit {
    std::vector<std::vector<int>> train;
    std::vector<std::vector<int>> eval;
    int k() const { return static_cast<int>(eval.size()); }
};

// Seeded partition of {0..n-1} into k eval folds of near-equal size; each
// train set is the complement of its eval set.
FoldSplit split_folds(int n, int k, std::uint64_t seed);

// Copy of the selected rows (layout kept, target sample carried over).
Dataset subset_rows(const Dataset& data, const std::vector<int>& rows);

// CSV import/export. Header `y,d,z1,...,zK` (TreatmentFirst) or
// `y,x1,...,xK` (Generic); '.' decimal, no thousands separators.
Dataset load_csv(const std::string& path, Layout layout);
void save_csv(const Dataset& data, const std::string& path);
// Target samples live in their own file with header `x1,...,xK`.
Eigen::MatrixXd load_target_csv(const std::string& path);

}  // namespace rieszreg
