#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "rieszreg/data.hpp"
#include "rieszreg/functionals.hpp"

namespace rieszreg {

enum class BasisKind { RawPlusIntercept, Polynomial, GaussianRBF, Indicator };

// Feature map phi: R^input_dim -> R^p. With on_z_only the treatment
// coordinate is dropped before evaluation, so features never depend on D.
//   RawPlusIntercept  (1, x_1, ..., x_d)
//   Polynomial        degree 1: as above; degree 2: plus squares and all
//                     pairwise interactions (intercept, linear, squares,
//                     cross terms in j < k order)
//   GaussianRBF       exp(-|x - c_k|^2 / (2 bw^2)) per center
//   Indicator         1[x in cell] per predicate cell (not differentiable)
struct BasisSpec {
    BasisKind kind = BasisKind::RawPlusIntercept;
    int input_dim = 0;  // ambient x dimension, treatment included
    bool on_z_only = false;
    int degree = 1;           // Polynomial: 1 or 2
    Eigen::MatrixXd centers;  // GaussianRBF, rows are centers in effective dim
    double bandwidth = 1.0;   // GaussianRBF
    std::vector<std::function<bool(const Eigen::VectorXd&)>> cells;  // Indicator

    int effective_dim() const { return input_dim - (on_z_only ? 1 : 0); }
};

void validate(const BasisSpec& spec);
int basis_dim(const BasisSpec& spec);
Eigen::VectorXd basis_eval(const BasisSpec& spec, const Eigen::VectorXd& x);
// d phi / d x_j analytically; Indicator throws ValidationError.
Eigen::VectorXd basis_partial(const BasisSpec& spec, const Eigen::VectorXd& x, int j);

BasisSpec make_raw_basis(int input_dim, bool on_z_only = false);
BasisSpec make_polynomial_basis(int degree, int input_dim, bool on_z_only = false);
BasisSpec make_rbf_basis(Eigen::MatrixXd centers, double bandwidth, int input_dim,
                         bool on_z_only = false);

// Base model f(x) for the representer or the outcome regression.
class Model {
  public:
    virtual ~Model() = default;
    virtual int n_params() const = 0;
    virtual Eigen::VectorXd params() const = 0;
    virtual void set_params(const Eigen::VectorXd& p) = 0;
    virtual double value(const Eigen::VectorXd& x) const = 0;
    virtual Eigen::VectorXd param_grad(const Eigen::VectorXd& x) const = 0;
    virtual std::unique_ptr<Model> clone() const = 0;

    // Linear-in-parameter models expose f(x) = features(x) . params.
    virtual bool linear_in_params() const { return false; }
    virtual Eigen::VectorXd features(const Eigen::VectorXd& x) const;
    virtual Eigen::VectorXd features_partial(const Eigen::VectorXd& x, int j) const;

    // Analytic d f / d x_j where available (derivative-type functionals).
    virtual bool has_input_partial() const { return false; }
    virtual double input_partial(const Eigen::VectorXd& x, int j) const;

    // RKHS Gram matrix over the model's centers, when the J(f) = |f|_H^2
    // penalty applies; null otherwise.
    virtual const Eigen::MatrixXd* rkhs_gram() const { return nullptr; }
};

class LinearModel : public Model {
  public:
    LinearModel(BasisSpec basis, Eigen::VectorXd beta);
    explicit LinearModel(BasisSpec basis);  // beta = 0

    int n_params() const override { return static_cast<int>(beta_.size()); }
    Eigen::VectorXd params() const override { return beta_; }
    void set_params(const Eigen::VectorXd& p) override;
    double value(const Eigen::VectorXd& x) const override;
    Eigen::VectorXd param_grad(const Eigen::VectorXd& x) const override;
    std::unique_ptr<Model> clone() const override;

    bool linear_in_params() const override { return true; }
    Eigen::VectorXd features(const Eigen::VectorXd& x) const override;
    Eigen::VectorXd features_partial(const Eigen::VectorXd& x, int j) const override;
    bool has_input_partial() const override { return basis_.kind != BasisKind::Indicator; }
    double input_partial(const Eigen::VectorXd& x, int j) const override;

    const BasisSpec& basis() const { return basis_; }

  private:
    BasisSpec basis_;
    Eigen::VectorXd beta_;
};

// Gaussian-kernel model f(x) = sum_k coef_k k(x, c_k) with the RKHS norm
// coef' K coef available as the ridge penalty.
class KernelModel : public Model {
  public:
    KernelModel(Eigen::MatrixXd centers, double bandwidth, int input_dim, bool on_z_only);

    int n_params() const override { return static_cast<int>(coef_.size()); }
    Eigen::VectorXd params() const override { return coef_; }
    void set_params(const Eigen::VectorXd& p) override;
    double value(const Eigen::VectorXd& x) const override;
    Eigen::VectorXd param_grad(const Eigen::VectorXd& x) const override;
    std::unique_ptr<Model> clone() const override;

    bool linear_in_params() const override { return true; }
    Eigen::VectorXd features(const Eigen::VectorXd& x) const override;
    Eigen::VectorXd features_partial(const Eigen::VectorXd& x, int j) const override;
    bool has_input_partial() const override { return true; }
    double input_partial(const Eigen::VectorXd& x, int j) const override;
    const Eigen::MatrixXd* rkhs_gram() const override { return &gram_; }

    const BasisSpec& basis() const { return basis_; }

  private:
    BasisSpec basis_;
    Eigen::VectorXd coef_;
    Eigen::MatrixXd gram_;
};

// Seeded subsample of rows as kernel centers plus the median pairwise
// distance bandwidth heuristic (scaled by bandwidth_scale).
KernelModel make_kernel_model(const Dataset& data, int n_centers, std::uint64_t seed,
                              double bandwidth_scale = 1.0, bool on_z_only = false);
double median_pairwise_distance(const Eigen::MatrixXd& rows);

// One-hidden-layer ReLU network with identity output; exact backprop.
class MlpModel : public Model {
  public:
    // He-style seeded initialization.
    MlpModel(int input_dim, int hidden, std::uint64_t seed);

    int n_params() const override;
    Eigen::VectorXd params() const override;
    void set_params(const Eigen::VectorXd& p) override;
    double value(const Eigen::VectorXd& x) const override;
    Eigen::VectorXd param_grad(const Eigen::VectorXd& x) const override;
    std::unique_ptr<Model> clone() const override;

    bool has_input_partial() const override { return true; }
    double input_partial(const Eigen::VectorXd& x, int j) const override;

    int hidden() const { return static_cast<int>(b1_.size()); }
    int input_dim() const { return static_cast<int>(w1_.cols()); }
    // Multiplies the output layer by s (feasibility rescaling at init).
    void scale_output(double s);

  private:
    Eigen::MatrixXd w1_;
    Eigen::VectorXd b1_, w2_;
    double b2_ = 0.0;
};

enum class ModelKind { Linear, Kernel, Mlp };

// Recipe for building a fresh representer model on a dataset.
struct ModelSpec {
    ModelKind kind = ModelKind::Linear;
    BasisSpec basis;  // Linear
    int kernel_centers = 100;
    double kernel_bandwidth_scale = 1.0;
    bool kernel_on_z_only = false;
    int mlp_hidden = 100;
};

// Linear starts at beta = 0; Kernel takes a seeded center subsample with the
// median-distance bandwidth; Mlp gets a seeded He-style init. A basis
// input_dim of 0 is filled in from the data.
std::unique_ptr<Model> build_model(const ModelSpec& spec, const Dataset& data,
                                   std::uint64_t seed);

// Least squares y ~ phi(x) with an optional ridge term, solved by normal
// equations; a singular system with ridge = 0 throws ValidationError
// advising ridge > 0.
LinearModel fit_least_squares(const BasisSpec& basis, const Dataset& data, double ridge);

// Wraps a model as an EvaluableFn, with the analytic partial when available.
// The reference overload borrows the model; the shared_ptr overload owns it
// and outlives the caller's handle.
EvaluableFn to_evaluable(const Model& model);
EvaluableFn to_evaluable(std::shared_ptr<const Model> model);

}  // namespace rieszreg
