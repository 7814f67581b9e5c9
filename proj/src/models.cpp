#include "rieszreg/models.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <utility>

#include "rieszreg/errors.hpp"
#include "rieszreg/rng.hpp"

namespace rieszreg {

namespace {

// Effective input seen by the basis: x itself, or x with the treatment
// coordinate dropped.
Eigen::VectorXd effective_input(const BasisSpec& spec, const Eigen::VectorXd& x) {
    if (!spec.on_z_only) return x;
    return x.tail(x.size() - 1);
}

}  // namespace

void validate(const BasisSpec& spec) {
    if (spec.input_dim < 1) throw ValidationError("basis input_dim must be positive");
    const int d = spec.effective_dim();
    if (d < 1) throw ValidationError("basis has no coordinates left after dropping treatment");
    switch (spec.kind) {
        case BasisKind::RawPlusIntercept:
            break;
        case BasisKind::Polynomial:
            if (spec.degree != 1 && spec.degree != 2)
                throw ValidationError("polynomial basis supports degree 1 or 2");
            break;
        case BasisKind::GaussianRBF:
            if (spec.centers.rows() == 0) throw ValidationError("rbf basis needs centers");
            if (spec.centers.cols() != d)
                throw ValidationError("rbf centers dimension does not match input");
            if (!(spec.bandwidth > 0.0)) throw ValidationError("rbf bandwidth must be positive");
            break;
        case BasisKind::Indicator:
            if (spec.cells.empty()) throw ValidationError("indicator basis needs cells");
            break;
    }
}

int basis_dim(const BasisSpec& spec) {
    const int d = spec.effective_dim();
    switch (spec.kind) {
        case BasisKind::RawPlusIntercept:
            return 1 + d;
        case BasisKind::Polynomial:
            if (spec.degree == 1) return 1 + d;
            return 1 + d + d + d * (d - 1) / 2;
        case BasisKind::GaussianRBF:
            return static_cast<int>(spec.centers.rows());
        case BasisKind::Indicator:
            return static_cast<int>(spec.cells.size());
    }
    throw ValidationError("unknown basis kind");
}

Eigen::VectorXd basis_eval(const BasisSpec& spec, const Eigen::VectorXd& x) {
    const Eigen::VectorXd v = effective_input(spec, x);
    const int d = static_cast<int>(v.size());
    Eigen::VectorXd phi(basis_dim(spec));
    switch (spec.kind) {
        case BasisKind::RawPlusIntercept: {
            phi(0) = 1.0;
            phi.tail(d) = v;
            return phi;
        }
        case BasisKind::Polynomial: {
            phi(0) = 1.0;
            phi.segment(1, d) = v;
            if (spec.degree == 2) {
                int k = 1 + d;
                for (int j = 0; j < d; ++j) phi(k++) = v(j) * v(j);
                for (int j = 0; j < d; ++j)
                    for (int l = j + 1; l < d; ++l) phi(k++) = v(j) * v(l);
            }
            return phi;
        }
        case BasisKind::GaussianRBF: {
            const double inv = 1.0 / (2.0 * spec.bandwidth * spec.bandwidth);
            for (int k = 0; k < spec.centers.rows(); ++k) {
                const double sq = (v - spec.centers.row(k).transpose()).squaredNorm();
                phi(k) = std::exp(-sq * inv);
            }
            return phi;
        }
        case BasisKind::Indicator: {
            for (int k = 0; k < static_cast<int>(spec.cells.size()); ++k)
                phi(k) = spec.cells[static_cast<std::size_t>(k)](v) ? 1.0 : 0.0;
            return phi;
        }
    }
    throw ValidationError("unknown basis kind");
}

Eigen::VectorXd basis_partial(const BasisSpec& spec, const Eigen::VectorXd& x, int j) {
    if (j < 0 || j >= spec.input_dim)
        throw ValidationError("basis partial coordinate out of range");
    const int p = basis_dim(spec);
    // A z-only basis is constant in the treatment coordinate.
    if (spec.on_z_only && j == 0) return Eigen::VectorXd::Zero(p);
    const int jj = spec.on_z_only ? j - 1 : j;
    const Eigen::VectorXd v = effective_input(spec, x);
    const int d = static_cast<int>(v.size());
    Eigen::VectorXd dphi = Eigen::VectorXd::Zero(p);
    switch (spec.kind) {
        case BasisKind::RawPlusIntercept: {
            dphi(1 + jj) = 1.0;
            return dphi;
        }
        case BasisKind::Polynomial: {
            dphi(1 + jj) = 1.0;
            if (spec.degree == 2) {
                dphi(1 + d + jj) = 2.0 * v(jj);
                int k = 1 + 2 * d;
                for (int a = 0; a < d; ++a)
                    for (int b = a + 1; b < d; ++b) {
                        if (a == jj) dphi(k) = v(b);
                        if (b == jj) dphi(k) = v(a);
                        ++k;
                    }
            }
            return dphi;
        }
        case BasisKind::GaussianRBF: {
            const double inv = 1.0 / (2.0 * spec.bandwidth * spec.bandwidth);
            for (int k = 0; k < spec.centers.rows(); ++k) {
                const Eigen::VectorXd diff = v - spec.centers.row(k).transpose();
                dphi(k) = -2.0 * inv * diff(jj) * std::exp(-diff.squaredNorm() * inv);
            }
            return dphi;
        }
        case BasisKind::Indicator:
            throw ValidationError("indicator basis is not differentiable");
    }
    throw ValidationError("unknown basis kind");
}

BasisSpec make_raw_basis(int input_dim, bool on_z_only) {
    BasisSpec spec;
    spec.kind = BasisKind::RawPlusIntercept;
    spec.input_dim = input_dim;
    spec.on_z_only = on_z_only;
    if (input_dim > 0) validate(spec);  // 0 defers to the data that fills it
    return spec;
}

BasisSpec make_polynomial_basis(int degree, int input_dim, bool on_z_only) {
    BasisSpec spec;
    spec.kind = BasisKind::Polynomial;
    spec.degree = degree;
    spec.input_dim = input_dim;
    spec.on_z_only = on_z_only;
    if (input_dim > 0)
        validate(spec);  // 0 defers to the data that fills it
    else if (degree != 1 && degree != 2)
        throw ValidationError("polynomial basis supports degree 1 or 2");
    return spec;
}

BasisSpec make_rbf_basis(Eigen::MatrixXd centers, double bandwidth, int input_dim,
                         bool on_z_only) {
    BasisSpec spec;
    spec.kind = BasisKind::GaussianRBF;
    spec.centers = std::move(centers);
    spec.bandwidth = bandwidth;
    spec.input_dim = input_dim;
    spec.on_z_only = on_z_only;
    validate(spec);
    return spec;
}

Eigen::VectorXd Model::features(const Eigen::VectorXd&) const {
    throw ValidationError("model is not linear in its parameters");
}

Eigen::VectorXd Model::features_partial(const Eigen::VectorXd&, int) const {
    throw ValidationError("model is not linear in its parameters");
}

double Model::input_partial(const Eigen::VectorXd&, int) const {
    throw ValidationError("model has no analytic input partial");
}

LinearModel::LinearModel(BasisSpec basis, Eigen::VectorXd beta)
    : basis_(std::move(basis)), beta_(std::move(beta)) {
    validate(basis_);
    if (beta_.size() != basis_dim(basis_))
        throw ValidationError("coefficient length does not match basis dimension");
}

LinearModel::LinearModel(BasisSpec basis) : basis_(std::move(basis)) {
    validate(basis_);
    beta_ = Eigen::VectorXd::Zero(basis_dim(basis_));
}

void LinearModel::set_params(const Eigen::VectorXd& p) {
    if (p.size() != beta_.size()) throw ValidationError("parameter length mismatch");
    beta_ = p;
}

double LinearModel::value(const Eigen::VectorXd& x) const {
    return basis_eval(basis_, x).dot(beta_);
}

Eigen::VectorXd LinearModel::param_grad(const Eigen::VectorXd& x) const {
    return basis_eval(basis_, x);
}

std::unique_ptr<Model> LinearModel::clone() const { return std::make_unique<LinearModel>(*this); }

Eigen::VectorXd LinearModel::features(const Eigen::VectorXd& x) const {
    return basis_eval(basis_, x);
}

Eigen::VectorXd LinearModel::features_partial(const Eigen::VectorXd& x, int j) const {
    return basis_partial(basis_, x, j);
}

double LinearModel::input_partial(const Eigen::VectorXd& x, int j) const {
    return basis_partial(basis_, x, j).dot(beta_);
}

KernelModel::KernelModel(Eigen::MatrixXd centers, double bandwidth, int input_dim,
                         bool on_z_only) {
    basis_ = make_rbf_basis(std::move(centers), bandwidth, input_dim, on_z_only);
    const int m = static_cast<int>(basis_.centers.rows());
    coef_ = Eigen::VectorXd::Zero(m);
    gram_.resize(m, m);
    const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            const double sq = (basis_.centers.row(i) - basis_.centers.row(j)).squaredNorm();
            gram_(i, j) = gram_(j, i) = std::exp(-sq * inv);
        }
}

void KernelModel::set_params(const Eigen::VectorXd& p) {
    if (p.size() != coef_.size()) throw ValidationError("parameter length mismatch");
    coef_ = p;
}

double KernelModel::value(const Eigen::VectorXd& x) const {
    return basis_eval(basis_, x).dot(coef_);
}

Eigen::VectorXd KernelModel::param_grad(const Eigen::VectorXd& x) const {
    return basis_eval(basis_, x);
}

std::unique_ptr<Model> KernelModel::clone() const { return std::make_unique<KernelModel>(*this); }

Eigen::VectorXd KernelModel::features(const Eigen::VectorXd& x) const {
    return basis_eval(basis_, x);
}

Eigen::VectorXd KernelModel::features_partial(const Eigen::VectorXd& x, int j) const {
    return basis_partial(basis_, x, j);
}

double KernelModel::input_partial(const Eigen::VectorXd& x, int j) const {
    return basis_partial(basis_, x, j).dot(coef_);
}

double median_pairwise_distance(const Eigen::MatrixXd& rows) {
    const int m = static_cast<int>(rows.rows());
    if (m < 2) throw ValidationError("need at least two rows for a pairwise distance");
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) dist.push_back((rows.row(i) - rows.row(j)).norm());
    const std::size_t mid = dist.size() / 2;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
    return dist[mid];
}

KernelModel make_kernel_model(const Dataset& data, int n_centers, std::uint64_t seed,
                              double bandwidth_scale, bool on_z_only) {
    if (n_centers < 2) throw ValidationError("kernel model needs at least two centers");
    const int n = data.n();
    const int take = std::min(n_centers, n);
    SplitMix64 rng(seed, "kernel-centers");
    const std::vector<int> order = rng.permutation(n);
    const bool drop = on_z_only && data.layout == Layout::TreatmentFirst;
    const int d = data.dim() - (drop ? 1 : 0);
    Eigen::MatrixXd centers(take, d);
    for (int i = 0; i < take; ++i)
        centers.row(i) = drop ? data.x.row(order[static_cast<std::size_t>(i)]).tail(d)
                              : data.x.row(order[static_cast<std::size_t>(i)]).head(d);
    double bw = bandwidth_scale * median_pairwise_distance(centers);
    if (!(bw > 0.0)) bw = 1.0;  // all-duplicate subsample
    return KernelModel(std::move(centers), bw, data.dim(), drop);
}

MlpModel::MlpModel(int input_dim, int hidden, std::uint64_t seed) {
    if (input_dim < 1 || hidden < 1)
        throw ValidationError("mlp needs positive input and hidden sizes");
    SplitMix64 rng(seed, "mlp-init");
    const double s1 = std::sqrt(2.0 / input_dim);
    const double s2 = std::sqrt(2.0 / hidden);
    w1_.resize(hidden, input_dim);
    for (int i = 0; i < hidden; ++i)
        for (int j = 0; j < input_dim; ++j) w1_(i, j) = s1 * rng.next_normal();
    b1_ = Eigen::VectorXd::Zero(hidden);
    w2_.resize(hidden);
    for (int i = 0; i < hidden; ++i) w2_(i) = s2 * rng.next_normal();
    b2_ = 0.0;
}

int MlpModel::n_params() const {
    return static_cast<int>(w1_.size() + b1_.size() + w2_.size()) + 1;
}

Eigen::VectorXd MlpModel::params() const {
    Eigen::VectorXd p(n_params());
    int k = 0;
    for (int i = 0; i < w1_.rows(); ++i)
        for (int j = 0; j < w1_.cols(); ++j) p(k++) = w1_(i, j);
    for (int i = 0; i < b1_.size(); ++i) p(k++) = b1_(i);
    for (int i = 0; i < w2_.size(); ++i) p(k++) = w2_(i);
    p(k) = b2_;
    return p;
}

void MlpModel::set_params(const Eigen::VectorXd& p) {
    if (p.size() != n_params()) throw ValidationError("parameter length mismatch");
    int k = 0;
    for (int i = 0; i < w1_.rows(); ++i)
        for (int j = 0; j < w1_.cols(); ++j) w1_(i, j) = p(k++);
    for (int i = 0; i < b1_.size(); ++i) b1_(i) = p(k++);
    for (int i = 0; i < w2_.size(); ++i) w2_(i) = p(k++);
    b2_ = p(k);
}

double MlpModel::value(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd h = (w1_ * x + b1_).cwiseMax(0.0);
    return w2_.dot(h) + b2_;
}

Eigen::VectorXd MlpModel::param_grad(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd pre = w1_ * x + b1_;
    Eigen::VectorXd g(n_params());
    int k = 0;
    for (int i = 0; i < w1_.rows(); ++i) {
        const double up = pre(i) > 0.0 ? w2_(i) : 0.0;
        for (int j = 0; j < w1_.cols(); ++j) g(k++) = up * x(j);
    }
    for (int i = 0; i < b1_.size(); ++i) g(k++) = pre(i) > 0.0 ? w2_(i) : 0.0;
    for (int i = 0; i < w2_.size(); ++i) g(k++) = std::max(pre(i), 0.0);
    g(k) = 1.0;
    return g;
}

std::unique_ptr<Model> MlpModel::clone() const { return std::make_unique<MlpModel>(*this); }

double MlpModel::input_partial(const Eigen::VectorXd& x, int j) const {
    const Eigen::VectorXd pre = w1_ * x + b1_;
    double out = 0.0;
    for (int i = 0; i < pre.size(); ++i)
        if (pre(i) > 0.0) out += w2_(i) * w1_(i, j);
    return out;
}

void MlpModel::scale_output(double s) {
    w2_ *= s;
    b2_ *= s;
}

std::unique_ptr<Model> build_model(const ModelSpec& spec, const Dataset& data,
                                   std::uint64_t seed) {
    switch (spec.kind) {
        case ModelKind::Linear: {
            BasisSpec basis = spec.basis;
            if (basis.input_dim == 0) basis.input_dim = data.dim();
            if (basis.input_dim != data.dim())
                throw ValidationError("basis input_dim does not match the data");
            return std::make_unique<LinearModel>(std::move(basis));
        }
        case ModelKind::Kernel:
            return std::make_unique<KernelModel>(make_kernel_model(
                data, spec.kernel_centers, seed, spec.kernel_bandwidth_scale,
                spec.kernel_on_z_only));
        case ModelKind::Mlp:
            return std::make_unique<MlpModel>(data.dim(), spec.mlp_hidden, seed);
    }
    throw ValidationError("unknown model kind");
}

LinearModel fit_least_squares(const BasisSpec& basis, const Dataset& data, double ridge) {
    if (ridge < 0.0) throw ValidationError("ridge must be nonnegative");
    const int n = data.n();
    const int p = basis_dim(basis);
    Eigen::MatrixXd phi(n, p);
    for (int i = 0; i < n; ++i) phi.row(i) = basis_eval(basis, data.x.row(i).transpose());
    Eigen::MatrixXd a = phi.transpose() * phi / n;
    a.diagonal().array() += ridge;
    const Eigen::VectorXd b = phi.transpose() * data.y / n;
    const Eigen::VectorXd beta = a.ldlt().solve(b);
    if (!beta.allFinite() || (a * beta - b).norm() > 1e-8 * (1.0 + b.norm()))
        throw ValidationError("least squares system is singular; use ridge > 0");
    return LinearModel(basis, beta);
}

EvaluableFn to_evaluable(const Model& model) {
    EvaluableFn fn;
    fn.value = [&model](const Eigen::VectorXd& x) { return model.value(x); };
    if (model.has_input_partial())
        fn.partial = [&model](const Eigen::VectorXd& x, int j) {
            return model.input_partial(x, j);
        };
    return fn;
}

EvaluableFn to_evaluable(std::shared_ptr<const Model> model) {
    EvaluableFn fn;
    fn.value = [model](const Eigen::VectorXd& x) { return model->value(x); };
    if (model->has_input_partial())
        fn.partial = [model](const Eigen::VectorXd& x, int j) {
            return model->input_partial(x, j);
        };
    return fn;
}

}  // namespace rieszreg
