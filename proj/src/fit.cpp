#include "rieszreg/fit.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "rieszreg/errors.hpp"

namespace rieszreg {

namespace {

constexpr double kGuardMargin = 1e-7;  // line-search domain guard
constexpr double kEvalMargin = 1e-9;   // one-shot evaluations, matches eval_g
constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;

enum class Mode { General, SqSimplified, NnCorrected };

struct EvalOut {
    bool feasible = false;
    double value = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd grad;
    int bad_index = -1;  // offending row when infeasible; -1 = nonfinite total
    bool bad_on_plan = false;
};

int branch_xi(BranchRule rule, double first_coord) {
    if (rule == BranchRule::AlwaysPositive) return 1;
    return first_coord > 0.5 ? 1 : 0;
}

std::string domain_message(const LossSpec& loss, const EvalOut& ev) {
    if (ev.bad_index < 0) return "objective is not finite at the requested parameters";
    std::ostringstream os;
    os << "representer value outside the " << loss_name(loss.kind) << " domain ("
       << loss_domain(loss) << ") at " << (ev.bad_on_plan ? "m-plan point " : "data row ")
       << ev.bad_index;
    return os.str();
}

// Objective/gradient evaluator over fixed data and m-plan. Linear models get
// precomputed feature matrices; other models are cloned and re-evaluated.
class Engine {
  public:
    Engine(const LossSpec& loss, const LinkSpec& link, PenaltySpec pen, const Dataset& data,
           const MPlan& plan, const Model& proto, double nn_clamp_c, double margin)
        : loss_(loss),
          link_(link),
          pen_(pen),
          nn_c_(nn_clamp_c),
          margin_(margin),
          data_(&data),
          plan_(&plan),
          n_(data.n()) {
        const int k = static_cast<int>(plan.points.rows());
        xi_data_.resize(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i)
            xi_data_[static_cast<std::size_t>(i)] = branch_xi(link.branch_rule, data.x(i, 0));
        xi_plan_.resize(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i)
            xi_plan_[static_cast<std::size_t>(i)] = branch_xi(link.branch_rule, plan.points(i, 0));
        linear_ = proto.linear_in_params();
        if (linear_) {
            const int p = proto.n_params();
            phi_data_.resize(n_, p);
            for (int i = 0; i < n_; ++i)
                phi_data_.row(i) = proto.features(data.x.row(i).transpose());
            phi_plan_.resize(k, p);
            for (int i = 0; i < k; ++i)
                phi_plan_.row(i) = proto.features(plan.points.row(i).transpose());
            if (plan.derivative) {
                dphi_plan_.resize(k, p);
                for (int i = 0; i < k; ++i)
                    dphi_plan_.row(i) =
                        proto.features_partial(plan.points.row(i).transpose(), plan.deriv_coord);
            }
        } else {
            model_ = proto.clone();
        }
        gram_ = proto.rkhs_gram();
    }

    EvalOut eval(const Eigen::VectorXd& theta, Mode mode, bool want_grad,
                 bool smooth_penalty) const {
        EvalOut out;
        const int k = static_cast<int>(plan_->points.rows());
        Eigen::VectorXd v_data(n_), v_plan(k), df_plan;
        if (linear_) {
            v_data = phi_data_ * theta;
            v_plan = phi_plan_ * theta;
            if (plan_->derivative) df_plan = dphi_plan_ * theta;
        } else {
            model_->set_params(theta);
            for (int i = 0; i < n_; ++i) v_data(i) = model_->value(data_->x.row(i).transpose());
            for (int i = 0; i < k; ++i) v_plan(i) = model_->value(plan_->points.row(i).transpose());
        }

        Eigen::VectorXd a_data(n_), a_plan(k);
        for (int i = 0; i < n_; ++i) {
            const int xi = xi_data_[static_cast<std::size_t>(i)];
            if (!std::isfinite(v_data(i)) || !link_in_domain(link_, xi, v_data(i))) {
                out.bad_index = i;
                return out;
            }
            a_data(i) = apply_link(link_, xi, v_data(i));
            if (!std::isfinite(a_data(i)) || !in_domain(loss_, a_data(i), margin_)) {
                out.bad_index = i;
                return out;
            }
        }
        for (int i = 0; i < k; ++i) {
            const int xi = xi_plan_[static_cast<std::size_t>(i)];
            if (!std::isfinite(v_plan(i)) || !link_in_domain(link_, xi, v_plan(i))) {
                out.bad_index = i;
                out.bad_on_plan = true;
                return out;
            }
            a_plan(i) = apply_link(link_, xi, v_plan(i));
            if (!std::isfinite(a_plan(i)) || !in_domain(loss_, a_plan(i), margin_)) {
                out.bad_index = i;
                out.bad_on_plan = true;
                return out;
            }
        }

        const Eigen::VectorXd& w = plan_->weights;
        double value = 0.0;
        if (mode == Mode::SqSimplified) {
            value = a_data.squaredNorm() / n_;
            if (plan_->derivative) {
                for (int i = 0; i < k; ++i) {
                    const int xi = xi_plan_[static_cast<std::size_t>(i)];
                    value -= 2.0 * w(i) * link_deriv(link_, xi, v_plan(i)) * df_plan(i);
                }
            } else {
                value -= 2.0 * w.dot(a_plan);
            }
        } else {
            double obs = 0.0;
            for (int i = 0; i < n_; ++i)
                obs += eval_dg(loss_, a_data(i)) * a_data(i) - eval_g(loss_, a_data(i));
            obs /= n_;
            if (mode == Mode::General) {
                double mterm = 0.0;
                for (int i = 0; i < k; ++i) {
                    const int xi = xi_plan_[static_cast<std::size_t>(i)];
                    if (plan_->derivative)
                        mterm += w(i) * eval_d2g(loss_, a_plan(i)) *
                                 link_deriv(link_, xi, v_plan(i)) * df_plan(i);
                    else
                        mterm += w(i) * eval_dg(loss_, a_plan(i));
                }
                value = obs - mterm;
            } else {  // NnCorrected; covariate-shift point plans only
                double b = 0.0, wterm = 0.0;
                for (int i = 0; i < k; ++i) {
                    b += w(i) * (eval_dg(loss_, a_plan(i)) * a_plan(i) - eval_g(loss_, a_plan(i)));
                    wterm += w(i) * eval_dg(loss_, a_plan(i));
                }
                value = std::max(0.0, obs - nn_c_ * b) + nn_c_ * b - wterm;
            }
        }
        if (smooth_penalty && pen_.lambda > 0.0) {
            if (pen_.order == PenaltyOrder::L2)
                value += 0.5 * pen_.lambda * theta.squaredNorm();
            else if (pen_.order == PenaltyOrder::Rkhs)
                value += 0.5 * pen_.lambda * theta.dot(*gram_ * theta);
        }
        if (!std::isfinite(value)) return out;
        out.value = value;

        if (want_grad) {
            // d/dtheta [-g + dg a] = d2g a dv/dtheta, so the data-side
            // coefficient is shared by every mode.
            Eigen::VectorXd c_data(n_);
            for (int i = 0; i < n_; ++i)
                c_data(i) = eval_d2g(loss_, a_data(i)) * a_data(i) *
                            link_deriv(link_, xi_data_[static_cast<std::size_t>(i)], v_data(i));
            Eigen::VectorXd grad = data_grad(theta, c_data) / n_;
            if (mode == Mode::NnCorrected) {
                double obs = 0.0, b = 0.0;
                for (int i = 0; i < n_; ++i)
                    obs += eval_dg(loss_, a_data(i)) * a_data(i) - eval_g(loss_, a_data(i));
                obs /= n_;
                Eigen::VectorXd cb(k), cw(k);
                for (int i = 0; i < k; ++i) {
                    const int xi = xi_plan_[static_cast<std::size_t>(i)];
                    const double zp = link_deriv(link_, xi, v_plan(i));
                    b += w(i) * (eval_dg(loss_, a_plan(i)) * a_plan(i) - eval_g(loss_, a_plan(i)));
                    cb(i) = w(i) * eval_d2g(loss_, a_plan(i)) * a_plan(i) * zp;
                    cw(i) = w(i) * eval_d2g(loss_, a_plan(i)) * zp;
                }
                const double on = obs - nn_c_ * b > 0.0 ? 1.0 : 0.0;
                grad *= on;
                grad += (nn_c_ * (1.0 - on)) * plan_grad(theta, cb);
                grad -= plan_grad(theta, cw);
            } else if (plan_->derivative) {
                Eigen::VectorXd c1(k), c2(k);
                for (int i = 0; i < k; ++i) {
                    const int xi = xi_plan_[static_cast<std::size_t>(i)];
                    const double zp = link_deriv(link_, xi, v_plan(i));
                    const double zpp = link_deriv2(link_, xi, v_plan(i));
                    c1(i) = w(i) * (eval_d3g(loss_, a_plan(i)) * zp * zp +
                                    eval_d2g(loss_, a_plan(i)) * zpp) *
                            df_plan(i);
                    c2(i) = w(i) * eval_d2g(loss_, a_plan(i)) * zp;
                }
                grad -= plan_grad(theta, c1) + dphi_plan_.transpose() * c2;
            } else {
                Eigen::VectorXd cm(k);
                for (int i = 0; i < k; ++i)
                    cm(i) = w(i) * eval_d2g(loss_, a_plan(i)) *
                            link_deriv(link_, xi_plan_[static_cast<std::size_t>(i)], v_plan(i));
                grad -= plan_grad(theta, cm);
            }
            if (smooth_penalty && pen_.lambda > 0.0) {
                if (pen_.order == PenaltyOrder::L2)
                    grad += pen_.lambda * theta;
                else if (pen_.order == PenaltyOrder::Rkhs)
                    grad += pen_.lambda * (*gram_ * theta);
            }
            if (!grad.allFinite()) return out;
            out.grad = std::move(grad);
        }
        out.feasible = true;
        return out;
    }

  private:
    Eigen::VectorXd data_grad(const Eigen::VectorXd& theta, const Eigen::VectorXd& coef) const {
        if (linear_) return phi_data_.transpose() * coef;
        Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
        for (int i = 0; i < n_; ++i)
            g += coef(i) * model_->param_grad(data_->x.row(i).transpose());
        return g;
    }
    Eigen::VectorXd plan_grad(const Eigen::VectorXd& theta, const Eigen::VectorXd& coef) const {
        if (linear_) return phi_plan_.transpose() * coef;
        Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
        for (int i = 0; i < plan_->points.rows(); ++i)
            g += coef(i) * model_->param_grad(plan_->points.row(i).transpose());
        return g;
    }

    LossSpec loss_;
    LinkSpec link_;
    PenaltySpec pen_;
    double nn_c_;
    double margin_;
    const Dataset* data_;
    const MPlan* plan_;
    int n_;
    bool linear_ = false;
    std::vector<int> xi_data_, xi_plan_;
    Eigen::MatrixXd phi_data_, phi_plan_, dphi_plan_;
    mutable std::unique_ptr<Model> model_;  // generic-path clone
    const Eigen::MatrixXd* gram_ = nullptr;
};

struct SolveOut {
    Eigen::VectorXd theta;
    double value = 0.0;
    double grad_norm = 0.0;
    int iters = 0;
    bool converged = false;
};

// Quasi-Newton descent: two-loop L-BFGS direction, Armijo backtracking with
// the domain guard (infeasible or non-decreasing steps halve).
template <typename EvalFn>
SolveOut lbfgs_minimize(EvalFn&& f, Eigen::VectorXd theta, double tol, int max_iters,
                        int memory) {
    struct Pair {
        Eigen::VectorXd s, y;
        double rho;
    };
    std::deque<Pair> pairs;
    EvalOut cur = f(theta, true);
    SolveOut out;
    for (int iter = 0; iter < max_iters; ++iter) {
        const double gn = cur.grad.lpNorm<Eigen::Infinity>();
        if (gn <= tol) {
            out.converged = true;
            break;
        }
        Eigen::VectorXd q = cur.grad;
        std::vector<double> tmp(pairs.size());
        for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
            const auto& pr = pairs[static_cast<std::size_t>(i)];
            tmp[static_cast<std::size_t>(i)] = pr.rho * pr.s.dot(q);
            q -= tmp[static_cast<std::size_t>(i)] * pr.y;
        }
        if (!pairs.empty()) q *= pairs.back().s.dot(pairs.back().y) / pairs.back().y.squaredNorm();
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const double b = pairs[i].rho * pairs[i].y.dot(q);
            q += (tmp[i] - b) * pairs[i].s;
        }
        Eigen::VectorXd dir = -q;
        double slope = dir.dot(cur.grad);
        if (!(slope < 0.0)) {
            dir = -cur.grad;
            slope = -cur.grad.squaredNorm();
        }
        double t = pairs.empty() ? std::min(1.0, 1.0 / std::max(1.0, gn)) : 1.0;
        bool accepted = false;
        Eigen::VectorXd cand;
        EvalOut trial;
        for (int h = 0; h < kMaxHalvings; ++h) {
            cand = theta + t * dir;
            trial = f(cand, false);
            if (trial.feasible && trial.value <= cur.value + kArmijo * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        ++out.iters;
        if (!accepted) break;
        EvalOut next = f(cand, true);
        Eigen::VectorXd s = cand - theta;
        Eigen::VectorXd y = next.grad - cur.grad;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            pairs.push_back({std::move(s), std::move(y), 1.0 / sy});
            if (static_cast<int>(pairs.size()) > memory) pairs.pop_front();
        }
        theta = std::move(cand);
        cur = next;
    }
    out.grad_norm = cur.grad.lpNorm<Eigen::Infinity>();
    if (out.grad_norm <= tol) out.converged = true;
    out.theta = std::move(theta);
    out.value = cur.value;
    return out;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& z, double tau) {
    Eigen::VectorXd r(z.size());
    for (int i = 0; i < z.size(); ++i)
        r(i) = z(i) > tau ? z(i) - tau : (z(i) < -tau ? z(i) + tau : 0.0);
    return r;
}

// Proximal gradient for the L1 penalty: backtracking on the quadratic
// majorization of the smooth part, soft-thresholding step, gradient-mapping
// sup norm (step displacement over step size) as the exit test.
template <typename EvalFn>
SolveOut ista_minimize(EvalFn&& f, Eigen::VectorXd theta, double lambda, double tol,
                       int max_iters) {
    EvalOut cur = f(theta, true);
    SolveOut out;
    double t = 1.0;
    for (int iter = 0; iter < max_iters; ++iter) {
        bool accepted = false;
        Eigen::VectorXd cand;
        for (int h = 0; h < kMaxHalvings; ++h) {
            cand = soft_threshold(theta - t * cur.grad, t * lambda);
            const Eigen::VectorXd d = cand - theta;
            const EvalOut trial = f(cand, false);
            if (trial.feasible &&
                trial.value <= cur.value + cur.grad.dot(d) + d.squaredNorm() / (2.0 * t)) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        ++out.iters;
        if (!accepted) break;
        out.grad_norm = (cand - theta).lpNorm<Eigen::Infinity>() / t;
        theta = std::move(cand);
        cur = f(theta, true);
        if (out.grad_norm <= tol) {
            out.converged = true;
            break;
        }
        t = std::min(t * 1.2, 1e6);
    }
    out.theta = std::move(theta);
    out.value = cur.value;
    return out;
}

double sigmoid(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

double softplus(double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); }

// (1/n) sum [ log(1 + e^v) - label v ] + (lambda/2)|beta|^2 and its gradient.
LinearModel fit_logistic(const BasisSpec& basis, const Eigen::MatrixXd& phi,
                         const Eigen::VectorXd& label, double lambda,
                         const OptimizerSpec& opt) {
    const int n = static_cast<int>(phi.rows());
    auto eval = [&](const Eigen::VectorXd& beta, bool want_grad) {
        EvalOut out;
        const Eigen::VectorXd v = phi * beta;
        double nll = 0.0;
        for (int i = 0; i < n; ++i) nll += softplus(v(i)) - label(i) * v(i);
        out.value = nll / n + 0.5 * lambda * beta.squaredNorm();
        if (want_grad) {
            Eigen::VectorXd r(n);
            for (int i = 0; i < n; ++i) r(i) = sigmoid(v(i)) - label(i);
            out.grad = phi.transpose() * r / n + lambda * beta;
        }
        out.feasible = std::isfinite(out.value);
        return out;
    };
    const double tol = opt.grad_tol > 0.0 ? opt.grad_tol : 1e-8;
    SolveOut sol = lbfgs_minimize(eval, Eigen::VectorXd::Zero(phi.cols()), tol, opt.max_iters,
                                  opt.lbfgs_memory);
    return LinearModel(basis, sol.theta);
}

Mode objective_mode(const FitConfig& config) {
    if (config.nn_correction) return Mode::NnCorrected;
    return config.loss.kind == LossKind::SQ ? Mode::SqSimplified : Mode::General;
}

void check_fit_context(const FitConfig& config, const Dataset& data, const Functional& fn) {
    validate(fn, data);
    if (config.link.branch_rule == BranchRule::TreatmentSign &&
        data.layout != Layout::TreatmentFirst)
        throw ValidationError("treatment-sign branching needs a treatment-first layout");
    if (config.nn_correction && fn.kind != FunctionalKind::CovariateShift)
        throw ValidationError("the nonnegative correction applies to covariate-shift fits");
}

// One-shot objective evaluation at a caller-supplied model; infeasible
// points throw rather than halve.
EvalOut eval_at_model(const FitConfig& config, const Dataset& data, const Functional& fn,
                      const Model& model, Mode mode, bool want_grad) {
    validate(config.loss);
    validate(config.link);
    check_fit_context(config, data, fn);
    const MPlan plan = build_m_plan(fn, data);
    if (plan.derivative && !model.linear_in_params())
        throw ValidationError("derivative functionals need a model linear in its parameters");
    Engine engine(config.loss, config.link, PenaltySpec{PenaltyOrder::L2, 0.0}, data, plan,
                  model, config.nn_clamp_c, kEvalMargin);
    EvalOut ev = engine.eval(model.params(), mode, want_grad, false);
    if (!ev.feasible) throw FitDomainError(domain_message(config.loss, ev));
    return ev;
}

}  // namespace

double penalty_exponent(PenaltyOrder order) { return order == PenaltyOrder::L1 ? 1.0 : 2.0; }

void validate(const FitConfig& config) {
    validate(config.loss);
    validate(config.link);
    if (config.penalty.lambda < 0.0) throw ValidationError("penalty lambda must be nonnegative");
    if (config.optimizer.max_iters < 1) throw ValidationError("max_iters must be at least 1");
    if (config.optimizer.grad_tol < 0.0) throw ValidationError("grad_tol must be nonnegative");
    if (config.optimizer.lbfgs_memory < 1) throw ValidationError("lbfgs memory must be positive");
    if (config.penalty.order == PenaltyOrder::L1 && config.model.kind == ModelKind::Mlp)
        throw ValidationError("the L1 penalty needs a model linear in its parameters");
    if (config.penalty.order == PenaltyOrder::Rkhs && config.model.kind != ModelKind::Kernel)
        throw ValidationError("the RKHS penalty needs a kernel model");
    if (config.nn_clamp_c < 0.0) throw ValidationError("nn_clamp_c must be nonnegative");
    if (config.nn_correction && config.loss.c != 0.0)
        throw ValidationError("the nonnegative correction needs a loss with C = 0");
}

double FitResult::alpha_at(const Eigen::VectorXd& x) const {
    return apply_link(link, branch_xi(link.branch_rule, x(0)), model->value(x));
}

EvaluableFn FitResult::representer() const {
    EvaluableFn fn;
    std::shared_ptr<Model> m = model;
    const LinkSpec lk = link;
    fn.value = [m, lk](const Eigen::VectorXd& x) {
        return apply_link(lk, branch_xi(lk.branch_rule, x(0)), m->value(x));
    };
    if (m->has_input_partial())
        fn.partial = [m, lk](const Eigen::VectorXd& x, int j) {
            const int xi = branch_xi(lk.branch_rule, x(0));
            return link_deriv(lk, xi, m->value(x)) * m->input_partial(x, j);
        };
    return fn;
}

double empirical_bregman(const FitConfig& config, const Dataset& data, const Functional& fn,
                         const Model& model) {
    const Mode mode =
        config.loss.kind == LossKind::SQ ? Mode::SqSimplified : Mode::General;
    return eval_at_model(config, data, fn, model, mode, false).value;
}

double empirical_bregman_general(const FitConfig& config, const Dataset& data,
                                 const Functional& fn, const Model& model) {
    return eval_at_model(config, data, fn, model, Mode::General, false).value;
}

Eigen::VectorXd empirical_bregman_grad(const FitConfig& config, const Dataset& data,
                                       const Functional& fn, const Model& model) {
    return eval_at_model(config, data, fn, model, Mode::General, true).grad;
}

double nn_corrected_objective(const FitConfig& config, const Dataset& data,
                              const Functional& fn, const Model& model) {
    if (fn.kind != FunctionalKind::CovariateShift)
        throw ValidationError("the nonnegative correction applies to covariate-shift fits");
    if (config.loss.c != 0.0)
        throw ValidationError("the nonnegative correction needs a loss with C = 0");
    return eval_at_model(config, data, fn, model, Mode::NnCorrected, false).value;
}

FitResult fit_riesz(const FitConfig& config, const Dataset& data, const Functional& fn) {
    validate(config);
    data.validate();
    check_fit_context(config, data, fn);
    const MPlan plan = build_m_plan(fn, data);
    std::unique_ptr<Model> model = build_model(config.model, data, config.seed);
    if (plan.derivative && !model->linear_in_params())
        throw ValidationError("derivative functionals need a model linear in its parameters");

    const Mode mode = objective_mode(config);
    Engine engine(config.loss, config.link, config.penalty, data, plan, *model,
                  config.nn_clamp_c, kGuardMargin);
    Eigen::VectorXd theta = model->params();
    EvalOut ev0 = engine.eval(theta, mode, false, true);
    if (!ev0.feasible) {
        if (auto* mlp = dynamic_cast<MlpModel*>(model.get())) {
            for (int tries = 0; tries < 80 && !ev0.feasible; ++tries) {
                mlp->scale_output(0.5);
                theta = mlp->params();
                ev0 = engine.eval(theta, mode, false, true);
            }
        }
        if (!ev0.feasible)
            throw FitDomainError("infeasible initialization: " +
                                 domain_message(config.loss, ev0));
    }

    const double tol = config.optimizer.grad_tol > 0.0
                           ? config.optimizer.grad_tol
                           : (config.model.kind == ModelKind::Mlp ? 1e-5 : 1e-8);
    auto eval = [&](const Eigen::VectorXd& th, bool wg) {
        return engine.eval(th, mode, wg, true);
    };
    SolveOut sol =
        config.penalty.order == PenaltyOrder::L1
            ? ista_minimize(eval, std::move(theta), config.penalty.lambda, tol,
                            config.optimizer.max_iters)
            : lbfgs_minimize(eval, std::move(theta), tol, config.optimizer.max_iters,
                             config.optimizer.lbfgs_memory);

    model->set_params(sol.theta);
    FitResult res;
    res.model = std::move(model);
    res.loss = config.loss;
    res.link = config.link;
    res.penalty = config.penalty;
    res.objective = sol.value + (config.penalty.order == PenaltyOrder::L1
                                     ? config.penalty.lambda * sol.theta.lpNorm<1>()
                                     : 0.0);
    res.grad_norm = sol.grad_norm;
    res.grad_tol = tol;
    res.iters = sol.iters;
    res.converged = sol.converged;
    res.alpha.resize(data.n());
    for (int i = 0; i < data.n(); ++i) res.alpha(i) = res.alpha_at(data.x.row(i).transpose());
    return res;
}

LinearModel fit_propensity_mle(const BasisSpec& basis, const Dataset& data, double lambda,
                               const OptimizerSpec& optimizer) {
    if (data.layout != Layout::TreatmentFirst)
        throw ValidationError("propensity fitting needs a treatment-first layout");
    if (lambda < 0.0) throw ValidationError("penalty lambda must be nonnegative");
    BasisSpec b = basis;
    if (b.input_dim == 0) b.input_dim = data.dim();
    validate(b);
    if (b.input_dim != data.dim()) throw ValidationError("basis input_dim does not match the data");
    const int n = data.n();
    Eigen::MatrixXd phi(n, basis_dim(b));
    Eigen::VectorXd label(n);
    for (int i = 0; i < n; ++i) {
        phi.row(i) = basis_eval(b, data.x.row(i).transpose());
        label(i) = data.treat(i);
    }
    return fit_logistic(b, phi, label, lambda, optimizer);
}

LinearModel fit_cs_classifier(const BasisSpec& basis, const Dataset& data, double lambda,
                              const OptimizerSpec& optimizer) {
    if (!data.has_target()) throw ValidationError("classifier construction needs a target sample");
    if (lambda < 0.0) throw ValidationError("penalty lambda must be nonnegative");
    BasisSpec b = basis;
    if (b.input_dim == 0) b.input_dim = data.dim();
    validate(b);
    if (b.kind != BasisKind::RawPlusIntercept && b.kind != BasisKind::Polynomial)
        throw ValidationError("classifier construction needs a basis with an intercept");
    if (b.input_dim != data.dim() || data.target.cols() != data.dim())
        throw ValidationError("basis input_dim does not match the data");
    const int n = data.n();
    const int m = data.target_n();
    Eigen::MatrixXd phi(n + m, basis_dim(b));
    Eigen::VectorXd label(n + m);
    for (int i = 0; i < n; ++i) {
        phi.row(i) = basis_eval(b, data.x.row(i).transpose());
        label(i) = 0.0;
    }
    for (int j = 0; j < m; ++j) {
        phi.row(n + j) = basis_eval(b, data.target.row(j).transpose());
        label(n + j) = 1.0;
    }
    LinearModel fitted = fit_logistic(b, phi, label, lambda, optimizer);
    // Prior-odds shift so exp(f) estimates the target/source density ratio.
    Eigen::VectorXd beta = fitted.params();
    beta(0) += std::log(static_cast<double>(n) / m);
    fitted.set_params(beta);
    return fitted;
}

}  // namespace rieszreg
