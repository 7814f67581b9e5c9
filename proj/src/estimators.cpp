#include "rieszreg/estimators.hpp"

#include <cmath>
#include <iomanip>
#include <memory>
#include <string>
#include <utility>

#include "rieszreg/errors.hpp"

namespace rieszreg {

namespace {

bool is_shift(const Functional& fn) { return fn.kind == FunctionalKind::CovariateShift; }

void require_evaluable(const EvaluableFn& f, const char* which) {
    if (!f.value) throw ValidationError(std::string(which) + " is not evaluable");
}

double sample_sd(const Eigen::VectorXd& v) {
    const auto n = v.size();
    if (n < 2) return 0.0;
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(n - 1));
}

EstimateReport wald_report(double theta, double se, int n, Method method, int folds) {
    EstimateReport rep;
    rep.theta_hat = theta;
    rep.se = se;
    rep.ci_low = theta - kWaldZ * se;
    rep.ci_high = theta + kWaldZ * se;
    rep.n = n;
    rep.method = method_name(method);
    rep.crossfit_folds = folds;
    return rep;
}

// Independent source and target sample averages: the variances add.
double shift_se(const Eigen::VectorXd& target_part, const Eigen::VectorXd& source_part) {
    const double sd_t = sample_sd(target_part);
    const double sd_s = sample_sd(source_part);
    return std::sqrt(sd_t * sd_t / static_cast<double>(target_part.size()) +
                     sd_s * sd_s / static_cast<double>(source_part.size()));
}

Eigen::VectorXd eval_rows(const Dataset& data, const EvaluableFn& f) {
    Eigen::VectorXd out(data.n());
    for (int i = 0; i < data.n(); ++i) out(i) = f.value(data.x.row(i).transpose());
    return out;
}

Eigen::VectorXd eval_target(const Dataset& data, const EvaluableFn& f) {
    Eigen::VectorXd out(data.target_n());
    for (int j = 0; j < data.target_n(); ++j) out(j) = f.value(data.target.row(j).transpose());
    return out;
}

Eigen::VectorXd m_values(const Functional& fn, const Dataset& data, const EvaluableFn& h) {
    Eigen::VectorXd out(data.n());
    for (int i = 0; i < data.n(); ++i) out(i) = apply_m(fn, data, i, h);
    return out;
}

std::string fold_tag(int f) { return "fold " + std::to_string(f + 1) + ": "; }

}  // namespace

std::string method_name(Method method) {
    switch (method) {
        case Method::DM: return "dm";
        case Method::IPW: return "ipw";
        case Method::AIPW: return "aipw";
        case Method::TMLE: return "tmle";
    }
    throw ValidationError("unknown method tag");
}

Method parse_method(const std::string& name) {
    if (name == "dm" || name == "DM") return Method::DM;
    if (name == "ipw" || name == "IPW") return Method::IPW;
    if (name == "aipw" || name == "AIPW") return Method::AIPW;
    if (name == "tmle" || name == "TMLE") return Method::TMLE;
    throw ValidationError("unknown method '" + name + "' (expected dm, ipw, aipw or tmle)");
}

void write_estimates_csv(const std::vector<EstimateReport>& reports, std::ostream& os) {
    os << "method,theta,se,ci_low,ci_high,n,folds\n";
    os << std::setprecision(17);
    for (const auto& r : reports)
        os << r.method << ',' << r.theta_hat << ',' << r.se << ',' << r.ci_low << ','
           << r.ci_high << ',' << r.n << ',' << r.crossfit_folds << '\n';
}

EstimateReport dm_estimate(const Dataset& data, const EvaluableFn& gamma_hat,
                           const Functional& fn) {
    require_evaluable(gamma_hat, "gamma_hat");
    validate(fn, data);
    if (is_shift(fn)) {
        const Eigen::VectorXd reg = eval_target(data, gamma_hat);
        const double se = sample_sd(reg) / std::sqrt(static_cast<double>(reg.size()));
        return wald_report(reg.mean(), se, data.n(), Method::DM, 1);
    }
    const Eigen::VectorXd psi = m_values(fn, data, gamma_hat);
    const double se = sample_sd(psi) / std::sqrt(static_cast<double>(data.n()));
    return wald_report(psi.mean(), se, data.n(), Method::DM, 1);
}

EstimateReport ipw_estimate(const Dataset& data, const EvaluableFn& alpha_hat,
                            const Functional& fn) {
    require_evaluable(alpha_hat, "alpha_hat");
    validate(fn, data);
    const Eigen::VectorXd psi = eval_rows(data, alpha_hat).cwiseProduct(data.y);
    const double se = sample_sd(psi) / std::sqrt(static_cast<double>(data.n()));
    return wald_report(psi.mean(), se, data.n(), Method::IPW, 1);
}

ScoreSet aipw_scores(const Dataset& data, const EvaluableFn& alpha_hat,
                     const EvaluableFn& gamma_hat, const Functional& fn) {
    require_evaluable(alpha_hat, "alpha_hat");
    require_evaluable(gamma_hat, "gamma_hat");
    validate(fn, data);
    ScoreSet scores;
    scores.method = method_name(Method::AIPW);
    const Eigen::VectorXd a = eval_rows(data, alpha_hat);
    const Eigen::VectorXd g = eval_rows(data, gamma_hat);
    scores.psi = m_values(fn, data, gamma_hat) + a.cwiseProduct(data.y - g);
    if (!scores.psi.allFinite()) throw ValidationError("score values are not finite");
    return scores;
}

EstimateReport aipw_estimate(const Dataset& data, const EvaluableFn& alpha_hat,
                             const EvaluableFn& gamma_hat, const Functional& fn) {
    require_evaluable(alpha_hat, "alpha_hat");
    require_evaluable(gamma_hat, "gamma_hat");
    validate(fn, data);
    if (is_shift(fn)) {
        const Eigen::VectorXd reg = eval_target(data, gamma_hat);
        const Eigen::VectorXd corr =
            eval_rows(data, alpha_hat).cwiseProduct(data.y - eval_rows(data, gamma_hat));
        return wald_report(reg.mean() + corr.mean(), shift_se(reg, corr), data.n(),
                           Method::AIPW, 1);
    }
    const ScoreSet scores = aipw_scores(data, alpha_hat, gamma_hat, fn);
    const double se = sample_sd(scores.psi) / std::sqrt(static_cast<double>(data.n()));
    return wald_report(scores.psi.mean(), se, data.n(), Method::AIPW, 1);
}

EstimateReport tmle_estimate(const Dataset& data, const EvaluableFn& alpha_hat,
                             const EvaluableFn& gamma0_hat, const Functional& fn) {
    require_evaluable(alpha_hat, "alpha_hat");
    require_evaluable(gamma0_hat, "gamma0_hat");
    validate(fn, data);
    const Eigen::VectorXd a = eval_rows(data, alpha_hat);
    const Eigen::VectorXd g0 = eval_rows(data, gamma0_hat);
    const double denom = a.squaredNorm();
    if (denom == 0.0)
        throw ValidationError("degenerate fluctuation: alpha_hat vanishes on the whole sample");
    const double eps = a.dot(data.y - g0) / denom;
    // The updated residuals are orthogonal to alpha by construction, so the
    // correction term only enters the variance.
    const Eigen::VectorXd corr = a.cwiseProduct(data.y - g0 - eps * a);
    if (is_shift(fn)) {
        const Eigen::VectorXd g1 = eval_target(data, gamma0_hat) + eps * eval_target(data, alpha_hat);
        return wald_report(g1.mean(), shift_se(g1, corr), data.n(), Method::TMLE, 1);
    }
    // m is linear in its function argument: m(W, g0 + eps a) = m(W, g0) + eps m(W, a).
    const Eigen::VectorXd mg1 = m_values(fn, data, gamma0_hat) + eps * m_values(fn, data, alpha_hat);
    const double se = sample_sd(mg1 + corr) / std::sqrt(static_cast<double>(data.n()));
    return wald_report(mg1.mean(), se, data.n(), Method::TMLE, 1);
}

std::vector<EstimateReport> crossfit_suite(const Dataset& data, const NuisanceFactory& make,
                                           const Functional& fn, int k,
                                           const std::vector<Method>& methods,
                                           std::uint64_t seed) {
    if (!make.alpha || !make.gamma) throw ValidationError("nuisance factory is incomplete");
    if (k < 2) throw ValidationError("cross-fitting needs at least 2 folds");
    if (methods.empty()) throw ValidationError("no methods requested");
    validate(fn, data);

    bool want_dm = false, want_ipw = false, want_aipw = false, want_tmle = false;
    for (Method mth : methods) {
        want_dm |= mth == Method::DM;
        want_ipw |= mth == Method::IPW;
        want_aipw |= mth == Method::AIPW;
        want_tmle |= mth == Method::TMLE;
    }
    const bool need_alpha = want_ipw || want_aipw || want_tmle;
    const bool need_gamma = want_dm || want_aipw || want_tmle;

    const int n = data.n();
    const int m = data.target_n();
    const bool shift = is_shift(fn);
    const FoldSplit folds = split_folds(n, k, seed);

    // Pooled per-observation scores (source side) and fold-averaged target
    // predictions (covariate shift).
    Eigen::VectorXd psi_dm = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd psi_ipw = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd psi_aipw = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd psi_tmle = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd corr_aipw = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd corr_tmle = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd acc_gamma = Eigen::VectorXd::Zero(shift ? m : 0);
    Eigen::VectorXd acc_tmle = Eigen::VectorXd::Zero(shift ? m : 0);

    for (int f = 0; f < folds.k(); ++f) {
        EvaluableFn alpha_f, gamma_f;
        try {
            const Dataset train = subset_rows(data, folds.train[f]);
            if (need_alpha) alpha_f = make.alpha(train);
            if (need_gamma) gamma_f = make.gamma(train);
        } catch (const FitDomainError& e) {
            throw FitDomainError(fold_tag(f) + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(fold_tag(f) + e.what());
        } catch (const DataError& e) {
            throw DataError(fold_tag(f) + e.what());
        }

        const std::vector<int>& ev = folds.eval[f];
        const int ne = static_cast<int>(ev.size());
        Eigen::VectorXd a(ne), g(ne), mg(ne), ma(ne), yv(ne);
        for (int t = 0; t < ne; ++t) {
            const int i = ev[t];
            yv(t) = data.y(i);
            const Eigen::VectorXd x = data.x.row(i).transpose();
            if (need_alpha) a(t) = alpha_f.value(x);
            if (need_gamma) g(t) = gamma_f.value(x);
            if (!shift && need_gamma) mg(t) = apply_m(fn, data, i, gamma_f);
            if (!shift && want_tmle) ma(t) = apply_m(fn, data, i, alpha_f);
        }

        // Fluctuation per evaluation fold; a fold where alpha vanishes gets
        // none (its correction is identically zero anyway).
        double eps = 0.0;
        if (want_tmle) {
            const double denom = a.squaredNorm();
            if (denom > 0.0) eps = a.dot(yv - g) / denom;
        }

        for (int t = 0; t < ne; ++t) {
            const int i = ev[t];
            if (want_dm && !shift) psi_dm(i) = mg(t);
            if (want_ipw) psi_ipw(i) = a(t) * yv(t);
            if (want_aipw) {
                if (shift)
                    corr_aipw(i) = a(t) * (yv(t) - g(t));
                else
                    psi_aipw(i) = mg(t) + a(t) * (yv(t) - g(t));
            }
            if (want_tmle) {
                const double res = a(t) * (yv(t) - g(t) - eps * a(t));
                if (shift)
                    corr_tmle(i) = res;
                else
                    psi_tmle(i) = mg(t) + eps * ma(t) + res;
            }
        }

        if (shift) {
            for (int j = 0; j < m; ++j) {
                const Eigen::VectorXd xt = data.target.row(j).transpose();
                const double gt = need_gamma ? gamma_f.value(xt) : 0.0;
                if (want_dm || want_aipw) acc_gamma(j) += gt;
                if (want_tmle) acc_tmle(j) += gt + eps * alpha_f.value(xt);
            }
        }
    }

    if (shift) {
        acc_gamma /= static_cast<double>(folds.k());
        acc_tmle /= static_cast<double>(folds.k());
    }

    std::vector<EstimateReport> out;
    out.reserve(methods.size());
    for (Method mth : methods) {
        switch (mth) {
            case Method::DM:
                if (shift)
                    out.push_back(wald_report(
                        acc_gamma.mean(),
                        sample_sd(acc_gamma) / std::sqrt(static_cast<double>(m)), n, mth, k));
                else
                    out.push_back(wald_report(
                        psi_dm.mean(), sample_sd(psi_dm) / std::sqrt(static_cast<double>(n)), n,
                        mth, k));
                break;
            case Method::IPW:
                out.push_back(wald_report(
                    psi_ipw.mean(), sample_sd(psi_ipw) / std::sqrt(static_cast<double>(n)), n,
                    mth, k));
                break;
            case Method::AIPW:
                if (shift)
                    out.push_back(wald_report(acc_gamma.mean() + corr_aipw.mean(),
                                              shift_se(acc_gamma, corr_aipw), n, mth, k));
                else
                    out.push_back(wald_report(
                        psi_aipw.mean(), sample_sd(psi_aipw) / std::sqrt(static_cast<double>(n)),
                        n, mth, k));
                break;
            case Method::TMLE:
                if (shift)
                    out.push_back(wald_report(acc_tmle.mean(), shift_se(acc_tmle, corr_tmle), n,
                                              mth, k));
                else
                    out.push_back(wald_report(
                        psi_tmle.mean(), sample_sd(psi_tmle) / std::sqrt(static_cast<double>(n)),
                        n, mth, k));
                break;
        }
    }
    return out;
}

EstimateReport crossfit_with(const Dataset& data, const NuisanceFactory& make,
                             const Functional& fn, int k, Method method, std::uint64_t seed) {
    return crossfit_suite(data, make, fn, k, {method}, seed).front();
}

namespace {

NuisanceFactory default_factory(const FitConfig& fit_config, const GammaConfig& gamma_config,
                                const Functional& fn) {
    NuisanceFactory make;
    make.alpha = [fit_config, fn](const Dataset& train) {
        return fit_riesz(fit_config, train, fn).representer();
    };
    make.gamma = [gamma_config](const Dataset& train) {
        BasisSpec basis = gamma_config.basis;
        if (basis.input_dim == 0) basis.input_dim = train.dim();
        auto model =
            std::make_shared<LinearModel>(fit_least_squares(basis, train, gamma_config.ridge));
        return to_evaluable(std::shared_ptr<const Model>(model));
    };
    return make;
}

}  // namespace

EstimateReport crossfit_estimate(const Dataset& data, const FitConfig& fit_config,
                                 const GammaConfig& gamma_config, const Functional& fn, int k,
                                 Method method) {
    return crossfit_with(data, default_factory(fit_config, gamma_config, fn), fn, k, method,
                         fit_config.seed);
}

std::vector<EstimateReport> suite_with(const Dataset& data, const NuisanceFactory& make,
                                       const Functional& fn, int folds,
                                       const std::vector<Method>& methods, std::uint64_t seed) {
    if (!make.alpha || !make.gamma) throw ValidationError("nuisance factory is incomplete");
    if (folds < 1) throw ValidationError("folds must be at least 1");
    if (methods.empty()) throw ValidationError("no methods requested");
    if (folds >= 2) return crossfit_suite(data, make, fn, folds, methods, seed);
    validate(fn, data);

    bool need_alpha = false, need_gamma = false;
    for (Method mth : methods) {
        need_alpha |= mth != Method::DM;
        need_gamma |= mth != Method::IPW;
    }
    EvaluableFn alpha_hat, gamma_hat;
    if (need_alpha) alpha_hat = make.alpha(data);
    if (need_gamma) gamma_hat = make.gamma(data);

    std::vector<EstimateReport> out;
    out.reserve(methods.size());
    for (Method mth : methods) {
        switch (mth) {
            case Method::DM: out.push_back(dm_estimate(data, gamma_hat, fn)); break;
            case Method::IPW: out.push_back(ipw_estimate(data, alpha_hat, fn)); break;
            case Method::AIPW: out.push_back(aipw_estimate(data, alpha_hat, gamma_hat, fn)); break;
            case Method::TMLE: out.push_back(tmle_estimate(data, alpha_hat, gamma_hat, fn)); break;
        }
    }
    return out;
}

std::vector<EstimateReport> estimate_suite(const Dataset& data, const FitConfig& fit_config,
                                           const GammaConfig& gamma_config, const Functional& fn,
                                           int folds, const std::vector<Method>& methods) {
    return suite_with(data, default_factory(fit_config, gamma_config, fn), fn, folds, methods,
                      fit_config.seed);
}

double neyman_error(const Dataset& data, const EvaluableFn& alpha_hat,
                    const EvaluableFn& gamma_hat, const EvaluableFn& oracle_gamma,
                    const Functional& fn) {
    require_evaluable(alpha_hat, "alpha_hat");
    require_evaluable(gamma_hat, "gamma_hat");
    require_evaluable(oracle_gamma, "oracle_gamma");
    validate(fn, data);
    double acc = 0.0;
    for (int i = 0; i < data.n(); ++i) {
        const Eigen::VectorXd x = data.x.row(i).transpose();
        acc += alpha_hat.value(x) * (data.y(i) - gamma_hat.value(x)) +
               apply_m(fn, data, i, gamma_hat) - apply_m(fn, data, i, oracle_gamma);
    }
    return acc / static_cast<double>(data.n());
}

}  // namespace rieszreg
