#include "rieszreg/benchmark.hpp"

#include <atomic>
#include <cmath>
#include <iomanip>
#include <memory>
#include <thread>
#include <utility>

#include "rieszreg/errors.hpp"
#include "rieszreg/rng.hpp"

namespace rieszreg {

namespace {

FitConfig base_fit_config(const BenchmarkConfig& config) {
    FitConfig fit;
    fit.penalty.order = PenaltyOrder::L2;
    fit.penalty.lambda = config.lambda;
    fit.model.kind = ModelKind::Linear;
    fit.model.basis = make_polynomial_basis(2, 0);
    return fit;
}

NuisanceFactory fitted_factory(FitConfig fit, const BenchmarkConfig& config) {
    NuisanceFactory make;
    Functional ate;  // kind defaults to ATE
    make.alpha = [fit, ate](const Dataset& train) {
        return fit_riesz(fit, train, ate).representer();
    };
    const double ridge = config.gamma_ridge;
    make.gamma = [ridge](const Dataset& train) {
        BasisSpec basis = make_polynomial_basis(2, train.dim());
        auto model = std::make_shared<LinearModel>(fit_least_squares(basis, train, ridge));
        return to_evaluable(std::shared_ptr<const Model>(model));
    };
    return make;
}

}  // namespace

NuisanceFactory benchmark_factory(const std::string& variant, const SyntheticDraw& draw,
                                  const BenchmarkConfig& config) {
    if (variant == "true") {
        NuisanceFactory make;
        const OracleNuisance oracle = draw.oracle;
        make.alpha = [oracle](const Dataset&) {
            EvaluableFn fn;
            fn.value = oracle.representer;
            return fn;
        };
        make.gamma = [oracle](const Dataset&) {
            EvaluableFn fn;
            fn.value = oracle.regression;
            return fn;
        };
        return make;
    }
    if (variant == "sq_linear") {
        FitConfig fit = base_fit_config(config);
        fit.loss.kind = LossKind::SQ;
        fit.link.kind = LinkKind::Raw;
        return fitted_factory(std::move(fit), config);
    }
    if (variant == "sq_logit") {
        FitConfig fit = base_fit_config(config);
        fit.loss.kind = LossKind::SQ;
        fit.link.kind = LinkKind::AtePropensityLogit;
        fit.link.branch_rule = BranchRule::TreatmentSign;
        fit.model.basis.on_z_only = true;
        return fitted_factory(std::move(fit), config);
    }
    if (variant == "ukl_z" || variant == "ukl_x") {
        FitConfig fit = base_fit_config(config);
        fit.loss.kind = LossKind::UKL;
        fit.loss.c = 1.0;
        fit.link = canonical_pair(fit.loss);
        fit.link.branch_rule = BranchRule::TreatmentSign;
        fit.model.basis.on_z_only = variant == "ukl_z";
        return fitted_factory(std::move(fit), config);
    }
    if (variant == "bkl_mle") {
        NuisanceFactory make = fitted_factory(base_fit_config(config), config);
        const double lambda = config.lambda;
        make.alpha = [lambda](const Dataset& train) {
            BasisSpec basis = make_polynomial_basis(2, train.dim(), /*on_z_only=*/true);
            auto model =
                std::make_shared<LinearModel>(fit_propensity_mle(basis, train, lambda));
            LinkSpec link;
            link.kind = LinkKind::AtePropensityLogit;
            link.branch_rule = BranchRule::TreatmentSign;
            EvaluableFn fn;
            fn.value = [model, link](const Eigen::VectorXd& x) {
                return apply_link(link, x(0) > 0.5 ? 1 : 0, model->value(x));
            };
            return fn;
        };
        return make;
    }
    throw ValidationError("unknown benchmark variant '" + variant +
                          "' (expected true, sq_linear, sq_logit, ukl_z, ukl_x or bkl_mle)");
}

void validate(const BenchmarkConfig& config) {
    if (config.replications < 1) throw ValidationError("replications must be at least 1");
    if (config.n < 20) throw ValidationError("benchmark sample size must be at least 20");
    if (config.folds < 1) throw ValidationError("folds must be at least 1");
    if (config.jobs < 0) throw ValidationError("jobs must be nonnegative");
    if (config.lambda < 0.0 || config.gamma_ridge < 0.0)
        throw ValidationError("penalties must be nonnegative");
    if (config.variants.empty()) throw ValidationError("no variants requested");
    if (config.methods.empty()) throw ValidationError("no methods requested");
    for (const std::string& v : config.variants)
        benchmark_factory(v, SyntheticDraw{}, config);  // name check only
}

namespace {

struct RepOutcome {
    // reports[v] is one EstimateReport per configured method; empty on failure
    std::vector<std::vector<EstimateReport>> reports;
    std::vector<std::string> errors;
};

RepOutcome run_replication(int rep, const BenchmarkConfig& config) {
    const std::uint64_t rep_seed = SplitMix64::split(config.seed, static_cast<std::uint64_t>(rep));
    const SyntheticDraw draw = gen_synthetic_ate(rep_seed, config.n);
    const Functional ate;
    const int nv = static_cast<int>(config.variants.size());
    RepOutcome out;
    out.reports.resize(nv);
    out.errors.resize(nv);
    for (int v = 0; v < nv; ++v) {
        try {
            const NuisanceFactory make = benchmark_factory(config.variants[v], draw, config);
            out.reports[v] =
                suite_with(draw.data, make, ate, config.folds, config.methods, rep_seed);
        } catch (const std::exception& e) {
            out.errors[v] = e.what();
        }
    }
    return out;
}

}  // namespace

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
    validate(config);
    const int reps = config.replications;
    std::vector<RepOutcome> outcomes(reps);

    int jobs = config.jobs == 0 ? static_cast<int>(std::thread::hardware_concurrency()) : config.jobs;
    if (jobs < 1) jobs = 1;
    if (jobs > reps) jobs = reps;

    if (jobs == 1) {
        for (int r = 0; r < reps; ++r) outcomes[r] = run_replication(r, config);
    } else {
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= reps) break;
                outcomes[r] = run_replication(r, config);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    BenchmarkReport report;
    report.theta0 = gen_synthetic_ate(SplitMix64::split(config.seed, 0), 20).oracle.theta;

    const int nv = static_cast<int>(config.variants.size());
    const int nm = static_cast<int>(config.methods.size());
    for (int v = 0; v < nv; ++v) {
        for (int r = 0; r < reps; ++r)
            if (!outcomes[r].errors[v].empty())
                report.failure_log.push_back("rep " + std::to_string(r) + " variant " +
                                             config.variants[v] + ": " + outcomes[r].errors[v]);
        for (int mi = 0; mi < nm; ++mi) {
            BenchmarkRow row;
            row.variant = config.variants[v];
            row.method = method_name(config.methods[mi]);
            double sq_err = 0.0, width = 0.0;
            int covered = 0, used = 0;
            for (int r = 0; r < reps; ++r) {
                if (!outcomes[r].errors[v].empty()) continue;
                const EstimateReport& est = outcomes[r].reports[v][mi];
                const double err = est.theta_hat - report.theta0;
                sq_err += err * err;
                width += est.ci_high - est.ci_low;
                covered += est.ci_low <= report.theta0 && report.theta0 <= est.ci_high;
                ++used;
            }
            row.replications = used;
            row.failures = reps - used;
            if (used > 0) {
                row.mse = sq_err / used;
                row.coverage = static_cast<double>(covered) / used;
                row.mean_ci_width = width / used;
            }
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

void write_benchmark_csv(const BenchmarkReport& report, std::ostream& os) {
    os << "variant,method,mse,coverage,mean_ci_width,replications,failures\n";
    os << std::setprecision(17);
    for (const BenchmarkRow& row : report.rows)
        os << row.variant << ',' << row.method << ',' << row.mse << ',' << row.coverage << ','
           << row.mean_ci_width << ',' << row.replications << ',' << row.failures << '\n';
}

}  // namespace rieszreg
