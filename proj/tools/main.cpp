#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rieszreg/balancing.hpp"
#include "rieszreg/config.hpp"
#include "rieszreg/errors.hpp"
#include "rieszreg/verify.hpp"

namespace {

using namespace rieszreg;

// Exit codes: 0 ok, 1 verify checks failed, 2 invalid config, 3 data error,
// 4 loss-domain failure during fitting, 5 unexpected.
constexpr const char* kExitCodes =
    "exit codes: 0 ok, 1 verify checks failed, 2 invalid config, 3 data error, "
    "4 fit domain error, 5 unexpected";

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    return out;
}

int cmd_fit(const RunConfig& rc) {
    const Dataset data = realize_data(rc.data, rc.seed);
    FitResult fit = fit_riesz(rc.fit, data, rc.functional);
    std::cerr << "fit: " << (fit.converged ? "converged" : "stopped") << " after " << fit.iters
              << " iterations, objective " << fit.objective << ", grad norm " << fit.grad_norm
              << "\n";

    const BasisSpec* basis = nullptr;
    if (const auto* linear = dynamic_cast<const LinearModel*>(fit.model.get()))
        basis = &linear->basis();
    else if (const auto* kernel = dynamic_cast<const KernelModel*>(fit.model.get()))
        basis = &kernel->basis();

    std::ofstream balance_out = open_output(rc.out + ".balance.csv");
    if (basis) {
        const BalanceReport report = balance_residuals(fit, data, rc.functional, *basis);
        write_balance_csv(report, balance_out);
        write_balance_csv(report, std::cout);
        std::cerr << "balance: max violation " << report.max_violation << " at tolerance "
                  << report.tol << "\n";
    } else {
        balance_out << "j,residual,bound,satisfied\n";
        std::cout << "j,residual,bound,satisfied\n";
        std::cerr << "balance: skipped (diagnostics need a linear-in-basis model)\n";
    }

    std::ofstream artifact_out = open_output(rc.out + ".model.json");
    artifact_out << fit_artifact_json(rc.fit, fit);
    std::cerr << "wrote " << rc.out << ".model.json and " << rc.out << ".balance.csv\n";
    return 0;
}

int cmd_estimate(const RunConfig& rc) {
    const Dataset data = realize_data(rc.data, rc.seed);
    const std::vector<EstimateReport> reports =
        estimate_suite(data, rc.fit, rc.gamma, rc.functional, rc.folds, rc.methods);
    write_estimates_csv(reports, std::cout);
    std::ofstream out = open_output(rc.out + ".estimates.csv");
    write_estimates_csv(reports, out);
    std::cerr << "wrote " << rc.out << ".estimates.csv\n";
    return 0;
}

int cmd_benchmark(const RunConfig& rc) {
    validate(rc.benchmark);
    const BenchmarkReport report = run_benchmark(rc.benchmark);
    for (const std::string& line : report.failure_log) std::cerr << "failure: " << line << "\n";
    write_benchmark_csv(report, std::cout);
    std::ofstream out = open_output(rc.out + ".benchmark.csv");
    write_benchmark_csv(report, out);
    std::cerr << "theta0 " << report.theta0 << ", wrote " << rc.out << ".benchmark.csv\n";
    return 0;
}

int cmd_verify(const RunConfig& rc) {
    const std::vector<OracleCheck> checks = run_all_checks(rc.seed);
    write_checks_csv(checks, std::cout);
    std::ofstream out = open_output(rc.out + ".checks.csv");
    write_checks_csv(checks, out);
    int passed = 0;
    for (const OracleCheck& check : checks) passed += check.passed ? 1 : 0;
    std::cerr << "checks passed: " << passed << "/" << checks.size() << "\n";
    return all_passed(checks) ? 0 : 1;
}

template <typename Body>
int run_guarded(Body&& body) {
    try {
        return body();
    } catch (const ValidationError& err) {
        std::cerr << "error (config): " << err.what() << "\n";
        return 2;
    } catch (const DataError& err) {
        std::cerr << "error (data): " << err.what() << "\n";
        return 3;
    } catch (const FitDomainError& err) {
        std::cerr << "error (fit domain): " << err.what() << "\n";
        return 4;
    } catch (const std::exception& err) {
        std::cerr << "error (unexpected): " << err.what() << "\n";
        return 5;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("Riesz representer regression and debiased estimation\n") +
                 kExitCodes};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_stem;
    int jobs = 0;
    int reps = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file (see README for the schema)")
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master seed (overrides the file)");
        sub->add_option("--out", out_stem, "output path stem (overrides the file)");
    };

    CLI::App* fit_cmd = app.add_subcommand("fit", "fit a Riesz representer, write model + balance");
    add_common(fit_cmd);
    CLI::App* est_cmd = app.add_subcommand("estimate", "debiased estimates with Wald intervals");
    add_common(est_cmd);
    CLI::App* bench_cmd = app.add_subcommand("benchmark", "Monte Carlo benchmark over fit variants");
    add_common(bench_cmd);
    bench_cmd->add_option("--jobs", jobs, "worker threads (0 = hardware concurrency)");
    bench_cmd->add_option("--reps", reps, "number of replications");
    CLI::App* verify_cmd = app.add_subcommand("verify", "re-run the oracle checks");
    add_common(verify_cmd);
    verify_cmd->group("");  // hidden

    CLI11_PARSE(app, argc, argv);

    CLI::App* active = fit_cmd->parsed()     ? fit_cmd
                       : est_cmd->parsed()   ? est_cmd
                       : bench_cmd->parsed() ? bench_cmd
                                             : verify_cmd;
    return run_guarded([&]() -> int {
        RunConfig rc = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (active->count("--seed") > 0) {
            rc.seed = seed;
            rc.fit.seed = seed;
            rc.benchmark.seed = seed;
        }
        if (active->count("--out") > 0) rc.out = out_stem;
        if (bench_cmd->parsed()) {
            if (bench_cmd->count("--jobs") > 0) rc.benchmark.jobs = jobs;
            if (bench_cmd->count("--reps") > 0) rc.benchmark.replications = reps;
        }
        if (fit_cmd->parsed()) return cmd_fit(rc);
        if (est_cmd->parsed()) return cmd_estimate(rc);
        if (bench_cmd->parsed()) return cmd_benchmark(rc);
        return cmd_verify(rc);
    });
}
