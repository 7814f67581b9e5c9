#include "rieszreg/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"
#include "rieszreg/errors.hpp"

namespace rieszreg {

namespace {

using json = nlohmann::json;

void check_keys(const json& block, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!block.is_object()) throw ValidationError(where + ": expected a JSON object");
    for (auto it = block.begin(); it != block.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known) throw ValidationError(where + ": unknown key '" + it.key() + "'");
    }
}

double get_num(const json& block, const std::string& where, const char* key, double fallback) {
    if (!block.contains(key)) return fallback;
    const json& v = block.at(key);
    if (!v.is_number()) throw ValidationError(where + "." + key + ": expected a number");
    return v.get<double>();
}

int get_int(const json& block, const std::string& where, const char* key, int fallback) {
    if (!block.contains(key)) return fallback;
    const json& v = block.at(key);
    if (!v.is_number_integer()) throw ValidationError(where + "." + key + ": expected an integer");
    return v.get<int>();
}

std::uint64_t get_u64(const json& block, const std::string& where, const char* key,
                      std::uint64_t fallback) {
    if (!block.contains(key)) return fallback;
    const json& v = block.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ValidationError(where + "." + key + ": expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

bool get_bool(const json& block, const std::string& where, const char* key, bool fallback) {
    if (!block.contains(key)) return fallback;
    const json& v = block.at(key);
    if (!v.is_boolean()) throw ValidationError(where + "." + key + ": expected a boolean");
    return v.get<bool>();
}

std::string get_str(const json& block, const std::string& where, const char* key,
                    std::string fallback) {
    if (!block.contains(key)) return fallback;
    const json& v = block.at(key);
    if (!v.is_string()) throw ValidationError(where + "." + key + ": expected a string");
    return v.get<std::string>();
}

LossKind parse_loss_kind(const std::string& name) {
    for (const LossKind k :
         {LossKind::SQ, LossKind::UKL, LossKind::BKL, LossKind::BP, LossKind::PU})
        if (name == loss_name(k)) return k;
    throw ValidationError("fit.loss.kind: unknown loss '" + name +
                          "' (expected sq, ukl, bkl, bp or pu)");
}

LinkKind parse_link_kind(const std::string& name) {
    for (const LinkKind k : {LinkKind::Raw, LinkKind::LinearSQ, LinkKind::LogBranch,
                             LinkKind::PowerBranch, LinkKind::Exponential,
                             LinkKind::AtePropensityLogit})
        if (name == link_name(k)) return k;
    throw ValidationError("fit.link.kind: unknown link '" + name +
                          "' (expected raw, linear_sq, log_branch, power_branch, exponential, "
                          "ate_propensity_logit or canonical)");
}

BranchRule parse_branch(const std::string& where, const std::string& name) {
    if (name == "always_positive") return BranchRule::AlwaysPositive;
    if (name == "treatment_sign") return BranchRule::TreatmentSign;
    throw ValidationError(where + ": unknown branch rule '" + name +
                          "' (expected always_positive or treatment_sign)");
}

BasisSpec parse_basis(const json& block, const std::string& where) {
    check_keys(block, where, {"kind", "degree", "on_z_only"});
    BasisSpec basis;
    const std::string kind = get_str(block, where, "kind", "raw");
    if (kind == "raw") {
        basis.kind = BasisKind::RawPlusIntercept;
    } else if (kind == "polynomial") {
        basis.kind = BasisKind::Polynomial;
        basis.degree = get_int(block, where, "degree", 2);
    } else {
        throw ValidationError(where + ".kind: unknown basis '" + kind +
                              "' (expected raw or polynomial)");
    }
    basis.on_z_only = get_bool(block, where, "on_z_only", false);
    return basis;
}

FitConfig parse_fit(const json& block) {
    check_keys(block, "fit",
               {"loss", "link", "model", "penalty", "optimizer", "nn_correction", "nn_clamp_c"});
    FitConfig fit;
    if (block.contains("loss")) {
        const json& loss = block.at("loss");
        check_keys(loss, "fit.loss", {"kind", "c", "delta", "c_tilde"});
        fit.loss.kind = parse_loss_kind(get_str(loss, "fit.loss", "kind", "sq"));
        fit.loss.c = get_num(loss, "fit.loss", "c", fit.loss.c);
        fit.loss.delta = get_num(loss, "fit.loss", "delta", fit.loss.delta);
        fit.loss.c_tilde = get_num(loss, "fit.loss", "c_tilde", fit.loss.c_tilde);
    }
    if (block.contains("link")) {
        const json& link = block.at("link");
        check_keys(link, "fit.link", {"kind", "c", "delta", "branch"});
        const std::string kind = get_str(link, "fit.link", "kind", "canonical");
        if (kind == "canonical") {
            if (link.contains("c") || link.contains("delta"))
                throw ValidationError(
                    "fit.link: the canonical link derives its constants from the loss");
            fit.link = canonical_pair(fit.loss);
        } else {
            fit.link.kind = parse_link_kind(kind);
            fit.link.c = get_num(link, "fit.link", "c", fit.link.c);
            fit.link.delta = get_num(link, "fit.link", "delta", fit.link.delta);
        }
        if (link.contains("branch"))
            fit.link.branch_rule =
                parse_branch("fit.link.branch", get_str(link, "fit.link", "branch", ""));
    } else {
        fit.link = canonical_pair(fit.loss);
    }
    if (block.contains("model")) {
        const json& model = block.at("model");
        check_keys(model, "fit.model",
                   {"kind", "basis", "kernel_centers", "kernel_bandwidth_scale", "kernel_on_z_only",
                    "mlp_hidden"});
        const std::string kind = get_str(model, "fit.model", "kind", "linear");
        if (kind == "linear")
            fit.model.kind = ModelKind::Linear;
        else if (kind == "kernel")
            fit.model.kind = ModelKind::Kernel;
        else if (kind == "mlp")
            fit.model.kind = ModelKind::Mlp;
        else
            throw ValidationError("fit.model.kind: unknown model '" + kind +
                                  "' (expected linear, kernel or mlp)");
        if (model.contains("basis")) fit.model.basis = parse_basis(model.at("basis"), "fit.model.basis");
        fit.model.kernel_centers =
            get_int(model, "fit.model", "kernel_centers", fit.model.kernel_centers);
        fit.model.kernel_bandwidth_scale =
            get_num(model, "fit.model", "kernel_bandwidth_scale", fit.model.kernel_bandwidth_scale);
        fit.model.kernel_on_z_only =
            get_bool(model, "fit.model", "kernel_on_z_only", fit.model.kernel_on_z_only);
        fit.model.mlp_hidden = get_int(model, "fit.model", "mlp_hidden", fit.model.mlp_hidden);
    }
    if (block.contains("penalty")) {
        const json& penalty = block.at("penalty");
        check_keys(penalty, "fit.penalty", {"order", "lambda"});
        const std::string order = get_str(penalty, "fit.penalty", "order", "l2");
        if (order == "l1")
            fit.penalty.order = PenaltyOrder::L1;
        else if (order == "l2")
            fit.penalty.order = PenaltyOrder::L2;
        else if (order == "rkhs")
            fit.penalty.order = PenaltyOrder::Rkhs;
        else
            throw ValidationError("fit.penalty.order: unknown order '" + order +
                                  "' (expected l1, l2 or rkhs)");
        fit.penalty.lambda = get_num(penalty, "fit.penalty", "lambda", fit.penalty.lambda);
    }
    if (block.contains("optimizer")) {
        const json& opt = block.at("optimizer");
        check_keys(opt, "fit.optimizer", {"max_iters", "grad_tol", "lbfgs_memory"});
        fit.optimizer.max_iters = get_int(opt, "fit.optimizer", "max_iters", fit.optimizer.max_iters);
        fit.optimizer.grad_tol = get_num(opt, "fit.optimizer", "grad_tol", fit.optimizer.grad_tol);
        fit.optimizer.lbfgs_memory =
            get_int(opt, "fit.optimizer", "lbfgs_memory", fit.optimizer.lbfgs_memory);
    }
    fit.nn_correction = get_bool(block, "fit", "nn_correction", false);
    fit.nn_clamp_c = get_num(block, "fit", "nn_clamp_c", 0.0);
    return fit;
}

}  // namespace

Dataset realize_data(const DataSource& source, std::uint64_t seed) {
    if (!source.train_csv.empty()) {
        Dataset data = load_csv(source.train_csv, source.layout);
        if (!source.target_csv.empty()) {
            data.target = load_target_csv(source.target_csv);
            data.validate();
        }
        return data;
    }
    if (source.dgp == "synthetic_ate") return gen_synthetic_ate(seed, source.n).data;
    if (source.dgp == "covariate_shift")
        return gen_covariate_shift(seed, source.n, source.n_target, source.dim, source.shift).data;
    throw ValidationError("data.dgp: unknown generator '" + source.dgp +
                          "' (expected synthetic_ate or covariate_shift)");
}

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& err) {
        throw ValidationError(std::string("config: ") + err.what());
    }
    check_keys(root, "config", {"seed", "out", "data", "functional", "fit", "estimate", "benchmark"});

    RunConfig rc;
    rc.seed = get_u64(root, "config", "seed", rc.seed);
    rc.out = get_str(root, "config", "out", rc.out);

    if (root.contains("data")) {
        const json& data = root.at("data");
        check_keys(data, "data",
                   {"train_csv", "target_csv", "layout", "dgp", "n", "n_target", "dim", "shift"});
        rc.data.train_csv = get_str(data, "data", "train_csv", "");
        rc.data.target_csv = get_str(data, "data", "target_csv", "");
        const std::string layout = get_str(data, "data", "layout", "treatment_first");
        if (layout == "generic")
            rc.data.layout = Layout::Generic;
        else if (layout == "treatment_first")
            rc.data.layout = Layout::TreatmentFirst;
        else
            throw ValidationError("data.layout: unknown layout '" + layout +
                                  "' (expected generic or treatment_first)");
        rc.data.dgp = get_str(data, "data", "dgp", rc.data.dgp);
        rc.data.n = get_int(data, "data", "n", rc.data.n);
        rc.data.n_target = get_int(data, "data", "n_target", rc.data.n_target);
        rc.data.dim = get_int(data, "data", "dim", rc.data.dim);
        rc.data.shift = get_num(data, "data", "shift", rc.data.shift);
        if (rc.data.n < 2) throw ValidationError("data.n: need at least 2 rows");
    }

    if (root.contains("functional")) {
        const json& fn = root.at("functional");
        check_keys(fn, "functional", {"kind", "coordinate"});
        const std::string kind = get_str(fn, "functional", "kind", "ate");
        if (kind == "ate")
            rc.functional.kind = FunctionalKind::ATE;
        else if (kind == "ame")
            rc.functional.kind = FunctionalKind::AME;
        else if (kind == "covariate_shift")
            rc.functional.kind = FunctionalKind::CovariateShift;
        else
            throw ValidationError("functional.kind: unknown functional '" + kind +
                                  "' (expected ate, ame or covariate_shift; distribution-shift "
                                  "pairs need the library API)");
        rc.functional.ame_coordinate = get_int(fn, "functional", "coordinate", 0);
    }

    if (root.contains("fit")) rc.fit = parse_fit(root.at("fit"));
    rc.fit.seed = rc.seed;

    if (root.contains("estimate")) {
        const json& est = root.at("estimate");
        check_keys(est, "estimate", {"methods", "folds", "gamma"});
        if (est.contains("methods")) {
            const json& methods = est.at("methods");
            if (!methods.is_array() || methods.empty())
                throw ValidationError("estimate.methods: expected a non-empty array");
            rc.methods.clear();
            for (const json& m : methods) {
                if (!m.is_string())
                    throw ValidationError("estimate.methods: entries must be strings");
                rc.methods.push_back(parse_method(m.get<std::string>()));
            }
        }
        rc.folds = get_int(est, "estimate", "folds", rc.folds);
        if (rc.folds < 1) throw ValidationError("estimate.folds: need folds >= 1");
        if (est.contains("gamma")) {
            const json& gamma = est.at("gamma");
            check_keys(gamma, "estimate.gamma", {"basis", "ridge"});
            if (gamma.contains("basis"))
                rc.gamma.basis = parse_basis(gamma.at("basis"), "estimate.gamma.basis");
            rc.gamma.ridge = get_num(gamma, "estimate.gamma", "ridge", rc.gamma.ridge);
            if (rc.gamma.ridge < 0) throw ValidationError("estimate.gamma.ridge: must be >= 0");
        }
    }

    if (root.contains("benchmark")) {
        const json& bench = root.at("benchmark");
        check_keys(bench, "benchmark",
                   {"replications", "n", "folds", "jobs", "lambda", "gamma_ridge", "variants",
                    "methods"});
        rc.benchmark.replications =
            get_int(bench, "benchmark", "replications", rc.benchmark.replications);
        rc.benchmark.n = get_int(bench, "benchmark", "n", rc.benchmark.n);
        rc.benchmark.folds = get_int(bench, "benchmark", "folds", rc.benchmark.folds);
        rc.benchmark.jobs = get_int(bench, "benchmark", "jobs", rc.benchmark.jobs);
        rc.benchmark.lambda = get_num(bench, "benchmark", "lambda", rc.benchmark.lambda);
        rc.benchmark.gamma_ridge =
            get_num(bench, "benchmark", "gamma_ridge", rc.benchmark.gamma_ridge);
        if (bench.contains("variants")) {
            const json& variants = bench.at("variants");
            if (!variants.is_array() || variants.empty())
                throw ValidationError("benchmark.variants: expected a non-empty array");
            rc.benchmark.variants.clear();
            for (const json& v : variants) {
                if (!v.is_string())
                    throw ValidationError("benchmark.variants: entries must be strings");
                rc.benchmark.variants.push_back(v.get<std::string>());
            }
        }
        if (bench.contains("methods")) {
            const json& methods = bench.at("methods");
            if (!methods.is_array() || methods.empty())
                throw ValidationError("benchmark.methods: expected a non-empty array");
            rc.benchmark.methods.clear();
            for (const json& m : methods) {
                if (!m.is_string())
                    throw ValidationError("benchmark.methods: entries must be strings");
                rc.benchmark.methods.push_back(parse_method(m.get<std::string>()));
            }
        }
    }
    rc.benchmark.seed = rc.seed;

    validate(rc.fit);
    return rc;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str());
}

std::string fit_artifact_json(const FitConfig& config, const FitResult& result) {
    nlohmann::ordered_json j;
    j["loss"]["kind"] = loss_name(config.loss.kind);
    j["loss"]["c"] = config.loss.c;
    j["loss"]["delta"] = config.loss.delta;
    j["loss"]["c_tilde"] = config.loss.c_tilde;
    j["link"]["kind"] = link_name(config.link.kind);
    j["link"]["c"] = config.link.c;
    j["link"]["delta"] = config.link.delta;
    j["link"]["branch"] = config.link.branch_rule == BranchRule::TreatmentSign
                              ? "treatment_sign"
                              : "always_positive";
    j["penalty"]["order"] = config.penalty.order == PenaltyOrder::L1
                                ? "l1"
                                : (config.penalty.order == PenaltyOrder::L2 ? "l2" : "rkhs");
    j["penalty"]["lambda"] = config.penalty.lambda;
    j["model"]["kind"] = config.model.kind == ModelKind::Linear
                             ? "linear"
                             : (config.model.kind == ModelKind::Kernel ? "kernel" : "mlp");
    j["model"]["n_params"] = result.model->n_params();
    const Eigen::VectorXd params = result.model->params();
    j["model"]["params"] = std::vector<double>(params.data(), params.data() + params.size());
    j["objective"] = result.objective;
    j["grad_norm"] = result.grad_norm;
    j["grad_tol"] = result.grad_tol;
    j["iters"] = result.iters;
    j["converged"] = result.converged;
    return j.dump(2) + "\n";
}

}  // namespace rieszreg
