#include "rieszreg/functionals.hpp"

#include <cmath>

namespace rieszreg {

std::string functional_name(FunctionalKind kind) {
    switch (kind) {
        case FunctionalKind::ATE: return "ate";
        case FunctionalKind::AME: return "ame";
        case FunctionalKind::APE: return "ape";
        case FunctionalKind::CovariateShift: return "covariate_shift";
    }
    return "?";
}

void validate(const Functional& fn, const Dataset& data) {
    switch (fn.kind) {
        case FunctionalKind::ATE:
            if (data.layout != Layout::TreatmentFirst)
                throw ValidationError("ATE functional requires the TreatmentFirst layout");
            return;
        case FunctionalKind::AME:
            if (fn.ame_coordinate < 0 || fn.ame_coordinate >= data.dim())
                throw ValidationError("AME coordinate out of range");
            return;
        case FunctionalKind::APE:
            if (fn.ape_plus.rows() == 0 || fn.ape_minus.rows() == 0)
                throw ValidationError("APE requires nonempty P_1 and P_{-1} samples");
            if (fn.ape_plus.cols() != data.dim() || fn.ape_minus.cols() != data.dim())
                throw ValidationError("APE sample dimension does not match the data");
            return;
        case FunctionalKind::CovariateShift:
            if (!data.has_target())
                throw ValidationError("covariate-shift functional requires a target sample");
            return;
    }
    throw ValidationError("unknown functional kind");
}

double EvaluableFn::partial_or_fd(const Eigen::VectorXd& x, int j) const {
    if (partial) return partial(x, j);
    const double h = 1e-5 * (1.0 + std::abs(x(j)));
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    return (value(xp) - value(xm)) / (2.0 * h);
}

double apply_m(const Functional& fn, const Dataset& data, int i, const EvaluableFn& h) {
    switch (fn.kind) {
        case FunctionalKind::ATE:
            return h.value(data.with_treatment(i, 1.0)) - h.value(data.with_treatment(i, 0.0));
        case FunctionalKind::AME:
            return h.partial_or_fd(data.x.row(i), fn.ame_coordinate);
        case FunctionalKind::APE: {
            double plus = 0.0, minus = 0.0;
            for (int r = 0; r < fn.ape_plus.rows(); ++r) plus += h.value(fn.ape_plus.row(r));
            for (int r = 0; r < fn.ape_minus.rows(); ++r) minus += h.value(fn.ape_minus.row(r));
            return plus / fn.ape_plus.rows() - minus / fn.ape_minus.rows();
        }
        case FunctionalKind::CovariateShift:
            return h.value(data.target.row(i % data.target_n()));
    }
    throw ValidationError("unknown functional kind");
}

double riesz_identity_check(const Functional& fn, const OracleNuisance& oracle,
                            const EvaluableFn& h, const Dataset& data) {
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < data.n(); ++i) {
        lhs += apply_m(fn, data, i, h);
        rhs += oracle.representer(data.x.row(i)) * h.value(data.x.row(i));
    }
    return std::abs(lhs - rhs) / data.n();
}

MPlan build_m_plan(const Functional& fn, const Dataset& data) {
    validate(fn, data);
    MPlan plan;
    const int n = data.n();
    switch (fn.kind) {
        case FunctionalKind::ATE: {
            plan.points.resize(2 * n, data.dim());
            plan.weights.resize(2 * n);
            for (int i = 0; i < n; ++i) {
                plan.points.row(2 * i) = data.with_treatment(i, 1.0);
                plan.points.row(2 * i + 1) = data.with_treatment(i, 0.0);
                plan.weights(2 * i) = 1.0 / n;
                plan.weights(2 * i + 1) = -1.0 / n;
            }
            return plan;
        }
        case FunctionalKind::AME: {
            plan.points = data.x;
            plan.weights = Eigen::VectorXd::Constant(n, 1.0 / n);
            plan.derivative = true;
            plan.deriv_coord = fn.ame_coordinate;
            return plan;
        }
        case FunctionalKind::APE: {
            const int np = static_cast<int>(fn.ape_plus.rows());
            const int nm = static_cast<int>(fn.ape_minus.rows());
            plan.points.resize(np + nm, data.dim());
            plan.points.topRows(np) = fn.ape_plus;
            plan.points.bottomRows(nm) = fn.ape_minus;
            plan.weights.resize(np + nm);
            plan.weights.head(np).setConstant(1.0 / np);
            plan.weights.tail(nm).setConstant(-1.0 / nm);
            return plan;
        }
        case FunctionalKind::CovariateShift: {
            // Pairing i -> i mod m: target row j enters ceil- or floor-many times.
            const int m = data.target_n();
            plan.points = data.target;
            plan.weights.resize(m);
            for (int j = 0; j < m; ++j) {
                const int count = (n - j + m - 1) / m;  // #{i < n : i mod m == j}
                plan.weights(j) = static_cast<double>(count) / n;
            }
            return plan;
        }
    }
    throw ValidationError("unknown functional kind");
}

}  // namespace rieszreg
