#include "rieszreg/losses.hpp"

#include <cmath>

namespace rieszreg {

namespace {

constexpr double kBoundaryEps = 1e-9;

double sgn(double a) { return a < 0.0 ? -1.0 : 1.0; }

[[noreturn]] void domain_error(const LossSpec& spec, double a) {
    throw FitDomainError(loss_name(spec.kind) + " loss: value " + std::to_string(a) +
                         " outside domain " + loss_domain(spec));
}

void require_domain(const LossSpec& spec, double a) {
    if (!in_domain(spec, a, kBoundaryEps)) domain_error(spec, a);
}

}  // namespace

void validate(const LossSpec& spec) {
    switch (spec.kind) {
        case LossKind::SQ:
            return;
        case LossKind::UKL:
        case LossKind::BKL:
            if (spec.c < 0.0) throw ValidationError("loss constant c must be >= 0");
            return;
        case LossKind::BP:
            if (spec.c < 0.0) throw ValidationError("loss constant c must be >= 0");
            if (spec.delta <= 0.0) throw ValidationError("BP loss requires delta > 0");
            return;
        case LossKind::PU:
            if (spec.c_tilde <= 0.0) throw ValidationError("PU loss requires c_tilde > 0");
            return;
    }
    throw ValidationError("unknown loss kind");
}

std::string loss_name(LossKind kind) {
    switch (kind) {
        case LossKind::SQ: return "sq";
        case LossKind::UKL: return "ukl";
        case LossKind::BKL: return "bkl";
        case LossKind::BP: return "bp";
        case LossKind::PU: return "pu";
    }
    return "?";
}

std::string loss_domain(const LossSpec& spec) {
    switch (spec.kind) {
        case LossKind::SQ: return "all reals";
        case LossKind::UKL:
        case LossKind::BKL:
        case LossKind::BP: return "|a| > " + std::to_string(spec.c);
        case LossKind::PU: return "0 < |a| < 1";
    }
    return "?";
}

bool in_domain(const LossSpec& spec, double a, double margin) {
    if (!std::isfinite(a)) return false;
    switch (spec.kind) {
        case LossKind::SQ: return true;
        case LossKind::UKL:
        case LossKind::BKL:
        case LossKind::BP: return std::abs(a) - spec.c >= margin;
        case LossKind::PU: return std::abs(a) >= margin && std::abs(a) <= 1.0 - margin;
    }
    return false;
}

double eval_g(const LossSpec& spec, double a) {
    require_domain(spec, a);
    const double m = std::abs(a);
    switch (spec.kind) {
        case LossKind::SQ: {
            const double t = a - spec.c;
            return t * t;
        }
        case LossKind::UKL:
            return (m - spec.c) * std::log(m - spec.c) - m;
        case LossKind::BKL:
            return (m - spec.c) * std::log(m - spec.c) - (m + spec.c) * std::log(m + spec.c);
        case LossKind::BP: {
            const double t = m - spec.c;
            return (std::pow(t, 1.0 + spec.delta) - t) / spec.delta - m;
        }
        case LossKind::PU:
            return spec.c_tilde * std::log(1.0 - m) +
                   spec.c_tilde * m * (std::log(m) - std::log(1.0 - m));
    }
    return 0.0;
}

double eval_dg(const LossSpec& spec, double a) {
    require_domain(spec, a);
    const double m = std::abs(a);
    const double s = sgn(a);
    switch (spec.kind) {
        case LossKind::SQ:
            return 2.0 * (a - spec.c);
        case LossKind::UKL:
            return s * std::log(m - spec.c);
        case LossKind::BKL:
            return s * std::log((m - spec.c) / (m + spec.c));
        case LossKind::BP:
            return (1.0 + 1.0 / spec.delta) * s * (std::pow(m - spec.c, spec.delta) - 1.0);
        case LossKind::PU:
            return spec.c_tilde * s * (std::log(m) - std::log(1.0 - m));
    }
    return 0.0;
}

double eval_d2g(const LossSpec& spec, double a) {
    require_domain(spec, a);
    const double m = std::abs(a);
    switch (spec.kind) {
        case LossKind::SQ:
            return 2.0;
        case LossKind::UKL:
            return 1.0 / (m - spec.c);
        case LossKind::BKL:
            return 1.0 / (m - spec.c) - 1.0 / (m + spec.c);
        case LossKind::BP:
            return (1.0 + spec.delta) * std::pow(m - spec.c, spec.delta - 1.0);
        case LossKind::PU:
            return spec.c_tilde / (m * (1.0 - m));
    }
    return 0.0;
}

double eval_d3g(const LossSpec& spec, double a) {
    require_domain(spec, a);
    const double m = std::abs(a);
    const double s = sgn(a);
    switch (spec.kind) {
        case LossKind::SQ:
            return 0.0;
        case LossKind::UKL: {
            const double t = m - spec.c;
            return -s / (t * t);
        }
        case LossKind::BKL: {
            const double t0 = m - spec.c;
            const double t1 = m + spec.c;
            return s * (1.0 / (t1 * t1) - 1.0 / (t0 * t0));
        }
        case LossKind::BP:
            return s * (1.0 + spec.delta) * (spec.delta - 1.0) *
                   std::pow(m - spec.c, spec.delta - 2.0);
        case LossKind::PU: {
            const double denom = m * (1.0 - m);
            return s * spec.c_tilde * (2.0 * m - 1.0) / (denom * denom);
        }
    }
    return 0.0;
}

double bregman_pointwise(const LossSpec& spec, double a0, double a) {
    return eval_g(spec, a0) - eval_g(spec, a) - eval_dg(spec, a) * (a0 - a);
}

double argmin_g(const LossSpec& spec) {
    switch (spec.kind) {
        case LossKind::SQ: return spec.c;
        case LossKind::UKL:
        case LossKind::BP: return spec.c + 1.0;
        case LossKind::PU: return 0.5;
        case LossKind::BKL:
            throw ValidationError("BKL generator has no interior minimizer");
    }
    throw ValidationError("unknown loss kind");
}

}  // namespace rieszreg
