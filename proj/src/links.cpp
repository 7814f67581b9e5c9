#include "rieszreg/links.hpp"

#include <cmath>

namespace rieszreg {

namespace {

[[noreturn]] void power_domain_error(double v, double k) {
    throw FitDomainError("power link: index " + std::to_string(v) +
                         " outside branch domain |v| < k = " + std::to_string(k));
}

double power_k(const LinkSpec& link) { return 1.0 + 1.0 / link.delta; }

}  // namespace

void validate(const LinkSpec& spec) {
    if (spec.kind == LinkKind::PowerBranch && spec.delta <= 0.0)
        throw ValidationError("power link requires delta > 0");
    if (spec.c < 0.0) throw ValidationError("link constant c must be >= 0");
}

std::string link_name(LinkKind kind) {
    switch (kind) {
        case LinkKind::Raw: return "raw";
        case LinkKind::LinearSQ: return "linear_sq";
        case LinkKind::LogBranch: return "log_branch";
        case LinkKind::PowerBranch: return "power_branch";
        case LinkKind::Exponential: return "exponential";
        case LinkKind::AtePropensityLogit: return "ate_propensity_logit";
    }
    return "?";
}

bool link_in_domain(const LinkSpec& link, int xi, double v) {
    if (!std::isfinite(v)) return false;
    if (link.kind != LinkKind::PowerBranch) return true;
    const double k = power_k(link);
    return (xi ? 1.0 + v / k : 1.0 - v / k) > 0.0;
}

double apply_link(const LinkSpec& link, int xi, double v) {
    switch (link.kind) {
        case LinkKind::Raw:
            return v;
        case LinkKind::LinearSQ:
            return 0.5 * v + link.c;
        case LinkKind::LogBranch:
            return xi ? link.c + std::exp(v) : -(link.c + std::exp(-v));
        case LinkKind::PowerBranch: {
            const double k = power_k(link);
            const double t = xi ? 1.0 + v / k : 1.0 - v / k;
            if (t <= 0.0) power_domain_error(v, k);
            const double b = link.c + std::pow(t, 1.0 / link.delta);
            return xi ? b : -b;
        }
        case LinkKind::Exponential:
            return std::exp(v);
        case LinkKind::AtePropensityLogit:
            return xi ? 1.0 + std::exp(-v) : -(1.0 + std::exp(v));
    }
    return v;
}

double link_deriv(const LinkSpec& link, int xi, double v) {
    switch (link.kind) {
        case LinkKind::Raw:
            return 1.0;
        case LinkKind::LinearSQ:
            return 0.5;
        case LinkKind::LogBranch:
            return xi ? std::exp(v) : std::exp(-v);
        case LinkKind::PowerBranch: {
            const double k = power_k(link);
            const double t = xi ? 1.0 + v / k : 1.0 - v / k;
            if (t <= 0.0) power_domain_error(v, k);
            return std::pow(t, 1.0 / link.delta - 1.0) / (link.delta * k);
        }
        case LinkKind::Exponential:
            return std::exp(v);
        case LinkKind::AtePropensityLogit:
            return xi ? -std::exp(-v) : -std::exp(v);
    }
    return 1.0;
}

double link_deriv2(const LinkSpec& link, int xi, double v) {
    switch (link.kind) {
        case LinkKind::Raw:
        case LinkKind::LinearSQ:
            return 0.0;
        case LinkKind::LogBranch:
            return xi ? std::exp(v) : -std::exp(-v);
        case LinkKind::PowerBranch: {
            const double k = power_k(link);
            const double t = xi ? 1.0 + v / k : 1.0 - v / k;
            if (t <= 0.0) power_domain_error(v, k);
            const double sign = xi ? 1.0 : -1.0;
            return sign * (1.0 / link.delta - 1.0) *
                   std::pow(t, 1.0 / link.delta - 2.0) / (link.delta * k * k);
        }
        case LinkKind::Exponential:
            return std::exp(v);
        case LinkKind::AtePropensityLogit:
            return xi ? std::exp(-v) : -std::exp(v);
    }
    return 0.0;
}

LinkSpec canonical_pair(const LossSpec& loss) {
    LinkSpec link;
    link.c = loss.c;
    switch (loss.kind) {
        case LossKind::SQ:
            link.kind = LinkKind::LinearSQ;
            return link;
        case LossKind::UKL:
            link.kind = LinkKind::LogBranch;
            return link;
        case LossKind::BP:
            link.kind = LinkKind::PowerBranch;
            link.delta = loss.delta;
            return link;
        case LossKind::BKL:
        case LossKind::PU:
            throw ValidationError(loss_name(loss.kind) + " loss has no canonical link");
    }
    throw ValidationError("unknown loss kind");
}

}  // namespace rieszreg
