#pragma once

#include <string>

#include "rieszreg/errors.hpp"
#include "rieszreg/losses.hpp"

namespace rieszreg {

// Link functions mapping a base-model value v = f(x) and a branch selector
// xi in {0,1} to the representer value a = zeta^{-1}(xi, v):
//   Raw                v
//   LinearSQ           v/2 + c
//   LogBranch          xi (c + e^v) - (1 - xi)(c + e^{-v})
//   PowerBranch        xi (c + (1 + v/k)^{1/delta}) - (1 - xi)(c + (1 - v/k)^{1/delta}),
//                      k = 1 + 1/delta
//   Exponential        e^v
//   AtePropensityLogit xi (1 + e^{-v}) - (1 - xi)(1 + e^v)
// LinearSQ/LogBranch/PowerBranch are the canonical inverses of dg for
// SQ/UKL/BP: composing dg after the link returns exactly v on both branches,
// the linearity premise behind the balance bound. (The displayed SQ inverse
// (v + C)/2 misses that identity for C != 0; v/2 + c is the affine form
// that satisfies it.) AtePropensityLogit is the plug-in propensity model
// D/e(Z) - (1-D)/(1-e(Z)) with e = sigmoid(v); it composes to -v under UKL.
enum class LinkKind { Raw, LinearSQ, LogBranch, PowerBranch, Exponential, AtePropensityLogit };

// How the branch selector is read off a regressor vector: TreatmentSign sets
// xi = D (TreatmentFirst layouts, C = 1 for ATE); AlwaysPositive sets xi = 1
// (density ratios, C = 0).
enum class BranchRule { AlwaysPositive, TreatmentSign };

struct LinkSpec {
    LinkKind kind = LinkKind::Raw;
    double c = 0.0;
    double delta = 1.0;  // PowerBranch
    BranchRule branch_rule = BranchRule::AlwaysPositive;
};

void validate(const LinkSpec& spec);
std::string link_name(LinkKind kind);

// True when v is inside the branch's domain (PowerBranch needs 1 +- v/k > 0).
bool link_in_domain(const LinkSpec& link, int xi, double v);

double apply_link(const LinkSpec& link, int xi, double v);
// d/dv of apply_link; positive on both branches for every kind except
// AtePropensityLogit, which is decreasing.
double link_deriv(const LinkSpec& link, int xi, double v);
// d^2/dv^2 of apply_link (chain rule for derivative-type functionals).
double link_deriv2(const LinkSpec& link, int xi, double v);

// Canonical partner of a loss: SQ -> LinearSQ(c), UKL -> LogBranch(c),
// BP -> PowerBranch(c, delta). BKL/PU have none and throw ValidationError.
// The returned spec keeps branch_rule AlwaysPositive; callers pick the rule.
LinkSpec canonical_pair(const LossSpec& loss);

}  // namespace rieszreg
