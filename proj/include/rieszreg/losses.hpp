#pragma once

#include <string>

#include "rieszreg/errors.hpp"

namespace rieszreg {

// Bregman generator family. Domains over the representer value a:
//   SQ   g(a) = (a - C)^2                                         a in R
//   UKL  g(a) = (|a| - C) log(|a| - C) - |a|                      |a| > C
//   BKL  g(a) = (|a| - C) log(|a| - C) - (|a| + C) log(|a| + C)   |a| > C
//   BP   g(a) = ((|a| - C)^{1+delta} - (|a| - C)) / delta - |a|   |a| > C
//   PU   g(a) = Ct log(1 - |a|) + Ct |a| (log|a| - log(1 - |a|))  0 < |a| < 1
// BP uses the form whose derivative is (1 + 1/delta) sign(a) ((|a|-C)^delta - 1),
// the one every downstream display builds on.
enum class LossKind { SQ, UKL, BKL, BP, PU };

struct LossSpec {
    LossKind kind = LossKind::SQ;
    double c = 0.0;        // the constant C (SQ: center; UKL/BKL/BP: lower bound on |a|)
    double delta = 1.0;    // BP exponent
    double c_tilde = 1.0;  // PU scale
};

// Throws ValidationError on parameter violations (c < 0 for branch losses,
// delta <= 0, c_tilde <= 0).
void validate(const LossSpec& spec);

std::string loss_name(LossKind kind);

// Human-readable domain description, e.g. "|a| > 1".
std::string loss_domain(const LossSpec& spec);

// True when a is at least `margin` inside the domain. Evaluations closer than
// 1e-9 to a branch boundary are treated as outside (log/power singularities).
bool in_domain(const LossSpec& spec, double a, double margin = 1e-9);

double eval_g(const LossSpec& spec, double a);
double eval_dg(const LossSpec& spec, double a);
double eval_d2g(const LossSpec& spec, double a);
double eval_d3g(const LossSpec& spec, double a);

// g(a0) - g(a) - dg(a) (a0 - a); nonnegative, zero iff a0 = a on a branch.
double bregman_pointwise(const LossSpec& spec, double a0, double a);

// Pointwise minimizer of g on the positive branch (SQ: C; UKL/BP: C + 1;
// PU: 1/2). BKL has no interior minimizer and throws.
double argmin_g(const LossSpec& spec);

}  // namespace rieszreg
