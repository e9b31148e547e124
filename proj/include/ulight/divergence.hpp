#pragma once

#include <string>

namespace ulight {

/// Marginal-penalty family used on each side of the transport problem.
/// scaled_kl and scaled_chi2 are tau * f_base; balanced is the convex
/// indicator of {1}, which enforces the marginal exactly.
enum class DivergenceKind { scaled_kl, scaled_chi2, balanced };

struct DivergenceSpec {
    DivergenceKind kind = DivergenceKind::scaled_kl;
    double tau = 1.0; // ignored for balanced
};

/// Convex conjugate of the divergence generator. Conjugation commutes with
/// the tau scaling as (tau*f)^conj(t) = tau * f^conj(t/tau), giving
///   scaled_kl:   tau * (exp(t/tau) - 1)
///   scaled_chi2: -tau if t/tau < -2, else tau * ((t/tau)^2/4 + t/tau)
///   balanced:    t
/// Total on finite reals; the scaled_kl branch may return +inf when
/// exp(t/tau) overflows (extended-real convention, callers decide policy).
double conjugate(const DivergenceSpec& spec, double t);

/// Derivative of conjugate w.r.t. t. At the scaled_chi2 kink t/tau = -2 the
/// two one-sided derivatives agree and equal 0.
double conjugate_deriv(const DivergenceSpec& spec, double t);

DivergenceKind divergence_kind_from_string(const std::string& name);
std::string to_string(DivergenceKind kind);

} // namespace ulight
