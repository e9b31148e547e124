#include "ulight/divergence.hpp"

#include <cmath>

#include "ulight/errors.hpp"

namespace ulight {

double conjugate(const DivergenceSpec& spec, double t) {
    switch (spec.kind) {
    case DivergenceKind::scaled_kl:
        return spec.tau * std::expm1(t / spec.tau);
    case DivergenceKind::scaled_chi2: {
        const double s = t / spec.tau;
        if (s < -2.0) return -spec.tau;
        return spec.tau * (0.25 * s * s + s);
    }
    case DivergenceKind::balanced:
        return t;
    }
    throw Error("conjugate: unknown divergence kind");
}

double conjugate_deriv(const DivergenceSpec& spec, double t) {
    switch (spec.kind) {
    case DivergenceKind::scaled_kl:
        return std::exp(t / spec.tau);
    case DivergenceKind::scaled_chi2: {
        const double s = t / spec.tau;
        if (s < -2.0) return 0.0;
        return 0.5 * s + 1.0;
    }
    case DivergenceKind::balanced:
        return 1.0;
    }
    throw Error("conjugate_deriv: unknown divergence kind");
}

DivergenceKind divergence_kind_from_string(const std::string& name) {
    if (name == "kl") return DivergenceKind::scaled_kl;
    if (name == "chi2") return DivergenceKind::scaled_chi2;
    if (name == "balanced") return DivergenceKind::balanced;
    throw IoError("unknown divergence kind '" + name + "' (expected kl, chi2 or balanced)");
}

std::string to_string(DivergenceKind kind) {
    switch (kind) {
    case DivergenceKind::scaled_kl: return "kl";
    case DivergenceKind::scaled_chi2: return "chi2";
    case DivergenceKind::balanced: return "balanced";
    }
    return "?";
}

} // namespace ulight
