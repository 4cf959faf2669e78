#include "wdro/concentration.hpp"

#include <algorithm>
#include <cmath>

#include "wdro/optimize.hpp"

namespace wdro {

const char* to_string(TpProvenance p) {
    switch (p) {
        case TpProvenance::bounded_support: return "bounded_support";
        case TpProvenance::bolley_villani: return "bolley_villani";
        case TpProvenance::user_supplied: return "user_supplied";
    }
    return "?";
}

TpConstant tau_bounded(const DomainSpec& domain, const NormSpec& norm) {
    const double d = domain.diameter(norm);
    if (std::isinf(d)) throw ValidationError("bounded-support tau needs a finite diameter");
    TpConstant t;
    t.p = 1.0;
    t.provenance = TpProvenance::bounded_support;
    t.tau = 2.0 * d * d;
    if (t.tau <= 0.0) {
        t.tau = 1e-12;  // degenerate point support
        t.floored = true;
    }
    return t;
}

TpConstant tau_bolley_villani(double a, double C) {
    if (!(a > 0.0)) throw ValidationError("Bolley-Villani constant needs a > 0");
    if (C < 0.0) throw ValidationError("log moment C cannot be negative");
    TpConstant t;
    t.p = 1.0;
    t.provenance = TpProvenance::bolley_villani;
    t.tau = (2.0 / a) * (1.0 + C);
    return t;
}

TpConstant tau_user(double tau, double p) {
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
    TpConstant t;
    t.p = p;
    t.provenance = TpProvenance::user_supplied;
    t.tau = tau;
    return t;
}

double phi(const LossModel& f, const DiscreteDistribution& p_true, double t,
           const NormSpec& norm, const DomainSpec& domain) {
    if (!domain.is_finite_grid()) throw ValidationError("phi needs a finite grid domain");
    if (t < 0.0) throw ValidationError("phi is defined for t >= 0");
    double total = 0.0;
    for (std::size_t i = 0; i < p_true.size(); ++i) {
        const Vec& z = p_true.atoms()[i];
        const double fz = f.value(z);
        double best = -kInf;
        for (const auto& g : domain.grid) {
            const double d = ground_distance(g, z, norm);
            if (std::isinf(d)) continue;
            best = std::max(best, t * (f.value(g) - fz) - std::pow(d, norm.p));
        }
        total += p_true.weights()[i] * best;
    }
    return total;
}

RateFunctionResult rate_function(const LossModel& f, const DiscreteDistribution& p_true,
                                 double epsilon, const NormSpec& norm, const DomainSpec& domain) {
    if (!(epsilon >= 0.0)) throw ValidationError("rate function needs epsilon >= 0");
    RateFunctionResult out;
    out.epsilon = epsilon;

    auto h = [&](double t) { return epsilon * t - phi(f, p_true, t, norm, domain); };

    // Expand until past the peak of the concave objective.
    double t_hi = 1e-6;
    double h_hi = h(t_hi);
    const double t_cap = 1e9;
    while (true) {
        const double t2 = 2.0 * t_hi;
        const double h2 = h(t2);
        if (h2 <= h_hi) break;
        t_hi = t2;
        h_hi = h2;
        if (t_hi > t_cap) {
            out.infinite = true;
            break;
        }
    }

    // a thin log-spaced trace for reports
    const int n_samples = 16;
    const double trace_hi = std::min(2.0 * t_hi, t_cap);
    for (int k = 0; k < n_samples; ++k) {
        const double t = 1e-6 * std::pow(trace_hi / 1e-6, k / double(n_samples - 1));
        out.phi_samples.emplace_back(t, phi(f, p_true, t, norm, domain));
    }

    if (out.infinite) return out;

    auto neg = [&](double t) { return -h(t); };
    const ScalarMin m = golden_section_min(neg, 0.0, 2.0 * t_hi, 1e-13, 400);
    const double sup = std::max(-m.value, 0.0);
    out.value = std::pow(sup, 1.0 / norm.p);
    out.t_opt = m.x;
    return out;
}

Prop1Result prop1_roundtrip(const LossModel& f, const DiscreteDistribution& p_true, double rho,
                            const NormSpec& norm, const DomainSpec& domain) {
    const RobustEvalResult dual = robust_loss_dual(p_true, f, rho, norm, domain);
    const RateFunctionResult rate =
        rate_function(f, p_true, std::max(dual.regularizer, 0.0), norm, domain);
    Prop1Result out;
    out.lhs = rate.value_or_inf();
    out.rhs = rho;
    out.boundary = dual.boundary;
    return out;
}

namespace {

double tail_bound_impl(long n, double epsilon, const LossModel& g,
                       const DiscreteDistribution& p_true, const TpConstant& tau,
                       const NormSpec& norm, const DomainSpec& domain) {
    if (n < 0) throw ValidationError("sample size cannot be negative");
    if (n == 0) return 1.0;
    const RateFunctionResult rate = rate_function(g, p_true, epsilon, norm, domain);
    if (rate.infinite) return 0.0;
    const double v = std::exp(-static_cast<double>(n) * rate.value * rate.value / tau.tau);
    return std::clamp(v, 0.0, 1.0);
}

}  // namespace

double variation_tail_bound(long n, double epsilon, const LossModel& f,
                           const DiscreteDistribution& p_true, const TpConstant& tau,
                           const NormSpec& norm, const DomainSpec& domain) {
    return tail_bound_impl(n, epsilon, negate(f), p_true, tau, norm, domain);
}

double variation_tail_bound_upper(long n, double epsilon, const LossModel& f,
                                 const DiscreteDistribution& p_true, const TpConstant& tau,
                                 const NormSpec& norm, const DomainSpec& domain) {
    return tail_bound_impl(n, epsilon, f, p_true, tau, norm, domain);
}

}  // namespace wdro
