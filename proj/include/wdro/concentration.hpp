#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "wdro/loss.hpp"
#include "wdro/regularizer.hpp"
#include "wdro/types.hpp"

namespace wdro {

enum class TpProvenance { bounded_support, bolley_villani, user_supplied };

const char* to_string(TpProvenance p);

struct TpConstant {
    double p = 1.0;
    double tau = 0.0;
    TpProvenance provenance = TpProvenance::user_supplied;
    bool floored = false;  // degenerate support clamped to the minimum tau
};

// tau = 2 diam(Z)^2, valid for any distribution on a bounded support.
TpConstant tau_bounded(const DomainSpec& domain, const NormSpec& norm);

// tau = (2/a)(1 + C) with C = log E[exp(a ||Z||^2)]. The tighter infimum over
// recentering is not computed.
TpConstant tau_bolley_villani(double a, double C);

TpConstant tau_user(double tau, double p);

// Phi(t) = E_{P}[ sup_{z~} { t (f(z~) - f(z)) - ||z~ - z||^p } ], exact by
// enumeration; nonnegative and convex in t.
double phi(const LossModel& f, const DiscreteDistribution& p_true, double t,
           const NormSpec& norm, const DomainSpec& domain);

struct RateFunctionResult {
    double epsilon = 0.0;
    bool infinite = false;
    double value = 0.0;  // meaningful only when !infinite
    std::optional<double> t_opt;
    std::vector<std::pair<double, double>> phi_samples;

    double value_or_inf() const { return infinite ? kInf : value; }
};

// I_p(eps)^p = sup_{t>0} { eps t - Phi(t) }, solved by bracketed golden
// section on the concave objective. The supremum being open-ended (slope
// still positive at the overflow cap) is reported as an explicit infinity.
RateFunctionResult rate_function(const LossModel& f, const DiscreteDistribution& p_true,
                                 double epsilon, const NormSpec& norm, const DomainSpec& domain);

struct Prop1Result {
    double lhs = 0.0;  // I_p evaluated at the dual regularizer
    double rhs = 0.0;  // rho
    bool boundary = false;
};

Prop1Result prop1_roundtrip(const LossModel& f, const DiscreteDistribution& p_true, double rho,
                            const NormSpec& norm, const DomainSpec& domain);

// exp(-n I_p(eps; -f)^2 / tau), clamped to [0, 1]; zero when the rate is
// infinite, one when n = 0.
double variation_tail_bound(long n, double epsilon, const LossModel& f,
                           const DiscreteDistribution& p_true, const TpConstant& tau,
                           const NormSpec& norm, const DomainSpec& domain);

// Swapped-tail variant using I_p(eps; f): bounds P{ E_{P_n}[f] - E[f] > eps }.
double variation_tail_bound_upper(long n, double epsilon, const LossModel& f,
                                 const DiscreteDistribution& p_true, const TpConstant& tau,
                                 const NormSpec& norm, const DomainSpec& domain);

}  // namespace wdro
