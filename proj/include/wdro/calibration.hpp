#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wdro/concentration.hpp"
#include "wdro/types.hpp"

namespace wdro {

// Largest solution of B r^{1/q} + A = r (q > 1). Quadratic formula for q = 2,
// bisection otherwise; the result always satisfies r <= q/(q-1) A + B^p with
// p the Holder conjugate of q.
double fixed_point_subroot(double A, double B, double q);

enum class CalibRule { thm1, cor2, cor3, cor4, cor5, thm3, cor6 };

const char* to_string(CalibRule r);
CalibRule calib_rule_from_string(const std::string& s);

enum class Provenance { analytic, estimated, assumed };

const char* to_string(Provenance p);

struct CalibrationInputs {
    long n = 0;
    double t = 1.0;          // guarantee holds w.p. >= 1 - multiplier * e^{-t}
    TpConstant tau;
    double kappa1 = 1.0;     // Lipschitz cap over the family
    double kappa2 = 1.0;     // cap on || ||grad f||_* ||_{P,2}
    double hbar = 0.0;
    double sigma = 0.0;      // fourth-to-second gradient moment ratio
    double r_star = 0.0;     // sub-root fixed point
    double rad_G = 0.0;      // E[R_n(G)]
    double rad_F = 0.0;      // E[R_n(F)], informational
    double L_ratio = 0.0;    // pointwise-to-L2 gradient ratio cap
    double L_ell = 1.0;      // composition Lipschitz constant
    double e_kappa = 0.0;    // E[kappa]
    double e_kappa2 = 0.0;   // || kappa_2 ||_{P,2}
    double cover_log = 0.0;  // log covering number at scale 1/n
    std::map<std::string, Provenance> provenance;

    bool approximate() const {
        for (const auto& [k, v] : provenance)
            if (v != Provenance::analytic) return true;
        return false;
    }
};

struct CalibrationResult {
    CalibRule rule = CalibRule::thm1;
    double rho_n = 0.0;
    double eps_n = 0.0;
    double rho_tilde = 0.0;  // inflated radius (cor6); equals rho_n otherwise
    double eps_tilde = 0.0;
    // Count of e^{-t} terms in the failure budget. Covering rules can make
    // this astronomically large at desk scale; it is reported, not capped.
    double prob_multiplier = 1.0;
    bool applicable = true;           // cor6 inflation condition
    bool has_unquantified_term = false;  // an exp(-Cn) envelope term exists
    bool approximate = false;         // some constant was estimated/assumed
    std::map<std::string, double> terms;
};

double radius_thm1(long n, double t, double tau);

struct Cor3Result {
    double rho = 0.0;
    double residual_smooth = 0.0;    // hbar rho^2
    double residual_envelope = 0.0;  // (3 E[kappa] + 2 rho ||kappa_2||) / n
    long min_n = 0;
};

Cor3Result radius_cor3(long n, double t, double tau, double sigma, double hbar = 0.0,
                       double e_kappa = 0.0, double e_kappa2 = 0.0);

struct Cor4Result {
    double rho = 0.0;
    double eps = 0.0;
    double prob_multiplier = 1.0;
};

Cor4Result radius_cor4(long n, double t, double tau, double r_star, double kappa1 = 1.0);

// Composition wrapper: every radius term picks up the composition Lipschitz
// constant, and the peeling count uses L_ell * kappa1.
Cor4Result radius_cor5(long n, double t, double tau, double r_star, double L_ell,
                       double kappa1 = 1.0);

struct Thm3Cor6Result {
    double rho_n = 0.0;
    double eps_n = 0.0;
    double rho_tilde = 0.0;
    double eps_tilde = 0.0;
    double prob_multiplier = 1.0;        // thm3 budget
    double prob_multiplier_cor6 = 2.0;   // +1 for the empirical-norm step
    bool applicable = true;
};

Thm3Cor6Result radius_thm3_cor6(long n, double t, double tau, double r_star, double rad_G,
                                double hbar, double kappa2, double L_ratio);

// Monte Carlo Rademacher complexity. `class_sup` maps a +-1 sign vector of
// length n to sup_{f in F} (1/n) sum_i sigma_i f(z_i); draws are independent
// with per-draw seeds derived from (seed, draw).
struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

McEstimate rademacher_mc(const std::function<double(const std::vector<int>&)>& class_sup,
                         std::size_t n, int draws, std::uint64_t seed);

double rademacher_bound_linear(double B, double second_moment, long n);
// fourth_moment_sqrt = E[||z||^4]^{1/2}
double rademacher_bound_quadratic(double B, double fourth_moment_sqrt, long n);
// Normalized quadratic class over lifted points (x, 1):
// E[||z||^4] = mu4^2 + 2 mu2^2 + 1 with mu2, mu4 the x moments.
double rademacher_bound_G_quadratic(double mu4, double mu2, double zeta, long n);

// d log(B (1 + 2/eps)) for a ball of radius B in d dimensions.
double covering_log_ball(double B, long d, double eps);

// Rule dispatch used by the calibrate subcommand.
CalibrationResult calibrate(CalibRule rule, const CalibrationInputs& in);

}  // namespace wdro
