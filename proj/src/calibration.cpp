#include "wdro/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "wdro/rng.hpp"

namespace wdro {

double fixed_point_subroot(double A, double B, double q) {
    if (A < 0.0 || B < 0.0) throw ValidationError("sub-root coefficients must be nonnegative");
    if (!(q > 1.0)) throw ValidationError("sub-root exponent needs q > 1");
    if (A == 0.0 && B == 0.0) return 0.0;  // degenerate; callers are warned by the zero
    if (B == 0.0) return A;
    if (q == 2.0) {
        const double root = 0.5 * (B + std::sqrt(B * B + 4.0 * A));
        return root * root;
    }
    const double p = q / (q - 1.0);  // Holder conjugate
    auto h = [&](double r) { return r - B * std::pow(r, 1.0 / q) - A; };
    // h(max(A, B^p)) <= 0 and the closed-form bound is an upper end.
    double lo = std::max(A, std::pow(B, p));
    double hi = q / (q - 1.0) * A + std::pow(B, p) + 1.0;
    while (h(hi) <= 0.0) hi *= 2.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-14 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) <= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

const char* to_string(CalibRule r) {
    switch (r) {
        case CalibRule::thm1: return "thm1";
        case CalibRule::cor2: return "cor2";
        case CalibRule::cor3: return "cor3";
        case CalibRule::cor4: return "cor4";
        case CalibRule::cor5: return "cor5";
        case CalibRule::thm3: return "thm3";
        case CalibRule::cor6: return "cor6";
    }
    return "?";
}

CalibRule calib_rule_from_string(const std::string& s) {
    if (s == "thm1") return CalibRule::thm1;
    if (s == "cor2") return CalibRule::cor2;
    if (s == "cor3") return CalibRule::cor3;
    if (s == "cor4") return CalibRule::cor4;
    if (s == "cor5") return CalibRule::cor5;
    if (s == "thm3") return CalibRule::thm3;
    if (s == "cor6") return CalibRule::cor6;
    throw ValidationError("unknown calibration rule '" + s + "'");
}

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::analytic: return "analytic";
        case Provenance::estimated: return "estimated";
        case Provenance::assumed: return "assumed";
    }
    return "?";
}

namespace {

void check_nt(long n, double t) {
    if (n < 1) throw ValidationError("sample size must be >= 1");
    if (!(t > 0.0)) throw ValidationError("confidence exponent t must be positive");
}

// Peeling depth; never below one layer.
double peeling_count(double scale, double tau, double t, long n) {
    const double arg = scale * std::sqrt(tau * t * static_cast<double>(n));
    if (arg <= 1.0) return 1.0;
    return std::max(1.0, std::ceil(std::log2(arg)));
}

}  // namespace

double radius_thm1(long n, double t, double tau) {
    if (n < 1) throw ValidationError("sample size must be >= 1");
    if (t < 0.0) throw ValidationError("confidence exponent t must be nonnegative");
    if (tau < 0.0) throw ValidationError("tau must be nonnegative");
    return std::sqrt(tau * t / static_cast<double>(n));
}

Cor3Result radius_cor3(long n, double t, double tau, double sigma, double hbar, double e_kappa,
                       double e_kappa2) {
    check_nt(n, t);
    Cor3Result out;
    out.min_n = static_cast<long>(std::ceil(8.0 * sigma * sigma * t));
    if (n < out.min_n)
        throw MinSampleSize(out.min_n, "need n >= 8 sigma^2 t = " + std::to_string(out.min_n));
    const double nd = static_cast<double>(n);
    out.rho = std::sqrt(tau * t / nd) * (1.0 + sigma * std::sqrt(2.0 * t / nd));
    out.residual_smooth = hbar * out.rho * out.rho;
    out.residual_envelope = (3.0 * e_kappa + 2.0 * out.rho * e_kappa2) / nd;
    return out;
}

Cor4Result radius_cor4(long n, double t, double tau, double r_star, double kappa1) {
    check_nt(n, t);
    if (!(r_star > 0.0)) throw ValidationError("r_star must be positive");
    const double nd = static_cast<double>(n);
    const double sr = std::sqrt(r_star);
    Cor4Result out;
    out.rho = 2.0 * std::sqrt(tau * t / nd) + 4.0 * sr + 2.0 / (nd * sr);
    out.eps = 4.0 * r_star + 2.0 / nd;
    out.prob_multiplier = peeling_count(kappa1, tau, t, n);
    return out;
}

Cor4Result radius_cor5(long n, double t, double tau, double r_star, double L_ell,
                       double kappa1) {
    check_nt(n, t);
    if (!(r_star > 0.0)) throw ValidationError("r_star must be positive");
    if (L_ell < 0.0) throw ValidationError("composition constant must be nonnegative");
    const double nd = static_cast<double>(n);
    const double sr = std::sqrt(r_star);
    Cor4Result out;
    out.rho = 2.0 * (std::sqrt(tau * t / nd) * L_ell + 2.0 * L_ell * L_ell * sr +
                     L_ell / (nd * sr));
    out.eps = 4.0 * L_ell * L_ell * r_star + 2.0 * L_ell / nd;
    out.prob_multiplier = peeling_count(L_ell * kappa1, tau, t, n);
    return out;
}

Thm3Cor6Result radius_thm3_cor6(long n, double t, double tau, double r_star, double rad_G,
                                double hbar, double kappa2, double L_ratio) {
    check_nt(n, t);
    if (!(r_star > 0.0)) throw ValidationError("r_star must be positive");
    const double nd = static_cast<double>(n);
    const double sr = std::sqrt(r_star);
    Thm3Cor6Result out;
    out.rho_n = 2.0 * std::sqrt(tau * t / nd) * (1.0 + 2.0 * rad_G) + 4.0 * sr +
                (2.0 + hbar * tau * t + 2.0 * rad_G) / (nd * sr);
    out.eps_n = 4.0 * r_star + 2.0 / nd + (hbar * tau * t + 2.0 * rad_G) / nd;
    const double slack = 2.0 * rad_G + L_ratio * L_ratio * std::sqrt(t / (2.0 * nd));
    out.applicable = slack < 0.5;
    out.rho_tilde = out.rho_n * (1.0 + slack);
    out.eps_tilde = out.eps_n + hbar * out.rho_tilde * out.rho_tilde;
    out.prob_multiplier = peeling_count(kappa2, tau, t, n);
    out.prob_multiplier_cor6 = out.prob_multiplier + 1.0;
    return out;
}

McEstimate rademacher_mc(const std::function<double(const std::vector<int>&)>& class_sup,
                         std::size_t n, int draws, std::uint64_t seed) {
    if (draws < 100) throw ValidationError("rademacher_mc needs at least 100 draws");
    if (n == 0) throw ValidationError("rademacher_mc needs a nonempty sample");
    double sum = 0.0, sumsq = 0.0;
    std::vector<int> sigma(n);
    for (int d = 0; d < draws; ++d) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(d)));
        for (std::size_t i = 0; i < n; ++i) sigma[i] = rng.rademacher();
        const double v = class_sup(sigma);
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / draws;
    const double var = std::max(0.0, (sumsq - draws * mean * mean) / (draws - 1));
    return McEstimate{mean, std::sqrt(var / draws)};
}

double rademacher_bound_linear(double B, double second_moment, long n) {
    if (B < 0.0 || second_moment < 0.0 || n < 1)
        throw ValidationError("rademacher_bound_linear needs nonnegative inputs and n >= 1");
    return B * std::sqrt(second_moment / static_cast<double>(n));
}

double rademacher_bound_quadratic(double B, double fourth_moment_sqrt, long n) {
    if (B < 0.0 || fourth_moment_sqrt < 0.0 || n < 1)
        throw ValidationError("rademacher_bound_quadratic needs nonnegative inputs and n >= 1");
    return B * B * fourth_moment_sqrt / std::sqrt(static_cast<double>(n));
}

double rademacher_bound_G_quadratic(double mu4, double mu2, double zeta, long n) {
    if (!(zeta > 0.0)) throw ValidationError("zeta must be positive");
    if (mu4 < 0.0 || mu2 < 0.0 || n < 1)
        throw ValidationError("rademacher_bound_G_quadratic needs nonnegative moments, n >= 1");
    const double lifted_fourth = mu4 * mu4 + 2.0 * mu2 * mu2 + 1.0;
    return std::sqrt(lifted_fourth / static_cast<double>(n)) / std::min(1.0, zeta);
}

double covering_log_ball(double B, long d, double eps) {
    if (!(B > 0.0) || !(eps > 0.0) || d < 1)
        throw ValidationError("covering_log_ball needs B, eps > 0 and d >= 1");
    return static_cast<double>(d) * std::log(B * (1.0 + 2.0 / eps));
}

CalibrationResult calibrate(CalibRule rule, const CalibrationInputs& in) {
    CalibrationResult out;
    out.rule = rule;
    out.approximate = in.approximate();
    const double nd = static_cast<double>(in.n);
    switch (rule) {
        case CalibRule::thm1: {
            out.rho_n = radius_thm1(in.n, in.t, in.tau.tau);
            out.prob_multiplier = 1.0;
            out.terms["sqrt_tau_t_over_n"] = out.rho_n;
            break;
        }
        case CalibRule::cor2: {
            check_nt(in.n, in.t);
            out.rho_n = radius_thm1(in.n, in.t, in.tau.tau);
            out.eps_n = 3.0 * in.e_kappa / nd;
            out.prob_multiplier = std::exp(in.cover_log);
            out.has_unquantified_term = true;  // the exp(-Cn) envelope event
            out.terms["covering_multiplier"] = out.prob_multiplier;
            out.terms["envelope_residual"] = out.eps_n;
            break;
        }
        case CalibRule::cor3: {
            const Cor3Result r = radius_cor3(in.n, in.t, in.tau.tau, in.sigma, in.hbar,
                                             in.e_kappa, in.e_kappa2);
            out.rho_n = r.rho;
            out.eps_n = r.residual_smooth + r.residual_envelope;
            out.prob_multiplier = 2.0 * std::exp(in.cover_log);
            out.has_unquantified_term = true;
            out.terms["residual_smooth"] = r.residual_smooth;
            out.terms["residual_envelope"] = r.residual_envelope;
            out.terms["min_n"] = static_cast<double>(r.min_n);
            break;
        }
        case CalibRule::cor4: {
            const Cor4Result r = radius_cor4(in.n, in.t, in.tau.tau, in.r_star, in.kappa1);
            out.rho_n = r.rho;
            out.eps_n = r.eps;
            out.prob_multiplier = r.prob_multiplier;
            out.terms["r_star"] = in.r_star;
            break;
        }
        case CalibRule::cor5: {
            const Cor4Result r =
                radius_cor5(in.n, in.t, in.tau.tau, in.r_star, in.L_ell, in.kappa1);
            out.rho_n = r.rho;
            out.eps_n = r.eps;
            out.prob_multiplier = r.prob_multiplier;
            out.terms["L_ell"] = in.L_ell;
            break;
        }
        case CalibRule::thm3:
        case CalibRule::cor6: {
            const Thm3Cor6Result r = radius_thm3_cor6(in.n, in.t, in.tau.tau, in.r_star,
                                                      in.rad_G, in.hbar, in.kappa2, in.L_ratio);
            out.rho_n = r.rho_n;
            out.eps_n = r.eps_n;
            out.rho_tilde = r.rho_tilde;
            out.eps_tilde = r.eps_tilde;
            out.applicable = rule == CalibRule::thm3 || r.applicable;
            out.prob_multiplier =
                rule == CalibRule::thm3 ? r.prob_multiplier : r.prob_multiplier_cor6;
            out.terms["rad_G"] = in.rad_G;
            out.terms["r_star"] = in.r_star;
            break;
        }
    }
    if (out.rho_tilde == 0.0) out.rho_tilde = out.rho_n;
    if (out.eps_tilde == 0.0) out.eps_tilde = out.eps_n;
    return out;
}

}  // namespace wdro
