#pragma once

#include "wdro/loss.hpp"
#include "wdro/types.hpp"

namespace wdro {

enum class EvalMethod { dual_exact, lipschitz_surrogate, gradient_surrogate, oracle_grid };

const char* to_string(EvalMethod m);

struct RobustEvalResult {
    double robust_loss = 0.0;
    double regularizer = 0.0;   // robust_loss - nominal expectation
    double lambda_opt = 0.0;
    double lambda_floor = 0.0;
    bool boundary = false;      // lambda_opt sits at lambda_floor
    bool exact = true;          // false when the value is only an upper bound
    EvalMethod method = EvalMethod::dual_exact;
};

// Per-sample inner maximization sup_{z~ in Z} { f(z~) - lambda ||z~ - z||^p }.
// Exact on finite grids by enumeration and in closed form for the supported
// families on unbounded domains; +inf when the sup diverges.
double inner_sup(const LossModel& f, const Vec& z, double lambda, const NormSpec& norm,
                 const DomainSpec& domain);

// Worst-case expectation over the p-Wasserstein ball via the one-dimensional
// convex dual, minimized by bracketing + golden section over the multiplier.
RobustEvalResult robust_loss_dual(const DiscreteDistribution& q, const LossModel& f, double rho,
                                  const NormSpec& norm, const DomainSpec& domain);

// rho * ||f||_Lip bound; exact when the Lipschitz norm is attained at infinity.
RobustEvalResult lipschitz_surrogate(const DiscreteDistribution& q, const LossModel& f,
                                     double rho, GroundNorm ground = GroundNorm::euclidean);

struct GradientInterval {
    double center = 0.0;     // rho * E_Q[ ||grad f||_*^2 ]^{1/2}
    double halfwidth = 0.0;  // hbar * rho^2
};

GradientInterval gradient_surrogate(const DiscreteDistribution& q, const LossModel& f,
                                    double rho, GroundNorm ground = GroundNorm::euclidean);

// Brute-force primal maximum over worst-case distributions supported on the
// grid: per-atom transport value functions (tiny two-constraint LPs) combined
// by greedy concave budget allocation. Independent of the dual code path.
// Nominal atoms must lie on the grid. `resolution` caps the merged segment
// count as a safety rail.
double robust_loss_oracle(const DiscreteDistribution& q, const LossModel& f, double rho,
                          const NormSpec& norm, const DomainSpec& domain, int resolution = 200);

}  // namespace wdro
