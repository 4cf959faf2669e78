#pragma once

#include <cstdint>
#include <string>

#include "wdro/loss.hpp"
#include "wdro/types.hpp"

namespace wdro {

struct NewsvendorProblem {
    double h = 1.0;  // holding cost
    double b = 1.0;  // backorder cost
    double B = 1.0;  // theta ball radius (dual norm)
    DiscreteDistribution data;  // atoms are (x, y) rows
    GroundNorm ground = GroundNorm::euclidean;

    void validate() const {
        if (!(h > 0.0) || !(b > 0.0) || !(B > 0.0))
            throw ValidationError("newsvendor costs and radius must be positive");
        if (data.dim() < 2) throw ValidationError("newsvendor data rows need (x, y)");
    }
};

struct LinearPredictionProblem {
    PredictionMode mode = PredictionMode::classification;
    BaseLoss base = BaseLoss::hinge;
    double B = 1.0;
    DiscreteDistribution data;  // atoms are (x, y) rows

    void validate() const {
        if (!(B > 0.0)) throw ValidationError("theta ball radius must be positive");
        if (data.dim() < 2) throw ValidationError("prediction data rows need (x, y)");
        if (mode == PredictionMode::classification)
            for (const auto& z : data.atoms())
                if (std::abs(std::abs(z.back()) - 1.0) > 1e-12)
                    throw ValidationError("classification labels must be +-1");
    }
};

struct PortfolioProblem {
    double alpha = 1.0;  // risk aversion
    double B = 1.0;      // weight ball radius
    DiscreteDistribution data;  // x atoms (asset losses)

    void validate() const {
        if (!(alpha > 0.0)) throw ValidationError("risk aversion must be positive");
        const double d = static_cast<double>(data.dim());
        if (B * std::sqrt(d) < 1.0)
            throw ValidationError("weight ball misses the budget plane (need B >= 1/sqrt(d))");
    }
};

struct SolveResult {
    Vec theta;
    double u_hat = 0.0;  // portfolio only
    double robust_objective = 0.0;
    double nominal_objective = 0.0;
    double regularizer_used = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string warning;  // e.g. a degenerate data-dependent penalty
};

struct LipschitzBounds {
    double upper = 0.0;  // max(h, b) ||(theta, -1)||_*
    double lower = 0.0;  // min(h, b) ||(theta, -1)||_*
};

LipschitzBounds newsvendor_lip_norm(const Vec& theta, double h, double b, GroundNorm ground);

// Minimizes the empirical cost plus rho * max(h,b) ||(theta,-1)||_* over the
// theta ball by projected subgradient descent. An empty start means zeros.
SolveResult solve_newsvendor(const NewsvendorProblem& pb, double rho, double tol = 1e-9,
                             int max_iter = 10000, Vec start = {});

// Empirical composite loss plus rho * L_ell ||theta||_2.
SolveResult solve_linear_p1(const LinearPredictionProblem& pb, double rho, int max_iter = 10000,
                            Vec start = {});

// Empirical composite loss plus the data-dependent penalty
// rho ||theta||_2 (E_n[l'(theta.x, y)^2])^{1/2}; smooth but nonconvex, so
// multi-start with best-of reporting.
SolveResult solve_linear_p2(const LinearPredictionProblem& pb, double rho, int max_iter = 10000,
                            int restarts = 5, std::uint64_t seed = 0);

// Exact worst-case mean-variance objective over the 2-Wasserstein ball on the
// asset marginal: closed form through the quadratic dual.
double portfolio_robust_objective(const Vec& w, double u, double alpha,
                                  const DiscreteDistribution& x_atoms, double rho);

// Alternating minimization: exact center step (golden section in u), projected
// gradient step in w on the plane-ball feasible set.
SolveResult solve_portfolio(const PortfolioProblem& pb, double rho, int max_iter = 200);

// High-probability cap on the optimal center u: 2 B^2 (mu2^2 + tau^2 sqrt(t/n)
// + tau^2 sqrt(2d) + rho^2).
double bound_u_n(double B, double mu2, double tau, double t, long n, long d, double rho_n);

}  // namespace wdro
