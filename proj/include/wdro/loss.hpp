#pragma once

#include <functional>
#include <optional>

#include "wdro/types.hpp"

namespace wdro {

enum class LossFamily {
    linear,              // c.z + offset
    newsvendor,          // h(theta.x - y)_+ + b(y - theta.x)_+ on z = (x, y)
    linear_composite,    // l(theta.x, y) with a 1-D base loss, x-only transport
    quadratic_portfolio, // (theta.z)^2 + offset, optionally with frozen coords
    custom_discrete,     // arbitrary value function, dual only on finite grids
};

enum class BaseLoss { hinge, logistic, squared };
enum class PredictionMode { regression, classification };

// Scalar base losses. logistic is applied to the margin, so it is decreasing.
double base_loss_value(BaseLoss base, double t);
double base_loss_deriv(BaseLoss base, double t);
double base_loss_lipschitz(BaseLoss base);                 // sup |l'|, +inf for squared
std::optional<double> base_loss_grad_lipschitz(BaseLoss base);

struct LossModel {
    LossFamily family = LossFamily::custom_discrete;
    Vec theta;
    double offset = 0.0;

    // newsvendor costs
    double h = 0.0, b = 0.0;

    // composite
    BaseLoss base = BaseLoss::hinge;
    PredictionMode mode = PredictionMode::classification;

    // quadratic: number of leading coordinates the transport may move;
    // 0 means all of them.
    std::size_t active_dims = 0;

    std::function<double(const Vec&)> custom_value;
    std::function<Vec(const Vec&)> custom_gradient;

    // Metadata. lip_norm absent means unknown or infinite; lip_estimated marks
    // a sampled lower-bound estimate, which downgrades any guarantee built on
    // it to "approximate".
    std::optional<double> lip_norm;
    bool lip_estimated = false;
    bool lip_attained_at_infinity = false;
    std::optional<double> grad_lip;  // hbar
    double growth_M = 0.0;
    double growth_L = 0.0;
    double tail_slope = 0.0;  // limit of f(z)/||z||^p for the order it was built for

    double value(const Vec& z) const;
    bool has_gradient() const;
    Vec gradient(const Vec& z) const;
    // Dual norm of the transport-active part of the gradient.
    double gradient_dual_norm(const Vec& z, GroundNorm ground) const;

    std::size_t quad_active(std::size_t dim) const {
        return active_dims == 0 ? dim : active_dims;
    }
};

LossModel negate(const LossModel& f);

// ---------------------------------------------------------------------------
// Factories. Each fills the metadata consistently with the requested norm.
// ---------------------------------------------------------------------------

LossModel make_linear_loss(Vec c, double offset, const NormSpec& norm);

LossModel make_quadratic_loss(Vec theta, double offset, const NormSpec& norm,
                              std::size_t active_dims = 0);

LossModel make_newsvendor_loss(Vec theta, double h, double b, const NormSpec& norm);

LossModel make_composite_loss(Vec theta, BaseLoss base, PredictionMode mode,
                              const NormSpec& norm);

struct CustomMeta {
    std::optional<double> lip_norm;
    bool lip_attained_at_infinity = false;
    std::optional<double> grad_lip;
    double growth_M = 0.0;
    double growth_L = 0.0;
    double tail_slope = 0.0;
};

LossModel make_custom_loss(std::function<double(const Vec&)> value, CustomMeta meta,
                           std::function<Vec(const Vec&)> gradient = nullptr);

// Max gradient norm over a sample grid; a lower bound on the true Lipschitz
// norm. Models carrying it are flagged lip_estimated.
double estimate_lipschitz(const LossModel& f, const std::vector<Vec>& sample_points,
                          GroundNorm ground);

// Per-family smoothness constants of the parameter space (covering-number
// route): |f(z; theta~) - f(z; theta)| <= kappa(z) ||theta~ - theta||.
struct LossFamilyMeta {
    double theta_radius = 1.0;          // B
    GroundNorm theta_norm = GroundNorm::euclidean;
    double e_kappa = 0.0;               // E[kappa]
    double kappa2_env = 0.0;            // || kappa_2 ||_{P,2}
    std::size_t dim = 1;

    void validate() const {
        if (!(theta_radius > 0.0)) throw ValidationError("theta ball radius must be positive");
        if (dim < 1) throw ValidationError("parameter dimension must be >= 1");
        if (e_kappa < 0.0 || kappa2_env < 0.0)
            throw ValidationError("envelope constants must be nonnegative");
    }
};

double expectation(const DiscreteDistribution& q, const LossModel& f);

}  // namespace wdro
