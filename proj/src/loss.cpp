#include "wdro/loss.hpp"

#include <algorithm>
#include <cmath>

namespace wdro {

double base_loss_value(BaseLoss base, double t) {
    switch (base) {
        case BaseLoss::hinge:
            return std::max(1.0 - t, 0.0);
        case BaseLoss::logistic:
            // stable softplus of -t
            return t > 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
        case BaseLoss::squared:
            return t * t;
    }
    throw ValidationError("unknown base loss");
}

double base_loss_deriv(BaseLoss base, double t) {
    switch (base) {
        case BaseLoss::hinge:
            return t < 1.0 ? -1.0 : 0.0;  // subgradient 0 at the kink
        case BaseLoss::logistic:
            return -1.0 / (1.0 + std::exp(t));
        case BaseLoss::squared:
            return 2.0 * t;
    }
    throw ValidationError("unknown base loss");
}

double base_loss_lipschitz(BaseLoss base) {
    switch (base) {
        case BaseLoss::hinge:
        case BaseLoss::logistic:
            return 1.0;
        case BaseLoss::squared:
            return kInf;
    }
    throw ValidationError("unknown base loss");
}

std::optional<double> base_loss_grad_lipschitz(BaseLoss base) {
    switch (base) {
        case BaseLoss::hinge:
            return std::nullopt;
        case BaseLoss::logistic:
            return 0.25;
        case BaseLoss::squared:
            return 2.0;
    }
    throw ValidationError("unknown base loss");
}

namespace {

// composite margin/residual u and the chain-rule argument passed to the base loss
double composite_arg(const LossModel& f, const Vec& z, double* chain_sign) {
    const std::size_t d = f.theta.size();
    if (z.size() != d + 1)
        throw DimensionMismatch("composite loss expects points of dimension " +
                                std::to_string(d + 1));
    double u = 0.0;
    for (std::size_t i = 0; i < d; ++i) u += f.theta[i] * z[i];
    const double y = z[d];
    if (f.mode == PredictionMode::regression) {
        if (chain_sign) *chain_sign = 1.0;
        return u - y;
    }
    if (chain_sign) *chain_sign = y;
    return y * u;
}

}  // namespace

double LossModel::value(const Vec& z) const {
    switch (family) {
        case LossFamily::linear:
            return dot(theta, z) + offset;
        case LossFamily::newsvendor: {
            const std::size_t d = theta.size();
            if (z.size() != d + 1)
                throw DimensionMismatch("newsvendor loss expects points of dimension " +
                                        std::to_string(d + 1));
            double u = 0.0;
            for (std::size_t i = 0; i < d; ++i) u += theta[i] * z[i];
            const double y = z[d];
            return h * std::max(u - y, 0.0) + b * std::max(y - u, 0.0);
        }
        case LossFamily::linear_composite:
            return base_loss_value(base, composite_arg(*this, z, nullptr));
        case LossFamily::quadratic_portfolio: {
            const double a = dot(theta, z);
            return a * a + offset;
        }
        case LossFamily::custom_discrete:
            return custom_value(z);
    }
    throw ValidationError("unknown loss family");
}

bool LossModel::has_gradient() const {
    switch (family) {
        case LossFamily::linear:
        case LossFamily::quadratic_portfolio:
            return true;
        case LossFamily::linear_composite:
            return base != BaseLoss::hinge;
        case LossFamily::newsvendor:
            return false;
        case LossFamily::custom_discrete:
            return static_cast<bool>(custom_gradient);
    }
    return false;
}

Vec LossModel::gradient(const Vec& z) const {
    switch (family) {
        case LossFamily::linear:
            return theta;
        case LossFamily::quadratic_portfolio: {
            const double a = dot(theta, z);
            Vec g(z.size(), 0.0);
            for (std::size_t i = 0; i < theta.size(); ++i) g[i] = 2.0 * a * theta[i];
            return g;
        }
        case LossFamily::linear_composite: {
            double chain = 1.0;
            const double t = composite_arg(*this, z, &chain);
            const double lp = base_loss_deriv(base, t) * chain;
            Vec g(z.size(), 0.0);
            for (std::size_t i = 0; i < theta.size(); ++i) g[i] = lp * theta[i];
            return g;  // y slot stays zero: transport does not move y
        }
        case LossFamily::newsvendor:
            throw MissingGradient("newsvendor loss is nonsmooth");
        case LossFamily::custom_discrete:
            if (!custom_gradient) throw MissingGradient("custom loss has no gradient");
            return custom_gradient(z);
    }
    throw ValidationError("unknown loss family");
}

double LossModel::gradient_dual_norm(const Vec& z, GroundNorm ground) const {
    Vec g = gradient(z);
    if (family == LossFamily::quadratic_portfolio) {
        const std::size_t act = quad_active(z.size());
        g.resize(std::min(g.size(), act));
    } else if (family == LossFamily::linear_composite && !g.empty()) {
        g.pop_back();  // x block only
    }
    return dual_norm(g, ground);
}

LossModel negate(const LossModel& f) {
    LossModel n;
    n.family = LossFamily::custom_discrete;
    LossModel copy = f;
    n.custom_value = [copy](const Vec& z) { return -copy.value(z); };
    if (f.has_gradient()) {
        n.custom_gradient = [copy](const Vec& z) {
            Vec g = copy.gradient(z);
            for (double& x : g) x = -x;
            return g;
        };
    }
    n.lip_norm = f.lip_norm;  // Lipschitz norm is sign-invariant
    n.grad_lip = f.grad_lip;
    // growth/tail metadata of -f differs; negation is meant for finite-grid
    // enumeration where neither is consulted.
    n.growth_M = f.growth_M;
    n.growth_L = f.growth_L;
    n.tail_slope = 0.0;
    return n;
}

LossModel make_linear_loss(Vec c, double offset, const NormSpec& norm) {
    LossModel f;
    f.family = LossFamily::linear;
    f.theta = std::move(c);
    f.offset = offset;
    // under the product convention only the x block can move
    Vec active = f.theta;
    if (norm.ground == GroundNorm::product_x_only && !active.empty()) active.pop_back();
    const double lip = dual_norm(active, norm.ground);
    f.lip_norm = lip;
    f.lip_attained_at_infinity = true;
    f.grad_lip = 0.0;
    f.growth_M = std::abs(offset);
    if (norm.p == 1.0) {
        f.growth_L = lip;
    } else {
        // c.z <= lip ||z|| <= lip^2/4 + ||z||^2
        f.growth_M += lip * lip / 4.0;
        f.growth_L = 1.0;
    }
    f.tail_slope = norm.p == 1.0 ? lip : 0.0;
    return f;
}

LossModel make_quadratic_loss(Vec theta, double offset, const NormSpec& norm,
                              std::size_t active_dims) {
    LossModel f;
    f.family = LossFamily::quadratic_portfolio;
    f.theta = std::move(theta);
    f.offset = offset;
    f.active_dims = active_dims;
    const double tn = euclidean_norm(f.theta);
    f.lip_norm = std::nullopt;  // not globally Lipschitz
    f.grad_lip = 2.0 * tn * tn;
    f.growth_M = std::abs(offset);
    f.growth_L = tn * tn;
    if (norm.p == 2.0) {
        Vec active(f.theta.begin(),
                   f.theta.begin() + static_cast<long>(f.quad_active(f.theta.size())));
        const double an = euclidean_norm(active);
        f.tail_slope = an * an;
    } else {
        f.tail_slope = kInf;  // superlinear growth: 1-Wasserstein ball is unbounded
    }
    return f;
}

LossModel make_newsvendor_loss(Vec theta, double h, double b, const NormSpec& norm) {
    if (!(h > 0.0) || !(b > 0.0)) throw ValidationError("newsvendor costs must be positive");
    LossModel f;
    f.family = LossFamily::newsvendor;
    f.theta = std::move(theta);
    f.h = h;
    f.b = b;
    Vec aug = f.theta;
    aug.push_back(-1.0);
    const double lip = std::max(h, b) * dual_norm(aug, norm.ground);
    f.lip_norm = lip;
    f.lip_attained_at_infinity = true;
    if (norm.p == 1.0) {
        f.growth_M = 0.0;
        f.growth_L = lip;
    } else {
        f.growth_M = lip * lip / 4.0;
        f.growth_L = 1.0;
    }
    f.tail_slope = norm.p == 1.0 ? lip : 0.0;
    return f;
}

LossModel make_composite_loss(Vec theta, BaseLoss base, PredictionMode mode,
                              const NormSpec& norm) {
    LossModel f;
    f.family = LossFamily::linear_composite;
    f.theta = std::move(theta);
    f.base = base;
    f.mode = mode;
    const double tn = euclidean_norm(f.theta);
    const double L = base_loss_lipschitz(base);
    if (std::isfinite(L)) {
        f.lip_norm = L * tn;  // x-only transport, so only the x slope counts
        f.lip_attained_at_infinity = true;
    }
    if (auto hl = base_loss_grad_lipschitz(base)) f.grad_lip = *hl * tn * tn;
    if (base == BaseLoss::squared) {
        f.growth_L = tn * tn;
        f.growth_M = 0.0;
        f.tail_slope = norm.p == 2.0 ? tn * tn : kInf;
    } else if (norm.p == 1.0) {
        f.growth_M = base_loss_value(base, 0.0);
        f.growth_L = L * tn;
        f.tail_slope = L * tn;
    } else {
        f.growth_M = base_loss_value(base, 0.0) + L * L * tn * tn / 4.0;
        f.growth_L = 1.0;
        f.tail_slope = 0.0;
    }
    return f;
}

LossModel make_custom_loss(std::function<double(const Vec&)> value, CustomMeta meta,
                           std::function<Vec(const Vec&)> gradient) {
    LossModel f;
    f.family = LossFamily::custom_discrete;
    f.custom_value = std::move(value);
    f.custom_gradient = std::move(gradient);
    f.lip_norm = meta.lip_norm;
    f.lip_attained_at_infinity = meta.lip_attained_at_infinity;
    f.grad_lip = meta.grad_lip;
    f.growth_M = meta.growth_M;
    f.growth_L = meta.growth_L;
    f.tail_slope = meta.tail_slope;
    return f;
}

double estimate_lipschitz(const LossModel& f, const std::vector<Vec>& sample_points,
                          GroundNorm ground) {
    double m = 0.0;
    for (const auto& z : sample_points) m = std::max(m, f.gradient_dual_norm(z, ground));
    return m;
}

double expectation(const DiscreteDistribution& q, const LossModel& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += q.weights()[i] * f.value(q.atoms()[i]);
    return s;
}

}  // namespace wdro
