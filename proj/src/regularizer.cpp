#include "wdro/regularizer.hpp"

#include <algorithm>
#include <cmath>

#include "wdro/optimize.hpp"

namespace wdro {

const char* to_string(EvalMethod m) {
    switch (m) {
        case EvalMethod::dual_exact: return "dual_exact";
        case EvalMethod::lipschitz_surrogate: return "lipschitz_surrogate";
        case EvalMethod::gradient_surrogate: return "gradient_surrogate";
        case EvalMethod::oracle_grid: return "oracle_grid";
    }
    return "?";
}

namespace {

double grid_sup(const LossModel& f, const Vec& z, double lambda, const NormSpec& norm,
                const DomainSpec& domain) {
    double best = -kInf;
    for (const auto& g : domain.grid) {
        const double d = ground_distance(g, z, norm);
        if (std::isinf(d)) continue;  // unreachable under the product convention
        const double term = f.value(g) - lambda * std::pow(d, norm.p);
        best = std::max(best, term);
    }
    return best;
}

// lambda >= lip: the identity point attains the sup for any Lipschitz loss.
// Below lip the sup is +inf when the slope is attained at infinity.
double lipschitz_sup(const LossModel& f, const Vec& z, double lambda) {
    const double lip = *f.lip_norm;
    if (lambda >= lip) return f.value(z);
    if (f.lip_attained_at_infinity) return kInf;
    throw NoSolver("inner sup below the Lipschitz norm has no closed form on this domain");
}

}  // namespace

double inner_sup(const LossModel& f, const Vec& z, double lambda, const NormSpec& norm,
                 const DomainSpec& domain) {
    if (!(lambda > 0.0)) throw ValidationError("inner_sup requires lambda > 0");
    if (domain.is_finite_grid()) return grid_sup(f, z, lambda, norm, domain);
    if (domain.kind == SupportKind::box)
        throw NoSolver("no inner-sup routine for box domains; discretize to a finite grid");

    switch (f.family) {
        case LossFamily::linear: {
            if (norm.p == 1.0) return lipschitz_sup(f, z, lambda);
            // sup_d { c.d - lambda ||d||^2 } = ||c||_*^2 / (4 lambda), with the
            // slope over the transport-active block as set by the factory
            const double lip = f.lip_norm.value_or(dual_norm(f.theta, norm.ground));
            return f.value(z) + lip * lip / (4.0 * lambda);
        }
        case LossFamily::newsvendor:
        case LossFamily::linear_composite:
            if (norm.p == 1.0 && f.lip_norm) return lipschitz_sup(f, z, lambda);
            throw NoSolver("family has no inner-sup routine for this order");
        case LossFamily::quadratic_portfolio: {
            if (norm.p != 2.0)
                return kInf;  // superlinear growth against a linear penalty
            if (norm.ground != GroundNorm::euclidean && norm.ground != GroundNorm::product_x_only)
                throw NoSolver("quadratic inner sup needs a euclidean transport norm");
            Vec active(f.theta.begin(),
                       f.theta.begin() + static_cast<long>(f.quad_active(f.theta.size())));
            const double s = dot(active, active);
            if (lambda <= s) return kInf;
            const double a = dot(f.theta, z);
            return f.offset + lambda * a * a / (lambda - s);
        }
        case LossFamily::custom_discrete:
            if (norm.p == 1.0 && f.lip_norm) return lipschitz_sup(f, z, lambda);
            throw NoSolver("custom losses support the dual only on finite grids");
    }
    throw ValidationError("unknown loss family");
}

RobustEvalResult robust_loss_dual(const DiscreteDistribution& q, const LossModel& f, double rho,
                                  const NormSpec& norm, const DomainSpec& domain) {
    norm.validate();
    if (rho < 0.0) throw ValidationError("radius must be nonnegative");

    const double nominal = expectation(q, f);
    const double lambda_floor = domain.is_finite_grid() ? 0.0 : f.tail_slope;

    RobustEvalResult res;
    res.lambda_floor = lambda_floor;
    res.method = EvalMethod::dual_exact;

    if (rho == 0.0) {
        res.robust_loss = nominal;
        res.regularizer = 0.0;
        res.lambda_opt = lambda_floor;
        res.boundary = true;
        return res;
    }

    if (std::isinf(lambda_floor))
        throw UnboundedRobustLoss("loss grows faster than the transport penalty for every lambda");

    const double rho_p = std::pow(rho, norm.p);
    auto objective = [&](double lambda) -> double {
        double s = lambda * rho_p;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double v = inner_sup(f, q.atoms()[i], lambda, norm, domain);
            if (std::isinf(v)) return kInf;
            s += q.weights()[i] * v;
        }
        return s;
    };

    // Lower end of the bracket: just above the floor, escalating past any
    // +inf region (possible with conservative custom metadata).
    double lo = lambda_floor + 1e-8 * (1.0 + lambda_floor);
    {
        double step = 1e-8 * (1.0 + lambda_floor);
        int tries = 0;
        while (std::isinf(objective(lo))) {
            step *= 2.0;
            lo = lambda_floor + step;
            if (++tries > 80)
                throw UnboundedRobustLoss("inner sup is +inf for every lambda in the bracket");
        }
    }

    bool hit_cap = false;
    const double hi =
        expand_upper_bracket(objective, std::max({1.0, lambda_floor + 1.0, lo}), 1e12, &hit_cap);

    ScalarMin best = golden_section_min(objective, lo, hi, 1e-10, 200);
    if (hit_cap && objective(hi) < best.value) best = ScalarMin{hi, objective(hi), best.iterations};

    // The minimizer may sit at the floor itself.
    if (lambda_floor > 0.0) {
        const double at_floor = objective(lambda_floor);
        if (at_floor <= best.value) best = ScalarMin{lambda_floor, at_floor, best.iterations};
    }

    res.robust_loss = best.value;
    res.lambda_opt = best.x;
    res.boundary = (best.x - lambda_floor) <= 1e-6 * (1.0 + lambda_floor);
    double reg = res.robust_loss - nominal;
    if (reg < 0.0 && reg > -1e-9 * (1.0 + std::abs(res.robust_loss))) reg = 0.0;
    res.regularizer = reg;
    return res;
}

RobustEvalResult lipschitz_surrogate(const DiscreteDistribution& q, const LossModel& f,
                                     double rho, GroundNorm /*ground*/) {
    if (!f.lip_norm) throw MissingLipschitz("loss has no Lipschitz norm");
    if (rho < 0.0) throw ValidationError("radius must be nonnegative");
    const double nominal = expectation(q, f);
    RobustEvalResult res;
    res.method = EvalMethod::lipschitz_surrogate;
    res.regularizer = rho * *f.lip_norm;
    res.robust_loss = nominal + res.regularizer;
    res.lambda_opt = *f.lip_norm;
    res.lambda_floor = f.tail_slope;
    res.boundary = (res.lambda_opt - res.lambda_floor) <= 1e-6 * (1.0 + res.lambda_floor);
    res.exact = f.lip_attained_at_infinity && !f.lip_estimated;
    return res;
}

GradientInterval gradient_surrogate(const DiscreteDistribution& q, const LossModel& f,
                                    double rho, GroundNorm ground) {
    if (!f.has_gradient() || !f.grad_lip)
        throw MissingGradient("gradient surrogate needs a gradient and its Lipschitz constant");
    if (rho < 0.0) throw ValidationError("radius must be nonnegative");
    double second = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double g = f.gradient_dual_norm(q.atoms()[i], ground);
        second += q.weights()[i] * g * g;
    }
    return GradientInterval{rho * std::sqrt(second), *f.grad_lip * rho * rho};
}

double robust_loss_oracle(const DiscreteDistribution& q, const LossModel& f, double rho,
                          const NormSpec& norm, const DomainSpec& domain, int resolution) {
    if (!domain.is_finite_grid()) throw ValidationError("oracle needs a finite grid domain");
    if (rho < 0.0) throw ValidationError("radius must be nonnegative");
    const std::size_t grid_pts = domain.grid.size();
    if (q.size() > 4 || grid_pts > 12)
        throw TooLarge("oracle limits: at most 4 atoms and 12 grid points");

    struct Seg {
        double slope;
        double capacity;  // in total-budget units (already weight-scaled)
    };
    std::vector<Seg> segs;
    double value_at_zero = 0.0;

    for (std::size_t i = 0; i < q.size(); ++i) {
        const double w = q.weights()[i];
        // reachable targets (cost, value), deduplicated to the best value per cost
        std::vector<std::pair<double, double>> pts;
        for (const auto& g : domain.grid) {
            const double d = ground_distance(g, q.atoms()[i], norm);
            if (std::isinf(d)) continue;
            pts.emplace_back(std::pow(d, norm.p), f.value(g));
        }
        std::sort(pts.begin(), pts.end());
        if (pts.empty() || pts.front().first > 0.0)
            throw ValidationError("oracle requires every nominal atom to lie on the grid");
        // best value per distinct cost
        std::vector<std::pair<double, double>> dedup;
        for (const auto& p : pts) {
            if (!dedup.empty() && p.first == dedup.back().first)
                dedup.back().second = std::max(dedup.back().second, p.second);
            else
                dedup.push_back(p);
        }
        // upper concave envelope over (cost, value), monotone in value
        std::vector<std::pair<double, double>> hull;
        for (auto& p : dedup) {
            if (!hull.empty() && p.second <= hull.back().second) continue;  // dominated
            while (hull.size() >= 2) {
                const auto& a = hull[hull.size() - 2];
                const auto& b = hull[hull.size() - 1];
                const double s_ab = (b.second - a.second) / (b.first - a.first);
                const double s_bp = (p.second - b.second) / (p.first - b.first);
                if (s_bp >= s_ab)
                    hull.pop_back();
                else
                    break;
            }
            hull.push_back(p);
        }
        value_at_zero += w * hull.front().second;
        for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
            const double dc = hull[k + 1].first - hull[k].first;
            const double dv = hull[k + 1].second - hull[k].second;
            segs.push_back(Seg{dv / dc, w * dc});
        }
    }

    if (static_cast<int>(segs.size()) > resolution)
        throw TooLarge("oracle transport segments exceed the configured resolution");

    // Greedy fill by marginal gain; exact because each per-atom value function
    // is concave in its transport budget.
    std::sort(segs.begin(), segs.end(), [](const Seg& a, const Seg& b) { return a.slope > b.slope; });
    double budget = std::pow(rho, norm.p);
    double total = value_at_zero;
    for (const auto& s : segs) {
        if (budget <= 0.0 || s.slope <= 0.0) break;
        const double take = std::min(budget, s.capacity);
        total += s.slope * take;
        budget -= take;
    }
    return total;
}

}  // namespace wdro
