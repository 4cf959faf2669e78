#include "wdro/models.hpp"

#include <algorithm>
#include <cmath>

#include "wdro/optimize.hpp"
#include "wdro/rng.hpp"

namespace wdro {

LipschitzBounds newsvendor_lip_norm(const Vec& theta, double h, double b, GroundNorm ground) {
    Vec aug = theta;
    aug.push_back(-1.0);
    const double base = dual_norm(aug, ground);
    return LipschitzBounds{std::max(h, b) * base, std::min(h, b) * base};
}

namespace {

struct SubgradRun {
    Vec best_theta;
    double best_value = kInf;
    int iterations = 0;
    bool converged = false;
};

// Projected subgradient with step s0 / sqrt(k) and best-iterate tracking,
// run in three phases that restart from the incumbent with a shrunken step
// scale. Converged when the final phase stops improving by more than tol.
SubgradRun projected_subgradient(const std::function<double(const Vec&)>& objective,
                                 const std::function<Vec(const Vec&)>& subgradient,
                                 const std::function<void(Vec&)>& project, Vec theta0,
                                 double ball_radius, double tol, int max_iter) {
    SubgradRun run;
    Vec theta = std::move(theta0);
    project(theta);
    run.best_theta = theta;
    run.best_value = objective(theta);

    double scale = ball_radius / (1.0 + std::abs(run.best_value));
    const int phase_iters[3] = {max_iter / 2, (3 * max_iter) / 10, max_iter / 5};
    for (int phase = 0; phase < 3; ++phase) {
        theta = run.best_theta;
        const double phase_start = run.best_value;
        for (int k = 1; k <= phase_iters[phase]; ++k) {
            const Vec g = subgradient(theta);
            const double gn = euclidean_norm(g);
            if (gn == 0.0) {
                run.converged = true;
                return run;
            }
            const double step = scale / std::sqrt(static_cast<double>(k));
            for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= step * g[i] / gn;
            project(theta);
            const double v = objective(theta);
            if (v < run.best_value) {
                run.best_value = v;
                run.best_theta = theta;
            }
            ++run.iterations;
        }
        if (phase == 2 &&
            phase_start - run.best_value <= tol * (1.0 + std::abs(run.best_value)))
            run.converged = true;
        scale /= 50.0;
    }
    return run;
}

}  // namespace

SolveResult solve_newsvendor(const NewsvendorProblem& pb, double rho, double tol, int max_iter,
                             Vec start) {
    pb.validate();
    if (rho < 0.0) throw ValidationError("radius must be nonnegative");
    if (pb.ground != GroundNorm::euclidean)
        throw NoSolver("newsvendor solver supports the euclidean ground norm");
    const std::size_t d = pb.data.dim() - 1;
    const double pen_scale = rho * std::max(pb.h, pb.b);

    auto empirical = [&](const Vec& th) {
        double s = 0.0;
        for (std::size_t i = 0; i < pb.data.size(); ++i) {
            const Vec& z = pb.data.atoms()[i];
            double u = 0.0;
            for (std::size_t j = 0; j < d; ++j) u += th[j] * z[j];
            const double r = u - z[d];
            s += pb.data.weights()[i] * (r > 0.0 ? pb.h * r : -pb.b * r);
        }
        return s;
    };
    auto objective = [&](const Vec& th) {
        Vec aug = th;
        aug.push_back(-1.0);
        return empirical(th) + pen_scale * euclidean_norm(aug);
    };
    auto subgradient = [&](const Vec& th) {
        Vec g(d, 0.0);
        for (std::size_t i = 0; i < pb.data.size(); ++i) {
            const Vec& z = pb.data.atoms()[i];
            double u = 0.0;
            for (std::size_t j = 0; j < d; ++j) u += th[j] * z[j];
            const double r = u - z[d];
            double c = 0.0;  // ties at the kink take the zero subgradient
            if (r > 0.0) c = pb.h;
            else if (r < 0.0) c = -pb.b;
            const double wc = pb.data.weights()[i] * c;
            for (std::size_t j = 0; j < d; ++j) g[j] += wc * z[j];
        }
        Vec aug = th;
        aug.push_back(-1.0);
        const double an = euclidean_norm(aug);  // >= 1, never degenerate
        for (std::size_t j = 0; j < d; ++j) g[j] += pen_scale * th[j] / an;
        return g;
    };
    auto project = [&](Vec& th) { project_l2_ball(th, pb.B); };

    if (start.empty()) start.assign(d, 0.0);
    if (start.size() != d) throw DimensionMismatch("start point has the wrong dimension");
    const SubgradRun run = projected_subgradient(objective, subgradient, project,
                                                 std::move(start), pb.B, tol, max_iter);
    SolveResult res;
    res.theta = run.best_theta;
    res.nominal_objective = empirical(run.best_theta);
    res.robust_objective = run.best_value;
    res.regularizer_used = res.robust_objective - res.nominal_objective;
    res.iterations = run.iterations;
    res.converged = run.converged;
    return res;
}

namespace {

double composite_empirical(const LinearPredictionProblem& pb, const Vec& th) {
    double s = 0.0;
    const std::size_t d = pb.data.dim() - 1;
    for (std::size_t i = 0; i < pb.data.size(); ++i) {
        const Vec& z = pb.data.atoms()[i];
        double u = 0.0;
        for (std::size_t j = 0; j < d; ++j) u += th[j] * z[j];
        const double y = z[d];
        const double t = pb.mode == PredictionMode::regression ? u - y : y * u;
        s += pb.data.weights()[i] * base_loss_value(pb.base, t);
    }
    return s;
}

Vec composite_empirical_grad(const LinearPredictionProblem& pb, const Vec& th) {
    const std::size_t d = pb.data.dim() - 1;
    Vec g(d, 0.0);
    for (std::size_t i = 0; i < pb.data.size(); ++i) {
        const Vec& z = pb.data.atoms()[i];
        double u = 0.0;
        for (std::size_t j = 0; j < d; ++j) u += th[j] * z[j];
        const double y = z[d];
        const double chain = pb.mode == PredictionMode::regression ? 1.0 : y;
        const double t = pb.mode == PredictionMode::regression ? u - y : y * u;
        const double lp = base_loss_deriv(pb.base, t) * chain;
        const double wl = pb.data.weights()[i] * lp;
        for (std::size_t j = 0; j < d; ++j) g[j] += wl * z[j];
    }
    return g;
}

}  // namespace

SolveResult solve_linear_p1(const LinearPredictionProblem& pb, double rho, int max_iter,
                            Vec start) {
    pb.validate();
    if (rho < 0.0) throw ValidationError("radius must be nonnegative");
    const double L = base_loss_lipschitz(pb.base);
    if (!std::isfinite(L))
        throw NoSolver("1-Wasserstein linear solver needs a Lipschitz base loss");
    const std::size_t d = pb.data.dim() - 1;

    auto objective = [&](const Vec& th) {
        return composite_empirical(pb, th) + rho * L * euclidean_norm(th);
    };
    auto subgradient = [&](const Vec& th) {
        Vec g = composite_empirical_grad(pb, th);
        const double tn = euclidean_norm(th);
        if (tn > 0.0)
            for (std::size_t j = 0; j < d; ++j) g[j] += rho * L * th[j] / tn;
        return g;
    };
    auto project = [&](Vec& th) { project_l2_ball(th, pb.B); };

    if (start.empty()) start.assign(d, 0.0);
    if (start.size() != d) throw DimensionMismatch("start point has the wrong dimension");
    const SubgradRun run = projected_subgradient(objective, subgradient, project,
                                                 std::move(start), pb.B, 1e-9, max_iter);
    SolveResult res;
    res.theta = run.best_theta;
    res.nominal_objective = composite_empirical(pb, run.best_theta);
    res.robust_objective = run.best_value;
    res.regularizer_used = res.robust_objective - res.nominal_objective;
    res.iterations = run.iterations;
    res.converged = run.converged;
    return res;
}

namespace {

double base_loss_second(BaseLoss base, double t) {
    switch (base) {
        case BaseLoss::hinge:
            throw NoSolver("hinge has no Lipschitz gradient");
        case BaseLoss::logistic: {
            const double s = 1.0 / (1.0 + std::exp(-t));
            return s * (1.0 - s);
        }
        case BaseLoss::squared:
            return 2.0;
    }
    throw ValidationError("unknown base loss");
}

}  // namespace

SolveResult solve_linear_p2(const LinearPredictionProblem& pb, double rho, int max_iter,
                            int restarts, std::uint64_t seed) {
    pb.validate();
    if (rho < 0.0) throw ValidationError("radius must be nonnegative");
    if (!base_loss_grad_lipschitz(pb.base))
        throw NoSolver("2-Wasserstein penalty needs a smooth base loss");
    const std::size_t d = pb.data.dim() - 1;

    auto rms = [&](const Vec& th) {
        double s = 0.0;
        for (std::size_t i = 0; i < pb.data.size(); ++i) {
            const Vec& z = pb.data.atoms()[i];
            double u = 0.0;
            for (std::size_t j = 0; j < d; ++j) u += th[j] * z[j];
            const double t = pb.mode == PredictionMode::regression ? u - z[d] : z[d] * u;
            const double lp = base_loss_deriv(pb.base, t);
            s += pb.data.weights()[i] * lp * lp;
        }
        return std::sqrt(s);
    };
    auto objective = [&](const Vec& th) {
        return composite_empirical(pb, th) + rho * euclidean_norm(th) * rms(th);
    };
    auto gradient = [&](const Vec& th) {
        Vec g = composite_empirical_grad(pb, th);
        const double tn = euclidean_norm(th);
        const double r = rms(th);
        if (tn > 0.0 && r > 0.0) {
            // grad of rms^2 is 2 sum w_i l' l'' x_i; chain factors square to one
            Vec gr(d, 0.0);
            for (std::size_t i = 0; i < pb.data.size(); ++i) {
                const Vec& z = pb.data.atoms()[i];
                double u = 0.0;
                for (std::size_t j = 0; j < d; ++j) u += th[j] * z[j];
                const double t = pb.mode == PredictionMode::regression ? u - z[d] : z[d] * u;
                const double c = pb.data.weights()[i] * base_loss_deriv(pb.base, t) *
                                 base_loss_second(pb.base, t);
                for (std::size_t j = 0; j < d; ++j) gr[j] += c * z[j];
            }
            for (std::size_t j = 0; j < d; ++j)
                g[j] += rho * (th[j] / tn * r + tn * gr[j] / r);
        }
        return g;
    };
    auto project = [&](Vec& th) { project_l2_ball(th, pb.B); };

    SolveResult best;
    best.robust_objective = kInf;
    for (int r = 0; r < std::max(restarts, 1); ++r) {
        Vec start(d, 0.0);
        if (r > 0) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
            for (double& x : start) x = rng.uniform(-pb.B, pb.B);
            project_l2_ball(start, pb.B);
        }
        const SubgradRun run = projected_subgradient(objective, gradient, project,
                                                     std::move(start), pb.B, 1e-9, max_iter);
        if (run.best_value < best.robust_objective) {
            best.theta = run.best_theta;
            best.robust_objective = run.best_value;
            best.iterations = run.iterations;
            best.converged = run.converged;
        }
    }
    best.nominal_objective = composite_empirical(pb, best.theta);
    best.regularizer_used = best.robust_objective - best.nominal_objective;
    if (rms(best.theta) < 1e-8)
        best.warning = "empirical derivative norm is near zero; the data-dependent penalty "
                       "is degenerate at the solution";
    return best;
}

double portfolio_robust_objective(const Vec& w, double u, double alpha,
                                  const DiscreteDistribution& x_atoms, double rho) {
    if (rho < 0.0) throw ValidationError("radius must be nonnegative");
    if (w.size() != x_atoms.dim()) throw DimensionMismatch("weights do not match asset count");
    const double c = -u + 0.5 * alpha;
    double m2 = 0.0;
    for (std::size_t i = 0; i < x_atoms.size(); ++i) {
        const double a = dot(w, x_atoms.atoms()[i]) + c;
        m2 += x_atoms.weights()[i] * a * a;
    }
    // Transport moves x only, so the dual curvature is ||w||, and the
    // quadratic dual collapses to (rho ||w|| + sqrt(m2))^2.
    const double s = euclidean_norm(w);
    const double quad = rho * s + std::sqrt(m2);
    return quad * quad + alpha * u - 0.25 * alpha * alpha;
}

SolveResult solve_portfolio(const PortfolioProblem& pb, double rho, int max_iter) {
    pb.validate();
    if (rho < 0.0) throw ValidationError("radius must be nonnegative");
    const std::size_t d = pb.data.dim();

    Vec w(d, 1.0 / static_cast<double>(d));
    project_simplex_plane_ball(w, pb.B);
    auto mean_return = [&](const Vec& ww) {
        double m = 0.0;
        for (std::size_t i = 0; i < pb.data.size(); ++i)
            m += pb.data.weights()[i] * dot(ww, pb.data.atoms()[i]);
        return m;
    };
    double u = mean_return(w);

    auto value = [&](const Vec& ww, double uu) {
        return portfolio_robust_objective(ww, uu, pb.alpha, pb.data, rho);
    };

    double current = value(w, u);
    SolveResult res;
    int it = 0;
    for (; it < max_iter; ++it) {
        // exact center step: the robust objective is convex in u
        {
            double delta = 1.0 + std::abs(u);
            auto fu = [&](double uu) { return value(w, uu); };
            while (fu(u - delta) < fu(u) || fu(u + delta) < fu(u)) delta *= 2.0;
            const ScalarMin m = golden_section_min(fu, u - delta, u + delta, 1e-12, 300);
            u = m.x;
        }
        // one projected gradient step in w, diminishing step size
        {
            const double c = -u + 0.5 * pb.alpha;
            double m2 = 0.0;
            Vec sx(d, 0.0);
            for (std::size_t i = 0; i < pb.data.size(); ++i) {
                const double a = dot(w, pb.data.atoms()[i]) + c;
                m2 += pb.data.weights()[i] * a * a;
                for (std::size_t j = 0; j < d; ++j)
                    sx[j] += pb.data.weights()[i] * a * pb.data.atoms()[i][j];
            }
            const double wn = euclidean_norm(w);  // >= 1/sqrt(d) on the plane
            const double quad = rho * wn + std::sqrt(m2);
            Vec g(d, 0.0);
            for (std::size_t j = 0; j < d; ++j) {
                double term = 0.0;
                if (wn > 0.0) term += rho * w[j] / wn;
                if (m2 > 0.0) term += sx[j] / std::sqrt(m2);
                g[j] = 2.0 * quad * term;
            }
            const double gn = euclidean_norm(g);
            if (gn > 0.0) {
                const double step =
                    pb.B / (1.0 + std::abs(current)) / std::sqrt(static_cast<double>(it + 1));
                for (std::size_t j = 0; j < d; ++j) w[j] -= step * g[j] / gn;
            }
            project_simplex_plane_ball(w, pb.B);
        }
        const double next = value(w, u);
        if (std::abs(current - next) <= 1e-10 * (1.0 + std::abs(next)) && it > 3) {
            current = next;
            ++it;
            res.converged = true;
            break;
        }
        current = next;
    }

    res.theta = w;
    res.u_hat = u;
    res.robust_objective = current;
    res.nominal_objective = portfolio_robust_objective(w, u, pb.alpha, pb.data, 0.0);
    res.regularizer_used = res.robust_objective - res.nominal_objective;
    res.iterations = it;
    return res;
}

double bound_u_n(double B, double mu2, double tau, double t, long n, long d, double rho_n) {
    if (!(t > 0.0) || static_cast<double>(n) < t)
        throw ValidationError("bound_u_n needs n >= t > 0");
    if (B < 0.0 || mu2 < 0.0 || tau < 0.0 || rho_n < 0.0 || d < 1)
        throw ValidationError("bound_u_n needs nonnegative inputs and d >= 1");
    const double nd = static_cast<double>(n);
    return 2.0 * B * B *
           (mu2 * mu2 + tau * tau * std::sqrt(t / nd) +
            tau * tau * std::sqrt(2.0 * static_cast<double>(d)) + rho_n * rho_n);
}

}  // namespace wdro
