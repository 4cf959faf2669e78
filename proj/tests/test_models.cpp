#include <doctest.h>

#include <cmath>

#include "support/test_oracles.hpp"
#include "wdro/models.hpp"
#include "wdro/regularizer.hpp"
#include "wdro/rng.hpp"

using namespace wdro;

namespace {

const NormSpec kP1{1.0, GroundNorm::euclidean};
const NormSpec kP2{2.0, GroundNorm::euclidean};

double newsvendor_objective(const NewsvendorProblem& pb, double rho, double theta) {
    double s = 0.0;
    for (std::size_t i = 0; i < pb.data.size(); ++i) {
        const Vec& z = pb.data.atoms()[i];
        const double r = theta * z[0] - z[1];
        s += pb.data.weights()[i] * (r > 0.0 ? pb.h * r : -pb.b * r);
    }
    return s + rho * std::max(pb.h, pb.b) * std::sqrt(theta * theta + 1.0);
}

}  // namespace

TEST_CASE("newsvendor variation norms") {
    const LipschitzBounds b1 = newsvendor_lip_norm({1.0}, 2.0, 1.0, GroundNorm::euclidean);
    CHECK(b1.upper == doctest::Approx(2.0 * std::sqrt(2.0)));
    CHECK(b1.lower == doctest::Approx(std::sqrt(2.0)));

    const LipschitzBounds b2 = newsvendor_lip_norm({0.0}, 1.0, 1.0, GroundNorm::euclidean);
    CHECK(b2.upper == doctest::Approx(1.0));
    CHECK(b2.lower == doctest::Approx(1.0));

    const LipschitzBounds b3 = newsvendor_lip_norm({1.0}, 4.0, 2.0, GroundNorm::euclidean);
    CHECK(b3.upper == doctest::Approx(2.0 * b1.upper));
    CHECK(b3.lower == doctest::Approx(2.0 * b1.lower));
}

TEST_CASE("variation norm matches the transport oracle along the steep ray") {
    // grid laid along the direction (theta, -1)/|(theta, -1)|: the per-unit
    // gain of moving mass equals max(h, b) |(theta, -1)| exactly
    const double h = 2.0, b = 1.0;
    const Vec theta{1.0};
    const LossModel f = make_newsvendor_loss(theta, h, b, kP1);
    const double lip = *f.lip_norm;

    const double inv = 1.0 / std::sqrt(2.0);
    std::vector<Vec> pts;
    for (int k = 0; k < 12; ++k) {
        const double s = 0.3 * k;
        pts.push_back({s * inv, -s * inv});  // runs into the h-branch
    }
    DiscreteDistribution q({pts[0]}, {1.0});
    const double rho = 0.45;  // below the ray span
    const double oracle = robust_loss_oracle(q, f, rho, kP1, DomainSpec::finite(pts));
    const double reg = oracle - expectation(q, f);
    CHECK(reg == doctest::Approx(rho * lip).epsilon(1e-9));

    const RobustEvalResult dual = robust_loss_dual(q, f, rho, kP1, DomainSpec::unbounded());
    CHECK(dual.regularizer == doctest::Approx(rho * lip).epsilon(1e-9));
}

TEST_CASE("newsvendor solver") {
    SUBCASE("perfect fit at zero radius") {
        // y = 0.5 x exactly
        std::vector<Vec> rows;
        for (double x : {0.5, 1.0, 1.5, 2.0}) rows.push_back({x, 0.5 * x});
        NewsvendorProblem pb;
        pb.h = 1.0;
        pb.b = 1.0;
        pb.B = 5.0;
        pb.data = DiscreteDistribution::empirical(rows);
        const SolveResult sol = solve_newsvendor(pb, 0.0);
        CHECK(sol.robust_objective <= 5e-3);
        CHECK(sol.theta[0] == doctest::Approx(0.5).epsilon(2e-2));
    }
    SUBCASE("single sample") {
        NewsvendorProblem pb;
        pb.h = 1.0;
        pb.b = 1.0;
        pb.B = 10.0;
        pb.data = DiscreteDistribution::empirical({{1.0, 1.0}});
        const SolveResult sol = solve_newsvendor(pb, 0.0);
        CHECK(sol.robust_objective <= 1e-2);
        CHECK(sol.theta[0] == doctest::Approx(1.0).epsilon(2e-2));
    }
    SUBCASE("five-sample instance against exhaustive search") {
        NewsvendorProblem pb;
        pb.h = 2.0;
        pb.b = 1.0;
        pb.B = 3.0;
        pb.data = DiscreteDistribution::empirical(
            {{1.0, 0.8}, {2.0, 1.1}, {0.5, 0.9}, {1.5, 1.6}, {3.0, 2.0}});
        const double rho = 0.1;
        const SolveResult sol = solve_newsvendor(pb, rho);
        const auto [best_theta, best] = testing::grid_min_1d(
            [&](double th) { return newsvendor_objective(pb, rho, th); }, -pb.B, pb.B, 6000);
        CHECK(sol.robust_objective <= best + 1e-2);
        // the grid overshoots the true minimum by at most its own resolution
        CHECK(sol.robust_objective >= best - 1e-2);
    }
    SUBCASE("restarts agree on the convex objective") {
        NewsvendorProblem pb;
        pb.h = 1.5;
        pb.b = 1.0;
        pb.B = 2.0;
        pb.data = DiscreteDistribution::empirical({{1.0, 0.5}, {2.0, 1.5}, {0.5, 0.4}});
        const double rho = 0.2;
        const SolveResult a = solve_newsvendor(pb, rho, 1e-12, 20000, Vec{-1.7});
        const SolveResult b2 = solve_newsvendor(pb, rho, 1e-12, 20000, Vec{1.9});
        CHECK(std::abs(a.robust_objective - b2.robust_objective) <=
              1e-6 * (1.0 + std::abs(a.robust_objective)));
    }
    SUBCASE("regularizer keeps the robust objective above the nominal one") {
        NewsvendorProblem pb;
        pb.h = 2.0;
        pb.b = 1.0;
        pb.B = 2.0;
        pb.data = DiscreteDistribution::empirical({{1.0, 0.7}, {0.4, 0.2}});
        const SolveResult sol = solve_newsvendor(pb, 0.3);
        CHECK(sol.robust_objective >= sol.nominal_objective - 1e-12);
        CHECK(sol.regularizer_used >= 0.0);
    }
}

TEST_CASE("Lipschitz-norm bracket holds at the solved point") {
    NewsvendorProblem pb;
    pb.h = 2.0;
    pb.b = 1.0;
    pb.B = 2.0;
    pb.data = DiscreteDistribution::empirical({{1.0, 0.8}, {2.0, 1.1}, {0.5, 0.9}});
    const double rho = 0.15;
    const SolveResult sol = solve_newsvendor(pb, rho);
    const LipschitzBounds lb = newsvendor_lip_norm(sol.theta, pb.h, pb.b, GroundNorm::euclidean);
    const LossModel f = make_newsvendor_loss(sol.theta, pb.h, pb.b, kP1);
    const RobustEvalResult dual = robust_loss_dual(pb.data, f, rho, kP1, DomainSpec::unbounded());
    CHECK(dual.regularizer <= rho * lb.upper + 1e-9);
    CHECK(dual.regularizer >= rho * lb.lower - 1e-9);
}

TEST_CASE("linear prediction, Lipschitz route") {
    SUBCASE("separable data drives the hinge to zero") {
        std::vector<Vec> rows;
        for (double s : {0.6, 1.0, 1.7, 2.2}) {
            rows.push_back({s, s, 1.0});
            rows.push_back({-s, -s, -1.0});
        }
        LinearPredictionProblem pb;
        pb.base = BaseLoss::hinge;
        pb.mode = PredictionMode::classification;
        pb.B = 6.0;
        pb.data = DiscreteDistribution::empirical(rows);
        const SolveResult sol = solve_linear_p1(pb, 0.0);
        CHECK(sol.robust_objective <= 1e-2);
    }
    SUBCASE("heavy radius shrinks the coefficients") {
        LinearPredictionProblem pb;
        pb.base = BaseLoss::hinge;
        pb.mode = PredictionMode::classification;
        pb.B = 3.0;
        pb.data = DiscreteDistribution::empirical({{1.0, 0.3, 1.0}, {-0.8, 0.1, -1.0}});
        const SolveResult sol = solve_linear_p1(pb, 50.0);
        CHECK(euclidean_norm(sol.theta) <= 0.05);
        CHECK(sol.robust_objective <=
              base_loss_value(BaseLoss::hinge, 0.0) + 50.0 * euclidean_norm(sol.theta) + 1e-6);
    }
    SUBCASE("ten-sample 2-D hinge against exhaustive search") {
        Rng rng(8);
        std::vector<Vec> rows;
        for (int i = 0; i < 10; ++i) {
            const double y = i % 2 == 0 ? 1.0 : -1.0;
            rows.push_back({y * rng.uniform(0.2, 1.5) + rng.uniform(-0.4, 0.4),
                            y * rng.uniform(-0.5, 1.0), y});
        }
        LinearPredictionProblem pb;
        pb.base = BaseLoss::hinge;
        pb.mode = PredictionMode::classification;
        pb.B = 2.0;
        pb.data = DiscreteDistribution::empirical(rows);
        const double rho = 0.05;
        const SolveResult sol = solve_linear_p1(pb, rho, 20000);
        CHECK(sol.robust_objective >= sol.nominal_objective - 1e-12);
        auto objective = [&](const Vec& th) {
            double s = 0.0;
            for (std::size_t i = 0; i < pb.data.size(); ++i) {
                const Vec& z = pb.data.atoms()[i];
                s += pb.data.weights()[i] *
                     base_loss_value(BaseLoss::hinge, z[2] * (th[0] * z[0] + th[1] * z[1]));
            }
            return s + rho * euclidean_norm(th);
        };
        const auto [bx, best] = testing::grid_min_2d(objective, -pb.B, pb.B, 220);
        CHECK(sol.robust_objective <= best + 1e-2);
    }
}

TEST_CASE("linear prediction, gradient route") {
    SUBCASE("reduces to empirical risk at zero radius") {
        LinearPredictionProblem pb;
        pb.base = BaseLoss::logistic;
        pb.mode = PredictionMode::classification;
        pb.B = 2.0;
        pb.data = DiscreteDistribution::empirical({{0.8, 1.0}, {-1.2, -1.0}, {0.3, -1.0}});
        const SolveResult p2 = solve_linear_p2(pb, 0.0, 20000, 3, 5);
        const SolveResult p1 = solve_linear_p1(pb, 0.0, 20000);
        CHECK(p2.robust_objective == doctest::Approx(p1.robust_objective).epsilon(1e-4));
    }
    SUBCASE("hinge is rejected") {
        LinearPredictionProblem pb;
        pb.base = BaseLoss::hinge;
        pb.data = DiscreteDistribution::empirical({{1.0, 1.0}});
        CHECK_THROWS_AS(solve_linear_p2(pb, 0.1), NoSolver);
    }
    SUBCASE("ten-sample 1-D logistic against exhaustive search") {
        Rng rng(21);
        std::vector<Vec> rows;
        for (int i = 0; i < 10; ++i) {
            const double y = i % 2 == 0 ? 1.0 : -1.0;
            rows.push_back({y * rng.uniform(0.1, 2.0) + rng.uniform(-0.6, 0.6), y});
        }
        LinearPredictionProblem pb;
        pb.base = BaseLoss::logistic;
        pb.mode = PredictionMode::classification;
        pb.B = 2.5;
        pb.data = DiscreteDistribution::empirical(rows);
        const double rho = 0.1;
        const SolveResult sol = solve_linear_p2(pb, rho, 20000, 5, 7);
        CHECK(sol.robust_objective >= sol.nominal_objective - 1e-12);
        CHECK(sol.warning.empty());
        auto objective = [&](double th) {
            double emp = 0.0, rms = 0.0;
            for (std::size_t i = 0; i < pb.data.size(); ++i) {
                const Vec& z = pb.data.atoms()[i];
                const double m = z[1] * th * z[0];
                emp += pb.data.weights()[i] * base_loss_value(BaseLoss::logistic, m);
                const double lp = base_loss_deriv(BaseLoss::logistic, m);
                rms += pb.data.weights()[i] * lp * lp;
            }
            return emp + rho * std::abs(th) * std::sqrt(rms);
        };
        const auto [bx, best] = testing::grid_min_1d(objective, -pb.B, pb.B, 10000);
        CHECK(sol.robust_objective <= best + 1e-2);
    }
}

TEST_CASE("portfolio robust objective closed form") {
    SUBCASE("zero radius is the plain mean-variance value") {
        DiscreteDistribution x({{1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}},
                               {0.25, 0.25, 0.5});
        const Vec w{0.3, 0.7};
        const double u = 0.4, alpha = 0.8;
        double direct = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double ret = dot(w, x.atoms()[i]);
            direct += x.weights()[i] * ((ret - u) * (ret - u) + alpha * ret);
        }
        CHECK(portfolio_robust_objective(w, u, alpha, x, 0.0) ==
              doctest::Approx(direct).epsilon(1e-12));
    }
    SUBCASE("single asset matches the symmetric quadratic instance") {
        DiscreteDistribution x({{-1.0}, {1.0}}, {0.5, 0.5});
        CHECK(portfolio_robust_objective({1.0}, 0.0, 0.0, x, 1.0) ==
              doctest::Approx(4.0).epsilon(1e-12));
    }
    SUBCASE("center shifts verified against displacement enumeration") {
        DiscreteDistribution x({{-0.8}, {1.2}}, {0.5, 0.5});
        const double alpha = 0.6, rho = 0.4;
        for (double u : {0.0, 0.5, -0.7}) {
            // brute force over per-atom displacements of the asset losses
            double best = -kInf;
            const int steps = 700;
            for (int i = -steps; i <= steps; ++i)
                for (int j = -steps; j <= steps; ++j) {
                    const double d1 = 2.0 * i / steps;
                    const double d2 = 2.0 * j / steps;
                    if (0.5 * (d1 * d1 + d2 * d2) > rho * rho + 1e-12) continue;
                    const double x1 = -0.8 + d1, x2 = 1.2 + d2;
                    const double v = 0.5 * ((x1 - u) * (x1 - u) + alpha * x1) +
                                     0.5 * ((x2 - u) * (x2 - u) + alpha * x2);
                    best = std::max(best, v);
                }
            CHECK(portfolio_robust_objective({1.0}, u, alpha, x, rho) ==
                  doctest::Approx(best).epsilon(2e-3));
        }
    }
    SUBCASE("agrees with the grid oracle on an exact-support instance") {
        DiscreteDistribution x({{-1.0}, {1.0}}, {0.5, 0.5});
        std::vector<Vec> pts;
        for (int k = 0; k < 12; ++k) pts.push_back({-3.0 + 0.5 * k});
        const LossModel lifted = make_quadratic_loss({1.0}, 0.0, kP2);
        const double oracle = robust_loss_oracle(x, lifted, 1.0, kP2, DomainSpec::finite(pts));
        CHECK(portfolio_robust_objective({1.0}, 0.0, 0.0, x, 1.0) ==
              doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("portfolio solver") {
    SUBCASE("deterministic assets collapse to the cheapest feasible mix") {
        DiscreteDistribution x({{0.2, 0.9}}, {1.0});
        PortfolioProblem pb;
        pb.alpha = 1.0;
        pb.B = 1.5;
        pb.data = x;
        const SolveResult sol = solve_portfolio(pb, 0.0);
        // variance is zero, so the objective reduces to alpha w.x over the segment
        auto objective = [&](double t) {
            const Vec w{t, 1.0 - t};
            if (euclidean_norm(w) > pb.B) return kInf;
            return pb.alpha * dot(w, x.atoms()[0]);
        };
        const auto [bt, best] = testing::grid_min_1d(objective, -2.0, 3.0, 40000);
        CHECK(sol.robust_objective == doctest::Approx(best).epsilon(1e-3));
        CHECK(std::abs(sol.theta[0] + sol.theta[1] - 1.0) <= 1e-9);
    }
    SUBCASE("single asset forces the full weight and recovers the center") {
        DiscreteDistribution x({{-0.5}, {0.5}, {1.5}}, {0.3, 0.4, 0.3});
        PortfolioProblem pb;
        pb.alpha = 0.7;
        pb.B = 1.0;
        pb.data = x;
        const double rho = 0.2;
        const SolveResult sol = solve_portfolio(pb, rho);
        CHECK(sol.theta[0] == doctest::Approx(1.0).epsilon(1e-9));
        const auto [bu, best] = testing::grid_min_1d(
            [&](double u) { return portfolio_robust_objective({1.0}, u, pb.alpha, x, rho); },
            -3.0, 3.0, 40000);
        CHECK(sol.robust_objective == doctest::Approx(best).epsilon(1e-6));
        CHECK(sol.u_hat == doctest::Approx(bu).epsilon(1e-2));
    }
    SUBCASE("two assets against a feasible-segment sweep") {
        DiscreteDistribution x({{0.8, -0.1}, {-0.5, 0.6}, {0.2, 0.3}, {1.1, -0.4}},
                               {0.25, 0.25, 0.25, 0.25});
        PortfolioProblem pb;
        pb.alpha = 0.5;
        pb.B = 2.0;
        pb.data = x;
        const double rho = 0.15;
        const SolveResult sol = solve_portfolio(pb, rho, 400);
        auto objective = [&](double t) {
            const Vec w{t, 1.0 - t};
            if (euclidean_norm(w) > pb.B + 1e-12) return kInf;
            const auto [bu, bv] = testing::grid_min_1d(
                [&](double u) { return portfolio_robust_objective(w, u, pb.alpha, x, rho); },
                -3.0, 3.0, 2000);
            return bv;
        };
        const auto [bt, best] = testing::grid_min_1d(objective, -1.5, 2.5, 2000);
        CHECK(sol.robust_objective <= best + 5e-4);
        CHECK(sol.robust_objective >= sol.nominal_objective - 1e-12);
    }
    SUBCASE("infeasible ball is rejected") {
        PortfolioProblem pb;
        pb.alpha = 1.0;
        pb.B = 0.5;  // 1/sqrt(2) > 0.5
        pb.data = DiscreteDistribution({{0.1, 0.2}}, {1.0});
        CHECK_THROWS_AS(solve_portfolio(pb, 0.1), ValidationError);
    }
}

TEST_CASE("center cap formula") {
    CHECK(bound_u_n(1.0, 1.0, 0.0, 1.0, 10, 1, 0.0) == doctest::Approx(2.0));
    CHECK(bound_u_n(1.0, 1.0, 1.0, 100.0, 100, 2, 0.1) == doctest::Approx(8.02));
    CHECK(bound_u_n(2.0, 1.0, 0.0, 1.0, 10, 1, 0.0) ==
          doctest::Approx(4.0 * bound_u_n(1.0, 1.0, 0.0, 1.0, 10, 1, 0.0)));
    CHECK_THROWS_AS(bound_u_n(1.0, 1.0, 1.0, 20.0, 10, 1, 0.0), ValidationError);
}
