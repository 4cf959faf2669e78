#include "wdro/certify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "wdro/concentration.hpp"
#include "wdro/regularizer.hpp"

namespace wdro {

Vec Generator::draw(Rng& rng) const {
    switch (kind) {
        case GeneratorKind::finite_discrete: {
            const double u = rng.uniform01();
            double acc = 0.0;
            for (std::size_t i = 0; i < discrete.size(); ++i) {
                acc += discrete.weights()[i];
                if (u < acc) return discrete.atoms()[i];
            }
            return discrete.atoms().back();
        }
        case GeneratorKind::bounded_uniform_box: {
            Vec z(lo.size());
            for (std::size_t i = 0; i < lo.size(); ++i) z[i] = rng.uniform(lo[i], hi[i]);
            return z;
        }
        case GeneratorKind::truncated_gaussian: {
            for (long attempt = 0; attempt < 1000000; ++attempt) {
                Vec z(lo.size());
                bool inside = true;
                for (std::size_t i = 0; i < lo.size(); ++i) {
                    z[i] = mean[i] + sigma[i] * rng.normal();
                    if (z[i] < lo[i] || z[i] > hi[i]) inside = false;
                }
                if (inside) return z;
            }
            throw ValidationError("truncated gaussian rejection sampling failed to land in the box");
        }
    }
    throw ValidationError("unknown generator kind");
}

DomainSpec Generator::support() const {
    if (kind == GeneratorKind::finite_discrete) {
        return DomainSpec::finite(std::vector<Vec>(discrete.atoms()));
    }
    return DomainSpec::box_domain(lo, hi);
}

double Generator::diameter(const NormSpec& norm) const { return support().diameter(norm); }

void Generator::validate() const {
    if (kind != GeneratorKind::finite_discrete) {
        if (lo.empty() || lo.size() != hi.size())
            throw ValidationError("continuous generator needs matching lo/hi");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] < hi[i])) throw ValidationError("generator box needs lo < hi");
        if (kind == GeneratorKind::truncated_gaussian &&
            (mean.size() != lo.size() || sigma.size() != lo.size()))
            throw ValidationError("truncated gaussian needs mean/sigma matching the box");
    }
}

void ExperimentConfig::validate() const {
    generator.validate();
    if (n < 1) throw ValidationError("config: n must be >= 1");
    if (replications < 1) throw ValidationError("config: replications must be >= 1");
    if (!(t > 0.0)) throw ValidationError("config: t must be positive");
    if (problem == ProblemKind::fixed_loss) {
        if (fixed_theta.empty()) throw ValidationError("fixed_loss needs coefficients");
        if (generator.kind != GeneratorKind::finite_discrete)
            throw ValidationError("fixed_loss coverage needs a finite_discrete generator");
    }
    if (problem == ProblemKind::portfolio &&
        generator.kind != GeneratorKind::finite_discrete)
        throw ValidationError("portfolio coverage needs a finite_discrete generator");
    if (uniform_check && generator.kind != GeneratorKind::finite_discrete)
        throw ValidationError("the uniform spot check needs a finite_discrete generator");
}

double wilson_halfwidth(long successes, long trials, double z) {
    if (trials <= 0) return 0.0;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    return z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
}

double two_point_tail_exact(const DiscreteDistribution& p_true, const LossModel& f, long n,
                            double eps) {
    if (p_true.size() != 2) throw ValidationError("exact tail enumeration needs two atoms");
    const double f1 = f.value(p_true.atoms()[0]);
    const double f2 = f.value(p_true.atoms()[1]);
    const double w1 = p_true.weights()[0];
    const double w2 = p_true.weights()[1];
    const double mean_true = w1 * f1 + w2 * f2;
    if (n == 0) return 0.0;
    if (w1 == 0.0 || w2 == 0.0) return 0.0;  // the empirical mean is constant
    double pmf = std::pow(w2, static_cast<double>(n));  // k = 0 atoms at index one
    double tail = 0.0;
    for (long k = 0; k <= n; ++k) {
        const double mean_k = (static_cast<double>(k) * f1 + static_cast<double>(n - k) * f2) /
                              static_cast<double>(n);
        if (mean_k - mean_true < -eps) tail += pmf;
        if (k < n)
            pmf *= (static_cast<double>(n - k) / static_cast<double>(k + 1)) * (w1 / w2);
    }
    return tail;
}

namespace {

void run_parallel(int count, int jobs, const std::function<void(int)>& body) {
    int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

// Jacobi eigenvalue sweeps for a small symmetric matrix; returns (min, max).
std::pair<double, double> sym_eig_range(std::vector<Vec> m) {
    const std::size_t d = m.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) off += m[i][j] * m[i][j];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) {
                if (std::abs(m[p][q]) < 1e-18) continue;
                const double theta = 0.5 * (m[q][q] - m[p][p]) / m[p][q];
                const double t_rot =
                    (theta >= 0.0 ? 1.0 : -1.0) /
                    (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t_rot * t_rot + 1.0);
                const double s = t_rot * c;
                for (std::size_t k = 0; k < d; ++k) {
                    const double mkp = m[k][p], mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double mpk = m[p][k], mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
    }
    double lo = m[0][0], hi = m[0][0];
    for (std::size_t i = 1; i < d; ++i) {
        lo = std::min(lo, m[i][i]);
        hi = std::max(hi, m[i][i]);
    }
    return {lo, hi};
}

struct TrueLossEvaluator {
    const ExperimentConfig* config = nullptr;
    DiscreteDistribution holdout;  // populated for continuous generators

    explicit TrueLossEvaluator(const ExperimentConfig& cfg) : config(&cfg) {
        if (cfg.true_loss == TrueLossEval::large_holdout ||
            cfg.generator.kind != GeneratorKind::finite_discrete) {
            Rng rng(derive_seed(cfg.master_seed, 0x484F4C44ULL));  // "HOLD"
            std::vector<Vec> pts;
            pts.reserve(static_cast<std::size_t>(cfg.holdout_n));
            for (long i = 0; i < cfg.holdout_n; ++i) pts.push_back(cfg.generator.draw(rng));
            holdout = DiscreteDistribution::empirical(std::move(pts));
        }
    }

    const DiscreteDistribution& reference() const {
        if (config->true_loss == TrueLossEval::exact_discrete &&
            config->generator.kind == GeneratorKind::finite_discrete)
            return config->generator.discrete;
        return holdout;
    }

    double mean(const std::function<double(const Vec&)>& f) const {
        const DiscreteDistribution& ref = reference();
        double s = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) s += ref.weights()[i] * f(ref.atoms()[i]);
        return s;
    }
};

DiscreteDistribution draw_empirical(const ExperimentConfig& cfg, int replication) {
    Rng rng(derive_seed(cfg.master_seed, static_cast<std::uint64_t>(replication)));
    std::vector<Vec> pts;
    pts.reserve(static_cast<std::size_t>(cfg.n));
    for (long i = 0; i < cfg.n; ++i) pts.push_back(cfg.generator.draw(rng));
    return DiscreteDistribution::empirical(std::move(pts));
}

void aggregate(CertReport& report) {
    long violations = 0, valid = 0;
    for (const auto& r : report.replications) {
        if (r.failed) {
            ++report.excluded;
            continue;
        }
        ++valid;
        if (r.violated) ++violations;
    }
    report.violation_rate =
        valid > 0 ? static_cast<double>(violations) / static_cast<double>(valid) : 0.0;
    report.wilson_halfwidth = wilson_halfwidth(violations, valid);
}

// ---------------------------------------------------------------------------
// fixed loss: single Lipschitz loss, radius sqrt(tau t / n), no residual.
// ---------------------------------------------------------------------------

CertReport coverage_fixed_loss(const ExperimentConfig& cfg) {
    const NormSpec norm{1.0, GroundNorm::euclidean};
    const DomainSpec domain = cfg.generator.support();
    const double tau =
        cfg.tau_override ? *cfg.tau_override : tau_bounded(domain, norm).tau;
    const LossModel f = make_linear_loss(cfg.fixed_theta, 0.0, norm);
    const double rho_n = radius_thm1(cfg.n, cfg.t, tau);
    const double e_true = expectation(cfg.generator.discrete, f);

    CertReport report;
    report.prob_multiplier = 1.0;
    report.theoretical_budget = std::exp(-cfg.t);
    report.approximate_constants = cfg.tau_provenance != Provenance::analytic;
    report.replications.resize(static_cast<std::size_t>(cfg.replications));

    run_parallel(cfg.replications, cfg.jobs, [&](int r) {
        ReplicationRecord& rec = report.replications[static_cast<std::size_t>(r)];
        try {
            const DiscreteDistribution pn = draw_empirical(cfg, r);
            const RobustEvalResult dual = robust_loss_dual(pn, f, rho_n, norm, domain);
            rec.rho_n = rho_n;
            rec.bound_value = dual.robust_loss;
            rec.true_loss = e_true;
            rec.violated = rec.true_loss > rec.bound_value;
        } catch (const Error& e) {
            rec.failed = true;
            rec.error = e.name();
        }
    });
    aggregate(report);
    return report;
}

// ---------------------------------------------------------------------------
// newsvendor: covering-number rule with the (h v b)/(h ^ b) radius scaling.
// ---------------------------------------------------------------------------

CertReport coverage_newsvendor(const ExperimentConfig& cfg) {
    const NormSpec norm{1.0, GroundNorm::euclidean};
    const DomainSpec ambient = DomainSpec::unbounded();
    const double tau =
        cfg.tau_override ? *cfg.tau_override : 2.0 * std::pow(cfg.generator.diameter(norm), 2);
    const double ratio = std::max(cfg.h, cfg.b) / std::min(cfg.h, cfg.b);
    const double rho_n = ratio * radius_thm1(cfg.n, cfg.t, tau);
    const std::size_t dim_x = (cfg.generator.kind == GeneratorKind::finite_discrete
                                   ? cfg.generator.discrete.dim()
                                   : cfg.generator.lo.size()) -
                              1;

    TrueLossEvaluator truth(cfg);
    // E[kappa] = (h v b) E[||x||]; exact for discrete truth, holdout otherwise.
    double e_norm_x = 0.0;
    {
        const DiscreteDistribution& ref = truth.reference();
        for (std::size_t i = 0; i < ref.size(); ++i) {
            Vec x(ref.atoms()[i].begin(), ref.atoms()[i].end() - 1);
            e_norm_x += ref.weights()[i] * euclidean_norm(x);
        }
    }
    LossFamilyMeta meta;
    meta.theta_radius = cfg.B;
    meta.theta_norm = GroundNorm::euclidean;
    meta.e_kappa = std::max(cfg.h, cfg.b) * e_norm_x;
    meta.dim = dim_x;
    meta.validate();
    const double residual = 3.0 * meta.e_kappa / static_cast<double>(cfg.n);

    CertReport report;
    report.prob_multiplier = std::exp(covering_log_ball(
        meta.theta_radius, static_cast<long>(meta.dim), 1.0 / double(cfg.n)));
    report.theoretical_budget = report.prob_multiplier * std::exp(-cfg.t);
    report.has_unquantified_term = true;  // envelope concentration event
    report.approximate_constants =
        cfg.generator.kind != GeneratorKind::finite_discrete;  // e_kappa from holdout
    report.replications.resize(static_cast<std::size_t>(cfg.replications));

    run_parallel(cfg.replications, cfg.jobs, [&](int r) {
        ReplicationRecord& rec = report.replications[static_cast<std::size_t>(r)];
        try {
            const DiscreteDistribution pn = draw_empirical(cfg, r);
            NewsvendorProblem pb;
            pb.h = cfg.h;
            pb.b = cfg.b;
            pb.B = cfg.B;
            pb.data = pn;
            const SolveResult sol = solve_newsvendor(pb, rho_n);
            const LossModel f_hat = make_newsvendor_loss(sol.theta, cfg.h, cfg.b, norm);
            const RobustEvalResult dual = robust_loss_dual(pn, f_hat, rho_n, norm, ambient);
            rec.rho_n = rho_n;
            rec.residual = residual;
            rec.bound_value = dual.robust_loss + residual;
            rec.true_loss = truth.mean([&](const Vec& z) { return f_hat.value(z); });
            rec.violated = rec.true_loss > rec.bound_value;
            if (cfg.uniform_check && dim_x == 1) {
                for (int k = 0; k < cfg.uniform_grid; ++k) {
                    const double th =
                        -cfg.B + 2.0 * cfg.B * k / static_cast<double>(cfg.uniform_grid - 1);
                    const LossModel f_k = make_newsvendor_loss(Vec{th}, cfg.h, cfg.b, norm);
                    const double reg = rho_n * *f_k.lip_norm;  // exact on unbounded support
                    const double rhs = expectation(pn, f_k) + reg + residual;
                    const double lhs = expectation(cfg.generator.discrete, f_k);
                    if (lhs > rhs) {
                        rec.uniform_violated = true;
                        break;
                    }
                }
            }
        } catch (const Error& e) {
            rec.failed = true;
            rec.error = e.name();
        }
    });
    aggregate(report);
    return report;
}

// ---------------------------------------------------------------------------
// portfolio: gradient-regularization rule with analytic constants computed
// from the known generating distribution.
// ---------------------------------------------------------------------------

struct PortfolioConstants {
    double tau = 0.0;
    double mu2 = 0.0, mu4 = 0.0;
    double lifted_min_eig = 0.0, lifted_max_eig = 0.0;
    double max_norm_lifted = 0.0;
    double U = 0.0;
    double hbar = 0.0, kappa2 = 0.0, L_ratio = 0.0;
    double r_star = 0.0, rad_G = 0.0;
    CalibrationResult calib;
};

PortfolioConstants portfolio_constants(const ExperimentConfig& cfg) {
    const DiscreteDistribution& px = cfg.generator.discrete;
    const std::size_t d = px.dim();
    PortfolioConstants k;
    const NormSpec norm2{2.0, GroundNorm::euclidean};
    k.tau = cfg.tau_override ? *cfg.tau_override
                             : 2.0 * std::pow(cfg.generator.diameter(norm2), 2);

    double m2 = 0.0, m4 = 0.0;
    std::vector<Vec> S(d + 1, Vec(d + 1, 0.0));  // lifted second moment
    for (std::size_t i = 0; i < px.size(); ++i) {
        const Vec& x = px.atoms()[i];
        const double w = px.weights()[i];
        const double nx = euclidean_norm(x);
        m2 += w * nx * nx;
        m4 += w * nx * nx * nx * nx;
        Vec z = x;
        z.push_back(1.0);
        k.max_norm_lifted = std::max(k.max_norm_lifted, euclidean_norm(z));
        for (std::size_t a = 0; a <= d; ++a)
            for (std::size_t c = 0; c <= d; ++c) S[a][c] += w * z[a] * z[c];
    }
    k.mu2 = std::sqrt(m2);
    k.mu4 = std::sqrt(m4);
    const auto [emin, emax] = sym_eig_range(S);
    k.lifted_min_eig = std::max(emin, 1e-12);
    k.lifted_max_eig = emax;

    const double lifted_fourth = m4 + 2.0 * m2 + 1.0;  // E ||(x,1)||^4

    // The center cap feeds the curvature constants and the curvature feeds the
    // radius; two passes settle the loop at desk scale.
    double rho = radius_thm1(cfg.n, cfg.t, k.tau);
    for (int pass = 0; pass < 2; ++pass) {
        k.U = bound_u_n(cfg.B, k.mu2, std::sqrt(k.tau), cfg.t, cfg.n, static_cast<long>(d), rho);
        const double c_max = k.U + 0.5 * cfg.alpha;
        const double theta_sq_max = cfg.B * cfg.B + c_max * c_max;
        k.hbar = 2.0 * theta_sq_max;
        k.kappa2 = 2.0 * theta_sq_max * std::sqrt(k.lifted_max_eig);
        k.L_ratio = k.max_norm_lifted / std::sqrt(k.lifted_min_eig);
        const double psi_coeff = std::sqrt(lifted_fourth) /
                                 (2.0 * std::sqrt(k.lifted_min_eig) *
                                  std::sqrt(static_cast<double>(cfg.n)));
        k.r_star = fixed_point_subroot(0.0, psi_coeff, 2.0);
        k.rad_G = rademacher_bound_G_quadratic(k.mu4, k.mu2, k.lifted_min_eig, cfg.n);

        CalibrationInputs in;
        in.n = cfg.n;
        in.t = cfg.t;
        in.tau = tau_user(k.tau, 2.0);
        in.kappa2 = k.kappa2;
        in.hbar = k.hbar;
        in.r_star = k.r_star;
        in.rad_G = k.rad_G;
        in.L_ratio = k.L_ratio;
        in.provenance["tau"] = cfg.tau_provenance;
        k.calib = calibrate(CalibRule::cor6, in);
        rho = k.calib.rho_tilde;
    }
    return k;
}

CertReport coverage_portfolio(const ExperimentConfig& cfg) {
    const PortfolioConstants k = portfolio_constants(cfg);
    const double rho = k.calib.rho_tilde;
    const double residual = k.calib.eps_tilde;
    const DiscreteDistribution& p_true = cfg.generator.discrete;

    CertReport report;
    // one extra failure event for the center cap
    report.prob_multiplier = k.calib.prob_multiplier + 1.0;
    report.theoretical_budget = report.prob_multiplier * std::exp(-cfg.t);
    report.has_unquantified_term = true;  // sample-covariance event with a universal constant
    report.approximate_constants = k.calib.approximate;
    report.replications.resize(static_cast<std::size_t>(cfg.replications));

    run_parallel(cfg.replications, cfg.jobs, [&](int r) {
        ReplicationRecord& rec = report.replications[static_cast<std::size_t>(r)];
        try {
            const DiscreteDistribution pn = draw_empirical(cfg, r);
            PortfolioProblem pb;
            pb.alpha = cfg.alpha;
            pb.B = cfg.B;
            pb.data = pn;
            const SolveResult sol = solve_portfolio(pb, rho);
            rec.rho_n = rho;
            rec.residual = residual;
            rec.bound_value =
                portfolio_robust_objective(sol.theta, sol.u_hat, cfg.alpha, pn, rho) + residual;
            rec.true_loss =
                portfolio_robust_objective(sol.theta, sol.u_hat, cfg.alpha, p_true, 0.0);
            rec.violated = rec.true_loss > rec.bound_value;
            rec.center_within_cap = sol.u_hat <= k.U;
        } catch (const Error& e) {
            rec.failed = true;
            rec.error = e.name();
        }
    });
    aggregate(report);
    return report;
}

}  // namespace

CertReport run_coverage(const ExperimentConfig& config) {
    config.validate();
    switch (config.problem) {
        case ProblemKind::fixed_loss: return coverage_fixed_loss(config);
        case ProblemKind::newsvendor: return coverage_newsvendor(config);
        case ProblemKind::portfolio: return coverage_portfolio(config);
    }
    throw ValidationError("unknown problem kind");
}

CertReport run_tail_table(const ExperimentConfig& config, const std::vector<double>& eps_grid,
                          const std::vector<long>& n_grid) {
    config.validate();
    if (config.problem != ProblemKind::fixed_loss)
        throw ValidationError("tail tables are defined for the fixed_loss problem");
    const NormSpec norm{1.0, GroundNorm::euclidean};
    const DiscreteDistribution& p_true = config.generator.discrete;
    const DomainSpec domain = config.generator.support();
    const TpConstant tau = config.tau_override ? tau_user(*config.tau_override, 1.0)
                                               : tau_bounded(domain, norm);
    const LossModel f = make_linear_loss(config.fixed_theta, 0.0, norm);
    const double e_true = expectation(p_true, f);

    CertReport report;
    for (long n : n_grid) {
        for (double eps : eps_grid) {
            TailCell cell;
            cell.n = n;
            cell.epsilon = eps;
            cell.bound = variation_tail_bound(n, eps, f, p_true, tau, norm, domain);
            if (p_true.size() <= 2 && n <= 60 && n >= 1) {
                cell.exact = true;
                cell.empirical = two_point_tail_exact(p_true, f, n, eps);
            } else if (n >= 1) {
                const int draws = config.replications;
                std::vector<int> hits(static_cast<std::size_t>(draws), 0);
                run_parallel(draws, config.jobs, [&](int r) {
                    Rng rng(derive_seed(config.master_seed,
                                        0xA1100000ULL + static_cast<std::uint64_t>(r)));
                    double mean = 0.0;
                    for (long i = 0; i < n; ++i)
                        mean += f.value(config.generator.draw(rng));
                    mean /= static_cast<double>(n);
                    hits[static_cast<std::size_t>(r)] = (mean - e_true < -eps) ? 1 : 0;
                });
                long c = 0;
                for (int hit : hits) c += hit;
                cell.empirical = static_cast<double>(c) / static_cast<double>(draws);
                cell.mc_std_error =
                    std::sqrt(cell.empirical * (1.0 - cell.empirical) / draws);
            } else {
                cell.exact = true;
                cell.empirical = 0.0;
            }
            cell.flagged = cell.empirical > cell.bound + 3.0 * cell.mc_std_error;
            report.tail.push_back(cell);
        }
    }
    return report;
}

CertReport run_tradeoff_curve(const ExperimentConfig& config,
                              const std::vector<double>& rho_grid) {
    config.validate();
    if (config.problem == ProblemKind::fixed_loss)
        throw ValidationError("the tradeoff curve needs a decision problem");
    TrueLossEvaluator truth(config);
    const NormSpec norm{1.0, GroundNorm::euclidean};

    CertReport report;
    for (double rho : rho_grid) {
        std::vector<ReplicationRecord> recs(static_cast<std::size_t>(config.replications));
        std::vector<double> variation(static_cast<std::size_t>(config.replications), 0.0);
        std::vector<double> empirical(static_cast<std::size_t>(config.replications), 0.0);
        run_parallel(config.replications, config.jobs, [&](int r) {
            ReplicationRecord& rec = recs[static_cast<std::size_t>(r)];
            try {
                const DiscreteDistribution pn = draw_empirical(config, r);
                if (config.problem == ProblemKind::newsvendor) {
                    NewsvendorProblem pb;
                    pb.h = config.h;
                    pb.b = config.b;
                    pb.B = config.B;
                    pb.data = pn;
                    const SolveResult sol = solve_newsvendor(pb, rho);
                    const LossModel f_hat =
                        make_newsvendor_loss(sol.theta, config.h, config.b, norm);
                    empirical[static_cast<std::size_t>(r)] = sol.nominal_objective;
                    variation[static_cast<std::size_t>(r)] = *f_hat.lip_norm;
                    rec.true_loss = truth.mean([&](const Vec& z) { return f_hat.value(z); });
                } else {
                    PortfolioProblem pb;
                    pb.alpha = config.alpha;
                    pb.B = config.B;
                    pb.data = pn;
                    const SolveResult sol = solve_portfolio(pb, rho);
                    empirical[static_cast<std::size_t>(r)] = sol.nominal_objective;
                    variation[static_cast<std::size_t>(r)] = euclidean_norm(sol.theta);
                    rec.true_loss = portfolio_robust_objective(
                        sol.theta, sol.u_hat, config.alpha, truth.reference(), 0.0);
                }
            } catch (const Error& e) {
                rec.failed = true;
                rec.error = e.name();
            }
        });
        TradeoffRow row;
        row.rho = rho;
        long valid = 0;
        for (int r = 0; r < config.replications; ++r) {
            if (recs[static_cast<std::size_t>(r)].failed) continue;
            ++valid;
            row.mean_empirical += empirical[static_cast<std::size_t>(r)];
            row.mean_variation += variation[static_cast<std::size_t>(r)];
            row.mean_true += recs[static_cast<std::size_t>(r)].true_loss;
        }
        if (valid > 0) {
            row.mean_empirical /= static_cast<double>(valid);
            row.mean_variation /= static_cast<double>(valid);
            row.mean_true /= static_cast<double>(valid);
        }
        report.tradeoff.push_back(row);
    }
    return report;
}

}  // namespace wdro
