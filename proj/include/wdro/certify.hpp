#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wdro/calibration.hpp"
#include "wdro/loss.hpp"
#include "wdro/models.hpp"
#include "wdro/rng.hpp"
#include "wdro/types.hpp"

namespace wdro {

enum class GeneratorKind { finite_discrete, bounded_uniform_box, truncated_gaussian };

struct Generator {
    GeneratorKind kind = GeneratorKind::finite_discrete;
    DiscreteDistribution discrete;  // finite_discrete
    Vec lo, hi;                     // box support for the continuous kinds
    Vec mean, sigma;                // truncated_gaussian

    Vec draw(Rng& rng) const;
    // Support of the data distribution; also the worst-case grid when finite.
    DomainSpec support() const;
    double diameter(const NormSpec& norm) const;
    void validate() const;
};

enum class ProblemKind { fixed_loss, newsvendor, portfolio };

enum class TrueLossEval { exact_discrete, large_holdout };

struct ExperimentConfig {
    Generator generator;
    ProblemKind problem = ProblemKind::fixed_loss;
    CalibRule rule = CalibRule::thm1;
    long n = 50;
    int replications = 200;
    double t = 2.0;
    TrueLossEval true_loss = TrueLossEval::exact_discrete;
    long holdout_n = 1000000;
    std::uint64_t master_seed = 0;
    int jobs = 0;  // 0 = hardware concurrency

    // fixed_loss: linear loss coefficients over z
    Vec fixed_theta;

    // newsvendor
    double h = 1.0, b = 1.0, B = 1.0;
    // spot-check the guarantee over a parameter grid (d <= 2 only)
    bool uniform_check = false;
    int uniform_grid = 1000;

    // portfolio
    double alpha = 1.0;

    // tau override; defaults to the bounded-support constant of the generator
    std::optional<double> tau_override;
    Provenance tau_provenance = Provenance::analytic;

    void validate() const;
};

struct ReplicationRecord {
    double rho_n = 0.0;
    double bound_value = 0.0;  // empirical + regularizer + residual
    double true_loss = 0.0;
    double residual = 0.0;
    bool violated = false;
    bool uniform_violated = false;
    bool center_within_cap = true;  // portfolio: u_hat <= U_n
    bool failed = false;
    std::string error;
};

struct TailCell {
    long n = 0;
    double epsilon = 0.0;
    double empirical = 0.0;
    double bound = 0.0;
    double mc_std_error = 0.0;  // zero for exact enumeration
    bool exact = false;
    bool flagged = false;
};

struct TradeoffRow {
    double rho = 0.0;
    double mean_empirical = 0.0;
    double mean_variation = 0.0;
    double mean_true = 0.0;
};

struct CertReport {
    std::vector<ReplicationRecord> replications;
    int excluded = 0;
    double violation_rate = 0.0;
    double prob_multiplier = 1.0;
    double theoretical_budget = 0.0;  // multiplier * e^{-t}, may exceed one
    double wilson_halfwidth = 0.0;
    bool has_unquantified_term = false;
    bool approximate_constants = false;
    std::vector<TailCell> tail;
    std::vector<TradeoffRow> tradeoff;
};

// Wilson score half-width at one standard normal unit.
double wilson_halfwidth(long successes, long trials, double z = 1.0);

// Exact lower-tail mass P{ E_{P_n}[f] - E_P[f] < -eps } for a two-atom
// distribution by binomial enumeration.
double two_point_tail_exact(const DiscreteDistribution& p_true, const LossModel& f, long n,
                            double eps);

CertReport run_coverage(const ExperimentConfig& config);

CertReport run_tail_table(const ExperimentConfig& config, const std::vector<double>& eps_grid,
                          const std::vector<long>& n_grid);

CertReport run_tradeoff_curve(const ExperimentConfig& config, const std::vector<double>& rho_grid);

}  // namespace wdro
