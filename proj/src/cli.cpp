#include "wdro/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "wdro/calibration.hpp"
#include "wdro/certify.hpp"
#include "wdro/concentration.hpp"
#include "wdro/io.hpp"
#include "wdro/models.hpp"
#include "wdro/regularizer.hpp"

namespace wdro {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kSchemaVersion = 1;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
    bool force = false;
    int verbosity = 0;
    std::string format = "both";
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config path");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "64-bit master seed")
        ->each([&](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--jobs", opts.jobs, "parallel worker cap");
    cmd->add_flag("--force", opts.force, "overwrite existing outputs");
    cmd->add_flag("-v,--verbose", opts.verbosity, "progress notes on standard error");
    cmd->add_option("--format", opts.format, "output format")
        ->check(CLI::IsMember({"json", "csv", "both"}));
}

std::uint64_t resolve_seed(const CommonOpts& opts) {
    if (const char* env = std::getenv("WDRO_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw ValidationError("WDRO_SEED is not a valid 64-bit integer");
        }
    }
    return opts.seed;
}

// Fail-closed key handling: unknown keys are configuration errors.
void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ValidationError(where + " must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ValidationError(where + ": unknown key '" + key + "'");
    }
}

json load_config(const CommonOpts& opts) {
    if (opts.config_path.empty()) throw ValidationError("missing --config");
    json cfg;
    try {
        cfg = json::parse(read_text_file(opts.config_path));
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config parse error: ") + e.what());
    }
    if (!cfg.is_object()) throw ValidationError("config root must be an object");
    if (!cfg.contains("schema_version") || !cfg["schema_version"].is_number_integer() ||
        cfg["schema_version"].get<int>() != kSchemaVersion)
        throw ValidationError("config must declare schema_version " +
                              std::to_string(kSchemaVersion));
    return cfg;
}

Vec parse_vec(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw ValidationError(where + " must be an array of numbers");
    Vec v;
    for (const auto& x : arr) {
        if (!x.is_number()) throw ValidationError(where + " must contain numbers only");
        v.push_back(x.get<double>());
    }
    return v;
}

std::vector<Vec> parse_points(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw ValidationError(where + " must be an array of points");
    std::vector<Vec> pts;
    for (const auto& row : arr) pts.push_back(parse_vec(row, where));
    return pts;
}

DiscreteDistribution parse_distribution(const json& spec, const std::string& where) {
    check_keys(spec, where, {"atoms", "weights", "csv"});
    if (spec.contains("csv")) return distribution_from_csv(read_csv(spec["csv"].get<std::string>()));
    if (!spec.contains("atoms") || !spec.contains("weights"))
        throw ValidationError(where + " needs atoms and weights (or a csv path)");
    return DiscreteDistribution(parse_points(spec["atoms"], where + ".atoms"),
                                parse_vec(spec["weights"], where + ".weights"));
}

GroundNorm parse_ground(const std::string& s) {
    if (s == "euclidean") return GroundNorm::euclidean;
    if (s == "one_norm") return GroundNorm::one_norm;
    if (s == "inf_norm") return GroundNorm::inf_norm;
    if (s == "product_x_only") return GroundNorm::product_x_only;
    throw ValidationError("unknown ground norm '" + s + "'");
}

const char* ground_name(GroundNorm g) {
    switch (g) {
        case GroundNorm::euclidean: return "euclidean";
        case GroundNorm::one_norm: return "one_norm";
        case GroundNorm::inf_norm: return "inf_norm";
        case GroundNorm::product_x_only: return "product_x_only";
    }
    return "?";
}

BaseLoss parse_base(const std::string& s) {
    if (s == "hinge") return BaseLoss::hinge;
    if (s == "logistic") return BaseLoss::logistic;
    if (s == "squared") return BaseLoss::squared;
    throw ValidationError("unknown base loss '" + s + "'");
}

PredictionMode parse_mode(const std::string& s) {
    if (s == "regression") return PredictionMode::regression;
    if (s == "classification") return PredictionMode::classification;
    throw ValidationError("unknown prediction mode '" + s + "'");
}

DomainSpec parse_domain(const json& spec) {
    check_keys(spec, "domain", {"kind", "points", "lo", "hi"});
    const std::string kind = spec.value("kind", "unbounded");
    if (kind == "unbounded") return DomainSpec::unbounded();
    if (kind == "finite_grid") return DomainSpec::finite(parse_points(spec.at("points"), "domain.points"));
    if (kind == "box")
        return DomainSpec::box_domain(parse_vec(spec.at("lo"), "domain.lo"),
                                      parse_vec(spec.at("hi"), "domain.hi"));
    throw ValidationError("unknown domain kind '" + kind + "'");
}

LossModel parse_loss(const json& spec, const NormSpec& norm) {
    check_keys(spec, "loss", {"family", "theta", "constants"});
    const std::string family = spec.at("family").get<std::string>();
    Vec theta = spec.contains("theta") ? parse_vec(spec["theta"], "loss.theta") : Vec{};
    json constants = spec.value("constants", json::object());
    if (family == "linear") {
        check_keys(constants, "loss.constants", {"offset"});
        return make_linear_loss(theta, constants.value("offset", 0.0), norm);
    }
    if (family == "quadratic") {
        check_keys(constants, "loss.constants", {"offset", "active_dims"});
        return make_quadratic_loss(theta, constants.value("offset", 0.0), norm,
                                   constants.value("active_dims", 0));
    }
    if (family == "newsvendor") {
        check_keys(constants, "loss.constants", {"h", "b"});
        return make_newsvendor_loss(theta, constants.value("h", 1.0), constants.value("b", 1.0),
                                    norm);
    }
    if (family == "composite") {
        check_keys(constants, "loss.constants", {"base", "mode"});
        return make_composite_loss(theta, parse_base(constants.value("base", "hinge")),
                                   parse_mode(constants.value("mode", "classification")), norm);
    }
    throw ValidationError("unknown loss family '" + family + "'");
}

JsonNode vec_node(const Vec& v) {
    JsonNode arr = JsonNode::array();
    for (double x : v) arr.push(JsonNode::number(x));
    return arr;
}

void prepare_out_dir(const CommonOpts& opts, const std::vector<std::string>& filenames) {
    if (opts.out_dir.empty()) throw ValidationError("missing --out directory");
    fs::create_directories(opts.out_dir);
    if (!opts.force) {
        for (const auto& f : filenames) {
            const fs::path p = fs::path(opts.out_dir) / f;
            if (fs::exists(p))
                throw ValidationError("refusing to overwrite '" + p.string() +
                                      "' (pass --force)");
        }
    }
}

void emit(const CommonOpts& opts, const std::string& filename, const std::string& content,
          std::ostream& out) {
    if (opts.out_dir.empty()) {
        out << content;
        return;
    }
    write_text_file((fs::path(opts.out_dir) / filename).string(), content);
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

int cmd_eval(const CommonOpts& opts, std::ostream& out) {
    const json cfg = load_config(opts);
    check_keys(cfg, "config",
               {"schema_version", "distribution", "loss", "rho", "p", "ground_norm", "domain",
                "method"});
    NormSpec norm;
    norm.p = cfg.value("p", 1.0);
    norm.ground = parse_ground(cfg.value("ground_norm", std::string("euclidean")));
    norm.validate();
    const DiscreteDistribution q = parse_distribution(cfg.at("distribution"), "distribution");
    const LossModel f = parse_loss(cfg.at("loss"), norm);
    const double rho = cfg.value("rho", 0.0);
    const DomainSpec domain =
        cfg.contains("domain") ? parse_domain(cfg["domain"]) : DomainSpec::unbounded();
    const std::string method = cfg.value("method", std::string("dual"));

    JsonNode result = JsonNode::object();
    if (method == "dual") {
        const RobustEvalResult r = robust_loss_dual(q, f, rho, norm, domain);
        result.set("robust_loss", JsonNode::number(r.robust_loss))
            .set("regularizer", JsonNode::number(r.regularizer))
            .set("lambda_opt", JsonNode::number(r.lambda_opt))
            .set("lambda_floor", JsonNode::number(r.lambda_floor))
            .set("boundary", JsonNode::boolean(r.boundary))
            .set("exact", JsonNode::boolean(r.exact))
            .set("method", JsonNode::str(to_string(r.method)));
    } else if (method == "lipschitz") {
        const RobustEvalResult r = lipschitz_surrogate(q, f, rho, norm.ground);
        result.set("robust_loss", JsonNode::number(r.robust_loss))
            .set("regularizer", JsonNode::number(r.regularizer))
            .set("lambda_opt", JsonNode::number(r.lambda_opt))
            .set("lambda_floor", JsonNode::number(r.lambda_floor))
            .set("boundary", JsonNode::boolean(r.boundary))
            .set("exact", JsonNode::boolean(r.exact))
            .set("method", JsonNode::str(to_string(r.method)));
    } else if (method == "gradient") {
        const GradientInterval g = gradient_surrogate(q, f, rho, norm.ground);
        result.set("center", JsonNode::number(g.center))
            .set("halfwidth", JsonNode::number(g.halfwidth))
            .set("method", JsonNode::str("gradient_surrogate"));
    } else if (method == "oracle") {
        const double v = robust_loss_oracle(q, f, rho, norm, domain);
        result.set("robust_loss", JsonNode::number(v))
            .set("regularizer", JsonNode::number(v - expectation(q, f)))
            .set("method", JsonNode::str("oracle_grid"));
    } else {
        throw ValidationError("unknown eval method '" + method + "'");
    }

    JsonNode root = JsonNode::object();
    root.set("schema_version", JsonNode::integer(kSchemaVersion));
    JsonNode echo = JsonNode::object();
    echo.set("rho", JsonNode::number(rho))
        .set("p", JsonNode::number(norm.p))
        .set("ground_norm", JsonNode::str(ground_name(norm.ground)))
        .set("method", JsonNode::str(method))
        .set("loss_family", JsonNode::str(cfg.at("loss").at("family").get<std::string>()))
        .set("loss_theta", vec_node(f.theta))
        .set("atoms", JsonNode::integer(static_cast<long long>(q.size())));
    const std::string domain_kind = cfg.contains("domain")
                                        ? cfg["domain"].value("kind", "unbounded")
                                        : std::string("unbounded");
    echo.set("domain", JsonNode::str(domain_kind));
    root.set("config", std::move(echo));
    root.set("result", std::move(result));
    if (!opts.out_dir.empty()) prepare_out_dir(opts, {"eval.json"});
    emit(opts, "eval.json", root.dump(), out);
    return 0;
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

struct CalibrateOpts {
    std::string rule = "thm1";
    long n = 0;
    double t = 1.0, tau = 1.0, sigma = 0.0, r_star = 0.0, rad_g = 0.0, kappa1 = 1.0,
           kappa2 = 1.0, hbar = 0.0, l_ratio = 0.0, l_ell = 1.0, e_kappa = 0.0, e_kappa2 = 0.0,
           cover_log = 0.0;
};

int cmd_calibrate(const CommonOpts& opts, const CalibrateOpts& c, std::ostream& out) {
    CalibrationInputs in;
    CalibRule rule;
    if (!opts.config_path.empty()) {
        const json cfg = load_config(opts);
        check_keys(cfg, "config",
                   {"schema_version", "rule", "n", "t", "tau", "sigma", "r_star", "rad_G",
                    "kappa1", "kappa2", "hbar", "L_ratio", "L_ell", "e_kappa", "e_kappa2",
                    "cover_log", "provenance"});
        rule = calib_rule_from_string(cfg.at("rule").get<std::string>());
        in.n = cfg.at("n").get<long>();
        in.t = cfg.value("t", 1.0);
        in.tau = tau_user(cfg.value("tau", 1.0), 1.0);
        in.sigma = cfg.value("sigma", 0.0);
        in.r_star = cfg.value("r_star", 0.0);
        in.rad_G = cfg.value("rad_G", 0.0);
        in.kappa1 = cfg.value("kappa1", 1.0);
        in.kappa2 = cfg.value("kappa2", 1.0);
        in.hbar = cfg.value("hbar", 0.0);
        in.L_ratio = cfg.value("L_ratio", 0.0);
        in.L_ell = cfg.value("L_ell", 1.0);
        in.e_kappa = cfg.value("e_kappa", 0.0);
        in.e_kappa2 = cfg.value("e_kappa2", 0.0);
        in.cover_log = cfg.value("cover_log", 0.0);
        if (cfg.contains("provenance")) {
            for (const auto& [key, value] : cfg["provenance"].items()) {
                const std::string v = value.get<std::string>();
                in.provenance[key] = v == "analytic" ? Provenance::analytic
                                    : v == "estimated" ? Provenance::estimated
                                                       : Provenance::assumed;
            }
        }
    } else {
        rule = calib_rule_from_string(c.rule);
        in.n = c.n;
        in.t = c.t;
        in.tau = tau_user(c.tau, 1.0);
        in.sigma = c.sigma;
        in.r_star = c.r_star;
        in.rad_G = c.rad_g;
        in.kappa1 = c.kappa1;
        in.kappa2 = c.kappa2;
        in.hbar = c.hbar;
        in.L_ratio = c.l_ratio;
        in.L_ell = c.l_ell;
        in.e_kappa = c.e_kappa;
        in.e_kappa2 = c.e_kappa2;
        in.cover_log = c.cover_log;
    }
    const CalibrationResult r = calibrate(rule, in);

    JsonNode root = JsonNode::object();
    root.set("schema_version", JsonNode::integer(kSchemaVersion));
    JsonNode echo = JsonNode::object();
    echo.set("rule", JsonNode::str(to_string(rule)))
        .set("n", JsonNode::integer(in.n))
        .set("t", JsonNode::number(in.t))
        .set("tau", JsonNode::number(in.tau.tau))
        .set("sigma", JsonNode::number(in.sigma))
        .set("r_star", JsonNode::number(in.r_star))
        .set("rad_G", JsonNode::number(in.rad_G))
        .set("kappa1", JsonNode::number(in.kappa1))
        .set("kappa2", JsonNode::number(in.kappa2))
        .set("hbar", JsonNode::number(in.hbar))
        .set("L_ratio", JsonNode::number(in.L_ratio))
        .set("L_ell", JsonNode::number(in.L_ell))
        .set("e_kappa", JsonNode::number(in.e_kappa))
        .set("e_kappa2", JsonNode::number(in.e_kappa2))
        .set("cover_log", JsonNode::number(in.cover_log));
    root.set("config", std::move(echo));
    JsonNode res = JsonNode::object();
    res.set("rho_n", JsonNode::number(r.rho_n))
        .set("eps_n", JsonNode::number(r.eps_n))
        .set("rho_tilde", JsonNode::number(r.rho_tilde))
        .set("eps_tilde", JsonNode::number(r.eps_tilde))
        .set("prob_multiplier", JsonNode::number(r.prob_multiplier))
        .set("applicable", JsonNode::boolean(r.applicable))
        .set("has_unquantified_term", JsonNode::boolean(r.has_unquantified_term))
        .set("approximate", JsonNode::boolean(r.approximate));
    JsonNode terms = JsonNode::object();
    for (const auto& [key, value] : r.terms) terms.set(key, JsonNode::number(value));
    res.set("terms", std::move(terms));
    root.set("result", std::move(res));
    if (!opts.out_dir.empty()) prepare_out_dir(opts, {"calibration.json"});
    emit(opts, "calibration.json", root.dump(), out);
    return 0;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

int cmd_solve(const CommonOpts& opts, std::ostream& out) {
    const json cfg = load_config(opts);
    check_keys(cfg, "config",
               {"schema_version", "problem", "data", "data_csv", "rho", "h", "b", "B", "base",
                "mode", "alpha", "max_iter", "restarts"});
    const std::string problem = cfg.at("problem").get<std::string>();
    DiscreteDistribution data =
        cfg.contains("data_csv")
            ? samples_from_csv(read_csv(cfg["data_csv"].get<std::string>()))
            : parse_distribution(cfg.at("data"), "data");
    const double rho = cfg.value("rho", 0.0);
    const int max_iter = cfg.value("max_iter", 10000);
    const long long n_samples = static_cast<long long>(data.size());

    SolveResult sol;
    if (problem == "newsvendor") {
        NewsvendorProblem pb;
        pb.h = cfg.value("h", 1.0);
        pb.b = cfg.value("b", 1.0);
        pb.B = cfg.value("B", 1.0);
        pb.data = std::move(data);
        sol = solve_newsvendor(pb, rho, 1e-9, max_iter);
    } else if (problem == "linear_p1" || problem == "linear_p2") {
        LinearPredictionProblem pb;
        pb.base = parse_base(cfg.value("base", std::string("hinge")));
        pb.mode = parse_mode(cfg.value("mode", std::string("classification")));
        pb.B = cfg.value("B", 1.0);
        pb.data = std::move(data);
        sol = problem == "linear_p1"
                  ? solve_linear_p1(pb, rho, max_iter)
                  : solve_linear_p2(pb, rho, max_iter, cfg.value("restarts", 5),
                                    resolve_seed(opts));
    } else if (problem == "portfolio") {
        PortfolioProblem pb;
        pb.alpha = cfg.value("alpha", 1.0);
        pb.B = cfg.value("B", 1.0);
        pb.data = std::move(data);
        sol = solve_portfolio(pb, rho, max_iter);
    } else {
        throw ValidationError("unknown problem '" + problem + "'");
    }

    JsonNode root = JsonNode::object();
    root.set("schema_version", JsonNode::integer(kSchemaVersion));
    JsonNode echo = JsonNode::object();
    echo.set("problem", JsonNode::str(problem))
        .set("rho", JsonNode::number(rho))
        .set("max_iter", JsonNode::integer(max_iter))
        .set("samples", JsonNode::integer(n_samples));
    echo.set("h", JsonNode::number(cfg.value("h", 1.0)))
        .set("b", JsonNode::number(cfg.value("b", 1.0)))
        .set("B", JsonNode::number(cfg.value("B", 1.0)))
        .set("alpha", JsonNode::number(cfg.value("alpha", 1.0)))
        .set("base", JsonNode::str(cfg.value("base", std::string("hinge"))))
        .set("mode", JsonNode::str(cfg.value("mode", std::string("classification"))))
        .set("restarts", JsonNode::integer(cfg.value("restarts", 5)));
    root.set("config", std::move(echo));
    JsonNode res = JsonNode::object();
    res.set("theta", vec_node(sol.theta))
        .set("u_hat", JsonNode::number(sol.u_hat))
        .set("robust_objective", JsonNode::number(sol.robust_objective))
        .set("nominal_objective", JsonNode::number(sol.nominal_objective))
        .set("regularizer_used", JsonNode::number(sol.regularizer_used))
        .set("iterations", JsonNode::integer(sol.iterations))
        .set("converged", JsonNode::boolean(sol.converged));
    root.set("result", std::move(res));
    if (!opts.out_dir.empty()) prepare_out_dir(opts, {"solve.json"});
    emit(opts, "solve.json", root.dump(), out);
    return 0;
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

ExperimentConfig parse_experiment(const json& cfg, std::uint64_t seed, int jobs) {
    ExperimentConfig ex;
    check_keys(cfg, "config",
               {"schema_version", "mode", "problem", "generator", "rule", "n", "replications",
                "t", "true_loss", "holdout_n", "fixed_theta", "h", "b", "B", "alpha",
                "uniform_check", "uniform_grid", "tau", "tau_provenance", "eps_grid", "n_grid",
                "rho_grid", "seed"});
    const json& g = cfg.at("generator");
    check_keys(g, "generator", {"kind", "atoms", "weights", "csv", "lo", "hi", "mean", "sigma"});
    const std::string kind = g.at("kind").get<std::string>();
    if (kind == "finite_discrete") {
        ex.generator.kind = GeneratorKind::finite_discrete;
        json d = g;
        d.erase("kind");
        ex.generator.discrete = parse_distribution(d, "generator");
    } else if (kind == "bounded_uniform_box" || kind == "truncated_gaussian") {
        ex.generator.kind = kind == "bounded_uniform_box" ? GeneratorKind::bounded_uniform_box
                                                          : GeneratorKind::truncated_gaussian;
        ex.generator.lo = parse_vec(g.at("lo"), "generator.lo");
        ex.generator.hi = parse_vec(g.at("hi"), "generator.hi");
        if (ex.generator.kind == GeneratorKind::truncated_gaussian) {
            ex.generator.mean = parse_vec(g.at("mean"), "generator.mean");
            ex.generator.sigma = parse_vec(g.at("sigma"), "generator.sigma");
        }
    } else {
        throw ValidationError("unknown generator kind '" + kind + "'");
    }

    const std::string problem = cfg.value("problem", std::string("fixed_loss"));
    ex.problem = problem == "fixed_loss"  ? ProblemKind::fixed_loss
                 : problem == "newsvendor" ? ProblemKind::newsvendor
                 : problem == "portfolio"  ? ProblemKind::portfolio
                                           : throw ValidationError("unknown problem '" + problem + "'");
    ex.rule = calib_rule_from_string(cfg.value("rule", std::string("thm1")));
    ex.n = cfg.value("n", 50L);
    ex.replications = cfg.value("replications", 200);
    ex.t = cfg.value("t", 2.0);
    const std::string tl = cfg.value("true_loss", std::string("exact_discrete"));
    ex.true_loss = tl == "exact_discrete" ? TrueLossEval::exact_discrete
                   : tl == "large_holdout"
                       ? TrueLossEval::large_holdout
                       : throw ValidationError("unknown true_loss mode '" + tl + "'");
    ex.holdout_n = cfg.value("holdout_n", 1000000L);
    if (cfg.contains("fixed_theta")) ex.fixed_theta = parse_vec(cfg["fixed_theta"], "fixed_theta");
    ex.h = cfg.value("h", 1.0);
    ex.b = cfg.value("b", 1.0);
    ex.B = cfg.value("B", 1.0);
    ex.alpha = cfg.value("alpha", 1.0);
    ex.uniform_check = cfg.value("uniform_check", false);
    ex.uniform_grid = cfg.value("uniform_grid", 1000);
    if (cfg.contains("tau")) ex.tau_override = cfg["tau"].get<double>();
    const std::string tp = cfg.value("tau_provenance", std::string("analytic"));
    ex.tau_provenance = tp == "analytic"    ? Provenance::analytic
                        : tp == "estimated" ? Provenance::estimated
                                            : Provenance::assumed;
    ex.master_seed = cfg.contains("seed") && seed == 0 ? cfg["seed"].get<std::uint64_t>() : seed;
    ex.jobs = jobs;
    return ex;
}

JsonNode experiment_echo(const ExperimentConfig& ex, const std::string& mode) {
    JsonNode echo = JsonNode::object();
    echo.set("mode", JsonNode::str(mode));
    const char* pk = ex.problem == ProblemKind::fixed_loss    ? "fixed_loss"
                     : ex.problem == ProblemKind::newsvendor ? "newsvendor"
                                                             : "portfolio";
    echo.set("problem", JsonNode::str(pk));
    echo.set("rule", JsonNode::str(to_string(ex.rule)));
    echo.set("n", JsonNode::integer(ex.n));
    echo.set("replications", JsonNode::integer(ex.replications));
    echo.set("t", JsonNode::number(ex.t));
    echo.set("true_loss", JsonNode::str(ex.true_loss == TrueLossEval::exact_discrete
                                            ? "exact_discrete"
                                            : "large_holdout"));
    echo.set("holdout_n", JsonNode::integer(ex.holdout_n));
    echo.set("seed", JsonNode::integer(static_cast<long long>(ex.master_seed)));
    echo.set("h", JsonNode::number(ex.h));
    echo.set("b", JsonNode::number(ex.b));
    echo.set("B", JsonNode::number(ex.B));
    echo.set("alpha", JsonNode::number(ex.alpha));
    echo.set("uniform_check", JsonNode::boolean(ex.uniform_check));
    if (!ex.fixed_theta.empty()) echo.set("fixed_theta", vec_node(ex.fixed_theta));
    if (ex.tau_override) echo.set("tau", JsonNode::number(*ex.tau_override));
    echo.set("tau_provenance", JsonNode::str(to_string(ex.tau_provenance)));
    return echo;
}

int cmd_certify(const CommonOpts& opts, std::ostream& out, std::ostream& err) {
    const json cfg = load_config(opts);
    const std::string mode = cfg.value("mode", std::string("coverage"));
    const ExperimentConfig ex = parse_experiment(cfg, resolve_seed(opts), opts.jobs);
    if (opts.verbosity > 0)
        err << "certify: mode=" << mode << " n=" << ex.n << " replications=" << ex.replications
            << " seed=" << ex.master_seed << "\n";

    std::vector<std::string> outputs = {"report.json"};
    if (mode == "coverage") outputs.push_back("coverage.csv");
    if (mode == "tail") outputs.push_back("tail.csv");
    if (mode == "tradeoff") outputs.push_back("tradeoff.csv");
    if (!opts.out_dir.empty()) prepare_out_dir(opts, outputs);

    CertReport report;
    if (mode == "coverage") {
        report = run_coverage(ex);
    } else if (mode == "tail") {
        std::vector<double> eps_grid;
        for (const auto& e : cfg.value("eps_grid", json::array())) eps_grid.push_back(e.get<double>());
        std::vector<long> n_grid;
        for (const auto& nn : cfg.value("n_grid", json::array())) n_grid.push_back(nn.get<long>());
        if (eps_grid.empty() || n_grid.empty())
            throw ValidationError("tail mode needs eps_grid and n_grid");
        report = run_tail_table(ex, eps_grid, n_grid);
    } else if (mode == "tradeoff") {
        std::vector<double> rho_grid;
        for (const auto& r : cfg.value("rho_grid", json::array())) rho_grid.push_back(r.get<double>());
        if (rho_grid.empty()) throw ValidationError("tradeoff mode needs rho_grid");
        report = run_tradeoff_curve(ex, rho_grid);
    } else {
        throw ValidationError("unknown certify mode '" + mode + "'");
    }

    JsonNode root = JsonNode::object();
    root.set("schema_version", JsonNode::integer(kSchemaVersion));
    root.set("config", experiment_echo(ex, mode));
    JsonNode agg = JsonNode::object();
    agg.set("violation_rate", JsonNode::number(report.violation_rate))
        .set("prob_multiplier", JsonNode::number(report.prob_multiplier))
        .set("theoretical_budget", JsonNode::number(report.theoretical_budget))
        .set("wilson_halfwidth", JsonNode::number(report.wilson_halfwidth))
        .set("excluded", JsonNode::integer(report.excluded))
        .set("has_unquantified_term", JsonNode::boolean(report.has_unquantified_term))
        .set("approximate_constants", JsonNode::boolean(report.approximate_constants));
    root.set("aggregate", std::move(agg));

    std::vector<Vec> rows;
    if (mode == "coverage") {
        JsonNode reps = JsonNode::array();
        for (const auto& r : report.replications) {
            JsonNode item = JsonNode::object();
            item.set("rho_n", JsonNode::number(r.rho_n))
                .set("bound", JsonNode::number(r.bound_value))
                .set("true_loss", JsonNode::number(r.true_loss))
                .set("residual", JsonNode::number(r.residual))
                .set("violated", JsonNode::boolean(r.violated));
            if (r.failed) item.set("error", JsonNode::str(r.error));
            reps.push(std::move(item));
            rows.push_back(Vec{r.rho_n, r.bound_value, r.true_loss, r.residual,
                               r.violated ? 1.0 : 0.0, r.failed ? 1.0 : 0.0});
        }
        root.set("replications", std::move(reps));
        if (!opts.out_dir.empty() && opts.format != "json")
            write_csv((fs::path(opts.out_dir) / "coverage.csv").string(),
                      {"rho_n", "bound", "true_loss", "residual", "violated", "failed"}, rows);
    } else if (mode == "tail") {
        JsonNode cells = JsonNode::array();
        for (const auto& c : report.tail) {
            JsonNode item = JsonNode::object();
            item.set("n", JsonNode::integer(c.n))
                .set("epsilon", JsonNode::number(c.epsilon))
                .set("empirical", JsonNode::number(c.empirical))
                .set("bound", JsonNode::number(c.bound))
                .set("mc_std_error", JsonNode::number(c.mc_std_error))
                .set("exact", JsonNode::boolean(c.exact))
                .set("flagged", JsonNode::boolean(c.flagged));
            cells.push(std::move(item));
            rows.push_back(Vec{static_cast<double>(c.n), c.epsilon, c.empirical, c.bound,
                               c.mc_std_error, c.flagged ? 1.0 : 0.0});
        }
        root.set("tail_table", std::move(cells));
        if (!opts.out_dir.empty() && opts.format != "json")
            write_csv((fs::path(opts.out_dir) / "tail.csv").string(),
                      {"n", "epsilon", "empirical", "bound", "mc_std_error", "flagged"}, rows);
    } else {
        JsonNode rows_json = JsonNode::array();
        for (const auto& r : report.tradeoff) {
            JsonNode item = JsonNode::object();
            item.set("rho", JsonNode::number(r.rho))
                .set("mean_empirical", JsonNode::number(r.mean_empirical))
                .set("mean_variation", JsonNode::number(r.mean_variation))
                .set("mean_true", JsonNode::number(r.mean_true));
            rows_json.push(std::move(item));
            rows.push_back(Vec{r.rho, r.mean_empirical, r.mean_variation, r.mean_true});
        }
        root.set("tradeoff", std::move(rows_json));
        if (!opts.out_dir.empty() && opts.format != "json")
            write_csv((fs::path(opts.out_dir) / "tradeoff.csv").string(),
                      {"rho", "mean_empirical", "mean_variation", "mean_true"}, rows);
    }

    emit(opts, "report.json", root.dump(), out);
    return 0;
}

// ---------------------------------------------------------------------------
// rate-function
// ---------------------------------------------------------------------------

int cmd_rate_function(const CommonOpts& opts, std::ostream& out) {
    const json cfg = load_config(opts);
    check_keys(cfg, "config",
               {"schema_version", "distribution", "loss", "p", "ground_norm", "domain",
                "eps_grid"});
    NormSpec norm;
    norm.p = cfg.value("p", 1.0);
    norm.ground = parse_ground(cfg.value("ground_norm", std::string("euclidean")));
    norm.validate();
    const DiscreteDistribution p_true = parse_distribution(cfg.at("distribution"), "distribution");
    const LossModel f = parse_loss(cfg.at("loss"), norm);
    const DomainSpec domain =
        cfg.contains("domain")
            ? parse_domain(cfg["domain"])
            : DomainSpec::finite(std::vector<Vec>(p_true.atoms()));

    std::vector<double> eps_grid;
    const json& eg = cfg.at("eps_grid");
    if (eg.is_array()) {
        for (const auto& e : eg) eps_grid.push_back(e.get<double>());
    } else {
        check_keys(eg, "eps_grid", {"start", "stop", "count"});
        const double start = eg.at("start").get<double>();
        const double stop = eg.at("stop").get<double>();
        const int count = eg.at("count").get<int>();
        if (count < 2) throw ValidationError("eps_grid.count must be >= 2");
        for (int i = 0; i < count; ++i)
            eps_grid.push_back(start + (stop - start) * i / static_cast<double>(count - 1));
    }

    std::vector<Vec> rows;
    JsonNode items = JsonNode::array();
    for (double eps : eps_grid) {
        const RateFunctionResult r = rate_function(f, p_true, eps, norm, domain);
        const double t_opt = r.t_opt.value_or(std::numeric_limits<double>::quiet_NaN());
        rows.push_back(Vec{eps, r.value_or_inf(), t_opt});
        JsonNode item = JsonNode::object();
        item.set("epsilon", JsonNode::number(eps))
            .set("rate", JsonNode::number(r.value_or_inf()))
            .set("infinite", JsonNode::boolean(r.infinite));
        if (r.t_opt) item.set("t_opt", JsonNode::number(*r.t_opt));
        items.push(std::move(item));
    }

    if (!opts.out_dir.empty()) {
        prepare_out_dir(opts, {"rate_function.csv", "rate_function.json"});
        if (opts.format != "json")
            write_csv((fs::path(opts.out_dir) / "rate_function.csv").string(),
                      {"epsilon", "rate", "t_opt"}, rows);
    }
    JsonNode root = JsonNode::object();
    root.set("schema_version", JsonNode::integer(kSchemaVersion));
    JsonNode echo = JsonNode::object();
    echo.set("p", JsonNode::number(norm.p))
        .set("ground_norm", JsonNode::str(ground_name(norm.ground)));
    root.set("config", std::move(echo));
    root.set("rate_function", std::move(items));
    if (opts.format != "csv") emit(opts, "rate_function.json", root.dump(), out);
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Wasserstein distributionally robust optimization toolkit"};
    app.require_subcommand(1);

    CommonOpts eval_opts, calib_opts, solve_opts, certify_opts, rate_opts;
    CalibrateOpts calib;

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate the robust loss");
    add_common(eval_cmd, eval_opts);

    CLI::App* calib_cmd = app.add_subcommand("calibrate", "compute a radius rule");
    add_common(calib_cmd, calib_opts);
    calib_cmd->add_option("--rule", calib.rule, "radius rule");
    calib_cmd->add_option("--n", calib.n, "sample size");
    calib_cmd->add_option("--t", calib.t, "confidence exponent");
    calib_cmd->add_option("--tau", calib.tau, "transportation constant");
    calib_cmd->add_option("--sigma", calib.sigma, "moment ratio");
    calib_cmd->add_option("--r-star", calib.r_star, "sub-root fixed point");
    calib_cmd->add_option("--rad-g", calib.rad_g, "normalized-class complexity");
    calib_cmd->add_option("--kappa1", calib.kappa1, "Lipschitz cap");
    calib_cmd->add_option("--kappa2", calib.kappa2, "gradient-norm cap");
    calib_cmd->add_option("--hbar", calib.hbar, "gradient Lipschitz constant");
    calib_cmd->add_option("--l-ratio", calib.l_ratio, "pointwise gradient ratio cap");
    calib_cmd->add_option("--l-ell", calib.l_ell, "composition Lipschitz constant");
    calib_cmd->add_option("--e-kappa", calib.e_kappa, "envelope mean");
    calib_cmd->add_option("--e-kappa2", calib.e_kappa2, "gradient envelope norm");
    calib_cmd->add_option("--cover-log", calib.cover_log, "log covering number");

    CLI::App* solve_cmd = app.add_subcommand("solve", "solve a robust decision problem");
    add_common(solve_cmd, solve_opts);

    CLI::App* certify_cmd = app.add_subcommand("certify", "run a certification experiment");
    add_common(certify_cmd, certify_opts);

    CLI::App* rate_cmd = app.add_subcommand("rate-function", "tabulate the rate function");
    add_common(rate_cmd, rate_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return 0;
        }
        err << "{\"error\": \"UsageError\", \"message\": \"" << e.what() << "\"}\n";
        return 1;
    }

    try {
        if (eval_cmd->parsed()) return cmd_eval(eval_opts, out);
        if (calib_cmd->parsed()) return cmd_calibrate(calib_opts, calib, out);
        if (solve_cmd->parsed()) return cmd_solve(solve_opts, out);
        if (certify_cmd->parsed()) return cmd_certify(certify_opts, out, err);
        if (rate_cmd->parsed()) return cmd_rate_function(rate_opts, out);
    } catch (const ValidationError& e) {
        err << "{\"error\": \"" << e.name() << "\", \"message\": \"" << e.what() << "\"}\n";
        return 1;
    } catch (const DimensionMismatch& e) {
        err << "{\"error\": \"" << e.name() << "\", \"message\": \"" << e.what() << "\"}\n";
        return 1;
    } catch (const Error& e) {  // numerical failures
        err << "{\"error\": \"" << e.name() << "\", \"message\": \"" << e.what() << "\"}\n";
        return 2;
    } catch (const std::exception& e) {
        err << "{\"error\": \"InternalError\", \"message\": \"" << e.what() << "\"}\n";
        return 2;
    }
    return 1;
}

}  // namespace wdro
