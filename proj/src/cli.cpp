#include "khess/cli.hpp"

#include "khess/errors.hpp"
#include "khess/family.hpp"
#include "khess/io.hpp"
#include "khess/stability.hpp"
#include "khess/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

namespace khess::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitFailedChecks = 1;
constexpr int kExitError = 2;

struct RunConfig {
    int n = 3;
    int k = 1;
    double grid_min = 1e-8;
    std::size_t grid_nodes = 4096;
    double tol = 1e-9;
    std::uint64_t seed = 42;
    std::string out = ".";

    std::string g_spec;
    std::string profile_path;
    std::string bumps_path;
    std::string h_spec = "zero";
    double fit_lo = 1e-6;
    double fit_hi = 1e-2;
    int n_max = 8;
    std::string inject;
};

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json error_field(const std::exception& e) {
    const auto* known = dynamic_cast<const Error*>(&e);
    json out = {{"kind", known ? known->kind() : "error"}, {"message", e.what()}};
    if (const auto* parse = dynamic_cast<const ParseError*>(&e)) {
        out["line"] = parse->line() ? json(parse->line()) : json(nullptr);
    } else {
        out["line"] = nullptr;
    }
    return out;
}

json base_report(const std::string& command, const RunConfig& cfg) {
    return {{"command", command},
            {"n", cfg.n},
            {"k", cfg.k},
            {"grid_min", cfg.grid_min},
            {"grid_nodes", cfg.grid_nodes},
            {"tol", cfg.tol},
            {"seed", cfg.seed},
            {"error", nullptr}};
}

void emit(const json& report, const RunConfig& cfg, std::ostream& out) {
    const std::string text = report.dump(2) + "\n";
    io::write_atomic(fs::path(cfg.out) / "report.json", text);
    out << text;
}

RadialGrid make_grid(const RunConfig& cfg) { return RadialGrid::log_uniform(cfg.grid_min, 0.1, cfg.grid_nodes); }

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    json report = base_report("solve", cfg);
    report["g"] = cfg.g_spec;
    for (const char* key : {"u0", "residual_max", "boundary_error", "evaluations"}) report[key] = nullptr;
    try {
        const ProblemParams params(cfg.n, cfg.k);
        const auto g = io::parse_nonlinearity(cfg.g_spec);
        ShootOptions options;
        options.tol = cfg.tol;
        const auto result = shoot_solve(g, params, make_grid(cfg), options);
        io::write_atomic(fs::path(cfg.out) / "profile.csv", io::profile_csv(result.profile));
        report["u0"] = number(result.u0);
        report["residual_max"] = number(result.residual_max);
        report["boundary_error"] = number(result.boundary_error);
        report["evaluations"] = result.evaluations;
        emit(report, cfg, out);
        return kExitOk;
    } catch (const std::exception& e) {
        report["error"] = error_field(e);
        err << "solve failed: " << e.what() << "\n";
        emit(report, cfg, out);
        return kExitError;
    }
}

int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    json report = base_report("check", cfg);
    report["g"] = cfg.g_spec;
    report["profile"] = cfg.profile_path;
    for (const char* key : {"integral_residual_max", "integral_residual_argmax_r", "weak_residual_max", "min_eig",
                            "threshold", "verdict", "degenerate_nodes", "table_extrapolations"}) {
        report[key] = nullptr;
    }
    try {
        const ProblemParams params(cfg.n, cfg.k);
        const auto profile = io::read_profile_csv(cfg.profile_path);
        const auto g = io::parse_nonlinearity(cfg.g_spec);
        const auto bumps = cfg.bumps_path.empty() ? default_bump_suite(profile.grid().r_min(), 8)
                                                  : io::read_bump_csv(cfg.bumps_path);
        const auto residual = integral_residual(profile, g, params);
        double weak = 0.0;
        for (const auto& b : bumps) weak = std::max(weak, std::abs(weak_residual(profile, g, b.as_test_function(), params)));
        const auto stability = min_rayleigh(profile, g, params);
        report["integral_residual_max"] = number(residual.max_abs);
        report["integral_residual_argmax_r"] = profile.grid()[residual.argmax];
        report["weak_residual_max"] = number(weak);
        report["min_eig"] = number(stability.min_eig);
        report["threshold"] = number(stability.threshold);
        report["verdict"] = to_string(stability.verdict);
        report["degenerate_nodes"] = stability.degenerate_nodes;
        report["table_extrapolations"] = g.extrapolation_count();
        emit(report, cfg, out);
        return kExitOk;
    } catch (const std::exception& e) {
        report["error"] = error_field(e);
        err << "check failed: " << e.what() << "\n";
        emit(report, cfg, out);
        return kExitError;
    }
}

int cmd_family(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    json report = base_report("family", cfg);
    report["h"] = cfg.h_spec;
    report["fit_window"] = {cfg.fit_lo, cfg.fit_hi};
    for (const char* key : {"delta", "regime", "fitted_rate", "fit_r2", "log_coefficient", "rate_gap",
                            "semistable_verdict", "min_eig", "hardy_ok", "hardy_min_lhs", "sk_coefficient",
                            "eight_minus_delta", "integral_residual_max"}) {
        report[key] = nullptr;
    }
    try {
        const ProblemParams params(cfg.n, cfg.k);
        if (params.n() < params.critical_dimension()) {
            throw DomainError("regime " + to_string(classify_regime(params)) + ": the family needs n >= 2k+8 = " +
                              std::to_string(params.critical_dimension()));
        }
        const auto grid = make_grid(cfg);
        const FamilySpec spec(params, io::parse_h(cfg.h_spec), grid);
        const auto fam = build_family(spec);
        const auto g = reconstruct_g(spec, fam.profile);
        const double delta = spec.delta();
        const auto regime = classify_regime(params);
        report["delta"] = delta;
        report["regime"] = to_string(regime);
        report["sk_coefficient"] = sk_coefficient(params);
        report["eight_minus_delta"] = 8.0 - delta;
        report["integral_residual_max"] = number(integral_residual(fam.profile, g, params).max_abs);

        if (regime == Regime::logarithmic) {
            const auto fit = fit_log_coefficient(grid.nodes(), fam.profile.u(), cfg.fit_lo, cfg.fit_hi);
            report["log_coefficient"] = fit.rate;
            report["fit_r2"] = fit.r2;
        } else {
            auto U = decay_normalized(fam.profile, delta);
            for (double& v : U) v = -v;
            const auto fit = fit_decay(grid.nodes(), U, cfg.fit_lo, cfg.fit_hi);
            report["fitted_rate"] = fit.rate;
            report["fit_r2"] = fit.r2;
            report["rate_gap"] = std::abs(fit.rate - delta);
        }

        const auto stability = min_rayleigh(fam.profile, g, params);
        report["semistable_verdict"] = to_string(stability.verdict);
        report["min_eig"] = number(stability.min_eig);

        const auto [alpha, beta] = hardy_parameters(params);
        bool hardy_ok = true;
        double min_lhs = INFINITY;
        for (const auto& b : random_bump_suite(grid.r_min(), 50, cfg.seed)) {
            const auto res = hardy_check(grid, fam.V, fam.dV, alpha, beta, params, b.as_test_function());
            hardy_ok = hardy_ok && res.conditions_ok && res.lhs >= -10.0 * res.quad_error;
            min_lhs = std::min(min_lhs, res.lhs);
        }
        report["hardy_ok"] = hardy_ok;
        report["hardy_min_lhs"] = number(min_lhs);

        io::write_atomic(fs::path(cfg.out) / "profile.csv", io::profile_csv(fam.profile));
        io::write_atomic(fs::path(cfg.out) / "g_table.csv", io::g_table_csv(*g.table()));
        emit(report, cfg, out);
        return kExitOk;
    } catch (const std::exception& e) {
        report["error"] = error_field(e);
        err << "family failed: " << e.what() << "\n";
        emit(report, cfg, out);
        return kExitError;
    }
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    json report = base_report("verify", cfg);
    report["n_max"] = cfg.n_max;
    report["inject"] = cfg.inject.empty() ? json(nullptr) : json(cfg.inject);
    report["checks"] = json::array();
    report["all_pass"] = false;
    try {
        VerifyOptions options;
        options.n_max = cfg.n_max;
        options.seed = cfg.seed;
        options.grid_min = cfg.grid_min;
        options.grid_nodes = cfg.grid_nodes;
        options.inject = cfg.inject;
        bool all = true;
        for (const auto& c : run_verify(options)) {
            report["checks"].push_back({{"name", c.name},
                                        {"pass", c.pass},
                                        {"max_deviation", number(c.max_deviation)},
                                        {"tolerance", c.tolerance},
                                        {"detail", c.detail}});
            all = all && c.pass;
        }
        report["all_pass"] = all;
        emit(report, cfg, out);
        return all ? kExitOk : kExitFailedChecks;
    } catch (const std::exception& e) {
        report["error"] = error_field(e);
        err << "verify failed: " << e.what() << "\n";
        emit(report, cfg, out);
        return kExitError;
    }
}

void add_globals(CLI::App& app, RunConfig& cfg) {
    app.add_option("--n", cfg.n, "dimension n")->capture_default_str();
    app.add_option("--k", cfg.k, "Hessian order k")->capture_default_str();
    app.add_option("--grid-min", cfg.grid_min, "innermost grid radius")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--grid-nodes", cfg.grid_nodes, "number of grid nodes")->check(CLI::Range(16, 10000000))->capture_default_str();
    app.add_option("--tol", cfg.tol, "shooting tolerance on |u(1)|")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--seed", cfg.seed, "seed for random suites")->capture_default_str();
    app.add_option("--out", cfg.out, "output directory")->capture_default_str();
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Radial k-Hessian solver and stability checker"};
    app.require_subcommand(1);
    app.fallthrough();
    add_globals(app, cfg);

    auto* solve = app.add_subcommand("solve", "shoot for the radial Dirichlet solution");
    solve->add_option("--g", cfg.g_spec, "const:<c> | exp:<lambda> | power:<lambda>:<p> | table:<path>")->required();

    auto* check = app.add_subcommand("check", "residuals and stability verdict for a profile CSV");
    check->add_option("--profile", cfg.profile_path, "CSV with header r,u,du[,d2u]")->required();
    check->add_option("--g", cfg.g_spec, "nonlinearity spec")->required();
    check->add_option("--bumps", cfg.bumps_path, "CSV with header center,width");

    auto* family = app.add_subcommand("family", "explicit semistable family for n >= 2k+8");
    family->set_help_flag("--help", "print this help message and exit");
    family->add_option("--h", cfg.h_spec, "zero | const:<a> | pow:<a>:<b> | table:<path>")->capture_default_str();
    family->add_option("--fit-lo", cfg.fit_lo, "decay fit window start")->capture_default_str();
    family->add_option("--fit-hi", cfg.fit_hi, "decay fit window end")->capture_default_str();

    auto* verify = app.add_subcommand("verify", "run the invariant battery");
    verify->add_option("--n-max", cfg.n_max, "largest dimension for brute-force oracles")->capture_default_str();
    verify->add_option("--inject", cfg.inject, "deliberate fault (test hook): euler")->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return kExitError;
    }

    try {
        if (*solve) return cmd_solve(cfg, out, err);
        if (*check) return cmd_check(cfg, out, err);
        if (*family) return cmd_family(cfg, out, err);
        return cmd_verify(cfg, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

int run(int argc, char** argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace khess::cli
