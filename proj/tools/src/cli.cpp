// SPDX-License-Identifier: Apache-2.0
#include "tvtr/commands.hpp"
#include "tvtr/series_io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <optional>

namespace tvtr::cli {

namespace {

// Flag values; unset flags leave the config file (or default) untouched.
struct Flags {
    std::optional<std::string> config;
    std::optional<std::string> scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> reps;
    std::optional<std::size_t> workers;
    std::optional<std::string> out;
    std::optional<std::string> covariates;
    std::optional<std::string> responses;

    std::optional<std::size_t> subjects;
    std::optional<std::string> dependence;

    std::optional<std::size_t> rank;
    std::optional<double> theta;
    std::optional<double> phi;
    std::optional<std::size_t> knots;
    std::optional<int> degree;
    std::optional<double> tolerance;
    std::optional<std::size_t> max_iterations;
    std::optional<std::size_t> restarts;
    std::optional<std::size_t> export_points;

    std::optional<std::string> selector;
    std::optional<std::size_t> k_folds;
    std::optional<double> bic_rss_floor;
    std::vector<double> theta_grid;
    std::vector<double> phi_grid;
    std::vector<std::size_t> rank_grid;

    std::optional<std::string> table;
    std::optional<std::string> scale;
    std::vector<std::size_t> blocks;
    std::vector<std::size_t> ranks;
};

void add_common(CLI::App* app, Flags& f) {
    app->add_option("--config", f.config, "JSON config file; flags override its values");
    app->add_option("--seed", f.seed, "Base seed");
    app->add_option("--workers", f.workers, "Worker threads (0 = hardware concurrency)");
    app->add_option("--out", f.out, "Output directory");
}

void add_fit_flags(CLI::App* app, Flags& f) {
    app->add_option("--rank", f.rank, "CP rank R");
    app->add_option("--theta", f.theta, "Curvature penalty weight");
    app->add_option("--phi", f.phi, "Ridge penalty weight");
    app->add_option("--knots", f.knots, "Interior knots K_N (default J/4)");
    app->add_option("--degree", f.degree, "Spline degree");
    app->add_option("--tolerance", f.tolerance, "Stopping tolerance on the relative error");
    app->add_option("--max-iterations", f.max_iterations, "ALS sweep limit");
    app->add_option("--restarts", f.restarts, "Random starts");
}

void add_data_flags(CLI::App* app, Flags& f) {
    app->add_option("--covariates", f.covariates, "Covariate manifest (.json)");
    app->add_option("--responses", f.responses, "Response manifest (.json)");
    app->add_option("--export-points", f.export_points, "Equidistant beta_hat export points on [0, T]");
}

RunConfig build_config(const Flags& f) {
    RunConfig cfg = f.config ? load_config(*f.config) : RunConfig{};
    if (f.scenario) {
        const auto j = nlohmann::json::parse(read_text(*f.scenario), nullptr, false);
        if (j.is_discarded()) throw ConfigError(*f.scenario + ": invalid JSON");
        if (j.contains("scenario")) {
            apply_json(cfg, j);
        } else {
            apply_scenario_json(cfg.scenario, j);
        }
    }
    if (f.seed) cfg.seed = *f.seed;
    if (f.reps) cfg.reps = *f.reps;
    if (f.workers) cfg.workers = *f.workers;
    if (f.out) cfg.out = *f.out;
    if (f.covariates) cfg.covariates = *f.covariates;
    if (f.responses) cfg.responses = *f.responses;
    if (f.subjects) cfg.scenario.subjects = *f.subjects;
    if (f.dependence) cfg.scenario.dependence = parse_dependence(*f.dependence);
    if (f.rank) cfg.fit.rank = *f.rank;
    if (f.theta) cfg.fit.theta = *f.theta;
    if (f.phi) cfg.fit.phi = *f.phi;
    if (f.knots) cfg.fit.n_interior_knots = *f.knots;
    if (f.degree) cfg.fit.degree = *f.degree;
    if (f.tolerance) cfg.fit.tolerance = *f.tolerance;
    if (f.max_iterations) cfg.fit.max_iterations = *f.max_iterations;
    if (f.restarts) cfg.fit.restarts = *f.restarts;
    if (f.export_points) cfg.export_points = *f.export_points;
    if (f.selector) cfg.selector = parse_selector(*f.selector);
    if (f.k_folds) cfg.k_folds = *f.k_folds;
    if (f.bic_rss_floor) cfg.bic_rss_floor = *f.bic_rss_floor;
    if (!f.theta_grid.empty()) cfg.grid.theta = f.theta_grid;
    if (!f.phi_grid.empty()) cfg.grid.phi = f.phi_grid;
    if (!f.rank_grid.empty()) cfg.grid.rank = f.rank_grid;
    if (f.table) cfg.table = *f.table;
    if (f.scale) {
        if (*f.scale == "desk") {
            cfg.scale = ReproduceScale::desk;
        } else if (*f.scale == "full") {
            cfg.scale = ReproduceScale::full;
        } else {
            throw ConfigError("--scale must be desk or full");
        }
    }
    if (!f.blocks.empty()) cfg.blocks = f.blocks;
    if (!f.ranks.empty()) cfg.ranks = f.ranks;
    return cfg;
}

int report(const char* kind, const std::string& msg, int code) {
    const nlohmann::json j{{"error", kind}, {"message", msg}, {"exit_code", code}};
    std::cerr << j.dump() << "\n";
    return code;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Time-varying tensor-on-tensor regression"};
    app.require_subcommand(1);
    Flags f;

    auto* sim = app.add_subcommand("simulate", "Generate simulated datasets");
    add_common(sim, f);
    sim->add_option("--scenario", f.scenario, "Scenario JSON (bare object or {\"scenario\": ...})");
    sim->add_option("--reps", f.reps, "Replications");
    sim->add_option("--subjects", f.subjects, "Subjects N");
    sim->add_option("--dependence", f.dependence, "independent | exp_spatial | matern_spatial");

    auto* fit_cmd = app.add_subcommand("fit", "Fit the penalized CP model");
    add_common(fit_cmd, f);
    add_data_flags(fit_cmd, f);
    add_fit_flags(fit_cmd, f);

    auto* sel = app.add_subcommand("select", "Grid search over theta, phi and rank");
    add_common(sel, f);
    add_data_flags(sel, f);
    add_fit_flags(sel, f);
    sel->add_option("--selector", f.selector, "cv | bic");
    sel->add_option("--k-folds", f.k_folds, "Subject-wise CV folds");
    sel->add_option("--bic-rss-floor", f.bic_rss_floor, "Relative RSS treated as an exact fit");
    sel->add_option("--theta-grid", f.theta_grid, "Comma-separated theta values")->delimiter(',');
    sel->add_option("--phi-grid", f.phi_grid, "Comma-separated phi values")->delimiter(',');
    sel->add_option("--rank-grid", f.rank_grid, "Comma-separated ranks")->delimiter(',');

    auto* rep = app.add_subcommand("reproduce", "Reproduce a simulation table");
    add_common(rep, f);
    add_fit_flags(rep, f);
    rep->add_option("--table", f.table, "I | II | III");
    rep->add_option("--scale", f.scale, "desk (20 replications) | full (100)");
    rep->add_option("--reps", f.reps, "Override the replication count");
    rep->add_option("--blocks", f.blocks, "Table blocks 1..4 to run (default all)")->delimiter(',');
    rep->add_option("--ranks", f.ranks, "Ranks to report (default 1..5)")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        const RunConfig cfg = build_config(f);
        if (sim->parsed()) {
            cmd_simulate(cfg);
        } else if (fit_cmd->parsed()) {
            const FitResult r = cmd_fit(cfg);
            std::cout << "converged=" << (r.converged ? "true" : "false") << " iterations=" << r.iterations
                      << " objective=" << format_double(r.final_objective()) << "\n";
        } else if (sel->parsed()) {
            const SelectionReport r = cmd_select(cfg);
            const CellResult& w = r.cells[*r.winner];
            std::cout << "winner theta=" << format_double(w.theta) << " phi=" << format_double(w.phi)
                      << " rank=" << w.rank << "\n";
        } else if (rep->parsed()) {
            cmd_reproduce(cfg);
        }
    } catch (const ConfigError& e) {
        return report("config", e.what(), kConfig);
    } catch (const IoError& e) {
        return report("io", e.what(), kIo);
    } catch (const NumericalError& e) {
        return report("numerical", e.what(), kNumerical);
    } catch (const std::invalid_argument& e) {
        return report("config", e.what(), kConfig);
    } catch (const std::domain_error& e) {
        return report("config", e.what(), kConfig);
    } catch (const std::exception& e) {
        return report("failure", e.what(), kFailure);
    }
    return kOk;
}

}  // namespace tvtr::cli
