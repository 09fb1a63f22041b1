// SPDX-License-Identifier: Apache-2.0
#include "tvtr/commands.hpp"

#include "tvtr/parallel.hpp"
#include "tvtr/random.hpp"
#include "tvtr/selection.hpp"
#include "tvtr/series_io.hpp"
#include "tvtr/simulation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>

namespace tvtr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string rep_dir_name(std::size_t r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "rep_%03zu", r + 1);
    return buf;
}

json factors_json(const CPFactors& f) {
    json mats = json::array();
    for (const auto& a : f.factors) {
        mats.push_back(json{{"rows", a.rows()},
                            {"cols", a.cols()},
                            {"values", std::vector<double>(a.data(), a.data() + a.size())}});
    }
    return json{{"weights", std::vector<double>(f.weights.data(), f.weights.data() + f.weights.size())},
                {"matrices", std::move(mats)}};
}

std::vector<double> export_grid_for(const RunConfig& cfg, const ObservationSet& obs) {
    if (!cfg.export_grid.empty()) return cfg.export_grid;
    if (cfg.export_points) {
        const std::size_t n = *cfg.export_points;
        std::vector<double> g(n);
        for (std::size_t k = 0; k < n; ++k) {
            g[k] = obs.domain_end * static_cast<double>(k) / static_cast<double>(n - 1);
        }
        g.back() = obs.domain_end;
        return g;
    }
    return obs.time_grids.front();
}

template <class Fn>
auto as_config_error(Fn&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    } catch (const std::domain_error& e) {
        throw ConfigError(e.what());
    }
}

ObservationSet load_observations(const RunConfig& cfg) {
    if (cfg.covariates.empty() || cfg.responses.empty()) {
        throw ConfigError("both covariates and responses manifests are required");
    }
    return read_observations(cfg.covariates, cfg.responses);
}

std::string opt_number(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

void cmd_simulate(const RunConfig& cfg) {
    cfg.validate();
    const std::size_t reps = cfg.reps.value_or(1);
    parallel_for(reps, resolve_workers(cfg.workers), [&](std::size_t r) {
        SimScenario scn = cfg.scenario;
        scn.seed = derive_seed(cfg.seed, r);
        const SimDataset data = generate(scn);
        const fs::path dir = cfg.out / rep_dir_name(r);
        write_observations(dir, data.observed);
        json truth{{"replication", r + 1},
                   {"base_seed", cfg.seed},
                   {"scenario", to_json(scn)},
                   {"covariate_seed", derive_seed(scn.seed, 0)},
                   {"error_seed", derive_seed(scn.seed, 1)},
                   {"beta", "p1*cos(2*pi*t) + q1*sin(2*pi*t) + p2*sin(4*pi*t) + q2*cos(4*pi*t)"},
                   {"index_base", 1}};
        write_text(dir / "truth.json", truth.dump(2) + "\n");
    });
}

void write_fit(const fs::path& dir, const FitResult& fit, const ObservationSet& obs,
               std::span<const double> export_grid) {
    const json summary{
        {"config", to_json(fit.config)},
        {"basis",
         {{"degree", fit.basis.degree()},
          {"n_interior_knots", fit.basis.n_interior_knots()},
          {"size", fit.basis.size()},
          {"domain_end", fit.basis.domain_end()}}},
        {"data",
         {{"subjects", obs.subjects()},
          {"time_points", obs.time_points()},
          {"covariate_shape", obs.covariate_shape()},
          {"response_shape", obs.response_shape()}}},
        {"converged", fit.converged},
        {"iterations", fit.iterations},
        {"restart", fit.restart},
        {"restart_seed", fit.restart_seed},
        {"final_objective", fit.final_objective()},
        {"objective_trace", fit.objective_trace},
        {"relative_error_trace", fit.relative_error_trace},
        {"factor_order", "U0 (basis), U1..UL (covariate modes), V1..VM (response modes)"},
        {"factors", factors_json(fit.factors)}};
    write_text(dir / "fit.json", summary.dump(2) + "\n");

    const Shape p = obs.covariate_shape();
    const Shape q = obs.response_shape();
    Shape modes = p;
    modes.insert(modes.end(), q.begin(), q.end());
    std::string csv = "t";
    for (std::size_t d = 0; d < p.size(); ++d) csv += ",p" + std::to_string(d + 1);
    for (std::size_t d = 0; d < q.size(); ++d) csv += ",q" + std::to_string(d + 1);
    csv += ",value\n";
    Shape idx(modes.size());
    for (const double t : export_grid) {
        const DenseTensor b = fit.beta(t);
        std::fill(idx.begin(), idx.end(), 0);
        const std::string ts = format_double(t);
        for (std::size_t k = 0; k < b.size(); ++k) {
            csv += ts;
            for (const auto v : idx) {
                csv += ',';
                csv += std::to_string(v + 1);
            }
            csv += ',';
            csv += format_double(b.data()[k]);
            csv += '\n';
            next_index(idx, modes);
        }
    }
    write_text(dir / "beta_hat.csv", csv);
}

LoadedFit load_fit(const fs::path& fit_json) {
    try {
        const json j = json::parse(read_text(fit_json));
        const json& b = j.at("basis");
        BSplineBasis basis(b.at("domain_end").get<double>(), b.at("degree").get<int>(),
                           b.at("n_interior_knots").get<std::size_t>());
        CPFactors f;
        const auto w = j.at("factors").at("weights").get<std::vector<double>>();
        f.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
        for (const auto& m : j.at("factors").at("matrices")) {
            const auto v = m.at("values").get<std::vector<double>>();
            const auto rows = m.at("rows").get<Eigen::Index>();
            const auto cols = m.at("cols").get<Eigen::Index>();
            if (static_cast<std::size_t>(rows * cols) != v.size()) {
                throw IoError(fit_json.string() + ": factor size mismatch");
            }
            f.factors.emplace_back(Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols));
        }
        f.validate();
        return LoadedFit{std::move(f), std::move(basis)};
    } catch (const json::exception& e) {
        throw IoError(fit_json.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw IoError(fit_json.string() + ": " + e.what());
    }
}

FitResult cmd_fit(const RunConfig& cfg) {
    cfg.validate();
    const ObservationSet obs = load_observations(cfg);
    const std::vector<double> grid = export_grid_for(cfg, obs);
    FitResult f = as_config_error([&] { return fit(obs, cfg.fit); });
    write_fit(cfg.out, f, obs, grid);
    return f;
}

SelectionReport cmd_select(const RunConfig& cfg) {
    cfg.validate();
    const ObservationSet obs = load_observations(cfg);
    SelectionOptions opt;
    opt.selector = cfg.selector;
    opt.k_folds = cfg.k_folds;
    opt.base = cfg.fit;
    opt.seed = cfg.seed;
    opt.workers = cfg.workers;
    opt.bic_rss_floor = cfg.bic_rss_floor;
    const SelectionReport report = as_config_error([&] { return grid_search(obs, cfg.grid, opt); });

    json cells = json::array();
    std::string csv = "theta,phi,rank,seed,status,cv,bic,bic_floored,rss,final_objective,iterations,"
                      "converged,winner,error\n";
    for (std::size_t k = 0; k < report.cells.size(); ++k) {
        const CellResult& c = report.cells[k];
        const bool win = report.winner && *report.winner == k;
        json cj{{"theta", c.theta}, {"phi", c.phi},   {"rank", c.rank},
                {"seed", c.seed},   {"failed", c.failed}, {"winner", win}};
        if (c.failed) {
            cj["error"] = c.error;
        } else {
            cj["cv"] = c.cv ? json(*c.cv) : json(nullptr);
            // JSON has no infinity; floored cells carry bic = null and the flag.
            cj["bic"] = c.bic_floored ? json(nullptr) : json(c.bic);
            cj["bic_floored"] = c.bic_floored;
            cj["rss"] = c.rss;
            cj["final_objective"] = c.final_objective;
            cj["iterations"] = c.iterations;
            cj["converged"] = c.converged;
        }
        cells.push_back(std::move(cj));
        csv += format_double(c.theta) + "," + format_double(c.phi) + "," + std::to_string(c.rank) +
               "," + std::to_string(c.seed) + "," + (c.failed ? "failed" : "ok") + ",";
        if (!c.failed) {
            csv += opt_number(c.cv) + "," + (c.bic_floored ? "-inf" : format_double(c.bic)) + "," +
                   (c.bic_floored ? "1" : "0") + "," + format_double(c.rss) + "," +
                   format_double(c.final_objective) + "," + std::to_string(c.iterations) + "," +
                   (c.converged ? "1" : "0");
        } else {
            csv += ",,,,,,";
        }
        std::string err = c.error;
        std::replace(err.begin(), err.end(), ',', ';');
        csv += std::string(",") + (win ? "1" : "0") + "," + err + "\n";
    }
    json out{{"selector", selector_name(report.selector)},
             {"k_folds", cfg.k_folds},
             {"seed", cfg.seed},
             {"bic_loglik", "gaussian, profiled common variance: NJQ log(RSS/(NJQ))"},
             {"bic_parameter_count", "R (H + sum P + sum Q)"},
             {"bic_rss_floor", cfg.bic_rss_floor},
             {"grid", to_json(cfg.grid)},
             {"fit", to_json(cfg.fit)},
             {"cells", std::move(cells)},
             {"winner", report.winner ? json(*report.winner) : json(nullptr)}};
    write_text(cfg.out / "selection.json", out.dump(2) + "\n");
    write_text(cfg.out / "selection.csv", csv);

    if (!report.winner) {
        std::string diag = "all " + std::to_string(report.cells.size()) + " grid cells failed:";
        for (const auto& c : report.cells) {
            diag += "\n  theta=" + format_double(c.theta) + " phi=" + format_double(c.phi) +
                    " rank=" + std::to_string(c.rank) + ": " + c.error;
        }
        throw NumericalError(diag);
    }
    const CellResult& w = report.cells[*report.winner];
    FitConfig best = cfg.fit;
    best.theta = w.theta;
    best.phi = w.phi;
    best.rank = w.rank;
    best.seed = w.seed;
    const FitResult f = fit(obs, best);
    write_fit(cfg.out / "winner", f, obs, export_grid_for(cfg, obs));
    return report;
}

}  // namespace tvtr::cli
