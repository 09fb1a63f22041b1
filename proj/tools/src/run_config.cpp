// SPDX-License-Identifier: Apache-2.0
#include "tvtr/run_config.hpp"

#include "tvtr/series_io.hpp"

#include <set>

namespace tvtr::cli {

using nlohmann::json;

std::string dependence_name(Dependence d) {
    switch (d) {
        case Dependence::independent: return "independent";
        case Dependence::exp_spatial: return "exp_spatial";
        case Dependence::matern_spatial: return "matern_spatial";
    }
    return "independent";
}

Dependence parse_dependence(const std::string& s) {
    if (s == "independent") return Dependence::independent;
    if (s == "exp_spatial") return Dependence::exp_spatial;
    if (s == "matern_spatial") return Dependence::matern_spatial;
    throw ConfigError("unknown dependence '" + s + "' (independent, exp_spatial, matern_spatial)");
}

std::string selector_name(Selector s) { return s == Selector::cv ? "cv" : "bic"; }

Selector parse_selector(const std::string& s) {
    if (s == "cv") return Selector::cv;
    if (s == "bic") return Selector::bic;
    throw ConfigError("unknown selector '" + s + "' (cv, bic)");
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <class T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

}  // namespace

void apply_scenario_json(SimScenario& s, const json& j) {
    const std::string w = "scenario";
    check_keys(j,
               {"subjects", "time_points", "covariate_shape", "response_shape", "dependence",
                "exp_scale", "matern_kappa", "matern_nu", "chi_sd", "eta_sd", "measurement_sd",
                "measurement", "seed"},
               w);
    read(j, "subjects", s.subjects, w);
    read(j, "time_points", s.time_points, w);
    read(j, "covariate_shape", s.covariate_shape, w);
    read(j, "response_shape", s.response_shape, w);
    std::string dep;
    read(j, "dependence", dep, w);
    if (!dep.empty()) s.dependence = parse_dependence(dep);
    read(j, "exp_scale", s.exp_scale, w);
    read(j, "matern_kappa", s.matern_kappa, w);
    read(j, "matern_nu", s.matern_nu, w);
    read(j, "chi_sd", s.chi_sd, w);
    read(j, "eta_sd", s.eta_sd, w);
    read(j, "measurement_sd", s.measurement_sd, w);
    std::string me;
    read(j, "measurement", me, w);
    if (me == "in_response") {
        s.measurement = MeasurementErrorModel::in_response;
    } else if (me == "classical") {
        s.measurement = MeasurementErrorModel::classical;
    } else if (!me.empty()) {
        throw ConfigError("scenario.measurement: expected in_response or classical");
    }
    read(j, "seed", s.seed, w);
}

void apply_fit_json(FitConfig& f, const json& j) {
    const std::string w = "fit";
    check_keys(j,
               {"rank", "theta", "phi", "n_interior_knots", "degree", "tolerance", "max_iterations",
                "restarts", "seed"},
               w);
    read(j, "rank", f.rank, w);
    read(j, "theta", f.theta, w);
    read(j, "phi", f.phi, w);
    if (j.contains("n_interior_knots")) {
        if (j.at("n_interior_knots").is_null()) {
            f.n_interior_knots.reset();
        } else {
            std::size_t k = 0;
            read(j, "n_interior_knots", k, w);
            f.n_interior_knots = k;
        }
    }
    read(j, "degree", f.degree, w);
    read(j, "tolerance", f.tolerance, w);
    read(j, "max_iterations", f.max_iterations, w);
    read(j, "restarts", f.restarts, w);
    read(j, "seed", f.seed, w);
}

void apply_json(RunConfig& cfg, const json& j) {
    const std::string w = "config";
    check_keys(j,
               {"scenario", "fit", "grid", "selector", "k_folds", "bic_rss_floor", "seed", "reps",
                "workers", "covariates", "responses", "out", "export_grid", "export_points", "table",
                "scale", "blocks", "ranks"},
               w);
    if (j.contains("scenario")) apply_scenario_json(cfg.scenario, j.at("scenario"));
    if (j.contains("fit")) apply_fit_json(cfg.fit, j.at("fit"));
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        check_keys(g, {"theta", "phi", "rank"}, "grid");
        read(g, "theta", cfg.grid.theta, "grid");
        read(g, "phi", cfg.grid.phi, "grid");
        read(g, "rank", cfg.grid.rank, "grid");
    }
    std::string sel;
    read(j, "selector", sel, w);
    if (!sel.empty()) cfg.selector = parse_selector(sel);
    read(j, "k_folds", cfg.k_folds, w);
    read(j, "bic_rss_floor", cfg.bic_rss_floor, w);
    read(j, "seed", cfg.seed, w);
    if (j.contains("reps")) {
        std::size_t n = 0;
        read(j, "reps", n, w);
        cfg.reps = n;
    }
    read(j, "workers", cfg.workers, w);
    std::string path;
    if (j.contains("covariates")) {
        read(j, "covariates", path, w);
        cfg.covariates = path;
    }
    if (j.contains("responses")) {
        read(j, "responses", path, w);
        cfg.responses = path;
    }
    if (j.contains("out")) {
        read(j, "out", path, w);
        cfg.out = path;
    }
    read(j, "export_grid", cfg.export_grid, w);
    if (j.contains("export_points")) {
        std::size_t n = 0;
        read(j, "export_points", n, w);
        cfg.export_points = n;
    }
    read(j, "table", cfg.table, w);
    std::string scale;
    read(j, "scale", scale, w);
    if (scale == "desk") {
        cfg.scale = ReproduceScale::desk;
    } else if (scale == "full") {
        cfg.scale = ReproduceScale::full;
    } else if (!scale.empty()) {
        throw ConfigError("config.scale: expected desk or full");
    }
    read(j, "blocks", cfg.blocks, w);
    read(j, "ranks", cfg.ranks, w);
}

RunConfig load_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": invalid JSON: " + e.what());
    }
    RunConfig cfg;
    apply_json(cfg, j);
    return cfg;
}

void RunConfig::validate() const {
    try {
        scenario.validate();
        fit.validate();
        grid.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (reps && *reps < 1) throw ConfigError("reps must be >= 1");
    if (k_folds < 2) throw ConfigError("k_folds must be >= 2");
    if (!(bic_rss_floor >= 0.0)) throw ConfigError("bic_rss_floor must be >= 0");
    if (export_points && *export_points < 2) throw ConfigError("export_points must be >= 2");
    if (table != "I" && table != "II" && table != "III") {
        throw ConfigError("table must be I, II or III");
    }
    for (const auto b : blocks) {
        if (b < 1 || b > 4) throw ConfigError("blocks must lie in 1..4");
    }
    if (ranks.empty()) throw ConfigError("ranks must be non-empty");
    for (const auto r : ranks) {
        if (r < 1) throw ConfigError("ranks must be >= 1");
    }
}

json to_json(const SimScenario& s) {
    return json{{"subjects", s.subjects},
                {"time_points", s.time_points},
                {"covariate_shape", s.covariate_shape},
                {"response_shape", s.response_shape},
                {"dependence", dependence_name(s.dependence)},
                {"exp_scale", s.exp_scale},
                {"matern_kappa", s.matern_kappa},
                {"matern_nu", s.matern_nu},
                {"chi_sd", s.chi_sd},
                {"eta_sd", s.eta_sd},
                {"measurement_sd", s.measurement_sd},
                {"measurement",
                 s.measurement == MeasurementErrorModel::in_response ? "in_response" : "classical"},
                {"seed", s.seed}};
}

json to_json(const FitConfig& f) {
    return json{{"rank", f.rank},
                {"theta", f.theta},
                {"phi", f.phi},
                {"n_interior_knots", f.n_interior_knots ? json(*f.n_interior_knots) : json(nullptr)},
                {"degree", f.degree},
                {"tolerance", f.tolerance},
                {"max_iterations", f.max_iterations},
                {"restarts", f.restarts},
                {"seed", f.seed}};
}

json to_json(const SelectionGrid& g) {
    return json{{"theta", g.theta}, {"phi", g.phi}, {"rank", g.rank}};
}

json to_json(const RunConfig& cfg) {
    json j{{"scenario", to_json(cfg.scenario)},
           {"fit", to_json(cfg.fit)},
           {"grid", to_json(cfg.grid)},
           {"selector", selector_name(cfg.selector)},
           {"k_folds", cfg.k_folds},
           {"bic_rss_floor", cfg.bic_rss_floor},
           {"seed", cfg.seed},
           {"workers", cfg.workers},
           {"table", cfg.table},
           {"scale", cfg.scale == ReproduceScale::desk ? "desk" : "full"},
           {"blocks", cfg.blocks},
           {"ranks", cfg.ranks}};
    if (!cfg.export_grid.empty()) j["export_grid"] = cfg.export_grid;
    if (cfg.reps) j["reps"] = *cfg.reps;
    if (cfg.export_points) j["export_points"] = *cfg.export_points;
    return j;
}

}  // namespace tvtr::cli
