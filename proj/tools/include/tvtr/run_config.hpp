// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tvtr/cp_als.hpp"
#include "tvtr/selection.hpp"
#include "tvtr/simulation.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tvtr::cli {

enum class ReproduceScale { desk, full };

/// Everything a command can read from a config file. Keys mirror the CLI
/// flags; flags are applied on top of the file.
struct RunConfig {
    SimScenario scenario;
    FitConfig fit;
    SelectionGrid grid = SelectionGrid::standard();
    Selector selector = Selector::cv;
    std::size_t k_folds = 5;
    double bic_rss_floor = 1e-10;

    std::uint64_t seed = 0;
    /// Replications; simulate defaults to 1, reproduce to the scale's count.
    std::optional<std::size_t> reps;
    std::size_t workers = 1;

    std::filesystem::path covariates;
    std::filesystem::path responses;
    std::filesystem::path out = "out";

    /// beta_hat export grid; the data's time grid when empty and
    /// export_points is unset.
    std::vector<double> export_grid;
    std::optional<std::size_t> export_points;

    std::string table = "I";
    ReproduceScale scale = ReproduceScale::desk;
    /// Table blocks to run (1-based); all when empty.
    std::vector<std::size_t> blocks;
    std::vector<std::size_t> ranks{1, 2, 3, 4, 5};

    /// Throws ConfigError.
    void validate() const;
};

/// Overlays the keys present in `j` on `cfg`. Throws ConfigError on unknown
/// keys or wrong types.
void apply_json(RunConfig& cfg, const nlohmann::json& j);
/// `scenario` may be the bare scenario object.
void apply_scenario_json(SimScenario& s, const nlohmann::json& j);
void apply_fit_json(FitConfig& f, const nlohmann::json& j);

RunConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const SimScenario& s);
nlohmann::json to_json(const FitConfig& f);
nlohmann::json to_json(const SelectionGrid& g);
nlohmann::json to_json(const RunConfig& cfg);

std::string dependence_name(Dependence d);
Dependence parse_dependence(const std::string& s);
std::string selector_name(Selector s);
Selector parse_selector(const std::string& s);

}  // namespace tvtr::cli
