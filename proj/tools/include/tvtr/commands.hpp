// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tvtr/bspline.hpp"
#include "tvtr/cp_als.hpp"
#include "tvtr/metrics.hpp"
#include "tvtr/run_config.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tvtr::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kIo = 3, kNumerical = 4 };

/// Writes rep_NNN/{covariates,responses}.{json,csv} and rep_NNN/truth.json
/// for each replication. Replication r uses scenario seed derive_seed(seed, r).
void cmd_simulate(const RunConfig& cfg);

/// Writes fit.json and beta_hat.csv under cfg.out.
FitResult cmd_fit(const RunConfig& cfg);

/// Writes selection.json, selection.csv and winner/{fit.json,beta_hat.csv}.
/// Throws NumericalError when every cell failed.
SelectionReport cmd_select(const RunConfig& cfg);

/// Writes table_<T>.md, table_<T>.csv and table_<T>_replications.csv.
void cmd_reproduce(const RunConfig& cfg);

void write_fit(const std::filesystem::path& dir, const FitResult& fit, const ObservationSet& obs,
               std::span<const double> export_grid);

struct LoadedFit {
    CPFactors factors;
    BSplineBasis basis;
};

/// Reads the factors and basis from a fit.json.
LoadedFit load_fit(const std::filesystem::path& fit_json);

/// One table block: a sample size and mode shapes.
struct BlockSpec {
    std::size_t index = 1;
    std::size_t subjects = 30;
    Shape covariate_shape{5, 2};
    Shape response_shape{5, 2};
};

/// N in {30, 100} crossed with Q in {5x2, 15x12}, P = 5x2.
std::vector<BlockSpec> table_blocks();
Dependence table_dependence(const std::string& table);

struct RepOutcome {
    std::uint64_t seed = 0;
    MetricReport metrics;
    double signal_error = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

struct RankRow {
    std::size_t rank = 0;
    std::vector<RepOutcome> reps;
    MetricSummary summary;
};

struct BlockResult {
    BlockSpec spec;
    std::vector<RankRow> rows;
};

/// Replication r draws data from scenario seed derive_seed(seed, r) and fits
/// every rank on it with fit seed derive_seed(rep seed, 2). Metrics are per
/// entry on the design grid.
BlockResult run_block(SimScenario scenario, const BlockSpec& block, const FitConfig& fit,
                      std::span<const std::size_t> ranks, std::size_t reps, std::uint64_t seed,
                      std::size_t workers);

/// Parses argv and dispatches; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace tvtr::cli
