// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tvtr/cp_als.hpp"
#include "tvtr/design.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tvtr {

enum class Selector { cv, bic };

struct SelectionGrid {
    std::vector<double> theta{0.0};
    std::vector<double> phi{0.0};
    std::vector<std::size_t> rank{1};

    /// theta in {0, .001, .005, .01, .05, .1}, phi in {0, .5, 3, 10}, rank 1..5.
    static SelectionGrid standard();
    /// Throws std::invalid_argument on empty lists, negative or non-finite
    /// penalties, or rank 0.
    void validate() const;
    [[nodiscard]] std::size_t cells() const noexcept {
        return theta.size() * phi.size() * rank.size();
    }
};

struct SelectionOptions {
    Selector selector = Selector::cv;
    std::size_t k_folds = 5;
    /// Base fit settings; theta, phi, rank and seed are overridden per cell.
    FitConfig base;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    /// RSS at or below this fraction of ||Y||^2 counts as an exact fit and
    /// scores BIC = -inf. Round-off residuals of exact fits would otherwise
    /// decide the ranking.
    double bic_rss_floor = 1e-10;
};

struct CellResult {
    double theta = 0.0;
    double phi = 0.0;
    std::size_t rank = 0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    std::optional<double> cv;
    double bic = 0.0;
    bool bic_floored = false;
    double rss = 0.0;
    double final_objective = 0.0;
    std::size_t iterations = 0;
    bool converged = false;

    [[nodiscard]] double score(Selector s) const;
};

struct SelectionReport {
    Selector selector = Selector::cv;
    std::vector<CellResult> cells;  ///< theta-major, then phi, then rank; ascending
    std::optional<std::size_t> winner;
};

/// R (H + sum P_l + sum Q_m).
std::size_t parameter_count(std::size_t rank, std::size_t basis_size, const Shape& covariate_shape,
                            const Shape& response_shape);

/// NJQ log(RSS / (NJQ)) + log(NJ) p_e; -inf when rss == 0.
double bic_from_rss(double rss, std::size_t rows, std::size_t responses, std::size_t p_e);

/// Unpenalized residual sum of squares of `fit` on the data rows of `obs`.
double data_rss(const FitResult& fit, const ObservationSet& obs);

double bic(const FitResult& fit, const ObservationSet& obs);

/// Subject-wise K-fold partition: a seeded permutation dealt round-robin.
/// Each fold lists its subjects in ascending order.
std::vector<std::vector<std::size_t>> subject_folds(std::size_t subjects, std::size_t k_folds,
                                                    std::uint64_t seed);

/// Pooled held-out SSE divided by the number of held-out rows.
/// Throws std::invalid_argument when k_folds < 2 or N < k_folds.
double cv_score(const ObservationSet& obs, const FitConfig& cfg, std::size_t k_folds,
                std::uint64_t seed);

/// Per-cell seed, a function of the cell values only.
std::uint64_t cell_seed(std::uint64_t base, double theta, double phi, std::size_t rank);

/// Exhaustive sweep. Ties go to smaller rank, then larger phi, then larger
/// theta. Failed cells are kept and never win.
SelectionReport grid_search(const ObservationSet& obs, const SelectionGrid& grid,
                            const SelectionOptions& options);

}  // namespace tvtr
