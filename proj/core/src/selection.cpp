// SPDX-License-Identifier: Apache-2.0
#include "tvtr/selection.hpp"

#include "tvtr/parallel.hpp"
#include "tvtr/random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tvtr {

SelectionGrid SelectionGrid::standard() {
    return SelectionGrid{{0.0, 0.001, 0.005, 0.01, 0.05, 0.1}, {0.0, 0.5, 3.0, 10.0}, {1, 2, 3, 4, 5}};
}

void SelectionGrid::validate() const {
    if (theta.empty() || phi.empty() || rank.empty()) {
        throw std::invalid_argument("SelectionGrid: theta, phi and rank lists must be non-empty");
    }
    for (const double v : theta) {
        if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("SelectionGrid: theta < 0");
    }
    for (const double v : phi) {
        if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("SelectionGrid: phi < 0");
    }
    for (const std::size_t r : rank) {
        if (r == 0) throw std::invalid_argument("SelectionGrid: rank must be >= 1");
    }
}

double CellResult::score(Selector s) const {
    if (failed) return std::numeric_limits<double>::quiet_NaN();
    if (s == Selector::bic) return bic;
    return cv.value_or(std::numeric_limits<double>::quiet_NaN());
}

std::size_t parameter_count(std::size_t rank, std::size_t basis_size, const Shape& covariate_shape,
                            const Shape& response_shape) {
    const std::size_t sp = std::accumulate(covariate_shape.begin(), covariate_shape.end(), std::size_t{0});
    const std::size_t sq = std::accumulate(response_shape.begin(), response_shape.end(), std::size_t{0});
    return rank * (basis_size + sp + sq);
}

double bic_from_rss(double rss, std::size_t rows, std::size_t responses, std::size_t p_e) {
    if (!(rss >= 0.0)) throw std::invalid_argument("bic_from_rss: rss must be >= 0");
    if (rows == 0 || responses == 0) throw std::invalid_argument("bic_from_rss: empty data");
    if (rss == 0.0) return -std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(rows * responses);
    return n * std::log(rss / n) + std::log(static_cast<double>(rows)) * static_cast<double>(p_e);
}

double data_rss(const FitResult& fit, const ObservationSet& obs) {
    const StackedDesign d = build_design(obs, fit.basis);
    return residual_sum_of_squares(d.z, d.y, fit.factors);
}

double bic(const FitResult& fit, const ObservationSet& obs) {
    const std::size_t rows = obs.subjects() * obs.time_points();
    const std::size_t q = shape_size(obs.response_shape());
    const std::size_t p_e = parameter_count(fit.factors.rank(), fit.basis.size(),
                                            obs.covariate_shape(), obs.response_shape());
    return bic_from_rss(data_rss(fit, obs), rows, q, p_e);
}

std::vector<std::vector<std::size_t>> subject_folds(std::size_t subjects, std::size_t k_folds,
                                                    std::uint64_t seed) {
    if (k_folds < 2) throw std::invalid_argument("subject_folds: need at least 2 folds");
    if (subjects < k_folds) {
        throw std::invalid_argument("subject_folds: fewer subjects than folds");
    }
    std::vector<std::size_t> perm(subjects);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    // Fisher-Yates with raw engine output keeps the permutation identical
    // across standard libraries.
    Rng rng(seed);
    for (std::size_t i = subjects; i > 1; --i) {
        const std::size_t k = static_cast<std::size_t>(rng() % i);
        std::swap(perm[i - 1], perm[k]);
    }
    std::vector<std::vector<std::size_t>> folds(k_folds);
    for (std::size_t i = 0; i < subjects; ++i) folds[i % k_folds].push_back(perm[i]);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

double cv_score(const ObservationSet& obs, const FitConfig& cfg, std::size_t k_folds,
                std::uint64_t seed) {
    obs.validate();
    const auto folds = subject_folds(obs.subjects(), k_folds, seed);
    double sse = 0.0;
    std::size_t rows = 0;
    std::vector<char> held(obs.subjects());
    for (const auto& fold : folds) {
        std::fill(held.begin(), held.end(), 0);
        for (const std::size_t i : fold) held[i] = 1;
        std::vector<std::size_t> train;
        for (std::size_t i = 0; i < obs.subjects(); ++i) {
            if (!held[i]) train.push_back(i);
        }
        const ObservationSet test_set = obs.subset(fold);
        const FitResult f = fit(obs.subset(train), cfg);
        sse += data_rss(f, test_set);
        rows += test_set.subjects() * test_set.time_points();
    }
    return sse / static_cast<double>(rows);
}

std::uint64_t cell_seed(std::uint64_t base, double theta, double phi, std::size_t rank) {
    std::uint64_t h = splitmix64(std::bit_cast<std::uint64_t>(theta + 0.0));
    h = splitmix64(h ^ std::bit_cast<std::uint64_t>(phi + 0.0));
    h = splitmix64(h ^ static_cast<std::uint64_t>(rank));
    return derive_seed(base, h);
}

namespace {

template <class T>
std::vector<T> sorted_unique(std::vector<T> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// True when a should win over b.
bool better(const CellResult& a, const CellResult& b, Selector s) {
    const double sa = a.score(s);
    const double sb = b.score(s);
    if (sa != sb) return sa < sb;
    if (a.rank != b.rank) return a.rank < b.rank;
    if (a.phi != b.phi) return a.phi > b.phi;
    return a.theta > b.theta;
}

}  // namespace

SelectionReport grid_search(const ObservationSet& obs, const SelectionGrid& grid,
                            const SelectionOptions& options) {
    grid.validate();
    obs.validate();
    options.base.validate();
    if (options.selector == Selector::cv) {
        subject_folds(obs.subjects(), options.k_folds, options.seed);  // validates K against N
    }
    const auto thetas = sorted_unique(grid.theta);
    const auto phis = sorted_unique(grid.phi);
    const auto ranks = sorted_unique(grid.rank);

    SelectionReport report;
    report.selector = options.selector;
    for (const double th : thetas) {
        for (const double ph : phis) {
            for (const std::size_t r : ranks) {
                CellResult c;
                c.theta = th;
                c.phi = ph;
                c.rank = r;
                c.seed = cell_seed(options.seed, th, ph, r);
                report.cells.push_back(std::move(c));
            }
        }
    }

    double y_norm2 = 0.0;
    for (const auto& y : obs.responses) y_norm2 += vectorize(y).squaredNorm();
    const std::size_t rows = obs.subjects() * obs.time_points();
    const std::size_t q = shape_size(obs.response_shape());

    parallel_for(report.cells.size(), resolve_workers(options.workers), [&](std::size_t k) {
        CellResult& c = report.cells[k];
        FitConfig cfg = options.base;
        cfg.theta = c.theta;
        cfg.phi = c.phi;
        cfg.rank = c.rank;
        cfg.seed = c.seed;
        try {
            const FitResult f = fit(obs, cfg);
            c.rss = data_rss(f, obs);
            c.final_objective = f.final_objective();
            c.iterations = f.iterations;
            c.converged = f.converged;
            const std::size_t p_e = parameter_count(c.rank, f.basis.size(),
                                                    obs.covariate_shape(), obs.response_shape());
            c.bic_floored = c.rss <= options.bic_rss_floor * y_norm2;
            c.bic = c.bic_floored ? -std::numeric_limits<double>::infinity()
                                  : bic_from_rss(c.rss, rows, q, p_e);
            if (options.selector == Selector::cv) {
                c.cv = cv_score(obs, cfg, options.k_folds, options.seed);
            }
        } catch (const std::exception& e) {
            c.failed = true;
            c.error = e.what();
        }
    });

    for (std::size_t k = 0; k < report.cells.size(); ++k) {
        const CellResult& c = report.cells[k];
        if (c.failed || std::isnan(c.score(options.selector))) continue;
        if (!report.winner || better(c, report.cells[*report.winner], options.selector)) {
            report.winner = k;
        }
    }
    return report;
}

}  // namespace tvtr
