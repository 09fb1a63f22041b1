// SPDX-License-Identifier: Apache-2.0
#include "problems.hpp"

#include "tvtr/selection.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace tvtr {
namespace {

using test_support::noiseless_problem;
using test_support::random_observations;

TEST(Selection, ParameterCount) {
    // Rank 4, 24 basis functions, 5x2 covariates, 5x2 responses.
    EXPECT_EQ(parameter_count(4, 24, {5, 2}, {5, 2}), 152u);
    EXPECT_EQ(parameter_count(1, 10, {3}, {2, 2, 2}), 19u);
}

TEST(Selection, BicFromRssByHand) {
    const double rss = 12.5;
    const std::size_t rows = 40;
    const std::size_t q = 3;
    const double expect = 120.0 * std::log(12.5 / 120.0) + std::log(40.0) * 17.0;
    EXPECT_NEAR(bic_from_rss(rss, rows, q, 17), expect, 1e-12 * std::abs(expect));
    EXPECT_EQ(bic_from_rss(0.0, rows, q, 17), -std::numeric_limits<double>::infinity());
    EXPECT_THROW((void)bic_from_rss(-1.0, rows, q, 17), std::invalid_argument);
    EXPECT_THROW((void)bic_from_rss(1.0, 0, q, 17), std::invalid_argument);
}

TEST(Selection, BicGrowsWithParametersAtFixedRss) {
    const double a = bic_from_rss(3.0, 100, 4, parameter_count(2, 10, {3}, {4}));
    const double b = bic_from_rss(3.0, 100, 4, parameter_count(4, 10, {3}, {4}));
    EXPECT_GT(b, a);
}

TEST(Selection, FoldsPartitionSubjects) {
    for (std::size_t n : {5u, 7u, 23u}) {
        for (std::size_t k : {2u, 5u}) {
            if (n < k) continue;
            const auto folds = subject_folds(n, k, 3);
            ASSERT_EQ(folds.size(), k);
            std::set<std::size_t> seen;
            for (const auto& f : folds) {
                EXPECT_TRUE(std::is_sorted(f.begin(), f.end()));
                EXPECT_GE(f.size(), n / k);
                EXPECT_LE(f.size(), n / k + 1);
                for (auto i : f) EXPECT_TRUE(seen.insert(i).second);
            }
            EXPECT_EQ(seen.size(), n);
            EXPECT_EQ(*seen.rbegin(), n - 1);
        }
    }
    EXPECT_EQ(subject_folds(20, 5, 9), subject_folds(20, 5, 9));
    EXPECT_NE(subject_folds(20, 5, 9), subject_folds(20, 5, 10));
    const auto loo = subject_folds(6, 6, 1);
    for (const auto& f : loo) EXPECT_EQ(f.size(), 1u);
    EXPECT_THROW((void)subject_folds(3, 5, 0), std::invalid_argument);
    EXPECT_THROW((void)subject_folds(3, 1, 0), std::invalid_argument);
}

TEST(Selection, GridValidation) {
    const SelectionGrid g = SelectionGrid::standard();
    EXPECT_EQ(g.cells(), 120u);
    EXPECT_NO_THROW(g.validate());
    SelectionGrid bad = g;
    bad.rank = {0};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = g;
    bad.phi = {};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = g;
    bad.theta = {-0.1};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Selection, CellSeedDependsOnValuesOnly) {
    EXPECT_EQ(cell_seed(5, 0.01, 3.0, 2), cell_seed(5, 0.01, 3.0, 2));
    EXPECT_NE(cell_seed(5, 0.01, 3.0, 2), cell_seed(5, 0.01, 3.0, 3));
    EXPECT_NE(cell_seed(5, 0.01, 3.0, 2), cell_seed(5, 0.0, 3.0, 2));
    EXPECT_NE(cell_seed(5, 0.01, 3.0, 2), cell_seed(6, 0.01, 3.0, 2));
    EXPECT_EQ(cell_seed(5, 0.0, 0.0, 1), cell_seed(5, -0.0, 0.0, 1));
}

ObservationSet small_data(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return random_observations(6, 12, {2, 2}, {2}, rng);
}

FitConfig small_fit() {
    FitConfig c;
    c.n_interior_knots = 2;
    c.max_iterations = 30;
    c.tolerance = 1e-6;
    return c;
}

TEST(Selection, CvScoreIsDeterministic) {
    const ObservationSet o = small_data(1);
    FitConfig c = small_fit();
    c.rank = 2;
    const double a = cv_score(o, c, 3, 4);
    EXPECT_EQ(a, cv_score(o, c, 3, 4));
    EXPECT_GT(a, 0.0);
    EXPECT_THROW((void)cv_score(o, c, 1, 4), std::invalid_argument);
    EXPECT_THROW((void)cv_score(o, c, 7, 4), std::invalid_argument);
}

TEST(Selection, SingleCellWins) {
    const ObservationSet o = small_data(2);
    SelectionOptions opt;
    opt.base = small_fit();
    opt.k_folds = 3;
    const SelectionReport r = grid_search(o, SelectionGrid{{0.01}, {0.5}, {2}}, opt);
    ASSERT_EQ(r.cells.size(), 1u);
    ASSERT_TRUE(r.winner.has_value());
    EXPECT_EQ(*r.winner, 0u);
    EXPECT_TRUE(r.cells[0].cv.has_value());
    EXPECT_TRUE(std::isfinite(r.cells[0].bic));
}

TEST(Selection, GridOrderAndPermutationInvariance) {
    const ObservationSet o = small_data(3);
    SelectionOptions opt;
    opt.selector = Selector::bic;
    opt.base = small_fit();
    const SelectionReport a = grid_search(o, SelectionGrid{{0.0, 0.01}, {0.0, 1.0}, {1, 2}}, opt);
    const SelectionReport b = grid_search(o, SelectionGrid{{0.01, 0.0}, {1.0, 0.0}, {2, 1}}, opt);
    ASSERT_EQ(a.cells.size(), 8u);
    ASSERT_EQ(b.cells.size(), 8u);
    for (std::size_t k = 0; k < a.cells.size(); ++k) {
        EXPECT_EQ(a.cells[k].theta, b.cells[k].theta);
        EXPECT_EQ(a.cells[k].phi, b.cells[k].phi);
        EXPECT_EQ(a.cells[k].rank, b.cells[k].rank);
        EXPECT_EQ(a.cells[k].bic, b.cells[k].bic);
        EXPECT_FALSE(a.cells[k].cv.has_value());
    }
    EXPECT_EQ(a.winner, b.winner);
    // theta-major, then phi, then rank.
    EXPECT_EQ(a.cells[1].rank, 2u);
    EXPECT_EQ(a.cells[2].phi, 1.0);
    EXPECT_EQ(a.cells[4].theta, 0.01);
    const SelectionReport w = grid_search(o, SelectionGrid{{0.0, 0.01}, {0.0, 1.0}, {1, 2}}, [&] {
        SelectionOptions p = opt;
        p.workers = 3;
        return p;
    }());
    for (std::size_t k = 0; k < a.cells.size(); ++k) EXPECT_EQ(a.cells[k].bic, w.cells[k].bic);
}

TEST(Selection, TieBreakPrefersSmallRankThenLargePenalties) {
    // A floor of 1 treats every fit as exact, so every BIC ties at -inf.
    std::mt19937_64 rng(4);
    ObservationSet o = random_observations(4, 8, {2}, {2}, rng);
    o.responses[0].data()[0] = 1e-3;  // keep ||Y|| > 0
    for (std::size_t i = 1; i < o.subjects(); ++i) o.responses[i].fill(0.0);
    SelectionOptions opt;
    opt.selector = Selector::bic;
    opt.base = small_fit();
    opt.bic_rss_floor = 1.0;
    const SelectionReport r = grid_search(o, SelectionGrid{{0.0, 0.01}, {0.0, 2.0}, {1, 2}}, opt);
    ASSERT_TRUE(r.winner.has_value());
    const CellResult& w = r.cells[*r.winner];
    EXPECT_TRUE(w.bic_floored);
    EXPECT_EQ(w.rank, 1u);
    EXPECT_EQ(w.phi, 2.0);
    EXPECT_EQ(w.theta, 0.01);
}

TEST(Selection, FailedCellsAreKeptAndNeverWin) {
    const ObservationSet o = small_data(5);
    SelectionOptions opt;
    opt.selector = Selector::bic;
    opt.base = small_fit();
    opt.base.degree = 1;  // no curvature: theta > 0 is rejected per cell
    const SelectionReport r = grid_search(o, SelectionGrid{{0.0, 0.1}, {0.0}, {1}}, opt);
    ASSERT_EQ(r.cells.size(), 2u);
    EXPECT_FALSE(r.cells[0].failed);
    EXPECT_TRUE(r.cells[1].failed);
    EXPECT_FALSE(r.cells[1].error.empty());
    EXPECT_TRUE(std::isnan(r.cells[1].score(Selector::bic)));
    EXPECT_EQ(r.winner, std::optional<std::size_t>{0});
    const SelectionReport all = grid_search(o, SelectionGrid{{0.1}, {0.0}, {1}}, opt);
    EXPECT_FALSE(all.winner.has_value());
}

TEST(Selection, BicRecoversRankOnNoiselessData) {
    std::mt19937_64 rng(6);
    auto prob = noiseless_problem(12, 20, {3, 2}, {2, 2}, 4, 2, rng);
    // Small noise so that exact fits do not all tie at -inf.
    std::normal_distribution<double> e(0.0, 1e-3);
    for (auto& y : prob.obs.responses) {
        for (auto& v : y.values()) v += e(rng);
    }
    SelectionOptions opt;
    opt.selector = Selector::bic;
    opt.base.n_interior_knots = 4;
    opt.base.tolerance = 1e-10;
    opt.base.max_iterations = 500;
    opt.base.restarts = 3;
    const SelectionReport r = grid_search(prob.obs, SelectionGrid{{0.0}, {0.0}, {1, 2, 3}}, opt);
    ASSERT_TRUE(r.winner.has_value());
    EXPECT_EQ(r.cells[*r.winner].rank, 2u);
}

TEST(Selection, WinnerReproducibleByRefit) {
    const ObservationSet o = small_data(7);
    SelectionOptions opt;
    opt.selector = Selector::bic;
    opt.base = small_fit();
    opt.seed = 11;
    const SelectionReport r = grid_search(o, SelectionGrid{{0.0, 0.01}, {0.5}, {1, 2}}, opt);
    ASSERT_TRUE(r.winner.has_value());
    const CellResult& w = r.cells[*r.winner];
    FitConfig c = opt.base;
    c.theta = w.theta;
    c.phi = w.phi;
    c.rank = w.rank;
    c.seed = w.seed;
    const FitResult f = fit(o, c);
    EXPECT_EQ(data_rss(f, o), w.rss);
    EXPECT_EQ(bic(f, o), w.bic);
}

}  // namespace
}  // namespace tvtr
