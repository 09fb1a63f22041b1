// SPDX-License-Identifier: Apache-2.0
#include "tvtr/random.hpp"
#include "tvtr/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace tvtr {
namespace {

TEST(Simulation, TrueBetaValues) {
    EXPECT_NEAR(true_beta(1, 1, 1, 1, 0.0), 2.0, 1e-15);
    EXPECT_NEAR(true_beta(3, 2, 4, 5, 0.25), 4.0 - 5.0, 1e-14);
    EXPECT_NEAR(true_beta(2, 1, 1, 1, 0.5), -2.0 + 1.0, 1e-14);
    const DenseTensor b = true_beta_tensor({5, 2}, {5, 2}, 0.3);
    ASSERT_EQ(b.shape(), (Shape{5, 2, 5, 2}));
    EXPECT_EQ(b.at({4, 1, 2, 0}), true_beta(5, 2, 3, 1, 0.3));
    EXPECT_THROW((void)true_beta_tensor({5}, {5, 2}, 0.3), std::invalid_argument);
}

TEST(Simulation, DesignGrid) {
    const auto t = design_grid(81);
    ASSERT_EQ(t.size(), 81u);
    EXPECT_DOUBLE_EQ(t[0], 0.5 / 81.0);
    EXPECT_DOUBLE_EQ(t[80], 80.5 / 81.0);
    EXPECT_DOUBLE_EQ(design_grid(4, 2.0)[1], 0.75);
}

TEST(Simulation, CorrelationFunctions) {
    EXPECT_DOUBLE_EQ(exp_correlation(0.0, 8.0), 1.0);
    EXPECT_DOUBLE_EQ(exp_correlation(8.0, 8.0), std::exp(-1.0));
    EXPECT_THROW((void)exp_correlation(1.0, 0.0), std::invalid_argument);
    // Reference values from an arbitrary-precision evaluation, nu = 1, kappa = 0.55.
    EXPECT_EQ(matern_correlation(0.0, 0.55, 1.0), 1.0);
    EXPECT_NEAR(matern_correlation(0.5, 0.55, 1.0), 0.3239757756695598530, 1e-8);
    EXPECT_NEAR(matern_correlation(1.0, 0.55, 1.0), 0.06900620244218654560, 1e-8);
    EXPECT_NEAR(matern_correlation(2.0, 0.55, 1.0), 0.002462723314028181819, 1e-8);
    // nu = 1/2 is the exponential kernel exp(-sqrt(2) d / kappa).
    for (double d : {0.1, 1.0, 3.0}) {
        EXPECT_NEAR(matern_correlation(d, 0.7, 0.5), std::exp(-std::sqrt(2.0) * d / 0.7), 1e-12);
    }
    EXPECT_EQ(matern_correlation(1e4, 0.55, 1.0), 0.0);
    EXPECT_THROW((void)matern_correlation(-1.0, 0.55, 1.0), std::invalid_argument);
}

TEST(Simulation, ModeCorrelationUsesLatticeDistance) {
    SimScenario s;
    s.covariate_shape = {3, 2};
    EXPECT_EQ(mode_correlation(s), Eigen::MatrixXd::Identity(6, 6));
    s.dependence = Dependence::exp_spatial;
    const Eigen::MatrixXd c = mode_correlation(s);
    // (p1, p2) = (0, 0) vs (2, 1): distance sqrt(5). Index p1 + 3 p2.
    EXPECT_DOUBLE_EQ(c(0, 5), std::exp(-std::sqrt(5.0) / 8.0));
    EXPECT_DOUBLE_EQ(c(1, 4), std::exp(-1.0 / 8.0));
    EXPECT_EQ(c.diagonal(), Eigen::VectorXd::Ones(6));
}

TEST(Simulation, ValidateRejectsBadScenarios) {
    SimScenario s;
    EXPECT_NO_THROW(s.validate());
    s.covariate_shape = {5, 2, 2};
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = SimScenario{};
    s.subjects = 0;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = SimScenario{};
    s.measurement_sd = -1.0;
    EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Simulation, ConstantComponentMoments) {
    SimScenario s;
    s.subjects = 4000;
    s.time_points = 3;
    s.chi_sd = {1.0, 0.0, 0.0};
    s.measurement_sd = 0.0;
    const CovariateDraw d = gen_covariates(s, 21);
    double sum = 0.0;
    double sq = 0.0;
    std::size_t n = 0;
    for (const auto& x : d.x) {
        const auto m = x.as_matrix(3);
        EXPECT_EQ(m.row(0), m.row(2));  // constant in t
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            sum += m(0, k);
            sq += m(0, k) * m(0, k);
            ++n;
        }
    }
    const double mean = sum / static_cast<double>(n);
    EXPECT_NEAR(mean, 0.0, 0.02);
    EXPECT_NEAR(sq / static_cast<double>(n) - mean * mean, 1.0, 0.03);
    for (std::size_t i = 0; i < s.subjects; ++i) EXPECT_EQ(d.x[i], d.u[i]);
}

TEST(Simulation, MeasurementErrorIsConstantInTime) {
    SimScenario s;
    s.subjects = 3;
    s.time_points = 5;
    const CovariateDraw d = gen_covariates(s, 1);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto x = d.x[i].as_matrix(5);
        const auto u = d.u[i].as_matrix(5);
        for (Eigen::Index j = 0; j < 5; ++j) {
            const Eigen::RowVectorXd diff = u.row(j) - x.row(j);
            for (Eigen::Index k = 0; k < diff.size(); ++k) EXPECT_NEAR(diff(k), d.delta[i].data()[k], 1e-14);
        }
    }
}

TEST(Simulation, ErrorVarianceProfile) {
    SimScenario s;
    s.subjects = 2000;
    s.time_points = 9;
    const auto e = gen_errors(s, 5);
    const auto t = design_grid(9);
    for (std::size_t j : {0u, 4u, 8u}) {
        double sq = 0.0;
        std::size_t n = 0;
        for (const auto& ei : e) {
            const auto m = ei.as_matrix(9);
            sq += m.row(static_cast<Eigen::Index>(j)).squaredNorm();
            n += static_cast<std::size_t>(m.cols());
        }
        const double c = std::cos(std::numbers::pi * t[j]);
        const double sn = std::sin(std::numbers::pi * t[j]);
        const double var = 2.0 * (4.0 * c * c + 0.5625 * sn * sn);
        EXPECT_NEAR(sq / static_cast<double>(n) / var, 1.0, 0.03) << "t = " << t[j];
    }
}

TEST(Simulation, SpatialCorrelationIsReproduced) {
    for (Dependence dep : {Dependence::exp_spatial, Dependence::matern_spatial}) {
        SimScenario s;
        s.subjects = 10000;
        s.time_points = 1;
        s.dependence = dep;
        s.chi_sd = {1.0, 0.0, 0.0};
        s.measurement_sd = 0.0;
        const CovariateDraw d = gen_covariates(s, 8);
        Eigen::MatrixXd samples(static_cast<Eigen::Index>(s.subjects), 10);
        for (std::size_t i = 0; i < s.subjects; ++i) {
            samples.row(static_cast<Eigen::Index>(i)) = d.x[i].as_matrix(1).row(0);
        }
        const Eigen::MatrixXd emp = samples.transpose() * samples / static_cast<double>(s.subjects);
        const Eigen::MatrixXd c = mode_correlation(s);
        EXPECT_LT((emp - c).cwiseAbs().maxCoeff(), 0.05);
    }
}

TEST(Simulation, ZeroInputsGiveZeroResponses) {
    SimScenario s;
    s.subjects = 3;
    s.chi_sd = {0.0, 0.0, 0.0};
    s.eta_sd = {0.0, 0.0};
    s.measurement_sd = 0.0;
    const SimDataset d = generate(s);
    for (const auto& y : d.observed.responses) EXPECT_EQ(vectorize(y).norm(), 0.0);
}

TEST(Simulation, ResponsesDecompose) {
    for (auto model : {MeasurementErrorModel::in_response, MeasurementErrorModel::classical}) {
        SimScenario s;
        s.subjects = 4;
        s.time_points = 11;
        s.seed = 3;
        s.measurement = model;
        const SimDataset d = generate(s);
        ASSERT_NO_THROW(d.observed.validate());
        const auto t = design_grid(11);
        for (std::size_t i = 0; i < 4; ++i) {
            const Eigen::VectorXd r = vectorize(d.observed.responses[i]) - vectorize(d.signal[i]) - vectorize(d.errors[i]);
            EXPECT_LT(r.norm(), 1e-12);
            const DenseTensor& drv = model == MeasurementErrorModel::in_response ? d.observed.covariates[i] : d.x_true[i];
            for (std::size_t j : {0u, 7u}) {
                const DenseTensor b = true_beta_tensor({5, 2}, {5, 2}, t[j]);
                for (std::size_t q = 0; q < 10; ++q) {
                    double s2 = 0.0;
                    for (std::size_t p = 0; p < 10; ++p) s2 += drv.data()[j + 11 * p] * b.data()[p + 10 * q];
                    EXPECT_NEAR(d.signal[i].data()[j + 11 * q], s2, 1e-12);
                }
            }
        }
        // Same seed, same data; covariates and errors use separate streams.
        EXPECT_EQ(generate(s).observed.responses[2], d.observed.responses[2]);
        EXPECT_EQ(gen_errors(s, derive_seed(s.seed, 1))[1], d.errors[1]);
    }
}

}  // namespace
}  // namespace tvtr
