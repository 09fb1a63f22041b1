// SPDX-License-Identifier: Apache-2.0
#include "problems.hpp"

#include "tvtr/design.hpp"

#include <gtest/gtest.h>

namespace tvtr {
namespace {

using test_support::random_observations;

TEST(Design, ValidateCatchesBrokenInvariants) {
    std::mt19937_64 rng(1);
    ObservationSet o = random_observations(3, 5, {2}, {2}, rng);
    EXPECT_NO_THROW(o.validate());
    ObservationSet bad = o;
    bad.time_grids[1][2] = bad.time_grids[1][1];
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = o;
    bad.responses.pop_back();
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = o;
    bad.covariates[0] = DenseTensor(Shape{5, 3});
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    EXPECT_THROW(ObservationSet{}.validate(), std::invalid_argument);
}

TEST(Design, RowLayoutIsSubjectMajor) {
    std::mt19937_64 rng(2);
    for (bool jitter : {false, true}) {
        const ObservationSet o = random_observations(3, 6, {2, 2}, {3}, rng, jitter);
        const BSplineBasis b(1.0, 3, 2);
        const StackedDesign d = build_design(o, b);
        ASSERT_EQ(d.z.shape(), (Shape{18, b.size(), 2, 2}));
        ASSERT_EQ(d.y.shape(), (Shape{18, 3}));
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 6; ++j) {
                const Eigen::VectorXd bv = b.evaluate(o.time_grids[i][j]);
                for (std::size_t h = 0; h < b.size(); ++h) {
                    for (std::size_t p1 = 0; p1 < 2; ++p1) {
                        for (std::size_t p2 = 0; p2 < 2; ++p2) {
                            EXPECT_DOUBLE_EQ(d.z.at({i * 6 + j, h, p1, p2}),
                                             o.covariates[i].at({j, p1, p2}) * bv(static_cast<Eigen::Index>(h)));
                        }
                    }
                }
                for (std::size_t q = 0; q < 3; ++q) {
                    EXPECT_EQ(d.y.at({i * 6 + j, q}), o.responses[i].at({j, q}));
                }
            }
        }
    }
}

TEST(Design, BasisMustCoverDomain) {
    std::mt19937_64 rng(3);
    ObservationSet o = random_observations(2, 4, {2}, {2}, rng);
    o.domain_end = 2.0;
    EXPECT_THROW((void)build_design(o, BSplineBasis(1.0, 3, 2)), std::domain_error);
}

TEST(Design, PenaltySqrtSquaresToPenalty) {
    const BSplineBasis b(1.0, 3, 6);
    const Eigen::MatrixXd g = penalty_gram(b);
    for (double theta : {0.0, 0.01, 3.0}) {
        for (double phi : {0.0, 0.5, 10.0}) {
            const Eigen::MatrixXd s = penalty_sqrt(g, theta, phi);
            const Eigen::MatrixXd m = theta * g + phi * Eigen::MatrixXd::Identity(g.rows(), g.cols());
            EXPECT_LT((s.transpose() * s - m).norm(), 1e-10 * std::max(1.0, m.norm()));
        }
    }
    const Eigen::MatrixXd s0 = penalty_sqrt(g, 0.0, 4.0);
    EXPECT_EQ(s0, 2.0 * Eigen::MatrixXd::Identity(g.rows(), g.cols()));
    EXPECT_THROW((void)penalty_sqrt(g, -1.0, 0.0), std::invalid_argument);
    EXPECT_THROW((void)penalty_sqrt(g, 0.0, -1.0), std::invalid_argument);
}

TEST(Design, AugmentedResidualEqualsPenalizedLoss) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> w(0.0, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        const ObservationSet o = random_observations(3, 8, {2, 2}, {2}, rng);
        const BSplineBasis b(1.0, 3, 2);
        const double theta = w(rng);
        const double phi = w(rng);
        const AugmentedSystem sys = build_augmented_system(o, b, theta, phi);
        EXPECT_EQ(sys.data_rows, 24u);
        EXPECT_EQ(sys.penalty_rows, b.size() * 4);
        EXPECT_EQ(sys.coefficient_shape(), (Shape{b.size(), 2, 2, 2}));
        const DenseTensor B = oracle::random_tensor(sys.coefficient_shape(), rng);
        const DenseTensor pred = contracted_product(sys.z, B, 3);
        const double aug = (vectorize(sys.y) - vectorize(pred)).squaredNorm();
        const StackedDesign d = build_design(o, b);
        const double direct = oracle::penalized_loss(d.z, d.y, B, penalty_gram(b), theta, phi);
        EXPECT_LT(std::abs(aug - direct) / direct, 1e-10);
    }
}

TEST(Design, SubsetKeepsOrder) {
    std::mt19937_64 rng(5);
    const ObservationSet o = random_observations(4, 3, {2}, {2}, rng);
    const std::vector<std::size_t> pick{3, 1};
    const ObservationSet s = o.subset(pick);
    ASSERT_EQ(s.subjects(), 2u);
    EXPECT_EQ(s.covariates[0], o.covariates[3]);
    EXPECT_EQ(s.responses[1], o.responses[1]);
    const std::vector<std::size_t> bad{4};
    EXPECT_THROW((void)o.subset(bad), std::out_of_range);
}

}  // namespace
}  // namespace tvtr
