// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include "tvtr/cp_factors.hpp"
#include "tvtr/tensor.hpp"

#include <gtest/gtest.h>

namespace tvtr {
namespace {

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double n = b.norm();
    return (a - b).norm() / (n > 0.0 ? n : 1.0);
}

TEST(Tensor, ShapeSize) {
    EXPECT_EQ(shape_size(Shape{}), 1u);
    EXPECT_EQ(shape_size(Shape{3, 4, 2}), 24u);
    EXPECT_EQ(shape_size(Shape{3, 0}), 0u);
}

TEST(Tensor, ConstructionRejectsWrongValueCount) {
    EXPECT_THROW(DenseTensor(Shape{2, 3}, std::vector<double>(5)), std::invalid_argument);
    EXPECT_NO_THROW(DenseTensor(Shape{2, 3}, std::vector<double>(6)));
}

TEST(Tensor, FirstIndexFastestLayout) {
    DenseTensor t(Shape{2, 3, 2});
    for (std::size_t k = 0; k < t.size(); ++k) t.data()[k] = static_cast<double>(k);
    EXPECT_EQ(t.at({1, 0, 0}), 1.0);
    EXPECT_EQ(t.at({0, 1, 0}), 2.0);
    EXPECT_EQ(t.at({0, 0, 1}), 6.0);
    EXPECT_EQ(t.at({1, 2, 1}), 11.0);
    EXPECT_THROW((void)t.at({2, 0, 0}), std::out_of_range);
    EXPECT_THROW((void)t.dim(3), std::out_of_range);
}

TEST(Tensor, NextIndexVisitsAllThenWraps) {
    const Shape s{2, 3};
    Shape idx(2, 0);
    std::size_t visited = 1;
    while (next_index(idx, s)) ++visited;
    EXPECT_EQ(visited, 6u);
    EXPECT_EQ(idx, (Shape{0, 0}));
}

TEST(Tensor, UnfoldMatchesOracle) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const Shape s = oracle::random_shape(1 + trial % 4, 4, rng);
        const DenseTensor t = oracle::random_tensor(s, rng);
        for (std::size_t m = 0; m < s.size(); ++m) {
            const Eigen::MatrixXd u = unfold(t, m);
            EXPECT_EQ(rel_diff(u, oracle::unfold(t, m)), 0.0);
            EXPECT_EQ(refold(u, m, s), t);
        }
    }
}

TEST(Tensor, UnfoldRejectsBadMode) {
    const DenseTensor t(Shape{2, 2});
    EXPECT_THROW((void)unfold(t, 2), std::out_of_range);
    EXPECT_THROW((void)refold(Eigen::MatrixXd::Zero(3, 2), 0, Shape{2, 2}), std::invalid_argument);
}

TEST(Tensor, ContractedProductMatchesOracle) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t lead = trial % 3;
        const std::size_t l = 1 + trial % 2;
        const std::size_t trail = (trial / 3) % 3;
        const Shape a_lead = oracle::random_shape(lead, 3, rng);
        const Shape shared = oracle::random_shape(l, 3, rng);
        const Shape b_trail = oracle::random_shape(trail, 3, rng);
        Shape as = a_lead;
        as.insert(as.end(), shared.begin(), shared.end());
        Shape bs = shared;
        bs.insert(bs.end(), b_trail.begin(), b_trail.end());
        const DenseTensor a = oracle::random_tensor(as, rng);
        const DenseTensor b = oracle::random_tensor(bs, rng);
        const DenseTensor c = contracted_product(a, b, l);
        const DenseTensor o = oracle::contracted_product(a, b, l);
        ASSERT_EQ(c.shape(), o.shape());
        EXPECT_LT(rel_diff(vectorize(c), vectorize(o)), 1e-13);
    }
}

TEST(Tensor, ContractedProductFullContractionIsInner) {
    std::mt19937_64 rng(13);
    const DenseTensor a = oracle::random_tensor({3, 2, 4}, rng);
    const DenseTensor b = oracle::random_tensor({3, 2, 4}, rng);
    const DenseTensor c = contracted_product(a, b, 3);
    EXPECT_EQ(c.order(), 0u);
    EXPECT_NEAR(c.data()[0], frobenius_inner(a, b), 1e-12);
}

TEST(Tensor, ContractedProductRejectsMismatch) {
    const DenseTensor a(Shape{2, 3});
    const DenseTensor b(Shape{4, 2});
    EXPECT_THROW((void)contracted_product(a, b, 1), std::invalid_argument);
    EXPECT_THROW((void)contracted_product(a, b, 3), std::invalid_argument);
}

TEST(Tensor, ModeVectorProduct) {
    std::mt19937_64 rng(14);
    const DenseTensor t = oracle::random_tensor({3, 4, 2}, rng);
    const Eigen::VectorXd v = oracle::random_matrix(4, 1, rng);
    const DenseTensor r = mode_vector_product(t, 1, v);
    ASSERT_EQ(r.shape(), (Shape{3, 2}));
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t k = 0; k < 2; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < 4; ++j) s += t.at({i, j, k}) * v(static_cast<Eigen::Index>(j));
            EXPECT_NEAR(r.at({i, k}), s, 1e-13);
        }
    }
    EXPECT_THROW((void)mode_vector_product(t, 1, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST(Tensor, FrobeniusNorm) {
    const DenseTensor t(Shape{2, 2}, {3.0, 0.0, 0.0, 4.0});
    EXPECT_DOUBLE_EQ(frobenius_norm(t), 5.0);
    EXPECT_THROW((void)frobenius_inner(t, DenseTensor(Shape{4})), std::invalid_argument);
}

TEST(CPFactors, KhatriRaoColumnIsVectorizedOuterProduct) {
    std::mt19937_64 rng(15);
    const std::vector<Eigen::MatrixXd> m{oracle::random_matrix(3, 2, rng), oracle::random_matrix(4, 2, rng)};
    const Eigen::MatrixXd kr = khatri_rao(m);
    ASSERT_EQ(kr.rows(), 12);
    for (Eigen::Index r = 0; r < 2; ++r) {
        for (Eigen::Index i = 0; i < 3; ++i) {
            for (Eigen::Index j = 0; j < 4; ++j) {
                EXPECT_DOUBLE_EQ(kr(i + 3 * j, r), m[0](i, r) * m[1](j, r));
            }
        }
    }
}

TEST(CPFactors, ComposeMatchesOracle) {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 20; ++trial) {
        const Shape s = oracle::random_shape(2 + trial % 3, 4, rng);
        const auto rank = static_cast<Eigen::Index>(1 + trial % 3);
        CPFactors f;
        f.weights = oracle::random_matrix(rank, 1, rng);
        for (auto d : s) f.factors.push_back(oracle::random_matrix(static_cast<Eigen::Index>(d), rank, rng));
        const DenseTensor c = cp_compose(f);
        EXPECT_EQ(c.shape(), s);
        EXPECT_LT(rel_diff(vectorize(c), vectorize(oracle::cp_compose(f))), 1e-13);
    }
}

TEST(CPFactors, ValidateRejectsColumnMismatch) {
    CPFactors f;
    f.weights = Eigen::VectorXd::Ones(2);
    f.factors = {Eigen::MatrixXd::Ones(3, 2), Eigen::MatrixXd::Ones(3, 3)};
    EXPECT_THROW(f.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace tvtr
