// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include "tvtr/bspline.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace tvtr {
namespace {

TEST(BSpline, BasisSizeForDefaultKnots) {
    // 81 time points -> [81/4] = 20 interior knots, cubic -> 24 functions.
    EXPECT_EQ(default_knot_count(81), 20u);
    EXPECT_EQ(BSplineBasis(1.0, 3, 20).size(), 24u);
    EXPECT_EQ(BSplineBasis(1.0, 0, 0).size(), 1u);
}

TEST(BSpline, RejectsDegenerateDomainAndDegree) {
    EXPECT_THROW(BSplineBasis(0.0, 3, 4), std::invalid_argument);
    EXPECT_THROW(BSplineBasis(-1.0, 3, 4), std::invalid_argument);
    EXPECT_THROW(BSplineBasis(1.0, -1, 4), std::invalid_argument);
}

TEST(BSpline, OutsideDomainThrows) {
    const BSplineBasis b(2.0, 3, 5);
    EXPECT_THROW((void)b.evaluate(-1e-9), std::domain_error);
    EXPECT_THROW((void)b.evaluate(2.0 + 1e-9), std::domain_error);
    EXPECT_NO_THROW((void)b.evaluate(2.0));
}

TEST(BSpline, MatchesCoxDeBoorRecursion) {
    for (int v : {0, 1, 2, 3, 4}) {
        const BSplineBasis b(1.5, v, 6);
        for (int k = 0; k <= 300; ++k) {
            const double t = 1.5 * k / 300.0;
            const Eigen::VectorXd e = b.evaluate(t);
            for (std::size_t h = 0; h < b.size(); ++h) {
                EXPECT_NEAR(e(static_cast<Eigen::Index>(h)), oracle::cox_de_boor(b.knots(), h, v, t), 1e-13)
                    << "degree " << v << " h " << h << " t " << t;
            }
        }
    }
}

TEST(BSpline, PartitionOfUnityAndNonnegativity) {
    const BSplineBasis b(1.0, 3, 20);
    for (int k = 0; k <= 1000; ++k) {
        const Eigen::VectorXd e = b.evaluate(k / 1000.0);
        EXPECT_NEAR(e.sum(), 1.0, 1e-12);
        EXPECT_GE(e.minCoeff(), 0.0);
    }
}

TEST(BSpline, SecondDerivativeMatchesFiniteDifferences) {
    const BSplineBasis b(1.0, 3, 20);
    const auto br = b.breakpoints();
    const double h = 1e-4;
    int checked = 0;
    for (int k = 1; k < 500; ++k) {
        const double t = k / 500.0;
        const bool near_knot = std::any_of(br.begin(), br.end(), [&](double x) { return std::abs(x - t) < 3 * h; });
        if (near_knot) continue;
        const Eigen::VectorXd fd = (b.evaluate(t + h) - 2.0 * b.evaluate(t) + b.evaluate(t - h)) / (h * h);
        const Eigen::VectorXd d2 = b.second_derivative(t);
        EXPECT_LT((d2 - fd).norm() / d2.norm(), 1e-5) << "t = " << t;
        ++checked;
    }
    EXPECT_GT(checked, 300);
}

TEST(BSpline, LowDegreeHasNoCurvature) {
    const BSplineBasis b(1.0, 1, 4);
    EXPECT_FALSE(b.has_curvature());
    EXPECT_EQ(b.second_derivative(0.3).norm(), 0.0);
    EXPECT_THROW((void)penalty_gram(b), std::invalid_argument);
}

TEST(BSpline, GaussLegendreIsExactForPolynomials) {
    for (std::size_t n = 1; n <= 6; ++n) {
        const QuadratureRule q = gauss_legendre(n);
        for (std::size_t deg = 0; deg <= 2 * n - 1; ++deg) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < q.nodes.size(); ++k) s += q.weights(k) * std::pow(q.nodes(k), deg);
            const double exact = deg % 2 == 1 ? 0.0 : 2.0 / static_cast<double>(deg + 1);
            EXPECT_NEAR(s, exact, 1e-13) << "n " << n << " degree " << deg;
        }
    }
    EXPECT_THROW((void)gauss_legendre(0), std::invalid_argument);
}

TEST(BSpline, PenaltyGramMatchesDenseQuadrature) {
    const BSplineBasis b(1.0, 3, 4);
    const Eigen::MatrixXd g = penalty_gram(b);
    // Composite midpoint rule on a fine grid.
    const int m = 20000;
    Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(g.rows(), g.cols());
    for (int k = 0; k < m; ++k) {
        const Eigen::VectorXd d2 = b.second_derivative((k + 0.5) / m);
        ref += d2 * d2.transpose() / m;
    }
    EXPECT_LT((g - ref).norm() / ref.norm(), 1e-6);
}

TEST(BSpline, PenaltyGramNullSpaceIsLinearFunctions) {
    const BSplineBasis b(1.0, 3, 20);
    const Eigen::MatrixXd g = penalty_gram(b);
    EXPECT_LT((g - g.transpose()).norm(), 1e-12 * g.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
    const Eigen::VectorXd ev = eig.eigenvalues();
    EXPECT_LT(std::abs(ev(0)), 1e-8);
    EXPECT_LT(std::abs(ev(1)), 1e-8);
    EXPECT_GT(ev(2), 1e-4);
    // Spline coefficients of 1 and t (Greville abscissae) are annihilated.
    const auto& u = b.knots();
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd lin(static_cast<Eigen::Index>(b.size()));
    for (std::size_t h = 0; h < b.size(); ++h) lin(static_cast<Eigen::Index>(h)) = (u[h + 1] + u[h + 2] + u[h + 3]) / 3.0;
    EXPECT_LT((g * ones).norm(), 1e-8);
    EXPECT_LT((g * lin).norm(), 1e-8);
}

}  // namespace
}  // namespace tvtr
