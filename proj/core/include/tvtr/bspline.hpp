// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace tvtr {

/// Clamped B-spline basis of degree v on [0, T] with equidistant interior
/// knots. There are H = K_N + v + 1 basis functions; the boundary knots are
/// repeated v + 1 times and the last knot interval is closed on the right so
/// that t = T evaluates like any interior point.
class BSplineBasis {
public:
    /// Throws std::invalid_argument when domain_end <= 0 or degree < 0.
    BSplineBasis(double domain_end, int degree, std::size_t n_interior_knots);

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] double domain_end() const noexcept { return domain_end_; }
    [[nodiscard]] std::size_t n_interior_knots() const noexcept { return n_interior_; }
    [[nodiscard]] const std::vector<double>& knots() const noexcept { return knots_; }

    /// Distinct knot values 0 = tau_0 < ... < tau_{K+1} = T.
    [[nodiscard]] std::vector<double> breakpoints() const;

    /// False for degree < 2, where every second derivative vanishes.
    [[nodiscard]] bool has_curvature() const noexcept { return degree_ >= 2; }

    /// Basis values at t (Cox-de Boor). Throws std::domain_error outside [0, T].
    [[nodiscard]] Eigen::VectorXd evaluate(double t) const;

    /// Second derivatives at t. Identically zero when !has_curvature().
    [[nodiscard]] Eigen::VectorXd second_derivative(double t) const;

    /// Row k holds evaluate(ts[k]).
    [[nodiscard]] Eigen::MatrixXd evaluate(std::span<const double> ts) const;

    friend bool operator==(const BSplineBasis&, const BSplineBasis&) = default;

private:
    [[nodiscard]] std::size_t find_span(double t) const;
    // Nonzero basis functions and their derivatives up to `order` at t.
    // Row k is the k-th derivative of functions span-v..span.
    [[nodiscard]] Eigen::MatrixXd local_derivatives(std::size_t span, double t, int order) const;
    void check_domain(double t) const;

    double domain_end_;
    int degree_;
    std::size_t n_interior_;
    std::size_t size_;
    std::vector<double> knots_;
};

BSplineBasis make_basis(double domain_end, int degree, std::size_t n_interior_knots);

/// Curvature penalty Gram matrix G_{hh'} = int_0^T B''_h(t) B''_{h'}(t) dt,
/// integrated exactly with Gauss-Legendre on every knot interval. Throws
/// std::invalid_argument for degree < 2.
Eigen::MatrixXd penalty_gram(const BSplineBasis& basis);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};
QuadratureRule gauss_legendre(std::size_t n);

/// Interior knot count used when none is configured: [J / 4].
std::size_t default_knot_count(std::size_t time_points) noexcept;

}  // namespace tvtr
