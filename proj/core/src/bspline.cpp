// SPDX-License-Identifier: Apache-2.0
#include "tvtr/bspline.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tvtr {

BSplineBasis::BSplineBasis(double domain_end, int degree, std::size_t n_interior_knots)
    : domain_end_(domain_end), degree_(degree), n_interior_(n_interior_knots) {
    if (!(domain_end > 0.0) || !std::isfinite(domain_end)) {
        throw std::invalid_argument("BSplineBasis: degenerate domain, T must be positive");
    }
    if (degree < 0) {
        throw std::invalid_argument("BSplineBasis: degree must be non-negative");
    }
    const auto v = static_cast<std::size_t>(degree);
    size_ = n_interior_knots + v + 1;
    knots_.reserve(n_interior_knots + 2 * (v + 1));
    knots_.insert(knots_.end(), v + 1, 0.0);
    for (std::size_t k = 1; k <= n_interior_knots; ++k) {
        knots_.push_back(domain_end * static_cast<double>(k) /
                         static_cast<double>(n_interior_knots + 1));
    }
    knots_.insert(knots_.end(), v + 1, domain_end);
}

std::vector<double> BSplineBasis::breakpoints() const {
    std::vector<double> b(knots_.begin() + degree_, knots_.end() - degree_);
    return b;
}

void BSplineBasis::check_domain(double t) const {
    if (!(t >= 0.0 && t <= domain_end_)) {
        throw std::domain_error("BSplineBasis: t = " + std::to_string(t) +
                                " outside [0, " + std::to_string(domain_end_) + "]");
    }
}

std::size_t BSplineBasis::find_span(double t) const {
    const auto v = static_cast<std::size_t>(degree_);
    if (t >= domain_end_) return size_ - 1;
    // Largest s in [v, H-1] with knots[s] <= t.
    const auto first = knots_.begin() + static_cast<std::ptrdiff_t>(v);
    const auto last = knots_.begin() + static_cast<std::ptrdiff_t>(size_);
    const auto it = std::upper_bound(first, last, t);
    return static_cast<std::size_t>(std::distance(knots_.begin(), it)) - 1;
}

// Derivatives of the nonzero basis functions (de Boor's triangular scheme,
// extended to derivatives as in Piegl & Tiller's DersBasisFuns).
Eigen::MatrixXd BSplineBasis::local_derivatives(std::size_t span, double t, int order) const {
    const int p = degree_;
    const int n = std::min(order, p);
    Eigen::MatrixXd ders = Eigen::MatrixXd::Zero(order + 1, p + 1);
    Eigen::MatrixXd ndu(p + 1, p + 1);
    std::vector<double> left(static_cast<std::size_t>(p) + 1);
    std::vector<double> right(static_cast<std::size_t>(p) + 1);
    const auto U = [&](std::ptrdiff_t i) { return knots_[static_cast<std::size_t>(i)]; };
    const auto s = static_cast<std::ptrdiff_t>(span);

    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = t - U(s + 1 - j);
        right[j] = U(s + j) - t;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu(j, r) = right[r + 1] + left[j - r];
            const double temp = ndu(r, j - 1) / ndu(j, r);
            ndu(r, j) = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu(j, j) = saved;
    }
    for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);

    Eigen::MatrixXd a(2, p + 1);
    for (int r = 0; r <= p; ++r) {
        int s1 = 0;
        int s2 = 1;
        a(0, 0) = 1.0;
        for (int k = 1; k <= n; ++k) {
            double d = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                d = a(s2, 0) * ndu(rk, pk);
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                d += a(s2, j) * ndu(rk + j, pk);
            }
            if (r <= pk) {
                a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
                d += a(s2, k) * ndu(r, pk);
            }
            ders(k, r) = d;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int k = 1; k <= n; ++k) {
        ders.row(k) *= factor;
        factor *= (p - k);
    }
    return ders;
}

Eigen::VectorXd BSplineBasis::evaluate(double t) const {
    check_domain(t);
    const std::size_t span = find_span(t);
    const Eigen::MatrixXd local = local_derivatives(span, t, 0);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size_));
    out.segment(static_cast<Eigen::Index>(span) - degree_, degree_ + 1) = local.row(0).transpose();
    return out;
}

Eigen::VectorXd BSplineBasis::second_derivative(double t) const {
    check_domain(t);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size_));
    if (!has_curvature()) return out;
    const std::size_t span = find_span(t);
    const Eigen::MatrixXd local = local_derivatives(span, t, 2);
    out.segment(static_cast<Eigen::Index>(span) - degree_, degree_ + 1) = local.row(2).transpose();
    return out;
}

Eigen::MatrixXd BSplineBasis::evaluate(std::span<const double> ts) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(ts.size()), static_cast<Eigen::Index>(size_));
    for (std::size_t k = 0; k < ts.size(); ++k) {
        out.row(static_cast<Eigen::Index>(k)) = evaluate(ts[k]).transpose();
    }
    return out;
}

BSplineBasis make_basis(double domain_end, int degree, std::size_t n_interior_knots) {
    return BSplineBasis(domain_end, degree, n_interior_knots);
}

QuadratureRule gauss_legendre(std::size_t n) {
    if (n == 0) throw std::invalid_argument("gauss_legendre: need at least one node");
    // Golub-Welsch: eigen-decomposition of the Jacobi matrix.
    const auto m = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index k = 1; k < m; ++k) {
        const double kk = static_cast<double>(k);
        const double beta = kk / std::sqrt(4.0 * kk * kk - 1.0);
        jacobi(k, k - 1) = beta;
        jacobi(k - 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    QuadratureRule rule;
    rule.nodes = eig.eigenvalues();
    rule.weights = 2.0 * eig.eigenvectors().row(0).transpose().array().square();
    return rule;
}

Eigen::MatrixXd penalty_gram(const BSplineBasis& basis) {
    if (!basis.has_curvature()) {
        throw std::invalid_argument("penalty_gram: degree " + std::to_string(basis.degree()) +
                                    " has no curvature; need degree >= 2");
    }
    const int v = basis.degree();
    // B''_h B''_h' is a polynomial of degree 2(v-2) on each knot interval.
    const auto n_nodes = static_cast<std::size_t>((2 * (v - 2) + 1 + 1) / 2 + 1);
    const QuadratureRule rule = gauss_legendre(n_nodes);
    const auto h = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(h, h);

    const std::vector<double> br = basis.breakpoints();
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        const double a = br[k];
        const double b = br[k + 1];
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        for (Eigen::Index q = 0; q < rule.nodes.size(); ++q) {
            const double t = mid + half * rule.nodes(q);
            const Eigen::VectorXd d2 = basis.second_derivative(t);
            gram.noalias() += (half * rule.weights(q)) * d2 * d2.transpose();
        }
    }
    return 0.5 * (gram + gram.transpose());
}

std::size_t default_knot_count(std::size_t time_points) noexcept { return time_points / 4; }

}  // namespace tvtr
