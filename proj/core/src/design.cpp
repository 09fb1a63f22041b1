// SPDX-License-Identifier: Apache-2.0
#include "tvtr/design.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>

namespace tvtr {

namespace {

Shape trailing_modes(const Shape& s) { return s.empty() ? Shape{} : Shape(s.begin() + 1, s.end()); }

}  // namespace

Shape ObservationSet::covariate_shape() const {
    return covariates.empty() ? Shape{} : trailing_modes(covariates.front().shape());
}

Shape ObservationSet::response_shape() const {
    return responses.empty() ? Shape{} : trailing_modes(responses.front().shape());
}

bool ObservationSet::shared_grid() const noexcept {
    for (const auto& g : time_grids) {
        if (g != time_grids.front()) return false;
    }
    return true;
}

void ObservationSet::validate() const {
    const std::size_t n = subjects();
    if (n == 0) throw std::invalid_argument("ObservationSet: no subjects");
    if (covariates.size() != n || responses.size() != n) {
        throw std::invalid_argument("ObservationSet: subject counts of grids, covariates and "
                                    "responses differ");
    }
    if (!(domain_end > 0.0)) throw std::invalid_argument("ObservationSet: domain end must be > 0");
    const std::size_t j = time_points();
    if (j == 0) throw std::invalid_argument("ObservationSet: empty time grid");
    const Shape p = covariate_shape();
    const Shape q = response_shape();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& g = time_grids[i];
        if (g.size() != j) {
            throw std::invalid_argument("ObservationSet: subject " + std::to_string(i) +
                                        " has a different number of time points");
        }
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (!(g[k] >= 0.0 && g[k] <= domain_end) || (k > 0 && !(g[k] > g[k - 1]))) {
                throw std::invalid_argument("ObservationSet: time grid of subject " +
                                            std::to_string(i) +
                                            " is not strictly increasing within [0, T]");
            }
        }
        const auto& x = covariates[i];
        const auto& y = responses[i];
        if (x.order() == 0 || x.dim(0) != j || trailing_modes(x.shape()) != p) {
            throw std::invalid_argument("ObservationSet: covariate shape mismatch for subject " +
                                        std::to_string(i));
        }
        if (y.order() == 0 || y.dim(0) != j || trailing_modes(y.shape()) != q) {
            throw std::invalid_argument("ObservationSet: response shape mismatch for subject " +
                                        std::to_string(i));
        }
    }
}

ObservationSet ObservationSet::subset(std::span<const std::size_t> subjects_idx) const {
    ObservationSet out;
    out.domain_end = domain_end;
    for (const std::size_t i : subjects_idx) {
        if (i >= subjects()) throw std::out_of_range("ObservationSet::subset: subject index");
        out.time_grids.push_back(time_grids[i]);
        out.covariates.push_back(covariates[i]);
        out.responses.push_back(responses[i]);
    }
    return out;
}

StackedDesign build_design(const ObservationSet& obs, const BSplineBasis& basis) {
    obs.validate();
    if (obs.domain_end > basis.domain_end()) {
        throw std::domain_error("build_design: basis domain does not cover the observation domain");
    }
    const std::size_t n = obs.subjects();
    const std::size_t j = obs.time_points();
    const std::size_t h = basis.size();
    const Shape p_shape = obs.covariate_shape();
    const Shape q_shape = obs.response_shape();
    const std::size_t p = shape_size(p_shape);
    const std::size_t q = shape_size(q_shape);
    const std::size_t rows = n * j;

    Shape z_shape{rows, h};
    z_shape.insert(z_shape.end(), p_shape.begin(), p_shape.end());
    Shape y_shape{rows};
    y_shape.insert(y_shape.end(), q_shape.begin(), q_shape.end());
    StackedDesign out{DenseTensor(std::move(z_shape)), DenseTensor(std::move(y_shape))};

    auto zm = out.z.as_matrix(rows);  // rows x (H * P), column h + H * p
    auto ym = out.y.as_matrix(rows);  // rows x Q

    const auto J = static_cast<Eigen::Index>(j);
    const auto H = static_cast<Eigen::Index>(h);
    const bool shared = obs.shared_grid();
    Eigen::MatrixXd bvals;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0 || !shared) bvals = basis.evaluate(obs.time_grids[i]);  // J x H
        const auto x = obs.covariates[i].as_matrix(j);                                  // J x P
        const auto y = obs.responses[i].as_matrix(j);                                   // J x Q
        const auto r0 = static_cast<Eigen::Index>(i * j);
        for (Eigen::Index pp = 0; pp < static_cast<Eigen::Index>(p); ++pp) {
            for (Eigen::Index hh = 0; hh < H; ++hh) {
                zm.block(r0, hh + H * pp, J, 1) = x.col(pp).cwiseProduct(bvals.col(hh));
            }
        }
        ym.block(r0, 0, J, static_cast<Eigen::Index>(q)) = y;
    }
    return out;
}

Eigen::MatrixXd penalty_sqrt(const Eigen::MatrixXd& gram, double theta, double phi) {
    if (!(theta >= 0.0) || !(phi >= 0.0)) {
        throw std::invalid_argument("penalty_sqrt: theta and phi must be non-negative");
    }
    if (gram.rows() != gram.cols()) {
        throw std::invalid_argument("penalty_sqrt: Gram matrix must be square");
    }
    const Eigen::Index h = gram.rows();
    if (theta == 0.0) {
        return std::sqrt(phi) * Eigen::MatrixXd::Identity(h, h);
    }
    const Eigen::MatrixXd m = theta * gram + phi * Eigen::MatrixXd::Identity(h, h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

Shape AugmentedSystem::covariate_shape() const {
    return Shape(z.shape().begin() + 2, z.shape().end());
}

Shape AugmentedSystem::response_shape() const { return trailing_modes(y.shape()); }

Shape AugmentedSystem::coefficient_shape() const {
    Shape s = trailing_modes(z.shape());
    const Shape q = response_shape();
    s.insert(s.end(), q.begin(), q.end());
    return s;
}

AugmentedSystem augment(const StackedDesign& design, const Eigen::MatrixXd& s) {
    const auto& zs = design.z.shape();
    if (zs.size() < 2 || design.y.order() < 1 || design.y.dim(0) != zs[0]) {
        throw std::invalid_argument("augment: design and response row counts differ");
    }
    const std::size_t rows = zs[0];
    const std::size_t h = zs[1];
    if (static_cast<std::size_t>(s.rows()) != h || static_cast<std::size_t>(s.cols()) != h) {
        throw std::invalid_argument("augment: penalty root must be H x H with H = " +
                                    std::to_string(h));
    }
    const std::size_t p = shape_size(std::span(zs).subspan(2));
    const std::size_t pen = h * p;
    const std::size_t total = rows + pen;

    Shape zt_shape = zs;
    zt_shape[0] = total;
    Shape yt_shape = design.y.shape();
    yt_shape[0] = total;
    AugmentedSystem out{DenseTensor(std::move(zt_shape)), DenseTensor(std::move(yt_shape)), rows,
                        pen};

    auto zt = out.z.as_matrix(total);
    zt.topRows(static_cast<Eigen::Index>(rows)) = design.z.as_matrix(rows);
    const auto H = static_cast<Eigen::Index>(h);
    for (Eigen::Index pp = 0; pp < static_cast<Eigen::Index>(p); ++pp) {
        zt.block(static_cast<Eigen::Index>(rows) + H * pp, H * pp, H, H) = s;
    }
    auto yt = out.y.as_matrix(total);
    yt.topRows(static_cast<Eigen::Index>(rows)) = design.y.as_matrix(rows);
    return out;
}

AugmentedSystem build_augmented_system(const ObservationSet& obs, const BSplineBasis& basis,
                                       double theta, double phi) {
    const StackedDesign design = build_design(obs, basis);
    const auto h = static_cast<Eigen::Index>(basis.size());
    const Eigen::MatrixXd gram = theta > 0.0 ? penalty_gram(basis) : Eigen::MatrixXd::Zero(h, h);
    return augment(design, penalty_sqrt(gram, theta, phi));
}

}  // namespace tvtr
