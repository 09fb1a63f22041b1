// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tvtr/bspline.hpp"
#include "tvtr/tensor.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace tvtr {

/// Per-subject tensor time series on [0, T].
///
/// Subject i has J strictly increasing time points, a covariate series of
/// shape J x P_1 x ... x P_L and a response series of shape
/// J x Q_1 x ... x Q_M. All subjects share J and the mode shapes.
struct ObservationSet {
    double domain_end = 1.0;
    std::vector<std::vector<double>> time_grids;
    std::vector<DenseTensor> covariates;
    std::vector<DenseTensor> responses;

    [[nodiscard]] std::size_t subjects() const noexcept { return time_grids.size(); }
    [[nodiscard]] std::size_t time_points() const noexcept {
        return time_grids.empty() ? 0 : time_grids.front().size();
    }
    /// (P_1, ..., P_L)
    [[nodiscard]] Shape covariate_shape() const;
    /// (Q_1, ..., Q_M)
    [[nodiscard]] Shape response_shape() const;
    [[nodiscard]] bool shared_grid() const noexcept;

    /// Throws std::invalid_argument on any broken invariant.
    void validate() const;

    /// Subjects in the given order.
    [[nodiscard]] ObservationSet subset(std::span<const std::size_t> subjects) const;
};

/// Stacked design over all subjects and times; row (i, j) is i * J + j.
struct StackedDesign {
    DenseTensor z;  ///< NJ x H x P_1 x ... x P_L, z = x * B_h(t)
    DenseTensor y;  ///< NJ x Q_1 x ... x Q_M
};

/// Throws std::domain_error when an observation time lies outside the basis
/// domain.
StackedDesign build_design(const ObservationSet& obs, const BSplineBasis& basis);

/// Symmetric PSD square root S of theta * G + phi * I (negative eigenvalues
/// clipped to zero), so that S^T S = theta * G + phi * I.
Eigen::MatrixXd penalty_sqrt(const Eigen::MatrixXd& gram, double theta, double phi);

/// Penalty-augmented least-squares system. The first `data_rows` slices along
/// mode 0 hold the stacked design; the following H*P slices hold I_P (x) S,
/// with zero responses, so that
///   ||Y~ - <Z~, B>||^2 = ||Y - <Z, B>||^2 + theta b'(I (x) G)b + phi ||B||^2.
struct AugmentedSystem {
    DenseTensor z;  ///< (NJ + HP) x H x P_1 x ... x P_L
    DenseTensor y;  ///< (NJ + HP) x Q_1 x ... x Q_M
    std::size_t data_rows = 0;
    std::size_t penalty_rows = 0;

    [[nodiscard]] std::size_t rows() const noexcept { return data_rows + penalty_rows; }
    [[nodiscard]] std::size_t basis_size() const { return z.dim(1); }
    [[nodiscard]] Shape covariate_shape() const;
    [[nodiscard]] Shape response_shape() const;
    /// Mode sizes of the coefficient tensor: (H, P_1..P_L, Q_1..Q_M).
    [[nodiscard]] Shape coefficient_shape() const;
    /// Number of covariate-side modes including H, i.e. L + 1.
    [[nodiscard]] std::size_t covariate_modes() const { return z.order() - 1; }
    [[nodiscard]] std::size_t response_modes() const { return y.order() - 1; }
};

/// Appends I_P (x) S below the stacked design and zeros below the responses.
AugmentedSystem augment(const StackedDesign& design, const Eigen::MatrixXd& s);

/// build_design + penalty_gram + penalty_sqrt + augment. The Gram matrix is
/// only formed when theta > 0.
AugmentedSystem build_augmented_system(const ObservationSet& obs, const BSplineBasis& basis,
                                       double theta, double phi);

}  // namespace tvtr
