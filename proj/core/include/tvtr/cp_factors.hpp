// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tvtr/tensor.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace tvtr {

/// Weighted CP representation [[lambda; A_1, ..., A_D]] of a D-way tensor.
/// Factor d is I_d x R; every factor shares the column count R.
struct CPFactors {
    Eigen::VectorXd weights;
    std::vector<Eigen::MatrixXd> factors;

    /// Unit weights over the given factors.
    static CPFactors with_unit_weights(std::vector<Eigen::MatrixXd> factors);

    [[nodiscard]] std::size_t rank() const noexcept {
        return static_cast<std::size_t>(weights.size());
    }
    [[nodiscard]] std::size_t order() const noexcept { return factors.size(); }
    [[nodiscard]] Shape shape() const;

    /// Throws std::invalid_argument if the column counts disagree with the
    /// weight count.
    void validate() const;
};

/// Element (i_1..i_D) = sum_r lambda_r prod_d A_d(i_d, r).
DenseTensor cp_compose(const CPFactors& f);

/// Columnwise Kronecker product. Row index of the result is
/// i_1 + I_1 (i_2 + I_2 (...)), i.e. the first matrix varies fastest, so
/// column r is the vectorized outer product a_r^(1) o ... o a_r^(K).
Eigen::MatrixXd khatri_rao(std::span<const Eigen::MatrixXd> mats);

}  // namespace tvtr
