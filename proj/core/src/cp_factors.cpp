// SPDX-License-Identifier: Apache-2.0
#include "tvtr/cp_factors.hpp"

#include <stdexcept>
#include <string>

namespace tvtr {

CPFactors CPFactors::with_unit_weights(std::vector<Eigen::MatrixXd> factors) {
    CPFactors f;
    const auto r = factors.empty() ? Eigen::Index{0} : factors.front().cols();
    f.weights = Eigen::VectorXd::Ones(r);
    f.factors = std::move(factors);
    f.validate();
    return f;
}

Shape CPFactors::shape() const {
    Shape s;
    s.reserve(factors.size());
    for (const auto& a : factors) s.push_back(static_cast<std::size_t>(a.rows()));
    return s;
}

void CPFactors::validate() const {
    for (std::size_t d = 0; d < factors.size(); ++d) {
        if (factors[d].cols() != weights.size()) {
            throw std::invalid_argument("CPFactors: factor " + std::to_string(d) + " has " +
                                        std::to_string(factors[d].cols()) +
                                        " columns, expected rank " +
                                        std::to_string(weights.size()));
        }
    }
}

Eigen::MatrixXd khatri_rao(std::span<const Eigen::MatrixXd> mats) {
    if (mats.empty()) {
        throw std::invalid_argument("khatri_rao: no input matrices");
    }
    const Eigen::Index r = mats.front().cols();
    for (const auto& m : mats) {
        if (m.cols() != r) {
            throw std::invalid_argument("khatri_rao: column-count mismatch");
        }
    }
    Eigen::MatrixXd out = mats.front();
    for (std::size_t k = 1; k < mats.size(); ++k) {
        const auto& next = mats[k];
        Eigen::MatrixXd grown(out.rows() * next.rows(), r);
        for (Eigen::Index c = 0; c < r; ++c) {
            for (Eigen::Index j = 0; j < next.rows(); ++j) {
                grown.col(c).segment(j * out.rows(), out.rows()) = next(j, c) * out.col(c);
            }
        }
        out = std::move(grown);
    }
    return out;
}

DenseTensor cp_compose(const CPFactors& f) {
    f.validate();
    if (f.factors.empty()) {
        throw std::invalid_argument("cp_compose: no factors");
    }
    DenseTensor out(f.shape());
    const auto rows = static_cast<std::size_t>(f.factors.front().rows());
    if (f.factors.size() == 1) {
        out.as_matrix(rows).col(0) = f.factors.front() * f.weights;
        return out;
    }
    const Eigen::MatrixXd rest =
        khatri_rao(std::span<const Eigen::MatrixXd>(f.factors).subspan(1));
    out.as_matrix(rows).noalias() = f.factors.front() * f.weights.asDiagonal() * rest.transpose();
    return out;
}

}  // namespace tvtr
