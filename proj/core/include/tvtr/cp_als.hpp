// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tvtr/bspline.hpp"
#include "tvtr/cp_factors.hpp"
#include "tvtr/design.hpp"
#include "tvtr/tensor.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace tvtr {

/// Non-finite input or output in a numerical kernel.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FitConfig {
    std::size_t rank = 1;
    double theta = 0.0;  ///< curvature penalty weight
    double phi = 0.0;    ///< ridge penalty weight
    /// Interior knots K_N; [J / 4] when unset.
    std::optional<std::size_t> n_interior_knots;
    int degree = 3;
    /// Stop once |Error_k - Error_{k-1}| < tolerance.
    double tolerance = 1e-6;
    std::size_t max_iterations = 200;
    /// Random starts; the one with the lowest final objective is kept.
    std::size_t restarts = 1;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument on non-finite or out-of-range fields.
    void validate() const;
    [[nodiscard]] std::size_t knots_for(std::size_t time_points) const noexcept;
};

/// Outcome of one penalized CP-ALS fit. Factors are ordered
/// (U_0, U_1..U_L, V_1..V_M) and canonicalized.
struct FitResult {
    CPFactors factors;
    BSplineBasis basis;
    FitConfig config;
    /// Penalized objective ||Y~ - <Z~, B>||^2 / (NJ) after each sweep.
    std::vector<double> objective_trace;
    /// ||Y~ - <Z~, B>||^2 / ||Y~||^2 after each sweep.
    std::vector<double> relative_error_trace;
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t restart = 0;  ///< index of the kept restart
    std::uint64_t restart_seed = 0;

    /// Composed coefficient tensor B_0 of shape (H, P..., Q...).
    [[nodiscard]] DenseTensor coefficients() const;
    /// beta(t), shape (P..., Q...).
    [[nodiscard]] DenseTensor beta(double t) const;
    [[nodiscard]] double final_objective() const {
        return objective_trace.empty() ? 0.0 : objective_trace.back();
    }
};

/// I.i.d. standard normal entries from a generator seeded with `seed`
/// (factor by factor, column-major); unit weights.
CPFactors init_factors(std::span<const std::size_t> dims, std::size_t rank, std::uint64_t seed);

/// Least-squares update of covariate-side factor `block` (0 = U_0 over the
/// basis index, l = U_l over covariate mode l) with every other factor and
/// the weights held fixed. Minimum-norm when the block design is rank
/// deficient.
Eigen::MatrixXd solve_u_block(const AugmentedSystem& sys, const CPFactors& f, std::size_t block);

/// Least-squares update of response-side factor V_{block+1}.
Eigen::MatrixXd solve_v_block(const AugmentedSystem& sys, const CPFactors& f, std::size_t block);

/// <z, B> for a design tensor z of shape (rows, H, P...): shape (rows, Q...).
DenseTensor predict(const DenseTensor& z, const CPFactors& f);

/// ||y - <z, B>||^2 over the first `rows` slices (all slices when unset).
double residual_sum_of_squares(const DenseTensor& z, const DenseTensor& y, const CPFactors& f,
                               std::optional<std::size_t> rows = std::nullopt);

/// ||Y~ - <Z~, B>||^2 / (NJ): the penalized loss with the time integral
/// realized as the mean over the NJ observed (subject, time) rows.
double penalized_objective(const AugmentedSystem& sys, const CPFactors& f);

/// ||Y~ - <Z~, B>||^2 / ||Y~||^2. Throws std::invalid_argument when Y~ = 0.
double relative_error(const AugmentedSystem& sys, const CPFactors& f);

/// Full estimator: builds the basis and augmented system, then runs
/// block ALS from `restarts` random starts.
FitResult fit(const ObservationSet& obs, const FitConfig& cfg);

/// Estimator on a prepared system; `basis` must be the one used to build it.
FitResult fit_system(const AugmentedSystem& sys, const BSplineBasis& basis, const FitConfig& cfg);

/// Unit-norm columns with the scale (and the sign making each column's
/// largest-magnitude entry positive) moved into the weights, components
/// sorted by |weight| descending. A component with a zero column gets
/// weight 0 and unit vectors e_1 as columns. The composed tensor is
/// unchanged and the operation is idempotent.
CPFactors canonicalize(const CPFactors& f);

/// beta(t) = B_0 x_1 B(t): contracts the basis mode of the CP tensor with
/// the basis values at t. Throws std::domain_error outside the basis domain.
DenseTensor reconstruct_beta(const CPFactors& f, const BSplineBasis& basis, double t);

}  // namespace tvtr
