// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tvtr/design.hpp"
#include "tvtr/tensor.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace tvtr {

/// Correlation of the chi fields across covariate mode locations.
enum class Dependence { independent, exp_spatial, matern_spatial };

/// How the measurement error delta enters the generated data.
///   in_response: y is generated from the observed u = x + delta, so delta
///                perturbs the covariates without biasing the fitted relation.
///   classical:   y is generated from the noise-free x while the fit sees u
///                (errors-in-variables, attenuating the estimate).
enum class MeasurementErrorModel { in_response, classical };

struct SimScenario {
    std::size_t subjects = 30;
    std::size_t time_points = 81;
    Shape covariate_shape{5, 2};
    Shape response_shape{5, 2};
    Dependence dependence = Dependence::independent;
    double exp_scale = 8.0;
    double matern_kappa = 0.55;
    double matern_nu = 1.0;
    std::array<double, 3> chi_sd{1.0, 0.85, 0.7};
    std::array<double, 2> eta_sd{2.0, 0.75};
    double measurement_sd = 0.6;
    MeasurementErrorModel measurement = MeasurementErrorModel::in_response;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument. Covariate and response shapes must be
    /// two-way.
    void validate() const;
};

/// p1 cos(2 pi t) + q1 sin(2 pi t) + p2 sin(4 pi t) + q2 cos(4 pi t), 1-based
/// indices.
double true_beta(std::size_t p1, std::size_t p2, std::size_t q1, std::size_t q2, double t);

/// beta(t) as a tensor of shape (P1, P2, Q1, Q2).
DenseTensor true_beta_tensor(const Shape& covariate_shape, const Shape& response_shape, double t);

/// exp(-dist / scale).
double exp_correlation(double dist, double scale);

/// 2^(1-nu) / Gamma(nu) (2 d sqrt(nu) / kappa)^nu K_nu(2 d sqrt(nu) / kappa);
/// 1 at d = 0.
double matern_correlation(double d, double kappa, double nu);

/// Correlation matrix over the P1*P2 covariate mode locations (p1 fastest),
/// using Euclidean distance on the integer lattice. Identity when
/// independent.
Eigen::MatrixXd mode_correlation(const SimScenario& scn);

/// t_j = (j - 0.5) T / J.
std::vector<double> design_grid(std::size_t time_points, double domain_end = 1.0);

struct CovariateDraw {
    std::vector<DenseTensor> x;      ///< noise-free, J x P1 x P2 per subject
    std::vector<DenseTensor> u;      ///< observed x + delta
    std::vector<DenseTensor> delta;  ///< P1 x P2 per subject, constant in t
};

CovariateDraw gen_covariates(const SimScenario& scn, std::uint64_t seed);

/// J x Q1 x Q2 error series per subject, independent over subjects and modes.
std::vector<DenseTensor> gen_errors(const SimScenario& scn, std::uint64_t seed);

struct SimDataset {
    SimScenario scenario;
    ObservationSet observed;  ///< covariates are u
    std::vector<DenseTensor> x_true;
    std::vector<DenseTensor> delta;
    std::vector<DenseTensor> errors;
    /// Responses minus errors.
    std::vector<DenseTensor> signal;
};

/// Covariates from derive_seed(seed, 0), errors from derive_seed(seed, 1).
SimDataset generate(const SimScenario& scn);

}  // namespace tvtr
