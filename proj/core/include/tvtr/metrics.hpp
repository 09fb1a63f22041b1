// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tvtr/cp_als.hpp"
#include "tvtr/design.hpp"
#include "tvtr/tensor.hpp"

#include <functional>
#include <span>
#include <vector>

namespace tvtr {

using BetaFunction = std::function<DenseTensor(double)>;

/// total: integrals of the full Frobenius norm.
/// per_entry: IMSE and IMAE averaged over the P*Q coefficient entries (the
/// scale of published simulation tables). Relative metrics are identical.
enum class MetricScale { total, per_entry };

struct MetricReport {
    double imse = 0.0;
    double rimse = 0.0;
    double imae = 0.0;
    double rimae = 0.0;
};

/// Riemann sums with weight T / |grid| per grid point:
///   imse  = sum_j w ||beta_hat(t_j) - beta(t_j)||_F^2
///   rimse = imse / sum_j w ||beta(t_j)||_F^2
///   imae  = sum_j w sum |beta_hat(t_j) - beta(t_j)|
///   rimae = imae / sum_j w sum |beta(t_j)|
/// Throws std::invalid_argument on an empty grid or mismatched shapes.
MetricReport coefficient_metrics(const BetaFunction& estimate, const BetaFunction& truth,
                                 std::span<const double> grid, MetricScale scale = MetricScale::total,
                                 double domain_end = 1.0);

struct MetricSummary {
    MetricReport mean;
    MetricReport sd;  ///< sample SD (n - 1); zero for a single report
    std::size_t count = 0;
};

MetricSummary summarize(std::span<const MetricReport> reports);

/// Mean squared residual ||Y - <Z, B_hat>||^2 per (subject, time) row of
/// `held_out`.
double prediction_error(const FitResult& fit, const ObservationSet& held_out);

/// Mean over rows of ||sum_p u_p(t) (beta_hat - beta)_p(t)||^2, the
/// prediction error against the noise-free signal for the observed
/// covariates u.
double signal_prediction_error(const FitResult& fit, const ObservationSet& obs,
                               const BetaFunction& truth);

}  // namespace tvtr
