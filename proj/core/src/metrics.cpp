// SPDX-License-Identifier: Apache-2.0
#include "tvtr/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tvtr {

MetricReport coefficient_metrics(const BetaFunction& estimate, const BetaFunction& truth,
                                 std::span<const double> grid, MetricScale scale,
                                 double domain_end) {
    if (grid.empty()) throw std::invalid_argument("coefficient_metrics: empty grid");
    const double w = domain_end / static_cast<double>(grid.size());
    double sq = 0.0;
    double ab = 0.0;
    double sq_ref = 0.0;
    double ab_ref = 0.0;
    std::size_t entries = 0;
    for (const double t : grid) {
        const DenseTensor b_hat = estimate(t);
        const DenseTensor b = truth(t);
        if (b_hat.shape() != b.shape()) {
            throw std::invalid_argument("coefficient_metrics: estimate and truth shapes differ");
        }
        entries = b.size();
        const Eigen::VectorXd d = vectorize(b_hat) - vectorize(b);
        const Eigen::VectorXd v = vectorize(b);
        sq += w * d.squaredNorm();
        ab += w * d.lpNorm<1>();
        sq_ref += w * v.squaredNorm();
        ab_ref += w * v.lpNorm<1>();
    }
    MetricReport r;
    r.imse = sq;
    r.imae = ab;
    r.rimse = sq_ref > 0.0 ? sq / sq_ref : std::numeric_limits<double>::infinity();
    r.rimae = ab_ref > 0.0 ? ab / ab_ref : std::numeric_limits<double>::infinity();
    if (scale == MetricScale::per_entry && entries > 0) {
        r.imse /= static_cast<double>(entries);
        r.imae /= static_cast<double>(entries);
    }
    return r;
}

MetricSummary summarize(std::span<const MetricReport> reports) {
    MetricSummary s;
    s.count = reports.size();
    if (reports.empty()) return s;
    const double n = static_cast<double>(reports.size());
    for (const auto& r : reports) {
        s.mean.imse += r.imse / n;
        s.mean.rimse += r.rimse / n;
        s.mean.imae += r.imae / n;
        s.mean.rimae += r.rimae / n;
    }
    if (reports.size() < 2) return s;
    for (const auto& r : reports) {
        s.sd.imse += (r.imse - s.mean.imse) * (r.imse - s.mean.imse);
        s.sd.rimse += (r.rimse - s.mean.rimse) * (r.rimse - s.mean.rimse);
        s.sd.imae += (r.imae - s.mean.imae) * (r.imae - s.mean.imae);
        s.sd.rimae += (r.rimae - s.mean.rimae) * (r.rimae - s.mean.rimae);
    }
    s.sd.imse = std::sqrt(s.sd.imse / (n - 1.0));
    s.sd.rimse = std::sqrt(s.sd.rimse / (n - 1.0));
    s.sd.imae = std::sqrt(s.sd.imae / (n - 1.0));
    s.sd.rimae = std::sqrt(s.sd.rimae / (n - 1.0));
    return s;
}

double prediction_error(const FitResult& fit, const ObservationSet& held_out) {
    const StackedDesign d = build_design(held_out, fit.basis);
    if (d.z.order() + d.y.order() - 2 != fit.factors.order()) {
        throw std::invalid_argument("prediction_error: data modes do not match the fit");
    }
    const std::size_t rows = d.z.dim(0);
    return residual_sum_of_squares(d.z, d.y, fit.factors) / static_cast<double>(rows);
}

double signal_prediction_error(const FitResult& fit, const ObservationSet& obs,
                               const BetaFunction& truth) {
    obs.validate();
    const std::size_t p = shape_size(obs.covariate_shape());
    const std::size_t j = obs.time_points();
    double total = 0.0;
    std::vector<Eigen::MatrixXd> diff;
    for (std::size_t i = 0; i < obs.subjects(); ++i) {
        if (i == 0 || !obs.shared_grid()) {
            diff.clear();
            for (const double t : obs.time_grids[i]) {
                const DenseTensor b_hat = fit.beta(t);
                const DenseTensor b = truth(t);
                if (b_hat.shape() != b.shape() || b.size() % p != 0) {
                    throw std::invalid_argument("signal_prediction_error: shape mismatch");
                }
                diff.push_back(b_hat.as_matrix(p) - b.as_matrix(p));
            }
        }
        const auto u = obs.covariates[i].as_matrix(j);
        for (std::size_t jj = 0; jj < j; ++jj) {
            total += (u.row(static_cast<Eigen::Index>(jj)) * diff[jj]).squaredNorm();
        }
    }
    return total / static_cast<double>(obs.subjects() * j);
}

}  // namespace tvtr
