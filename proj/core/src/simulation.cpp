// SPDX-License-Identifier: Apache-2.0
#include "tvtr/simulation.hpp"

#include "tvtr/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tvtr {

void SimScenario::validate() const {
    if (subjects == 0 || time_points == 0) {
        throw std::invalid_argument("SimScenario: subjects and time_points must be positive");
    }
    if (covariate_shape.size() != 2 || response_shape.size() != 2) {
        throw std::invalid_argument("SimScenario: covariate and response shapes must be two-way");
    }
    for (const auto d : covariate_shape) {
        if (d == 0) throw std::invalid_argument("SimScenario: zero covariate mode size");
    }
    for (const auto d : response_shape) {
        if (d == 0) throw std::invalid_argument("SimScenario: zero response mode size");
    }
    const auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    for (const double s : chi_sd) {
        if (!nonneg(s)) throw std::invalid_argument("SimScenario: chi SDs must be >= 0");
    }
    for (const double s : eta_sd) {
        if (!nonneg(s)) throw std::invalid_argument("SimScenario: eta SDs must be >= 0");
    }
    if (!nonneg(measurement_sd)) {
        throw std::invalid_argument("SimScenario: measurement SD must be >= 0");
    }
    if (dependence == Dependence::exp_spatial && !(exp_scale > 0.0)) {
        throw std::invalid_argument("SimScenario: exponential scale must be > 0");
    }
    if (dependence == Dependence::matern_spatial && (!(matern_kappa > 0.0) || !(matern_nu > 0.0))) {
        throw std::invalid_argument("SimScenario: Matern kappa and nu must be > 0");
    }
}

double true_beta(std::size_t p1, std::size_t p2, std::size_t q1, std::size_t q2, double t) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return static_cast<double>(p1) * std::cos(two_pi * t) +
           static_cast<double>(q1) * std::sin(two_pi * t) +
           static_cast<double>(p2) * std::sin(2.0 * two_pi * t) +
           static_cast<double>(q2) * std::cos(2.0 * two_pi * t);
}

DenseTensor true_beta_tensor(const Shape& covariate_shape, const Shape& response_shape, double t) {
    if (covariate_shape.size() != 2 || response_shape.size() != 2) {
        throw std::invalid_argument("true_beta_tensor: shapes must be two-way");
    }
    DenseTensor out({covariate_shape[0], covariate_shape[1], response_shape[0], response_shape[1]});
    double* v = out.data();
    for (std::size_t q2 = 1; q2 <= response_shape[1]; ++q2) {
        for (std::size_t q1 = 1; q1 <= response_shape[0]; ++q1) {
            for (std::size_t p2 = 1; p2 <= covariate_shape[1]; ++p2) {
                for (std::size_t p1 = 1; p1 <= covariate_shape[0]; ++p1) {
                    *v++ = true_beta(p1, p2, q1, q2, t);
                }
            }
        }
    }
    return out;
}

double exp_correlation(double dist, double scale) {
    if (!(dist >= 0.0) || !(scale > 0.0)) {
        throw std::invalid_argument("exp_correlation: need dist >= 0 and scale > 0");
    }
    return std::exp(-dist / scale);
}

double matern_correlation(double d, double kappa, double nu) {
    if (!(d >= 0.0) || !(kappa > 0.0) || !(nu > 0.0)) {
        throw std::invalid_argument("matern_correlation: need d >= 0, kappa > 0, nu > 0");
    }
    if (d == 0.0) return 1.0;
    const double x = 2.0 * d * std::sqrt(nu) / kappa;
    // K_nu underflows long before the product matters.
    if (x > 700.0) return 0.0;
    return std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(x, nu) * std::cyl_bessel_k(nu, x);
}

Eigen::MatrixXd mode_correlation(const SimScenario& scn) {
    const std::size_t p1 = scn.covariate_shape.at(0);
    const std::size_t p = shape_size(scn.covariate_shape);
    const auto n = static_cast<Eigen::Index>(p);
    Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n);
    if (scn.dependence == Dependence::independent) return c;
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = 0; b < a; ++b) {
            const double dx = static_cast<double>(a % p1) - static_cast<double>(b % p1);
            const double dy = static_cast<double>(a / p1) - static_cast<double>(b / p1);
            const double d = std::hypot(dx, dy);
            const double rho = scn.dependence == Dependence::exp_spatial
                                   ? exp_correlation(d, scn.exp_scale)
                                   : matern_correlation(d, scn.matern_kappa, scn.matern_nu);
            c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = rho;
            c(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = rho;
        }
    }
    return c;
}

std::vector<double> design_grid(std::size_t time_points, double domain_end) {
    std::vector<double> t(time_points);
    for (std::size_t j = 0; j < time_points; ++j) {
        t[j] = domain_end * (static_cast<double>(j) + 0.5) / static_cast<double>(time_points);
    }
    return t;
}

CovariateDraw gen_covariates(const SimScenario& scn, std::uint64_t seed) {
    scn.validate();
    const std::size_t n = scn.subjects;
    const std::size_t j = scn.time_points;
    const std::size_t p = shape_size(scn.covariate_shape);
    const auto np = static_cast<Eigen::Index>(p);
    const std::vector<double> t = design_grid(j);

    Eigen::MatrixXd chol = Eigen::MatrixXd::Identity(np, np);
    if (scn.dependence != Dependence::independent) {
        Eigen::LLT<Eigen::MatrixXd> llt(mode_correlation(scn));
        if (llt.info() != Eigen::Success) {
            throw std::domain_error("gen_covariates: mode correlation matrix is not positive definite");
        }
        chol = llt.matrixL();
    }

    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Shape series{j};
    series.insert(series.end(), scn.covariate_shape.begin(), scn.covariate_shape.end());

    CovariateDraw out;
    out.x.reserve(n);
    out.u.reserve(n);
    out.delta.reserve(n);
    Eigen::VectorXd z(np);
    std::array<Eigen::VectorXd, 3> chi;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t l = 0; l < 3; ++l) {
            for (Eigen::Index k = 0; k < np; ++k) z(k) = normal(rng);
            chi[l] = scn.chi_sd[l] * (chol * z);
        }
        DenseTensor delta(scn.covariate_shape);
        for (std::size_t k = 0; k < p; ++k) delta.data()[k] = scn.measurement_sd * normal(rng);

        DenseTensor x(series);
        auto xm = x.as_matrix(j);
        for (std::size_t jj = 0; jj < j; ++jj) {
            const double s = std::sin(std::numbers::pi * t[jj]);
            const double c = std::cos(std::numbers::pi * t[jj]);
            xm.row(static_cast<Eigen::Index>(jj)) = (chi[0] + s * chi[1] + c * chi[2]).transpose();
        }
        DenseTensor u = x;
        auto um = u.as_matrix(j);
        const Eigen::Map<const Eigen::RowVectorXd> dv(delta.data(), np);
        um.rowwise() += dv;
        out.x.push_back(std::move(x));
        out.u.push_back(std::move(u));
        out.delta.push_back(std::move(delta));
    }
    return out;
}

std::vector<DenseTensor> gen_errors(const SimScenario& scn, std::uint64_t seed) {
    scn.validate();
    const std::size_t j = scn.time_points;
    const std::size_t q = shape_size(scn.response_shape);
    const std::vector<double> t = design_grid(j);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Shape series{j};
    series.insert(series.end(), scn.response_shape.begin(), scn.response_shape.end());

    std::vector<DenseTensor> out;
    out.reserve(scn.subjects);
    for (std::size_t i = 0; i < scn.subjects; ++i) {
        DenseTensor e(series);
        auto em = e.as_matrix(j);
        for (std::size_t k = 0; k < q; ++k) {
            const double eta1 = scn.eta_sd[0] * normal(rng);
            const double eta2 = scn.eta_sd[1] * normal(rng);
            for (std::size_t jj = 0; jj < j; ++jj) {
                em(static_cast<Eigen::Index>(jj), static_cast<Eigen::Index>(k)) =
                    std::numbers::sqrt2 * (eta1 * std::cos(std::numbers::pi * t[jj]) +
                                           eta2 * std::sin(std::numbers::pi * t[jj]));
            }
        }
        out.push_back(std::move(e));
    }
    return out;
}

SimDataset generate(const SimScenario& scn) {
    scn.validate();
    const std::size_t j = scn.time_points;
    const std::size_t p = shape_size(scn.covariate_shape);
    const std::vector<double> t = design_grid(j);

    CovariateDraw cov = gen_covariates(scn, derive_seed(scn.seed, 0));
    std::vector<DenseTensor> errors = gen_errors(scn, derive_seed(scn.seed, 1));

    // beta(t_j) unfolded as P x Q, one per time point.
    std::vector<Eigen::MatrixXd> beta;
    beta.reserve(j);
    for (const double tj : t) {
        beta.push_back(true_beta_tensor(scn.covariate_shape, scn.response_shape, tj)
                           .as_matrix(p));
    }

    Shape series{j};
    series.insert(series.end(), scn.response_shape.begin(), scn.response_shape.end());
    SimDataset out;
    out.scenario = scn;
    out.observed.domain_end = 1.0;
    for (std::size_t i = 0; i < scn.subjects; ++i) {
        const DenseTensor& driver =
            scn.measurement == MeasurementErrorModel::in_response ? cov.u[i] : cov.x[i];
        const auto xm = driver.as_matrix(j);
        DenseTensor signal(series);
        auto sm = signal.as_matrix(j);
        for (std::size_t jj = 0; jj < j; ++jj) {
            const auto r = static_cast<Eigen::Index>(jj);
            sm.row(r).noalias() = xm.row(r) * beta[jj];
        }
        DenseTensor y = signal;
        y.as_matrix(j) += errors[i].as_matrix(j);
        out.observed.time_grids.push_back(t);
        out.observed.covariates.push_back(cov.u[i]);
        out.observed.responses.push_back(std::move(y));
        out.signal.push_back(std::move(signal));
    }
    out.x_true = std::move(cov.x);
    out.delta = std::move(cov.delta);
    out.errors = std::move(errors);
    return out;
}

}  // namespace tvtr
