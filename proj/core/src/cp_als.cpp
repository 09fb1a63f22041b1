// SPDX-License-Identifier: Apache-2.0
#include "tvtr/cp_als.hpp"

#include "tvtr/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace tvtr {

void FitConfig::validate() const {
    if (rank < 1) throw std::invalid_argument("FitConfig: rank must be >= 1");
    if (!std::isfinite(theta) || theta < 0.0) {
        throw std::invalid_argument("FitConfig: theta must be finite and >= 0");
    }
    if (!std::isfinite(phi) || phi < 0.0) {
        throw std::invalid_argument("FitConfig: phi must be finite and >= 0");
    }
    if (degree < 0) throw std::invalid_argument("FitConfig: degree must be >= 0");
    if (theta > 0.0 && degree < 2) {
        throw std::invalid_argument("FitConfig: curvature penalty needs degree >= 2");
    }
    if (!std::isfinite(tolerance) || !(tolerance > 0.0)) {
        throw std::invalid_argument("FitConfig: tolerance must be finite and > 0");
    }
    if (max_iterations < 1) throw std::invalid_argument("FitConfig: max_iterations must be >= 1");
    if (restarts < 1) throw std::invalid_argument("FitConfig: restarts must be >= 1");
}

std::size_t FitConfig::knots_for(std::size_t time_points) const noexcept {
    return n_interior_knots.value_or(default_knot_count(time_points));
}

DenseTensor FitResult::coefficients() const { return cp_compose(factors); }

DenseTensor FitResult::beta(double t) const { return reconstruct_beta(factors, basis, t); }

CPFactors init_factors(std::span<const std::size_t> dims, std::size_t rank, std::uint64_t seed) {
    if (rank < 1) throw std::invalid_argument("init_factors: rank must be >= 1");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Eigen::MatrixXd> factors;
    factors.reserve(dims.size());
    for (const std::size_t d : dims) {
        Eigen::MatrixXd a(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(rank));
        for (Eigen::Index k = 0; k < a.size(); ++k) a.data()[k] = normal(rng);
        factors.push_back(std::move(a));
    }
    return CPFactors::with_unit_weights(std::move(factors));
}

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

struct Layout {
    std::size_t rows = 0;
    Shape cov;   // H, P_1..P_L
    Shape resp;  // Q_1..Q_M
    std::size_t cov_size = 0;
    std::size_t resp_size = 0;
};

Layout layout_of(const DenseTensor& z, const CPFactors& f) {
    if (z.order() < 2) throw std::invalid_argument("design tensor needs a row and a basis mode");
    f.validate();
    Layout lay;
    lay.rows = z.dim(0);
    lay.cov.assign(z.shape().begin() + 1, z.shape().end());
    if (f.order() < lay.cov.size()) {
        throw std::invalid_argument("CP factors have fewer modes than the design");
    }
    const Shape fs = f.shape();
    for (std::size_t k = 0; k < lay.cov.size(); ++k) {
        if (fs[k] != lay.cov[k]) {
            throw std::invalid_argument("CP factor " + std::to_string(k) +
                                        " does not match design mode size");
        }
    }
    lay.resp.assign(fs.begin() + static_cast<std::ptrdiff_t>(lay.cov.size()), fs.end());
    lay.cov_size = shape_size(lay.cov);
    lay.resp_size = shape_size(lay.resp);
    return lay;
}

void require_finite(const CPFactors& f, const char* who) {
    if (!f.weights.allFinite()) throw NumericalError(std::string(who) + ": non-finite weights");
    for (const auto& a : f.factors) {
        if (!a.allFinite()) throw NumericalError(std::string(who) + ": non-finite factor entries");
    }
}

MatrixXd khatri_rao_range(const CPFactors& f, std::size_t begin, std::size_t end) {
    if (begin >= end) return MatrixXd::Ones(1, static_cast<Index>(f.rank()));
    return khatri_rao(std::span<const MatrixXd>(f.factors).subspan(begin, end - begin));
}

// Hadamard product of Gram matrices A_d^T A_d over d in [begin, end), skipping `skip`.
MatrixXd gram_hadamard(const CPFactors& f, std::size_t begin, std::size_t end, std::size_t skip) {
    const auto r = static_cast<Index>(f.rank());
    MatrixXd out = MatrixXd::Ones(r, r);
    for (std::size_t d = begin; d < end; ++d) {
        if (d == skip) continue;
        out.array() *= (f.factors[d].transpose() * f.factors[d]).array();
    }
    return out;
}

// Z contracted with all covariate factors of each component, scaled by the
// weights: rows x R.
MatrixXd covariate_scores(const DenseTensor& z, const Layout& lay, const CPFactors& f,
                          std::size_t rows) {
    const MatrixXd kr = khatri_rao_range(f, 0, lay.cov.size());
    const auto zm = z.as_matrix(lay.rows);
    MatrixXd w = zm.topRows(static_cast<Index>(rows)) * kr;
    return w * f.weights.asDiagonal();
}

// Block design of covariate factor k: column (i + d_k r) holds
// <Z, u_r0 o ... (skip k) ... o u_rL> at index i of mode k.
MatrixXd covariate_partial(const DenseTensor& z, const Layout& lay, const CPFactors& f,
                           std::size_t k) {
    const std::size_t rows = lay.rows;
    const auto r_count = static_cast<Index>(f.rank());
    const std::size_t d = lay.cov[k];
    const std::size_t left = shape_size(std::span(lay.cov).first(k));
    const std::size_t right = shape_size(std::span(lay.cov).subspan(k + 1));

    MatrixXd trailing;
    if (right > 1) {
        const MatrixXd kr = khatri_rao_range(f, k + 1, lay.cov.size());
        Eigen::Map<const MatrixXd> zz(z.data(), static_cast<Index>(rows * left * d),
                                      static_cast<Index>(right));
        trailing.noalias() = zz * kr;
    }
    const MatrixXd leading = khatri_rao_range(f, 0, k);

    MatrixXd c(static_cast<Index>(rows), static_cast<Index>(d) * r_count);
    for (Index r = 0; r < r_count; ++r) {
        const double* base = right > 1 ? trailing.col(r).data() : z.data();
        if (left == 1) {
            c.middleCols(static_cast<Index>(d) * r, static_cast<Index>(d)) =
                Eigen::Map<const MatrixXd>(base, static_cast<Index>(rows), static_cast<Index>(d));
            continue;
        }
        for (std::size_t i = 0; i < d; ++i) {
            Eigen::Map<const MatrixXd> block(base + rows * left * i, static_cast<Index>(rows),
                                             static_cast<Index>(left));
            c.col(static_cast<Index>(d) * r + static_cast<Index>(i)).noalias() =
                block * leading.col(r);
        }
    }
    return c;
}

Eigen::MatrixXd min_norm_solve(const MatrixXd& gram, const MatrixXd& rhs) {
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(gram);
    MatrixXd x = cod.solve(rhs);
    if (!x.allFinite()) throw NumericalError("block least-squares solve produced non-finite values");
    return x;
}

}  // namespace

// The block design C = [C_1 .. C_R] with rows (n, q) and columns (i, r) has
// entries C_r[n, i] * v_r[q] * lambda_r, where v_r is the outer product of
// the response factors. Its normal equations factor as
//   (C^T C)[(i,r),(i',r')] = (C_r^T C_r')[i,i'] * (V^T V)[r,r'] * lambda_r lambda_r'
//   (C^T y)[(i,r)]         = lambda_r * C_r^T (Y~ v_r)
// so the (rows*Q) x (d*R) matrix is never formed. They are solved with a
// rank-revealing complete orthogonal decomposition, which gives the
// minimum-norm least-squares solution when C is rank deficient.
Eigen::MatrixXd solve_u_block(const AugmentedSystem& sys, const CPFactors& f, std::size_t block) {
    const Layout lay = layout_of(sys.z, f);
    if (block >= lay.cov.size()) {
        throw std::out_of_range("solve_u_block: block " + std::to_string(block) +
                                " out of range");
    }
    require_finite(f, "solve_u_block");
    const auto r_count = static_cast<Index>(f.rank());
    const auto d = static_cast<Index>(lay.cov[block]);

    const MatrixXd c = covariate_partial(sys.z, lay, f, block);
    const MatrixXd vkr = khatri_rao_range(f, lay.cov.size(), f.order());  // Q x R
    const MatrixXd yv = sys.y.as_matrix(lay.rows) * vkr;                   // rows x R
    const MatrixXd omega = gram_hadamard(f, lay.cov.size(), f.order(), f.order()).array() *
                           (f.weights * f.weights.transpose()).array();

    MatrixXd gram = MatrixXd::Zero(d * r_count, d * r_count);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(c.transpose());
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    Eigen::VectorXd rhs(d * r_count);
    for (Index r = 0; r < r_count; ++r) {
        for (Index s = 0; s < r_count; ++s) gram.block(d * r, d * s, d, d) *= omega(r, s);
        rhs.segment(d * r, d) = f.weights(r) * (c.middleCols(d * r, d).transpose() * yv.col(r));
    }
    const Eigen::VectorXd x = min_norm_solve(gram, rhs);
    return Eigen::Map<const MatrixXd>(x.data(), d, r_count);
}

// V_m = Y~_(m) D (D^T D)^+ with D[(n, q_-m), r] = w_r[n] prod_{m' != m} v_{m'}[q_m', r],
// where w_r = lambda_r <Z~, u_r0 o ... o u_rL>. D^T D is the Hadamard
// product of W^T W with the other response Gram matrices.
Eigen::MatrixXd solve_v_block(const AugmentedSystem& sys, const CPFactors& f, std::size_t block) {
    const Layout lay = layout_of(sys.z, f);
    if (block >= lay.resp.size()) {
        throw std::out_of_range("solve_v_block: block " + std::to_string(block) +
                                " out of range");
    }
    require_finite(f, "solve_v_block");
    const std::size_t k = lay.cov.size();
    const std::size_t mode = k + block;
    const auto r_count = static_cast<Index>(f.rank());

    const MatrixXd w = covariate_scores(sys.z, lay, f, lay.rows);     // rows x R
    const MatrixXd t = w.transpose() * sys.y.as_matrix(lay.rows);     // R x Q
    const std::size_t qm = lay.resp[block];
    const std::size_t left = shape_size(std::span(lay.resp).first(block));
    const std::size_t right = shape_size(std::span(lay.resp).subspan(block + 1));
    const MatrixXd kl = khatri_rao_range(f, k, mode);
    const MatrixXd kr = khatri_rao_range(f, mode + 1, f.order());

    MatrixXd yd = MatrixXd::Zero(static_cast<Index>(qm), r_count);
    for (Index r = 0; r < r_count; ++r) {
        for (std::size_t rr = 0; rr < right; ++rr) {
            for (std::size_t i = 0; i < qm; ++i) {
                const Index off = static_cast<Index>(left * (i + qm * rr));
                const double s = t.row(r).segment(off, static_cast<Index>(left)).dot(kl.col(r));
                yd(static_cast<Index>(i), r) += s * kr(static_cast<Index>(rr), r);
            }
        }
    }
    const MatrixXd dtd = (w.transpose() * w).array() * gram_hadamard(f, k, f.order(), mode).array();
    return min_norm_solve(dtd, yd.transpose()).transpose();
}

DenseTensor predict(const DenseTensor& z, const CPFactors& f) {
    const Layout lay = layout_of(z, f);
    const MatrixXd w = covariate_scores(z, lay, f, lay.rows);
    const MatrixXd vkr = khatri_rao_range(f, lay.cov.size(), f.order());
    Shape out_shape{lay.rows};
    out_shape.insert(out_shape.end(), lay.resp.begin(), lay.resp.end());
    DenseTensor out(std::move(out_shape));
    out.as_matrix(lay.rows).noalias() = w * vkr.transpose();
    return out;
}

double residual_sum_of_squares(const DenseTensor& z, const DenseTensor& y, const CPFactors& f,
                               std::optional<std::size_t> rows) {
    const Layout lay = layout_of(z, f);
    if (y.order() < 1 || y.dim(0) != lay.rows || y.size() != lay.rows * lay.resp_size) {
        throw std::invalid_argument("residual_sum_of_squares: response shape mismatch");
    }
    const std::size_t n = rows.value_or(lay.rows);
    if (n > lay.rows) throw std::out_of_range("residual_sum_of_squares: row count");
    const MatrixXd w = covariate_scores(z, lay, f, n);
    const MatrixXd vkr = khatri_rao_range(f, lay.cov.size(), f.order());
    const auto ym = y.as_matrix(lay.rows).topRows(static_cast<Index>(n));
    return (ym - w * vkr.transpose()).squaredNorm();
}

double penalized_objective(const AugmentedSystem& sys, const CPFactors& f) {
    return residual_sum_of_squares(sys.z, sys.y, f) / static_cast<double>(sys.data_rows);
}

double relative_error(const AugmentedSystem& sys, const CPFactors& f) {
    const double norm2 = vectorize(sys.y).squaredNorm();
    if (!(norm2 > 0.0)) {
        throw std::invalid_argument("relative_error: response has zero norm");
    }
    return residual_sum_of_squares(sys.z, sys.y, f) / norm2;
}

FitResult fit_system(const AugmentedSystem& sys, const BSplineBasis& basis, const FitConfig& cfg) {
    cfg.validate();
    if (sys.basis_size() != basis.size()) {
        throw std::invalid_argument("fit_system: basis size does not match the system");
    }
    const Shape dims = sys.coefficient_shape();
    const std::size_t k = sys.covariate_modes();
    const std::size_t m = sys.response_modes();
    const double y_norm2 = vectorize(sys.y).squaredNorm();
    if (!(y_norm2 > 0.0)) throw std::invalid_argument("fit: response has zero norm");
    const double nj = static_cast<double>(sys.data_rows);

    std::optional<FitResult> best;
    CPFactors best_factors;
    for (std::size_t s = 0; s < cfg.restarts; ++s) {
        const std::uint64_t seed = derive_seed(cfg.seed, s);
        CPFactors f = init_factors(dims, cfg.rank, seed);
        FitResult run{CPFactors{}, basis, cfg, {}, {}, false, 0, s, seed};
        double previous = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
            for (std::size_t b = 0; b < k; ++b) f.factors[b] = solve_u_block(sys, f, b);
            for (std::size_t b = 0; b < m; ++b) f.factors[k + b] = solve_v_block(sys, f, b);
            const double rss = residual_sum_of_squares(sys.z, sys.y, f);
            if (!std::isfinite(rss)) throw NumericalError("fit: residual became non-finite");
            const double error = rss / y_norm2;
            run.objective_trace.push_back(rss / nj);
            run.relative_error_trace.push_back(error);
            run.iterations = it;
            if (it > 1 && std::abs(error - previous) < cfg.tolerance) {
                run.converged = true;
                break;
            }
            previous = error;
        }
        if (!best || run.final_objective() < best->final_objective()) {
            best = std::move(run);
            best_factors = std::move(f);
        }
    }
    best->factors = canonicalize(best_factors);
    return std::move(*best);
}

FitResult fit(const ObservationSet& obs, const FitConfig& cfg) {
    cfg.validate();
    obs.validate();
    const BSplineBasis basis(obs.domain_end, cfg.degree, cfg.knots_for(obs.time_points()));
    const AugmentedSystem sys = build_augmented_system(obs, basis, cfg.theta, cfg.phi);
    return fit_system(sys, basis, cfg);
}

CPFactors canonicalize(const CPFactors& f) {
    f.validate();
    const auto r_count = static_cast<Index>(f.rank());
    CPFactors out = f;
    for (Index r = 0; r < r_count; ++r) {
        bool degenerate = false;
        for (const auto& a : f.factors) {
            const double n = a.col(r).norm();
            if (!(n > 0.0) || !std::isfinite(n)) degenerate = true;
        }
        if (degenerate) {
            out.weights(r) = 0.0;
            for (auto& a : out.factors) {
                a.col(r).setZero();
                a(0, r) = 1.0;
            }
            continue;
        }
        double w = f.weights(r);
        for (auto& a : out.factors) {
            auto col = a.col(r);
            const double n = col.norm();
            col /= n;
            w *= n;
            Index arg = 0;
            col.cwiseAbs().maxCoeff(&arg);
            if (col(arg) < 0.0) {
                col = -col;
                w = -w;
            }
        }
        out.weights(r) = w;
    }

    std::vector<Index> order(static_cast<std::size_t>(r_count));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return std::abs(out.weights(a)) > std::abs(out.weights(b));
    });
    CPFactors sorted = out;
    for (Index r = 0; r < r_count; ++r) {
        const Index src = order[static_cast<std::size_t>(r)];
        sorted.weights(r) = out.weights(src);
        for (std::size_t d = 0; d < out.factors.size(); ++d) {
            sorted.factors[d].col(r) = out.factors[d].col(src);
        }
    }
    return sorted;
}

DenseTensor reconstruct_beta(const CPFactors& f, const BSplineBasis& basis, double t) {
    f.validate();
    if (f.order() < 2) throw std::invalid_argument("reconstruct_beta: need at least two modes");
    if (static_cast<std::size_t>(f.factors.front().rows()) != basis.size()) {
        throw std::invalid_argument("reconstruct_beta: basis size does not match U_0");
    }
    const Eigen::VectorXd b = basis.evaluate(t);
    CPFactors rest;
    rest.weights = f.weights.cwiseProduct(f.factors.front().transpose() * b);
    rest.factors.assign(f.factors.begin() + 1, f.factors.end());
    return cp_compose(rest);
}

}  // namespace tvtr
