// SPDX-License-Identifier: Apache-2.0
#include "tvtr/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tvtr {

std::size_t shape_size(std::span<const std::size_t> shape) noexcept {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

DenseTensor::DenseTensor(Shape shape)
    : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}

DenseTensor::DenseTensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    if (data_.size() != shape_size(shape_)) {
        throw std::invalid_argument("DenseTensor: value count " + std::to_string(data_.size()) +
                                    " does not match shape size " +
                                    std::to_string(shape_size(shape_)));
    }
}

std::size_t DenseTensor::dim(std::size_t mode) const {
    if (mode >= shape_.size()) {
        throw std::out_of_range("DenseTensor::dim: mode " + std::to_string(mode) +
                                " out of range for order " + std::to_string(shape_.size()));
    }
    return shape_[mode];
}

std::size_t DenseTensor::linear_index(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) {
        throw std::invalid_argument("DenseTensor: index arity does not match tensor order");
    }
    std::size_t pos = 0;
    std::size_t stride = 1;
    for (std::size_t d = 0; d < shape_.size(); ++d) {
        if (index[d] >= shape_[d]) {
            throw std::out_of_range("DenseTensor: index out of range in mode " + std::to_string(d));
        }
        pos += stride * index[d];
        stride *= shape_[d];
    }
    return pos;
}

Eigen::Map<const Eigen::MatrixXd> DenseTensor::as_matrix(std::size_t rows) const {
    if (rows == 0 ? !data_.empty() : data_.size() % rows != 0) {
        throw std::invalid_argument("DenseTensor::as_matrix: row count does not divide size");
    }
    const auto cols = rows == 0 ? 0 : data_.size() / rows;
    return {data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

Eigen::Map<Eigen::MatrixXd> DenseTensor::as_matrix(std::size_t rows) {
    if (rows == 0 ? !data_.empty() : data_.size() % rows != 0) {
        throw std::invalid_argument("DenseTensor::as_matrix: row count does not divide size");
    }
    const auto cols = rows == 0 ? 0 : data_.size() / rows;
    return {data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

DenseTensor DenseTensor::reshaped(Shape shape) const {
    return DenseTensor(std::move(shape), data_);
}

void DenseTensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool next_index(std::span<std::size_t> index, std::span<const std::size_t> shape) noexcept {
    for (std::size_t d = 0; d < shape.size(); ++d) {
        if (++index[d] < shape[d]) return true;
        index[d] = 0;
    }
    return false;
}

Eigen::VectorXd vectorize(const DenseTensor& t) {
    return Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
}

namespace {

void check_mode(std::size_t mode, std::size_t order, const char* who) {
    if (mode >= order) {
        throw std::out_of_range(std::string(who) + ": mode " + std::to_string(mode) +
                                " out of range for order " + std::to_string(order));
    }
}

}  // namespace

// With first-fastest storage the tensor is (left x I_mode x right), where
// left = prod_{d<mode} I_d and right = prod_{d>mode} I_d. The unfolded
// column index of (l, r) is l + left * r.
Eigen::MatrixXd unfold(const DenseTensor& t, std::size_t mode) {
    check_mode(mode, t.order(), "unfold");
    const auto& s = t.shape();
    const std::size_t n = s[mode];
    const std::size_t left = shape_size(std::span(s).first(mode));
    const std::size_t right = shape_size(std::span(s).subspan(mode + 1));

    Eigen::MatrixXd m(n, left * right);
    const double* src = t.data();
    for (std::size_t r = 0; r < right; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            const double* block = src + left * (i + n * r);
            for (std::size_t l = 0; l < left; ++l) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l + left * r)) = block[l];
            }
        }
    }
    return m;
}

DenseTensor refold(const Eigen::MatrixXd& m, std::size_t mode, Shape shape) {
    check_mode(mode, shape.size(), "refold");
    const std::size_t n = shape[mode];
    const std::size_t left = shape_size(std::span(shape).first(mode));
    const std::size_t right = shape_size(std::span(shape).subspan(mode + 1));
    if (static_cast<std::size_t>(m.rows()) != n ||
        static_cast<std::size_t>(m.cols()) != left * right) {
        throw std::invalid_argument("refold: matrix dimensions inconsistent with shape and mode");
    }
    DenseTensor t(std::move(shape));
    double* dst = t.data();
    for (std::size_t r = 0; r < right; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            double* block = dst + left * (i + n * r);
            for (std::size_t l = 0; l < left; ++l) {
                block[l] = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l + left * r));
            }
        }
    }
    return t;
}

DenseTensor contracted_product(const DenseTensor& a, const DenseTensor& b, std::size_t l) {
    if (l > a.order() || l > b.order()) {
        throw std::invalid_argument("contracted_product: contraction count exceeds tensor order");
    }
    const auto& sa = a.shape();
    const auto& sb = b.shape();
    const std::size_t lead_modes = sa.size() - l;
    for (std::size_t k = 0; k < l; ++k) {
        if (sa[lead_modes + k] != sb[k]) {
            throw std::invalid_argument("contracted_product: shape mismatch on contracted mode " +
                                        std::to_string(k));
        }
    }
    // a = (lead x shared), b = (shared x trail) in column-major layout.
    const std::size_t lead = shape_size(std::span(sa).first(lead_modes));
    const std::size_t shared = shape_size(std::span(sb).first(l));
    const std::size_t trail = shape_size(std::span(sb).subspan(l));

    Shape out_shape(sa.begin(), sa.begin() + static_cast<std::ptrdiff_t>(lead_modes));
    out_shape.insert(out_shape.end(), sb.begin() + static_cast<std::ptrdiff_t>(l), sb.end());
    DenseTensor out(std::move(out_shape));
    if (lead == 0 || trail == 0) return out;

    Eigen::Map<const Eigen::MatrixXd> am(a.data(), static_cast<Eigen::Index>(lead),
                                         static_cast<Eigen::Index>(shared));
    Eigen::Map<const Eigen::MatrixXd> bm(b.data(), static_cast<Eigen::Index>(shared),
                                         static_cast<Eigen::Index>(trail));
    out.as_matrix(lead).noalias() = am * bm;
    return out;
}

DenseTensor mode_vector_product(const DenseTensor& t, std::size_t mode,
                                const Eigen::Ref<const Eigen::VectorXd>& v) {
    check_mode(mode, t.order(), "mode_vector_product");
    const auto& s = t.shape();
    const std::size_t n = s[mode];
    if (static_cast<std::size_t>(v.size()) != n) {
        throw std::invalid_argument("mode_vector_product: vector length does not match mode size");
    }
    const std::size_t left = shape_size(std::span(s).first(mode));
    const std::size_t right = shape_size(std::span(s).subspan(mode + 1));

    Shape out_shape = s;
    out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(mode));
    DenseTensor out(std::move(out_shape));
    auto om = out.as_matrix(left);
    for (std::size_t r = 0; r < right; ++r) {
        Eigen::Map<const Eigen::MatrixXd> block(t.data() + left * n * r,
                                                static_cast<Eigen::Index>(left),
                                                static_cast<Eigen::Index>(n));
        om.col(static_cast<Eigen::Index>(r)).noalias() = block * v;
    }
    return out;
}

double frobenius_inner(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) {
        throw std::invalid_argument("frobenius_inner: shape mismatch");
    }
    return vectorize(a).dot(vectorize(b));
}

double frobenius_norm(const DenseTensor& a) { return std::sqrt(frobenius_inner(a, a)); }

}  // namespace tvtr
