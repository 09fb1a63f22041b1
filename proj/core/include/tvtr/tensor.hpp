// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace tvtr {

/// Mode sizes (I_1, ..., I_D). An empty shape denotes a scalar.
using Shape = std::vector<std::size_t>;

/// Product of all mode sizes; 1 for the empty shape.
std::size_t shape_size(std::span<const std::size_t> shape) noexcept;

/// Dense D-way array.
///
/// Values are stored first-index-fastest: element (i_1, ..., i_D) with
/// 1-based indices sits at flat position
///   i_1 + sum_{d>=2} (prod_{k<d} I_k) (i_d - 1)
/// which is the vectorization order used throughout the library. All
/// accessors take 0-based indices; modes are 0-based as well.
///
/// Because storage is column-major, the mode-1 unfolding and every
/// "leading modes x trailing modes" reshape are zero-copy Eigen maps.
class DenseTensor {
public:
    DenseTensor() = default;

    /// Zero-filled tensor of the given shape.
    explicit DenseTensor(Shape shape);

    /// Takes ownership of `values`; throws std::invalid_argument unless
    /// values.size() == shape_size(shape).
    DenseTensor(Shape shape, std::vector<double> values);

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t order() const noexcept { return shape_.size(); }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] std::size_t dim(std::size_t mode) const;

    [[nodiscard]] std::span<const double> values() const noexcept { return data_; }
    [[nodiscard]] std::span<double> values() noexcept { return data_; }
    [[nodiscard]] const double* data() const noexcept { return data_.data(); }
    [[nodiscard]] double* data() noexcept { return data_.data(); }

    [[nodiscard]] std::size_t linear_index(std::span<const std::size_t> index) const;

    [[nodiscard]] double at(std::span<const std::size_t> index) const {
        return data_[linear_index(index)];
    }
    double& at(std::span<const std::size_t> index) { return data_[linear_index(index)]; }
    [[nodiscard]] double at(std::initializer_list<std::size_t> index) const {
        return at(std::span<const std::size_t>(index.begin(), index.size()));
    }
    double& at(std::initializer_list<std::size_t> index) {
        return at(std::span<const std::size_t>(index.begin(), index.size()));
    }

    /// View of the storage as a `rows x size()/rows` column-major matrix.
    /// `rows` must divide size().
    [[nodiscard]] Eigen::Map<const Eigen::MatrixXd> as_matrix(std::size_t rows) const;
    [[nodiscard]] Eigen::Map<Eigen::MatrixXd> as_matrix(std::size_t rows);

    /// Same values, new shape of equal total size.
    [[nodiscard]] DenseTensor reshaped(Shape shape) const;

    void fill(double value);

    friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

/// Increments a 0-based multi-index in first-index-fastest order. Returns
/// false after the last index has been visited (index wraps to zeros).
bool next_index(std::span<std::size_t> index, std::span<const std::size_t> shape) noexcept;

Eigen::VectorXd vectorize(const DenseTensor& t);

/// Mode-`mode` matricization: I_mode x prod_{d != mode} I_d, with the
/// remaining modes ordered first-fastest in the column index.
Eigen::MatrixXd unfold(const DenseTensor& t, std::size_t mode);

/// Inverse of unfold().
DenseTensor refold(const Eigen::MatrixXd& m, std::size_t mode, Shape shape);

/// Contracted product <a, b>_l: sums over the last l modes of `a`, which
/// must equal the first l modes of `b`. The result has the leading modes
/// of `a` followed by the trailing modes of `b`.
DenseTensor contracted_product(const DenseTensor& a, const DenseTensor& b, std::size_t l);

/// Tensor-times-vector along one mode; the mode is removed from the result.
DenseTensor mode_vector_product(const DenseTensor& t, std::size_t mode,
                                const Eigen::Ref<const Eigen::VectorXd>& v);

double frobenius_inner(const DenseTensor& a, const DenseTensor& b);
double frobenius_norm(const DenseTensor& a);

}  // namespace tvtr
