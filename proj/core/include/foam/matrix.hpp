#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace foam {

/// Dense 2-D matrix of doubles, row-major flat storage.
///
/// Values are immutable once produced by an operation; all free functions
/// below are pure. Entries are expected to stay finite: in builds without
/// NDEBUG every operation checks its result and throws DomainError on
/// NaN/Inf, release builds skip the check.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    /// Row-major construction: Matrix(2, 2, {1, 2, 3, 4}).
    Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> init);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class BinaryOp { add, sub, mul, div };

/// Componentwise op(a_ij, b_ij). div requires every |b_ij| > 0.
Matrix elementwise(const Matrix& a, const Matrix& b, BinaryOp op);

/// alpha*a + beta*b, componentwise.
Matrix scale_add(const Matrix& a, double alpha, const Matrix& b, double beta);

/// sqrt(sum of squared entries).
double frobenius_norm(const Matrix& a);

/// <a,b> / (||a|| ||b||); throws DomainError if either norm is zero.
double cosine_similarity(const Matrix& a, const Matrix& b);

/// Flat inner product of same-shape matrices.
double dot(const Matrix& a, const Matrix& b);

/// Standard matrix product; used as the dense oracle for the blocked kernels.
Matrix dense_matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

Matrix identity(std::size_t n);

/// max_ij |a_ij - b_ij| over same-shape matrices.
double max_abs_diff(const Matrix& a, const Matrix& b);

namespace detail {
void check_same_shape(const Matrix& a, const Matrix& b, const char* where);
void check_finite(const Matrix& m, const char* where);  // no-op under NDEBUG
}  // namespace detail

}  // namespace foam
