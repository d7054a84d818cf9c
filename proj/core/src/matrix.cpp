#include "foam/matrix.hpp"

#include <cmath>
#include <string>

#include "foam/errors.hpp"

namespace foam {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> init)
    : rows_(rows), cols_(cols), data_(init) {
    if (data_.size() != rows * cols) {
        throw ShapeError("Matrix init list has " + std::to_string(data_.size()) +
                         " entries, expected " + std::to_string(rows * cols));
    }
}

bool Matrix::all_finite() const {
    for (double x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

namespace detail {

void check_same_shape(const Matrix& a, const Matrix& b, const char* where) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(where) + ": shape mismatch (" +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
    }
}

void check_finite([[maybe_unused]] const Matrix& m, [[maybe_unused]] const char* where) {
#ifndef NDEBUG
    if (!m.all_finite()) {
        throw DomainError(std::string(where) + ": non-finite entry");
    }
#endif
}

}  // namespace detail

Matrix elementwise(const Matrix& a, const Matrix& b, BinaryOp op) {
    detail::check_same_shape(a, b, "elementwise");
    Matrix out(a.rows(), a.cols());
    const auto& da = a.data();
    const auto& db = b.data();
    auto& dout = out.data();
    switch (op) {
        case BinaryOp::add:
            for (std::size_t i = 0; i < da.size(); ++i) dout[i] = da[i] + db[i];
            break;
        case BinaryOp::sub:
            for (std::size_t i = 0; i < da.size(); ++i) dout[i] = da[i] - db[i];
            break;
        case BinaryOp::mul:
            for (std::size_t i = 0; i < da.size(); ++i) dout[i] = da[i] * db[i];
            break;
        case BinaryOp::div:
            for (std::size_t i = 0; i < da.size(); ++i) {
                if (db[i] == 0.0) throw DomainError("elementwise div: zero divisor");
                dout[i] = da[i] / db[i];
            }
            break;
    }
    detail::check_finite(out, "elementwise");
    return out;
}

Matrix scale_add(const Matrix& a, double alpha, const Matrix& b, double beta) {
    detail::check_same_shape(a, b, "scale_add");
    Matrix out(a.rows(), a.cols());
    const auto& da = a.data();
    const auto& db = b.data();
    auto& dout = out.data();
    for (std::size_t i = 0; i < da.size(); ++i) dout[i] = alpha * da[i] + beta * db[i];
    detail::check_finite(out, "scale_add");
    return out;
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double x : a.data()) s += x * x;
    return std::sqrt(s);
}

double dot(const Matrix& a, const Matrix& b) {
    detail::check_same_shape(a, b, "dot");
    double s = 0.0;
    const auto& da = a.data();
    const auto& db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) s += da[i] * db[i];
    return s;
}

double cosine_similarity(const Matrix& a, const Matrix& b) {
    detail::check_same_shape(a, b, "cosine_similarity");
    double na = frobenius_norm(a);
    double nb = frobenius_norm(b);
    if (na == 0.0 || nb == 0.0) {
        throw DomainError("cosine_similarity: zero-norm input");
    }
    return dot(a, b) / (na * nb);
}

Matrix dense_matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("dense_matmul: inner dimensions " + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.rows()));
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    detail::check_finite(out, "dense_matmul");
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

Matrix identity(std::size_t n) {
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    detail::check_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    const auto& da = a.data();
    const auto& db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        double d = std::fabs(da[i] - db[i]);
        if (d > m) m = d;
    }
    return m;
}

}  // namespace foam
