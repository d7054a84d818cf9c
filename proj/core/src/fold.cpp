#include "foam/fold.hpp"

#include <string>

#include "foam/errors.hpp"

namespace foam {

namespace {

void check_cols(const Matrix& m, std::size_t expected, const char* where) {
    if (m.cols() != expected) {
        throw ShapeError(std::string(where) + ": got " + std::to_string(m.cols()) +
                         " columns, spec expects " + std::to_string(expected));
    }
}

// Pairwise block sum: summing 2^l equal values doubles exactly at every
// level, which makes fold(unfold(c)) reproduce c bit-for-bit on full blocks.
double block_sum(const Matrix& g, std::size_t row, std::size_t lo, std::size_t width) {
    if (width == 1) return g(row, lo);
    const std::size_t half = width / 2;
    return block_sum(g, row, lo, half) + block_sum(g, row, lo + half, width - half);
}

}  // namespace

FoldSpec FoldSpec::make(int level, std::size_t input_cols) {
    if (level < 0) throw DomainError("FoldSpec: negative level");
    if (level >= 63) throw DomainError("FoldSpec: level too large");
    if (input_cols == 0) throw ShapeError("FoldSpec: input_cols must be positive");
    FoldSpec spec;
    spec.level = level;
    spec.block_size = std::size_t{1} << level;
    spec.input_cols = input_cols;
    spec.folded_cols = (input_cols + spec.block_size - 1) / spec.block_size;
    spec.last_block_size = input_cols - (spec.folded_cols - 1) * spec.block_size;
    return spec;
}

Matrix fold(const Matrix& g, const FoldSpec& spec) {
    check_cols(g, spec.input_cols, "fold");
    Matrix out(g.rows(), spec.folded_cols);
    for (std::size_t i = 0; i < g.rows(); ++i) {
        for (std::size_t j = 0; j < spec.folded_cols; ++j) {
            const std::size_t lo = j * spec.block_size;
            const std::size_t w = spec.block_width(j);
            out(i, j) = block_sum(g, i, lo, w) / static_cast<double>(w);
        }
    }
    detail::check_finite(out, "fold");
    return out;
}

Matrix unfold(const Matrix& c, const FoldSpec& spec) {
    check_cols(c, spec.folded_cols, "unfold");
    Matrix out(c.rows(), spec.input_cols);
    for (std::size_t i = 0; i < c.rows(); ++i) {
        for (std::size_t j = 0; j < spec.folded_cols; ++j) {
            const std::size_t lo = j * spec.block_size;
            const std::size_t w = spec.block_width(j);
            const double v = c(i, j);
            for (std::size_t k = 0; k < w; ++k) out(i, lo + k) = v;
        }
    }
    detail::check_finite(out, "unfold");
    return out;
}

Matrix residual(const Matrix& g, const FoldSpec& spec) {
    check_cols(g, spec.input_cols, "residual");
    Matrix out(g.rows(), spec.input_cols);
    for (std::size_t i = 0; i < g.rows(); ++i) {
        for (std::size_t j = 0; j < spec.folded_cols; ++j) {
            const std::size_t lo = j * spec.block_size;
            const std::size_t w = spec.block_width(j);
            const double mean = block_sum(g, i, lo, w) / static_cast<double>(w);
            for (std::size_t k = 0; k < w; ++k) out(i, lo + k) = g(i, lo + k) - mean;
        }
    }
    detail::check_finite(out, "residual");
    return out;
}

Matrix build_dense_fold(const FoldSpec& spec) {
    Matrix a(spec.input_cols, spec.folded_cols);
    for (std::size_t j = 0; j < spec.folded_cols; ++j) {
        const std::size_t lo = j * spec.block_size;
        const std::size_t w = spec.block_width(j);
        for (std::size_t k = 0; k < w; ++k) a(lo + k, j) = 1.0 / static_cast<double>(w);
    }
    return a;
}

Matrix build_dense_unfold(const FoldSpec& spec) {
    Matrix e(spec.folded_cols, spec.input_cols);
    for (std::size_t j = 0; j < spec.folded_cols; ++j) {
        const std::size_t lo = j * spec.block_size;
        const std::size_t w = spec.block_width(j);
        for (std::size_t k = 0; k < w; ++k) e(j, lo + k) = 1.0;
    }
    return e;
}

Matrix projector(const FoldSpec& spec) {
    return dense_matmul(build_dense_fold(spec), build_dense_unfold(spec));
}

}  // namespace foam
