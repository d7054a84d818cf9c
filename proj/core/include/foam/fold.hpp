#pragma once

#include <cstddef>

#include "foam/matrix.hpp"

namespace foam {

/// Blocking geometry for folding a row of `input_cols` entries at level `l`:
/// consecutive groups of 2^l columns share one folded column. A trailing
/// partial block (input_cols not divisible by 2^l) is averaged over its
/// actual width, which keeps the fold/unfold composition an orthogonal
/// projector without phantom padded columns.
struct FoldSpec {
    int level = 0;
    std::size_t block_size = 1;       // 2^level
    std::size_t input_cols = 1;       // n
    std::size_t folded_cols = 1;      // ceil(n / 2^level)
    std::size_t last_block_size = 1;  // in 1..=block_size

    static FoldSpec make(int level, std::size_t input_cols);

    /// Width of block j (== block_size except possibly the last).
    std::size_t block_width(std::size_t j) const {
        return j + 1 == folded_cols ? last_block_size : block_size;
    }
};

/// Block-mean compression along columns: (m x n) -> (m x folded_cols).
/// Equals g * build_dense_fold(spec) up to rounding.
Matrix fold(const Matrix& g, const FoldSpec& spec);

/// Block replication along columns: (m x folded_cols) -> (m x n).
/// Equals c * build_dense_unfold(spec) exactly.
Matrix unfold(const Matrix& c, const FoldSpec& spec);

/// g - unfold(fold(g)): the part of g orthogonal to block-constant matrices.
Matrix residual(const Matrix& g, const FoldSpec& spec);

/// Dense n x folded_cols fold operator (test oracle; the blocked kernels
/// never materialize it).
Matrix build_dense_fold(const FoldSpec& spec);

/// Dense folded_cols x n 0/1 unfold operator (test oracle).
Matrix build_dense_unfold(const FoldSpec& spec);

/// The n x n fold-unfold composition: symmetric, idempotent, trace ==
/// folded_cols.
Matrix projector(const FoldSpec& spec);

}  // namespace foam
