#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "foam/matrix.hpp"

namespace foam {

/// One block of 8-bit absmax-quantized values. scale == absmax/127;
/// scale == 0 iff the whole source block was zero.
struct QuantBlock {
    std::vector<std::int8_t> codes;
    double scale = 0.0;
};

inline constexpr std::size_t kDefaultQuantBlockLen = 64;

/// Block-wise absmax quantization. Per block: scale = max|v|/127, code =
/// round-half-away-from-zero(v/scale) clamped to [-127, 127]. Throws
/// DomainError on non-finite input.
std::vector<QuantBlock> quantize(std::span<const double> values,
                                 std::size_t block_len = kDefaultQuantBlockLen);

/// code * scale per element, blocks concatenated in order.
std::vector<double> dequantize(const std::vector<QuantBlock>& blocks);

/// Quantize-dequantize a matrix in place (row-major flat blocking). This is
/// what the optimizers apply to stored moments when 8-bit states are on.
void quant_roundtrip(Matrix& m, std::size_t block_len = kDefaultQuantBlockLen);

}  // namespace foam
