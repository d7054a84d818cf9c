#include "foam/quant.hpp"

#include <algorithm>
#include <cmath>

#include "foam/errors.hpp"

namespace foam {

std::vector<QuantBlock> quantize(std::span<const double> values, std::size_t block_len) {
    if (block_len == 0) throw DomainError("quantize: block_len must be positive");
    std::vector<QuantBlock> blocks;
    blocks.reserve((values.size() + block_len - 1) / block_len);
    for (std::size_t start = 0; start < values.size(); start += block_len) {
        const std::size_t len = std::min(block_len, values.size() - start);
        double absmax = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            const double v = values[start + i];
            if (!std::isfinite(v)) throw DomainError("quantize: non-finite input");
            absmax = std::max(absmax, std::fabs(v));
        }
        QuantBlock blk;
        blk.codes.resize(len, 0);
        if (absmax > 0.0) {
            blk.scale = absmax / 127.0;
            for (std::size_t i = 0; i < len; ++i) {
                // std::round is round-half-away-from-zero
                double c = std::round(values[start + i] / blk.scale);
                c = std::clamp(c, -127.0, 127.0);
                blk.codes[i] = static_cast<std::int8_t>(c);
            }
        }
        blocks.push_back(std::move(blk));
    }
    return blocks;
}

std::vector<double> dequantize(const std::vector<QuantBlock>& blocks) {
    std::vector<double> out;
    std::size_t total = 0;
    for (const auto& b : blocks) total += b.codes.size();
    out.reserve(total);
    for (const auto& b : blocks) {
        for (std::int8_t c : b.codes) out.push_back(static_cast<double>(c) * b.scale);
    }
    return out;
}

void quant_roundtrip(Matrix& m, std::size_t block_len) {
    const auto blocks = quantize(std::span<const double>(m.data()), block_len);
    std::size_t idx = 0;
    for (const auto& b : blocks) {
        for (std::int8_t c : b.codes) m.data()[idx++] = static_cast<double>(c) * b.scale;
    }
}

}  // namespace foam
