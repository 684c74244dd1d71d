#pragma once

#include <cstdint>
#include <vector>

#include "prequant/tensor.hpp"

namespace prequant {

enum class QuantScheme {
    asymmetric_minmax, // per-group [min, max] grid with a real zero point
    symmetric_absmax,  // per-group absmax grid, zero point 0
};

enum class QuantGranularity {
    per_token_dynamic, // one group per row (token)
    per_block,         // groups of `block_size` consecutive rows per column
};

// Fake-quantization configuration. Only the two pairings used by the
// harness are constructible: per-token asymmetric (activations) and
// per-block symmetric (weights).
struct QuantConfig {
    int bits = 8;
    QuantGranularity granularity = QuantGranularity::per_token_dynamic;
    QuantScheme scheme = QuantScheme::asymmetric_minmax;
    std::size_t block_size = 0; // per_block only

    static QuantConfig activations(int bits);
    static QuantConfig weights_blocked(int bits, std::size_t block = 128);

    // Rejects bit widths outside [2,8] and scheme/granularity pairings
    // other than the two above.
    void validate() const;
};

// Maps each element of a rows x cols tensor to its quantization group.
struct GroupMap {
    QuantGranularity kind = QuantGranularity::per_token_dynamic;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t block_size = 0;

    std::size_t blocks_per_col() const {
        return (rows + block_size - 1) / block_size;
    }
    std::size_t n_groups() const {
        return kind == QuantGranularity::per_token_dynamic ? rows
                                                           : cols * blocks_per_col();
    }
    std::size_t group_of(std::size_t r, std::size_t c) const {
        return kind == QuantGranularity::per_token_dynamic
                   ? r
                   : c * blocks_per_col() + r / block_size;
    }
};

struct QuantizedTensor {
    std::vector<std::int32_t> codes; // row-major, rows*cols
    std::vector<double> scales;      // per group, > 0
    std::vector<double> zero_points; // per group, 0 for symmetric
    GroupMap group_map;
    QuantConfig config;
};

// Per-row dynamic min-max grid: scale = (max-min)/(2^bits-1) floored at
// 1e-12, zero point = row min, codes round-half-to-even into [0, 2^bits-1].
QuantizedTensor quantize_activations(const Tensor2D& x, int bits);

// Symmetric per-block grid along the input-channel (row) axis of each
// column: scale = absmax/(2^{bits-1}-1) floored at 1e-12, codes
// round-half-to-even clamped to [-2^{bits-1}, 2^{bits-1}-1]. The last
// block of a column may be ragged.
QuantizedTensor quantize_weights_blocked(const Tensor2D& w, int bits,
                                         std::size_t block = 128);

Tensor2D dequantize(const QuantizedTensor& q);

// quantize-then-dequantize simulation, shape preserved
Tensor2D fake_quant(const Tensor2D& x, const QuantConfig& cfg);

} // namespace prequant
