#include "prequant/quant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace prequant {

namespace {

constexpr double kScaleFloor = 1e-12;

void require_bits(int bits) {
    if (bits < 2 || bits > 8) {
        throw ParamError("quant: bits " + std::to_string(bits) + " outside [2, 8]");
    }
}

// round half to even; the default FP environment rounds to nearest-even
inline double round_even(double x) {
    return std::nearbyint(x);
}

// Snaps the per-row scale to a fixed point of the quantize->dequantize->
// re-derive map so fake quantization is exactly idempotent: re-quantizing a
// dequantized row must regenerate the same scale bit for bit. The result
// stays within a few ulps of (hi-lo)/qmax. Relies on -ffp-contract=off so
// this expression rounds exactly like dequantize does.
double fixed_point_scale(double s0, double lo, double qmax) {
    const auto step = [&](double s) {
        const double hi_rec = qmax * s + lo; // dequantized top-of-grid value
        return std::max((hi_rec - lo) / qmax, kScaleFloor);
    };
    double s = std::max(s0, kScaleFloor);
    for (int i = 0; i < 8; ++i) {
        const double next = step(s);
        if (next == s) {
            return s;
        }
        s = next;
    }
    // rounding 2-cycle: probe neighbours for a genuine fixed point
    double up = s, down = s;
    for (int i = 0; i < 4; ++i) {
        up = std::nextafter(up, 1e300);
        down = std::nextafter(down, 0.0);
        if (step(up) == up) {
            return up;
        }
        if (step(down) == down) {
            return down;
        }
    }
    return s;
}

} // namespace

QuantConfig QuantConfig::activations(int bits) {
    require_bits(bits);
    QuantConfig cfg;
    cfg.bits = bits;
    cfg.granularity = QuantGranularity::per_token_dynamic;
    cfg.scheme = QuantScheme::asymmetric_minmax;
    return cfg;
}

QuantConfig QuantConfig::weights_blocked(int bits, std::size_t block) {
    require_bits(bits);
    if (block < 1) {
        throw ParamError("quant: block size must be >= 1");
    }
    QuantConfig cfg;
    cfg.bits = bits;
    cfg.granularity = QuantGranularity::per_block;
    cfg.scheme = QuantScheme::symmetric_absmax;
    cfg.block_size = block;
    return cfg;
}

void QuantConfig::validate() const {
    require_bits(bits);
    const bool token_asym = granularity == QuantGranularity::per_token_dynamic &&
                            scheme == QuantScheme::asymmetric_minmax;
    const bool block_sym = granularity == QuantGranularity::per_block &&
                           scheme == QuantScheme::symmetric_absmax && block_size >= 1;
    if (!token_asym && !block_sym) {
        throw ParamError("quant: unsupported scheme/granularity pairing");
    }
}

QuantizedTensor quantize_activations(const Tensor2D& x, int bits) {
    require_bits(bits);
    if (x.empty()) {
        throw DimensionError("quantize_activations: empty tensor");
    }
    const std::size_t s = x.rows();
    const std::size_t d = x.cols();
    const double qmax = static_cast<double>((1 << bits) - 1);

    QuantizedTensor q;
    q.config = QuantConfig::activations(bits);
    q.group_map = {QuantGranularity::per_token_dynamic, s, d, 0};
    q.codes.resize(s * d);
    q.scales.resize(s);
    q.zero_points.resize(s);

    for (std::size_t r = 0; r < s; ++r) {
        const auto row = x.row(r);
        double lo = row[0];
        double hi = row[0];
        for (double v : row) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double scale =
            hi == lo ? kScaleFloor : fixed_point_scale((hi - lo) / qmax, lo, qmax);
        q.scales[r] = scale;
        q.zero_points[r] = lo;
        std::int32_t* codes = q.codes.data() + r * d;
        for (std::size_t c = 0; c < d; ++c) {
            const double code = round_even((row[c] - lo) / scale);
            codes[c] = static_cast<std::int32_t>(std::clamp(code, 0.0, qmax));
        }
    }
    return q;
}

QuantizedTensor quantize_weights_blocked(const Tensor2D& w, int bits, std::size_t block) {
    require_bits(bits);
    if (block < 1) {
        throw ParamError("quantize_weights_blocked: block size must be >= 1");
    }
    if (w.empty()) {
        throw DimensionError("quantize_weights_blocked: empty tensor");
    }
    const std::size_t rows = w.rows();
    const std::size_t cols = w.cols();
    const double qmax = static_cast<double>((1 << (bits - 1)) - 1);
    const double qlo = -static_cast<double>(1 << (bits - 1));

    QuantizedTensor q;
    q.config = QuantConfig::weights_blocked(bits, block);
    q.group_map = {QuantGranularity::per_block, rows, cols, block};
    q.codes.resize(rows * cols);
    q.scales.assign(q.group_map.n_groups(), kScaleFloor);
    q.zero_points.assign(q.group_map.n_groups(), 0.0);

    const std::size_t n_blocks = q.group_map.blocks_per_col();
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t b = 0; b < n_blocks; ++b) {
            const std::size_t r0 = b * block;
            const std::size_t r1 = std::min(r0 + block, rows);
            double absmax = 0.0;
            for (std::size_t r = r0; r < r1; ++r) {
                absmax = std::max(absmax, std::fabs(w(r, c)));
            }
            const double scale = std::max(absmax / qmax, kScaleFloor);
            const std::size_t g = c * n_blocks + b;
            q.scales[g] = scale;
            for (std::size_t r = r0; r < r1; ++r) {
                const double code = round_even(w(r, c) / scale);
                q.codes[r * cols + c] = static_cast<std::int32_t>(std::clamp(code, qlo, qmax));
            }
        }
    }
    return q;
}

Tensor2D dequantize(const QuantizedTensor& q) {
    const GroupMap& gm = q.group_map;
    Tensor2D out(gm.rows, gm.cols);
    for (std::size_t r = 0; r < gm.rows; ++r) {
        for (std::size_t c = 0; c < gm.cols; ++c) {
            const std::size_t g = gm.group_of(r, c);
            out(r, c) = static_cast<double>(q.codes[r * gm.cols + c]) * q.scales[g] +
                        q.zero_points[g];
        }
    }
    return out;
}

Tensor2D fake_quant(const Tensor2D& x, const QuantConfig& cfg) {
    cfg.validate();
    if (cfg.granularity == QuantGranularity::per_token_dynamic) {
        return dequantize(quantize_activations(x, cfg.bits));
    }
    return dequantize(quantize_weights_blocked(x, cfg.bits, cfg.block_size));
}

} // namespace prequant
