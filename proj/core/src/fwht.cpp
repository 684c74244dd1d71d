#include "prequant/fwht.hpp"

#include <cmath>
#include <string>

namespace prequant {

bool is_power_of_two(std::size_t n) {
    return n != 0 && (n & (n - 1)) == 0;
}

namespace {

void require_pow2(std::size_t n, const char* op) {
    if (!is_power_of_two(n)) {
        throw DimensionError(std::string(op) + ": length " + std::to_string(n) +
                             " is not a power of two");
    }
}

} // namespace

void fwht_inplace(std::span<double> v) {
    const std::size_t n = v.size();
    require_pow2(n, "fwht");
    for (std::size_t len = 1; len < n; len <<= 1) {
        for (std::size_t i = 0; i < n; i += len << 1) {
            for (std::size_t j = i; j < i + len; ++j) {
                const double a = v[j];
                const double b = v[j + len];
                v[j] = a + b;
                v[j + len] = a - b;
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (double& x : v) {
        x *= scale;
    }
}

std::vector<double> fwht_vector(std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    fwht_inplace(out);
    return out;
}

Tensor2D fwht_rows(const Tensor2D& x) {
    require_pow2(x.cols(), "fwht_rows");
    Tensor2D out = x;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        fwht_inplace(out.row(r));
    }
    return out;
}

Tensor2D fwht_cols(const Tensor2D& x) {
    const std::size_t n = x.rows();
    require_pow2(n, "fwht_cols");
    Tensor2D out = x;
    const std::size_t m = out.cols();
    // Same butterfly as fwht_inplace, applied to all columns at once by
    // walking row pairs; keeps the row-major layout cache-friendly.
    for (std::size_t len = 1; len < n; len <<= 1) {
        for (std::size_t i = 0; i < n; i += len << 1) {
            for (std::size_t j = i; j < i + len; ++j) {
                double* ra = &out(j, 0);
                double* rb = &out(j + len, 0);
                for (std::size_t c = 0; c < m; ++c) {
                    const double a = ra[c];
                    const double b = rb[c];
                    ra[c] = a + b;
                    rb[c] = a - b;
                }
            }
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (double& v : out.data()) {
        v *= scale;
    }
    return out;
}

Tensor2D naive_hadamard(std::size_t d) {
    require_pow2(d, "naive_hadamard");
    if (d > (1u << 14)) {
        throw DimensionError("naive_hadamard: d " + std::to_string(d) + " exceeds 2^14");
    }
    Tensor2D h(1, 1);
    h(0, 0) = 1.0;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t n = 1; n < d; n <<= 1) {
        Tensor2D next(2 * n, 2 * n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                const double v = h(r, c) * inv_sqrt2;
                next(r, c) = v;
                next(r, c + n) = v;
                next(r + n, c) = v;
                next(r + n, c + n) = -v;
            }
        }
        h = std::move(next);
    }
    return h;
}

} // namespace prequant
