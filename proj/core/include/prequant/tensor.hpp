#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prequant/errors.hpp"

namespace prequant {

// Dense row-major matrix of doubles, shape (rows x cols).
// Rows index tokens / sequence positions, columns index feature channels.
// All arithmetic in this library is 64-bit; narrower types are I/O formats only.
class Tensor2D {
public:
    Tensor2D() = default;

    // Zero-initialized tensor.
    Tensor2D(std::size_t rows, std::size_t cols);

    // Takes ownership of `data` (row-major, length rows*cols).
    // Rejects length mismatches and non-finite elements.
    Tensor2D(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Tensor2D identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> data() const noexcept { return {data_.data(), data_.size()}; }
    std::span<double> data() noexcept { return {data_.data(), data_.size()}; }

    bool all_finite() const noexcept;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Per-channel summary statistics, population (biased) moments.
// excess_kurtosis is m4/m2^2 - 3; reported as 0 for constant channels
// and whenever rows < 4.
struct ChannelStats {
    std::vector<double> mean;
    std::vector<double> absmax;
    std::vector<double> variance;
    std::vector<double> excess_kurtosis;
    std::size_t n_channels = 0;
};

// mean across rows, per column
std::vector<double> channel_means(const Tensor2D& x);

// max |x| across rows, per column
std::vector<double> channel_absmax(const Tensor2D& x);

ChannelStats channel_stats(const Tensor2D& x);

Tensor2D matmul(const Tensor2D& a, const Tensor2D& b);

// out(r, c) = a(r, c) + v[c]
Tensor2D add_row_vector(const Tensor2D& a, std::span<const double> v);
Tensor2D sub_row_vector(const Tensor2D& a, std::span<const double> v);

// column i multiplied by g[i], i.e. A * diag(g)
Tensor2D scale_columns(const Tensor2D& a, std::span<const double> g);

// row i multiplied by g[i], i.e. diag(g) * A
Tensor2D scale_rows(const Tensor2D& a, std::span<const double> g);

Tensor2D transpose(const Tensor2D& a);

// elementwise sum, used for residual connections
Tensor2D add(const Tensor2D& a, const Tensor2D& b);

} // namespace prequant
