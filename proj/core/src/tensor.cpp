#include "prequant/tensor.hpp"

#include <cmath>
#include <cstdio>

namespace prequant {

namespace {

std::string dim_str(std::size_t r, std::size_t c) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%zux%zu", r, c);
    return buf;
}

void require_nonempty(const Tensor2D& x, const char* op) {
    if (x.empty()) {
        throw DimensionError(std::string(op) + ": empty tensor");
    }
}

} // namespace

Tensor2D::Tensor2D(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Tensor2D::Tensor2D(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw DimensionError("Tensor2D: data length " + std::to_string(data_.size()) +
                             " does not match shape " + dim_str(rows_, cols_));
    }
    if (!all_finite()) {
        throw NumericError("Tensor2D: non-finite element in input data");
    }
}

Tensor2D Tensor2D::identity(std::size_t n) {
    Tensor2D out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        out(i, i) = 1.0;
    }
    return out;
}

bool Tensor2D::all_finite() const noexcept {
    for (double v : data_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

std::vector<double> channel_means(const Tensor2D& x) {
    require_nonempty(x, "channel_means");
    std::vector<double> mean(x.cols(), 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto row = x.row(r);
        for (std::size_t c = 0; c < x.cols(); ++c) {
            mean[c] += row[c];
        }
    }
    const double inv_s = 1.0 / static_cast<double>(x.rows());
    for (double& m : mean) {
        m *= inv_s;
    }
    return mean;
}

std::vector<double> channel_absmax(const Tensor2D& x) {
    require_nonempty(x, "channel_absmax");
    std::vector<double> absmax(x.cols(), 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto row = x.row(r);
        for (std::size_t c = 0; c < x.cols(); ++c) {
            const double a = std::fabs(row[c]);
            if (a > absmax[c]) {
                absmax[c] = a;
            }
        }
    }
    return absmax;
}

ChannelStats channel_stats(const Tensor2D& x) {
    require_nonempty(x, "channel_stats");
    const std::size_t s = x.rows();
    const std::size_t d = x.cols();

    ChannelStats st;
    st.n_channels = d;
    st.mean = channel_means(x);
    st.absmax = channel_absmax(x);
    st.variance.assign(d, 0.0);
    st.excess_kurtosis.assign(d, 0.0);

    std::vector<double> m4(d, 0.0);
    for (std::size_t r = 0; r < s; ++r) {
        const auto row = x.row(r);
        for (std::size_t c = 0; c < d; ++c) {
            const double dlt = row[c] - st.mean[c];
            const double d2 = dlt * dlt;
            st.variance[c] += d2;
            m4[c] += d2 * d2;
        }
    }
    const double inv_s = 1.0 / static_cast<double>(s);
    for (std::size_t c = 0; c < d; ++c) {
        st.variance[c] *= inv_s;
        m4[c] *= inv_s;
    }

    // Kurtosis is undefined below 4 samples and garbage for (near-)constant
    // channels where m2 is pure rounding noise; both report 0.
    for (std::size_t c = 0; c < d; ++c) {
        const double m2 = st.variance[c];
        const double floor2 = 1e-24 * std::max(1.0, st.absmax[c] * st.absmax[c]);
        if (s < 4 || m2 <= floor2) {
            st.excess_kurtosis[c] = 0.0;
        } else {
            st.excess_kurtosis[c] = m4[c] / (m2 * m2) - 3.0;
        }
    }
    return st;
}

Tensor2D matmul(const Tensor2D& a, const Tensor2D& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: shape mismatch " + dim_str(a.rows(), a.cols()) +
                             " x " + dim_str(b.rows(), b.cols()));
    }
    Tensor2D out(a.rows(), b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        auto out_row = out.row(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a(i, p);
            const auto b_row = b.row(p);
            for (std::size_t j = 0; j < m; ++j) {
                out_row[j] += aip * b_row[j];
            }
        }
    }
    return out;
}

namespace {

void require_cols(const Tensor2D& a, std::span<const double> v, const char* op) {
    if (v.size() != a.cols()) {
        throw DimensionError(std::string(op) + ": vector length " + std::to_string(v.size()) +
                             " does not match cols " + std::to_string(a.cols()));
    }
}

} // namespace

Tensor2D add_row_vector(const Tensor2D& a, std::span<const double> v) {
    require_cols(a, v, "add_row_vector");
    Tensor2D out = a;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < out.cols(); ++c) {
            row[c] += v[c];
        }
    }
    return out;
}

Tensor2D sub_row_vector(const Tensor2D& a, std::span<const double> v) {
    require_cols(a, v, "sub_row_vector");
    Tensor2D out = a;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < out.cols(); ++c) {
            row[c] -= v[c];
        }
    }
    return out;
}

Tensor2D scale_columns(const Tensor2D& a, std::span<const double> g) {
    require_cols(a, g, "scale_columns");
    Tensor2D out = a;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < out.cols(); ++c) {
            row[c] *= g[c];
        }
    }
    return out;
}

Tensor2D scale_rows(const Tensor2D& a, std::span<const double> g) {
    if (g.size() != a.rows()) {
        throw DimensionError("scale_rows: vector length " + std::to_string(g.size()) +
                             " does not match rows " + std::to_string(a.rows()));
    }
    Tensor2D out = a;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < out.cols(); ++c) {
            row[c] *= g[r];
        }
    }
    return out;
}

Tensor2D transpose(const Tensor2D& a) {
    Tensor2D out(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) {
            out(c, r) = a(r, c);
        }
    }
    return out;
}

Tensor2D add(const Tensor2D& a, const Tensor2D& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("add: shape mismatch " + dim_str(a.rows(), a.cols()) +
                             " vs " + dim_str(b.rows(), b.cols()));
    }
    Tensor2D out = a;
    auto od = out.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < od.size(); ++i) {
        od[i] += bd[i];
    }
    return out;
}

} // namespace prequant
