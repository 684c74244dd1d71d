#include "prequant/metrics.hpp"

#include <cmath>

namespace prequant {

namespace {

void require_same_shape(const Tensor2D& a, const Tensor2D& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(op) + ": shape mismatch");
    }
    if (a.empty()) {
        throw DimensionError(std::string(op) + ": empty tensor");
    }
}

} // namespace

double sqnr(const Tensor2D& reference, const Tensor2D& test) {
    require_same_shape(reference, test, "sqnr");
    double sig = 0.0;
    double err = 0.0;
    const auto rd = reference.data();
    const auto td = test.data();
    for (std::size_t i = 0; i < rd.size(); ++i) {
        sig += rd[i] * rd[i];
        const double e = rd[i] - td[i];
        err += e * e;
    }
    if (sig == 0.0) {
        throw NumericError("sqnr: all-zero reference, signal undefined");
    }
    if (err < 1e-30 * sig) {
        return kSqnrCapDb;
    }
    return 10.0 * std::log10(sig / err);
}

ErrorReport error_report(const Tensor2D& reference, const Tensor2D& test) {
    require_same_shape(reference, test, "error_report");
    ErrorReport rep;
    rep.n_elements = reference.size();
    rep.sqnr_db = sqnr(reference, test);

    double err2 = 0.0;
    double ref2 = 0.0;
    const auto rd = reference.data();
    const auto td = test.data();
    for (std::size_t i = 0; i < rd.size(); ++i) {
        const double e = rd[i] - td[i];
        err2 += e * e;
        ref2 += rd[i] * rd[i];
        rep.max_abs_err = std::max(rep.max_abs_err, std::fabs(e));
    }
    rep.rel_fro_err = std::sqrt(err2) / std::sqrt(ref2);
    return rep;
}

double whitening_score(const Tensor2D& x) {
    if (x.rows() < 4) {
        throw DimensionError("whitening_score: needs at least 4 rows");
    }
    const ChannelStats st = channel_stats(x);
    const std::size_t d = st.n_channels;

    double kurt = 0.0;
    for (double k : st.excess_kurtosis) {
        kurt += std::fabs(k);
    }
    kurt /= static_cast<double>(d);

    double mean_of_means = 0.0;
    for (double m : st.mean) {
        mean_of_means += m;
    }
    mean_of_means /= static_cast<double>(d);
    double var_of_means = 0.0;
    for (double m : st.mean) {
        const double dm = m - mean_of_means;
        var_of_means += dm * dm;
    }
    var_of_means /= static_cast<double>(d);

    return kurt + var_of_means;
}

} // namespace prequant
