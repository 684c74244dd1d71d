#pragma once

#include <cstddef>

#include "prequant/tensor.hpp"

namespace prequant {

// Exact agreement is reported as +300 dB instead of infinity so reports
// stay serializable and sortable.
inline constexpr double kSqnrCapDb = 300.0;

struct ErrorReport {
    double sqnr_db = 0.0;
    double max_abs_err = 0.0;
    double rel_fro_err = 0.0;
    std::size_t n_elements = 0;
};

// 10*log10(sum ref^2 / sum (ref-test)^2). Error energy below
// 1e-30 * signal energy returns the +300 dB cap. All-zero reference
// throws NumericError (undefined signal).
double sqnr(const Tensor2D& reference, const Tensor2D& test);

ErrorReport error_report(const Tensor2D& reference, const Tensor2D& test);

// Whitening diagnostic: mean |excess kurtosis| across channels plus the
// population variance of the channel means. Lower is whiter. This is an
// artifact-defined score used for ordering comparisons only, never as an
// absolute quality gate.
double whitening_score(const Tensor2D& x);

} // namespace prequant
