#include <doctest.h>

#include <cmath>

#include "prequant/fwht.hpp"
#include "prequant/metrics.hpp"
#include "prequant/rng.hpp"
#include "prequant/transforms.hpp"

using namespace prequant;

namespace {

Tensor2D random_tensor(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Tensor2D x(rows, cols);
    PhiloxRng rng(seed, 0);
    for (double& v : x.data()) {
        v = rng.next_normal();
    }
    return x;
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    std::vector<double> v(n);
    PhiloxRng rng(seed, 1);
    for (double& x : v) {
        x = rng.next_normal();
    }
    return v;
}

std::vector<double> random_positive(std::size_t n, std::uint64_t seed) {
    std::vector<double> v(n);
    PhiloxRng rng(seed, 2);
    for (double& x : v) {
        x = 0.25 + 4.0 * rng.next_double();
    }
    return v;
}

} // namespace

TEST_CASE("compute_sigma hand cases") {
    {
        const auto sigma = compute_sigma(std::vector<double>{4.0}, std::vector<double>{1.0}, 0.5);
        CHECK(sigma[0] == doctest::Approx(2.0)); // 4^0.5 / 1^0.5
    }
    {
        // alpha = 1: weight term has exponent 0
        const auto sigma =
            compute_sigma(std::vector<double>{3.0, 0.0}, std::vector<double>{9.0, 9.0}, 1.0);
        CHECK(sigma[0] == doctest::Approx(3.0));
        CHECK(sigma[1] == doctest::Approx(1e-5)); // clamped activation stat
    }
    {
        // dead channel on both sides: eps^0.5 / eps^0.5 = 1
        const auto sigma = compute_sigma(std::vector<double>{0.0}, std::vector<double>{0.0}, 0.5);
        CHECK(sigma[0] == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(
        compute_sigma(std::vector<double>{1.0}, std::vector<double>{1.0}, 1.5),
        ParamError);
    CHECK_THROWS_AS(
        compute_sigma(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}, 0.5),
        DimensionError);
}

TEST_CASE("preset flag mapping") {
    CHECK(preset_flags(TransformPreset::none).center == false);
    CHECK(preset_flags(TransformPreset::none).scale == false);
    CHECK(preset_flags(TransformPreset::none).hadamard == false);

    CHECK(preset_flags(TransformPreset::smoothquant).scale == true);
    CHECK(preset_flags(TransformPreset::smoothquant).center == false);
    CHECK(preset_flags(TransformPreset::smoothquant).hadamard == false);

    CHECK(preset_flags(TransformPreset::quarot).hadamard == true);
    CHECK(preset_flags(TransformPreset::quarot).center == false);
    CHECK(preset_flags(TransformPreset::quarot).scale == false);

    CHECK(preset_flags(TransformPreset::sdcb).scale == true);
    CHECK(preset_flags(TransformPreset::sdcb).hadamard == true);
    CHECK(preset_flags(TransformPreset::sdcb).center == false);

    CHECK(preset_flags(TransformPreset::dyncenter).center == true);
    CHECK(preset_flags(TransformPreset::dyncenter).scale == false);
    CHECK(preset_flags(TransformPreset::dyncenter).hadamard == false);

    CHECK(preset_flags(TransformPreset::hadanorm).center == true);
    CHECK(preset_flags(TransformPreset::hadanorm).scale == true);
    CHECK(preset_flags(TransformPreset::hadanorm).hadamard == true);

    for (TransformPreset p : kAllPresets) {
        CHECK(preset_from_string(to_string(p)) == p);
    }
    CHECK_THROWS_AS(preset_from_string("bogus"), ParamError);
}

TEST_CASE("preset_to_plan computes sigma only for scaling presets") {
    const std::vector<double> act{2.0, 8.0};
    const std::vector<double> w{1.0, 2.0};
    const TransformPlan quarot = preset_to_plan(TransformPreset::quarot, act, w, 0.5);
    CHECK(quarot.hadamard);
    for (double s : quarot.sigma) {
        CHECK(s == 1.0);
    }
    const TransformPlan sq = preset_to_plan(TransformPreset::smoothquant, act, w, 0.5);
    CHECK(sq.sigma[0] == doctest::Approx(std::sqrt(2.0)));
    CHECK(sq.sigma[1] == doctest::Approx(2.0));
}

TEST_CASE("plan invariants are enforced") {
    CHECK_THROWS_AS(TransformPlan::make(false, false, true, {1, 1, 1}, 0.0), DimensionError);
    CHECK_THROWS_AS(TransformPlan::make(false, false, false, {1.0, 2.0}, 0.0), ParamError);
    CHECK_THROWS_AS(TransformPlan::make(false, true, false, {1.0, 1e-9}, 0.0), ParamError);
    CHECK_THROWS_AS(TransformPlan::make(false, false, false, {1.0}, -0.1), ParamError);
    CHECK_THROWS_AS(TransformPlan::make(false, false, false, {}, 0.0), DimensionError);
}

TEST_CASE("forward_transform identity and centering") {
    const Tensor2D x(2, 2, {1, 3, 3, 5});
    {
        const auto res = forward_transform(x, TransformPlan::none(2));
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(res.x_tilde.data()[i] == x.data()[i]);
        }
        CHECK(res.mu == std::vector<double>{0.0, 0.0});
    }
    {
        const auto plan = preset_to_plan(TransformPreset::dyncenter, std::vector<double>{1, 1}, std::vector<double>{1, 1}, 0.0);
        const auto res = forward_transform(x, plan);
        CHECK(res.mu[0] == doctest::Approx(2.0));
        CHECK(res.mu[1] == doctest::Approx(4.0));
        CHECK(res.x_tilde(0, 0) == doctest::Approx(-1.0));
        CHECK(res.x_tilde(0, 1) == doctest::Approx(-1.0));
        CHECK(res.x_tilde(1, 0) == doctest::Approx(1.0));
        CHECK(res.x_tilde(1, 1) == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(forward_transform(x, TransformPlan::none(3)), DimensionError);
}

TEST_CASE("forward_transform inverts step by step") {
    const std::size_t d = 8;
    const Tensor2D x = random_tensor(8, d, 42);
    const auto act = channel_absmax(x);
    const auto w = random_positive(d, 43);
    const TransformPlan plan = preset_to_plan(TransformPreset::hadanorm, act, w, 0.5);
    const auto res = forward_transform(x, plan);

    // invert: H, then diag(sigma), then add back the mean
    Tensor2D rec = fwht_rows(res.x_tilde);
    rec = scale_columns(rec, plan.sigma);
    rec = add_row_vector(rec, res.mu);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(rec.data()[i] == doctest::Approx(x.data()[i]).epsilon(1e-10));
    }
}

TEST_CASE("centered intermediate has zero channel means") {
    const Tensor2D x = random_tensor(33, 16, 99);
    const auto act = channel_absmax(x);
    const std::vector<double> w(16, 1.0);
    const TransformPlan plan = preset_to_plan(TransformPreset::hadanorm, act, w, 0.3);

    // the intermediate just after centering, before scale and H
    const Tensor2D centered = sub_row_vector(x, channel_means(x));
    for (double m : channel_means(centered)) {
        CHECK(std::fabs(m) < 1e-10);
    }
    // and the full forward keeps the means at zero: both scaling and H are
    // linear, so zero-mean columns stay zero-mean rows-wise combinations
    const auto res = forward_transform(x, plan);
    CHECK(res.mu == channel_means(x));
}

TEST_CASE("fuse_weights hand cases") {
    const Tensor2D w(2, 2, {1, 1, 1, 1});
    {
        const Tensor2D same = fuse_weights(w, TransformPlan::none(2));
        for (std::size_t i = 0; i < w.size(); ++i) {
            CHECK(same.data()[i] == w.data()[i]);
        }
    }
    {
        TransformPlan plan = TransformPlan::make(false, true, false, {2.0, 3.0}, 0.5);
        const Tensor2D fused = fuse_weights(w, plan);
        CHECK(fused(0, 0) == 2.0);
        CHECK(fused(0, 1) == 2.0);
        CHECK(fused(1, 0) == 3.0);
        CHECK(fused(1, 1) == 3.0);
    }
    CHECK_THROWS_AS(fuse_weights(Tensor2D(3, 2), TransformPlan::none(2)), DimensionError);
}

TEST_CASE("fused weights undo the forward transform") {
    const std::size_t d = 16, m = 4;
    const Tensor2D x = random_tensor(8, d, 7);
    const Tensor2D w = random_tensor(d, m, 8);
    const auto act = channel_absmax(x);
    const auto wabs = random_positive(d, 9);
    const TransformPlan plan = preset_to_plan(TransformPreset::hadanorm, act, wabs, 0.5);

    const auto res = forward_transform(x, plan);
    const Tensor2D lhs = matmul(res.x_tilde, fuse_weights(w, plan));
    const Tensor2D rhs = matmul(sub_row_vector(x, res.mu), w);
    CHECK(error_report(rhs, lhs).rel_fro_err < 1e-9);
}

TEST_CASE("effective_bias hand cases") {
    {
        // center off: correction vanishes
        const TransformPlan plan = TransformPlan::none(2);
        const std::vector<double> b{1.0, -1.0};
        const std::vector<double> mu{0.0, 0.0};
        const auto out = effective_bias(b, mu, plan, Tensor2D::identity(2));
        CHECK(out == b);
    }
    {
        // identity weights, centering only: correction equals mu
        const auto plan = preset_to_plan(TransformPreset::dyncenter, std::vector<double>{1, 1}, std::vector<double>{1, 1}, 0.0);
        const std::vector<double> b{0.0, 0.0};
        const std::vector<double> mu{1.0, 1.0};
        const auto out = effective_bias(b, mu, plan, Tensor2D::identity(2));
        CHECK(out[0] == doctest::Approx(1.0));
        CHECK(out[1] == doctest::Approx(1.0));
    }
}

TEST_CASE("full unquantized path equals the baseline layer") {
    const std::size_t d = 8, m = 8, s = 8;
    const Tensor2D x = random_tensor(s, d, 70);
    const Tensor2D w = random_tensor(d, m, 71);
    const auto b = random_vector(m, 72);
    const auto act = channel_absmax(x);
    const auto wabs = random_positive(d, 73);

    const Tensor2D baseline = add_row_vector(matmul(x, w), b);
    const TransformPlan plan = preset_to_plan(TransformPreset::hadanorm, act, wabs, 0.5);
    const auto res = forward_transform(x, plan);
    const Tensor2D w_tilde = fuse_weights(w, plan);
    const auto b_tilde = effective_bias(b, res.mu, plan, w_tilde);
    const Tensor2D out = add_row_vector(matmul(res.x_tilde, w_tilde), b_tilde);
    CHECK(error_report(baseline, out).rel_fro_err < 1e-9);
}

TEST_CASE("property: exactness across presets and dimensions") {
    std::uint64_t seed = 1000;
    for (TransformPreset preset : kAllPresets) {
        for (std::size_t d : {2, 4, 16, 64, 128}) {
            PhiloxRng dims_rng(seed, 9);
            const std::size_t s = 1 + dims_rng.next_u64() % 64;
            const std::size_t m = 1 + dims_rng.next_u64() % 64;

            const Tensor2D x = random_tensor(s, d, ++seed);
            const Tensor2D w = random_tensor(d, m, ++seed);
            const auto b = random_vector(m, ++seed);
            const auto act = channel_absmax(x);
            const auto wabs = random_positive(d, ++seed);

            const Tensor2D baseline = add_row_vector(matmul(x, w), b);
            const TransformPlan plan = preset_to_plan(preset, act, wabs, 0.5);
            const auto res = forward_transform(x, plan);
            const Tensor2D w_tilde = fuse_weights(w, plan);
            const auto b_tilde = effective_bias(b, res.mu, plan, w_tilde);
            const Tensor2D out = add_row_vector(matmul(res.x_tilde, w_tilde), b_tilde);
            CHECK(error_report(baseline, out).rel_fro_err < 1e-9);
        }
    }
}

TEST_CASE("hadanorm with alpha 0 and unit weight stats degrades to center+hadamard") {
    const std::size_t d = 8;
    const Tensor2D x = random_tensor(12, d, 500);
    const auto act = channel_absmax(x);
    const std::vector<double> unit_w(d, 1.0);

    const TransformPlan full = preset_to_plan(TransformPreset::hadanorm, act, unit_w, 0.0);
    // sigma_i = act^0 / 1^1 = 1
    for (double s : full.sigma) {
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    const auto got = forward_transform(x, full);
    const Tensor2D want = fwht_rows(sub_row_vector(x, channel_means(x)));
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(got.x_tilde.data()[i] == doctest::Approx(want.data()[i]).epsilon(1e-9));
    }
}

TEST_CASE("regression: composition order is center, scale, hadamard") {
    const std::size_t d = 4;
    const Tensor2D x = random_tensor(6, d, 321);
    std::vector<double> sigma{0.5, 2.0, 1.5, 4.0};
    const TransformPlan plan = TransformPlan::make(false, true, true, sigma, 0.5);

    const auto got = forward_transform(x, plan);
    // scale first, then H
    std::vector<double> inv(d);
    for (std::size_t i = 0; i < d; ++i) {
        inv[i] = 1.0 / sigma[i];
    }
    const Tensor2D want = fwht_rows(scale_columns(x, inv));
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(got.x_tilde.data()[i] == doctest::Approx(want.data()[i]).epsilon(1e-12));
    }
    // permuting H and the scaling changes the output
    const Tensor2D permuted = scale_columns(fwht_rows(x), inv);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        max_diff = std::max(max_diff, std::fabs(permuted.data()[i] - got.x_tilde.data()[i]));
    }
    CHECK(max_diff > 1e-3);
}

TEST_CASE("fuse_linear bundles the static parts") {
    const Tensor2D w = random_tensor(4, 3, 600);
    const std::vector<double> b{1.0, 2.0, 3.0};
    const TransformPlan plan = TransformPlan::none(4);
    const FusedLinear fused = fuse_linear(w, b, plan);
    CHECK(fused.b_tilde_static == b);
    CHECK(fused.original_bias == b);
    CHECK(fused.w_tilde.rows() == 4);
    CHECK_THROWS_AS(fuse_linear(w, std::vector<double>{1.0}, plan), DimensionError);
}
