#include <doctest.h>

#include <cmath>

#include "prequant/metrics.hpp"
#include "prequant/rng.hpp"

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

} // namespace

TEST_CASE("sqnr hand cases") {
    const Tensor2D ref(1, 2, {2, 0});
    const Tensor2D test(1, 2, {1, 0});
    CHECK(sqnr(ref, test) == doctest::Approx(6.0206).epsilon(1e-4));

    // exact agreement hits the +300 dB cap
    CHECK(sqnr(ref, ref) == kSqnrCapDb);

    // zero test: error energy equals signal energy
    CHECK(sqnr(ref, Tensor2D(1, 2)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("sqnr error paths") {
    const Tensor2D ref(1, 2, {2, 0});
    CHECK_THROWS_AS(sqnr(ref, Tensor2D(2, 1)), DimensionError);
    CHECK_THROWS_AS(sqnr(Tensor2D(2, 2), Tensor2D(2, 2)), NumericError);
}

TEST_CASE("property: sqnr is scale invariant") {
    const Tensor2D ref = random_tensor(8, 8, 1);
    Tensor2D test = ref;
    PhiloxRng rng(2, 0);
    for (double& v : test.data()) {
        v += 0.01 * rng.next_normal();
    }
    const double base = sqnr(ref, test);
    for (double c : {3.0, -2.0, 1e-6, 1e6}) {
        Tensor2D ref_c = ref, test_c = test;
        for (double& v : ref_c.data()) v *= c;
        for (double& v : test_c.data()) v *= c;
        CHECK(sqnr(ref_c, test_c) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("property: sqnr decreases with noise amplitude") {
    const Tensor2D ref = random_tensor(16, 16, 3);
    Tensor2D noise = random_tensor(16, 16, 4);
    double prev = 1e9;
    for (double amp : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
        Tensor2D test = ref;
        for (std::size_t i = 0; i < test.size(); ++i) {
            test.data()[i] += amp * noise.data()[i];
        }
        const double s = sqnr(ref, test);
        CHECK(s < prev);
        prev = s;
    }
}

TEST_CASE("error_report aggregates and matches a scalar oracle") {
    const Tensor2D ref = random_tensor(10, 10, 5);
    CHECK(error_report(ref, ref).sqnr_db == kSqnrCapDb);
    CHECK(error_report(ref, ref).max_abs_err == 0.0);
    CHECK(error_report(ref, ref).rel_fro_err == 0.0);
    CHECK(error_report(ref, ref).n_elements == 100);

    Tensor2D test = ref;
    PhiloxRng rng(6, 0);
    for (double& v : test.data()) {
        v += 1e-6 * (rng.next_double() - 0.5) * 2.0;
    }
    const ErrorReport rep = error_report(ref, test);

    double err2 = 0.0, ref2 = 0.0, maxe = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double e = ref.data()[i] - test.data()[i];
        err2 += e * e;
        ref2 += ref.data()[i] * ref.data()[i];
        maxe = std::max(maxe, std::fabs(e));
    }
    CHECK(rep.rel_fro_err == doctest::Approx(std::sqrt(err2 / ref2)).epsilon(1e-12));
    CHECK(rep.max_abs_err == maxe);
}

TEST_CASE("error_report antisymmetric perturbation hits max_abs_err exactly") {
    const Tensor2D ref = random_tensor(4, 4, 7);
    Tensor2D test = ref;
    const double amp = 0.125; // exactly representable
    for (std::size_t i = 0; i < test.size(); ++i) {
        test.data()[i] += (i % 2 == 0) ? amp : -amp;
    }
    CHECK(error_report(ref, test).max_abs_err == amp);
}

TEST_CASE("whitening_score separates gaussian from heavy-tailed data") {
    const std::size_t s = 100000;
    Tensor2D gauss(s, 4);
    PhiloxRng g(8, 0);
    for (double& v : gauss.data()) {
        v = g.next_normal();
    }
    const double score_gauss = whitening_score(gauss);
    CHECK(score_gauss <= 0.2);

    Tensor2D heavy = gauss;
    PhiloxRng t(9, 0);
    for (std::size_t r = 0; r < s; ++r) {
        heavy(r, 2) = t.next_student_t(3.0);
    }
    CHECK(whitening_score(heavy) > score_gauss);

    CHECK_THROWS_AS(whitening_score(Tensor2D(2, 2, {1, 2, 3, 4})), DimensionError);
}
