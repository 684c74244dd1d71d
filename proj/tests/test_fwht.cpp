#include <doctest.h>

#include <cmath>
#include <vector>

#include "prequant/fwht.hpp"
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

double norm2(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) {
        acc += x * x;
    }
    return std::sqrt(acc);
}

} // namespace

TEST_CASE("fwht_vector hand cases") {
    const std::vector<double> ones{1, 1, 1, 1};
    const auto a = fwht_vector(ones);
    CHECK(a[0] == doctest::Approx(2.0));
    CHECK(a[1] == doctest::Approx(0.0));
    CHECK(a[2] == doctest::Approx(0.0));
    CHECK(a[3] == doctest::Approx(0.0));

    const std::vector<double> e0{1, 0, 0, 0};
    for (double v : fwht_vector(e0)) {
        CHECK(v == doctest::Approx(0.5));
    }
}

TEST_CASE("fwht rejects non-power-of-two lengths") {
    std::vector<double> v(6, 1.0);
    CHECK_THROWS_AS(fwht_vector(v), DimensionError);
    CHECK_THROWS_AS(fwht_rows(Tensor2D(2, 3)), DimensionError);
    std::vector<double> empty;
    CHECK_THROWS_AS(fwht_vector(empty), DimensionError);
}

TEST_CASE("naive_hadamard base cases and orthonormality") {
    const Tensor2D h1 = naive_hadamard(1);
    CHECK(h1(0, 0) == 1.0);

    const Tensor2D h2 = naive_hadamard(2);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(h2(0, 0) == doctest::Approx(r));
    CHECK(h2(0, 1) == doctest::Approx(r));
    CHECK(h2(1, 0) == doctest::Approx(r));
    CHECK(h2(1, 1) == doctest::Approx(-r));

    const Tensor2D h8 = naive_hadamard(8);
    const Tensor2D hh = matmul(h8, h8);
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 8; ++j) {
            CHECK(hh(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
        }
    }

    CHECK_THROWS_AS(naive_hadamard(3), DimensionError);
    CHECK_THROWS_AS(naive_hadamard(1u << 15), DimensionError);
}

TEST_CASE("fwht matches the dense oracle across sizes") {
    for (std::size_t d = 1; d <= 1024; d <<= 1) {
        const Tensor2D h = naive_hadamard(d);
        for (int rep = 0; rep < 10; ++rep) {
            const Tensor2D x = random_tensor(4, d, 1000 + d + rep);
            const Tensor2D fast = fwht_rows(x);
            const Tensor2D dense = matmul(x, h);
            for (std::size_t i = 0; i < fast.size(); ++i) {
                CHECK(fast.data()[i] == doctest::Approx(dense.data()[i]).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("fwht_rows on a single row reduces to fwht_vector") {
    const Tensor2D x = random_tensor(1, 64, 5);
    const auto v = fwht_vector(x.row(0));
    const Tensor2D rows = fwht_rows(x);
    for (std::size_t i = 0; i < 64; ++i) {
        CHECK(rows(0, i) == v[i]);
    }
}

TEST_CASE("property: Parseval energy preservation") {
    for (std::size_t d = 1; d <= (1u << 12); d <<= 1) {
        Tensor2D x = random_tensor(1, d, 2000 + d);
        const double before = norm2(x.row(0));
        const auto after = fwht_vector(x.row(0));
        CHECK(norm2(after) == doctest::Approx(before).epsilon(1e-10));
    }
}

TEST_CASE("property: involution") {
    const Tensor2D x = random_tensor(8, 128, 77);
    const Tensor2D twice = fwht_rows(fwht_rows(x));
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(twice.data()[i] == doctest::Approx(x.data()[i]).epsilon(1e-10));
    }
}

TEST_CASE("property: linearity") {
    PhiloxRng rng(31, 0);
    const std::size_t d = 256;
    std::vector<double> u(d), v(d), comb(d);
    for (std::size_t i = 0; i < d; ++i) {
        u[i] = rng.next_normal();
        v[i] = rng.next_normal();
    }
    const double a = 1.7, b = -0.3;
    for (std::size_t i = 0; i < d; ++i) {
        comb[i] = a * u[i] + b * v[i];
    }
    const auto fu = fwht_vector(u);
    const auto fv = fwht_vector(v);
    const auto fc = fwht_vector(comb);
    for (std::size_t i = 0; i < d; ++i) {
        CHECK(fc[i] == doctest::Approx(a * fu[i] + b * fv[i]).epsilon(1e-10));
    }
}

TEST_CASE("fwht_cols equals dense left multiplication") {
    const std::size_t d = 32, m = 7;
    const Tensor2D x = random_tensor(d, m, 555);
    const Tensor2D fast = fwht_cols(x);
    const Tensor2D dense = matmul(naive_hadamard(d), x);
    for (std::size_t i = 0; i < fast.size(); ++i) {
        CHECK(fast.data()[i] == doctest::Approx(dense.data()[i]).epsilon(1e-10));
    }
}
