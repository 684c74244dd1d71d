#include "prequant/rng.hpp"

#include <cmath>
#include <numbers>

namespace prequant {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, counter[0], hi0, lo0);
        mulhilo(kPhiloxM1, counter[2], hi1, lo1);
        counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
    }
    return counter;
}

PhiloxRng::PhiloxRng(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

void PhiloxRng::refill() {
    const std::array<std::uint32_t, 4> ctr = {
        stream_[0], stream_[1],
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32)};
    const auto out = philox4x32(ctr, key_);
    buf_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buf_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    buf_pos_ = 0;
    ++block_;
}

std::uint64_t PhiloxRng::next_u64() {
    if (buf_pos_ >= 2) {
        refill();
    }
    return buf_[buf_pos_++];
}

double PhiloxRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double PhiloxRng::next_normal() {
    if (have_spare_normal_) {
        have_spare_normal_ = false;
        return spare_normal_;
    }
    const double u1 = 1.0 - next_double(); // (0, 1], keeps log finite
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(t);
    have_spare_normal_ = true;
    return r * std::cos(t);
}

double PhiloxRng::next_gamma(double alpha) {
    if (alpha < 1.0) {
        const double x = next_gamma(alpha + 1.0);
        const double u = 1.0 - next_double(); // (0, 1]
        return x * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = next_normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = 1.0 - next_double(); // (0, 1]
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
            return d * v;
        }
    }
}

double PhiloxRng::next_student_t(double dof) {
    const double z = next_normal();
    const double chi2 = std::max(2.0 * next_gamma(0.5 * dof), 1e-300);
    return z / std::sqrt(chi2 / dof);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
    std::uint64_t z = base + (tag + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace prequant
