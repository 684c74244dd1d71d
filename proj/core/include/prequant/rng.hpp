#pragma once

#include <array>
#include <cstdint>

namespace prequant {

// One block of Philox4x32-10. `counter` is the 128-bit block address,
// `key` the 64-bit seed. Pure function; the full generator definition
// (round constants, key schedule, output mapping) is documented in the
// README so seeds are portable across implementations.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Counter-based stream generator on top of Philox4x32-10.
//
// Block i of stream `stream` under seed `seed` is
//   philox4x32(counter = {stream_lo, stream_hi, i_lo, i_hi},
//              key     = {seed_lo, seed_hi})
// and yields two 64-bit words, (o1<<32)|o0 then (o3<<32)|o2.
// Uniform doubles take the top 53 bits: (u64 >> 11) * 2^-53, in [0, 1).
class PhiloxRng {
public:
    explicit PhiloxRng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();

    // uniform on [0, 1)
    double next_double();

    // standard normal via Box-Muller on (1-u1, u2); caches the sine branch
    double next_normal();

    // Gamma(alpha, 1), Marsaglia-Tsang squeeze with the alpha<1 boost
    double next_gamma(double alpha);

    // Student-t with `dof` degrees of freedom (unit scale)
    double next_student_t(double dof);

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buf_{};
    int buf_pos_ = 2;
    bool have_spare_normal_ = false;
    double spare_normal_ = 0.0;

    void refill();
};

// Stable seed derivation for independent sub-streams (weights, image input,
// text input, calibration draws...). splitmix64 finalizer over base ^ f(tag).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

} // namespace prequant
