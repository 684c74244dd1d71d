#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prequant/tensor.hpp"

namespace prequant {

enum class TailKind {
    normal,
    student_t,   // heavy tails, parameterized by dof
    outlier_mix, // normal with probability-`fraction` draws scaled by `magnitude`
};

// One synthetic channel: value = mean + std * tail_draw. For student_t the
// tail draw is a unit-scale t variate (variance dof/(dof-2) when dof > 2);
// for outlier_mix it is a standard normal scaled by `magnitude` with
// probability `fraction`.
struct ChannelGenSpec {
    double mean = 0.0;
    double std = 1.0;
    TailKind tail = TailKind::normal;
    double dof = 3.0;       // student_t
    double fraction = 0.0;  // outlier_mix, in [0, 1)
    double magnitude = 1.0; // outlier_mix

    void validate() const;
};

// Column i is drawn i.i.d. from generator (i mod spec.size()), each column
// from its own counter stream so results are deterministic in (spec, s,
// seed) and independent of other columns. A spec shorter than the channel
// count cycles.
Tensor2D gen_synthetic(const std::vector<ChannelGenSpec>& spec, std::size_t s,
                       std::uint64_t seed, std::size_t n_channels = 0);

// Bundled four-channel fixture with distinct means and scales and one
// heavy-tailed channel. Values are artifact defaults.
std::vector<ChannelGenSpec> four_channel_fixture();

// Default image-stream workload for the toy block: consistently signed
// channel means, mixed scales, a sprinkling of heavy-tailed channels.
std::vector<ChannelGenSpec> default_image_spec();

// Default text-stream workload: larger mean spread and heavier tails.
std::vector<ChannelGenSpec> default_text_spec();

} // namespace prequant
