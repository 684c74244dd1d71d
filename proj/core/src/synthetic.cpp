#include "prequant/synthetic.hpp"

#include "prequant/rng.hpp"

namespace prequant {

void ChannelGenSpec::validate() const {
    if (!(std > 0.0)) {
        throw ParamError("ChannelGenSpec: std must be positive");
    }
    if (tail == TailKind::student_t && !(dof > 0.0)) {
        throw ParamError("ChannelGenSpec: student_t dof must be positive");
    }
    if (tail == TailKind::outlier_mix &&
        (fraction < 0.0 || fraction >= 1.0 || magnitude <= 0.0)) {
        throw ParamError("ChannelGenSpec: outlier_mix needs fraction in [0,1) and magnitude > 0");
    }
}

Tensor2D gen_synthetic(const std::vector<ChannelGenSpec>& spec, std::size_t s,
                       std::uint64_t seed, std::size_t n_channels) {
    if (spec.empty()) {
        throw ParamError("gen_synthetic: empty channel spec");
    }
    if (s == 0) {
        throw ParamError("gen_synthetic: s must be positive");
    }
    for (const ChannelGenSpec& g : spec) {
        g.validate();
    }
    const std::size_t d = n_channels == 0 ? spec.size() : n_channels;

    Tensor2D out(s, d);
    for (std::size_t c = 0; c < d; ++c) {
        const ChannelGenSpec& g = spec[c % spec.size()];
        PhiloxRng rng(seed, c);
        for (std::size_t r = 0; r < s; ++r) {
            double draw = 0.0;
            switch (g.tail) {
                case TailKind::normal:
                    draw = rng.next_normal();
                    break;
                case TailKind::student_t:
                    draw = rng.next_student_t(g.dof);
                    break;
                case TailKind::outlier_mix: {
                    // fixed draw order keeps the stream layout independent
                    // of the branch taken
                    const double u = rng.next_double();
                    const double z = rng.next_normal();
                    draw = u < g.fraction ? g.magnitude * z : z;
                    break;
                }
            }
            out(r, c) = g.mean + g.std * draw;
        }
    }
    return out;
}

std::vector<ChannelGenSpec> four_channel_fixture() {
    std::vector<ChannelGenSpec> spec(4);
    spec[0] = {.mean = -2.0, .std = 0.5, .tail = TailKind::normal};
    spec[1] = {.mean = 3.0, .std = 1.5, .tail = TailKind::normal};
    spec[2] = {.mean = 0.5, .std = 0.2, .tail = TailKind::normal};
    spec[3] = {.mean = 0.0, .std = 1.0, .tail = TailKind::student_t, .dof = 3.0};
    return spec;
}

std::vector<ChannelGenSpec> default_image_spec() {
    std::vector<ChannelGenSpec> spec(8);
    spec[0] = {.mean = 0.18, .std = 0.4, .tail = TailKind::normal};
    spec[1] = {.mean = 0.22, .std = 0.5, .tail = TailKind::normal};
    spec[2] = {.mean = 0.12, .std = 0.35, .tail = TailKind::normal};
    spec[3] = {.mean = 0.20, .std = 0.45, .tail = TailKind::normal};
    spec[4] = {.mean = 0.15, .std = 2.4, .tail = TailKind::student_t, .dof = 3.0};
    spec[5] = {.mean = 0.18, .std = 0.4, .tail = TailKind::normal};
    spec[6] = {.mean = 0.12, .std = 0.6, .tail = TailKind::outlier_mix,
               .fraction = 0.04, .magnitude = 8.0};
    spec[7] = {.mean = 0.22, .std = 0.4, .tail = TailKind::normal};
    return spec;
}

std::vector<ChannelGenSpec> default_text_spec() {
    std::vector<ChannelGenSpec> spec(4);
    spec[0] = {.mean = 0.7, .std = 1.2, .tail = TailKind::student_t, .dof = 3.0};
    spec[1] = {.mean = -0.7, .std = 1.0, .tail = TailKind::normal};
    spec[2] = {.mean = 0.9, .std = 1.4, .tail = TailKind::student_t, .dof = 3.0};
    spec[3] = {.mean = -0.3, .std = 0.8, .tail = TailKind::outlier_mix,
               .fraction = 0.05, .magnitude = 5.0};
    return spec;
}

} // namespace prequant
