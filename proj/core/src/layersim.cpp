#include "prequant/layersim.hpp"

#include <cmath>

#include "prequant/metrics.hpp"
#include "prequant/rng.hpp"

namespace prequant {

Tensor2D run_baseline(const Tensor2D& x, const LinearLayer& layer) {
    if (x.cols() != layer.weights.rows()) {
        throw DimensionError("run_baseline: input cols do not match weight rows");
    }
    if (layer.bias.size() != layer.weights.cols()) {
        throw DimensionError("run_baseline: bias length does not match weight cols");
    }
    return add_row_vector(matmul(x, layer.weights), layer.bias);
}

Tensor2D run_quantized(const Tensor2D& x, const QuantSite& site) {
    if (!site.enabled) {
        return run_baseline(x, site.layer);
    }
    const ForwardResult fwd = forward_transform(x, site.plan);
    const Tensor2D& acts_src = fwd.x_tilde;
    Tensor2D acts = site.act_cfg ? fake_quant(acts_src, *site.act_cfg) : acts_src;

    Tensor2D w_used = fuse_weights(site.layer.weights, site.plan);
    if (site.w_cfg) {
        w_used = fake_quant(w_used, *site.w_cfg);
    }
    const std::vector<double> b = effective_bias(site.layer.bias, fwd.mu, site.plan, w_used);
    return add_row_vector(matmul(acts, w_used), b);
}

std::vector<double> weight_input_absmax(const Tensor2D& w) {
    std::vector<double> out(w.rows(), 0.0);
    for (std::size_t r = 0; r < w.rows(); ++r) {
        const auto row = w.row(r);
        for (double v : row) {
            out[r] = std::max(out[r], std::fabs(v));
        }
    }
    return out;
}

std::vector<SiteDesc> default_site_descs() {
    // The text-stream site skips dynamic centering by default.
    return {
        {"QKV", false, true}, {"TX", true, true},  {"OP", false, true},
        {"FC1", false, true}, {"FC2", false, true},
    };
}

namespace {

// Concentrated row-stochastic mixing (Dirichlet with small concentration):
// each token attends to a handful of others, the way softmax attention
// focuses rather than averaging the whole sequence.
Tensor2D row_stochastic(std::size_t rows, std::size_t cols, PhiloxRng& rng) {
    Tensor2D m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        double sum = 0.0;
        auto row = m.row(r);
        for (std::size_t c = 0; c < cols; ++c) {
            row[c] = rng.next_gamma(0.25) + 1e-9;
            sum += row[c];
        }
        for (std::size_t c = 0; c < cols; ++c) {
            row[c] /= sum;
        }
    }
    return m;
}

// Weight entries ~ N(0, 1/d_in) with a log-spread per-input-channel scale
// and a sprinkling of large output channels. The column outliers give the
// downstream activations the static channel-scale disparity that trained
// transformers exhibit.
LinearLayer make_layer(const std::string& name, std::size_t d_in, std::size_t d_out,
                       PhiloxRng& rng) {
    LinearLayer layer;
    layer.name = name;
    std::vector<double> col_scale(d_out);
    for (std::size_t c = 0; c < d_out; ++c) {
        const bool outlier = rng.next_double() < 1.0 / 16.0;
        const double spread = std::exp2(1.0 * (rng.next_double() - 0.5));
        col_scale[c] = outlier ? spread * (4.0 + 4.0 * rng.next_double()) : spread;
    }
    Tensor2D w(d_in, d_out);
    const double base = 1.0 / std::sqrt(static_cast<double>(d_in));
    for (std::size_t r = 0; r < d_in; ++r) {
        const double row_scale = std::exp2(1.6 * (rng.next_double() - 0.5));
        auto row = w.row(r);
        for (std::size_t c = 0; c < d_out; ++c) {
            row[c] = base * row_scale * col_scale[c] * rng.next_normal();
        }
    }
    layer.weights = std::move(w);
    layer.bias.resize(d_out);
    for (std::size_t c = 0; c < d_out; ++c) {
        layer.bias[c] = 0.05 * col_scale[c] * rng.next_normal();
    }
    return layer;
}

Tensor2D gelu(const Tensor2D& x) {
    Tensor2D out = x;
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    for (double& v : out.data()) {
        v = 0.5 * v * (1.0 + std::erf(v * inv_sqrt2));
    }
    return out;
}

Tensor2D affine_channels(const Tensor2D& x, std::span<const double> gain,
                         std::span<const double> shift) {
    return add_row_vector(scale_columns(x, gain), shift);
}

} // namespace

ToyDiTBlock ToyDiTBlock::build(std::size_t s_img, std::size_t s_txt, std::size_t d,
                               std::size_t ffn_mult, std::uint64_t seed,
                               std::vector<SiteDesc> site_descs) {
    if (s_img == 0 || s_txt == 0 || d == 0 || ffn_mult == 0) {
        throw ParamError("ToyDiTBlock: dimensions must be positive");
    }
    ToyDiTBlock block;
    block.s_img_ = s_img;
    block.s_txt_ = s_txt;
    block.d_ = d;
    block.ffn_dim_ = ffn_mult * d;

    PhiloxRng mix_rng(derive_seed(seed, 1), 0);
    block.mix_self_ = row_stochastic(s_img, s_img, mix_rng);
    block.mix_cross_ = row_stochastic(s_img, s_txt, mix_rng);

    PhiloxRng norm_rng(derive_seed(seed, 2), 0);
    block.norm1_gain_.resize(d);
    block.norm1_shift_.resize(d);
    block.norm2_gain_.resize(d);
    block.norm2_shift_.resize(d);
    // norm gains carry occasional outlier channels, the usual source of
    // static activation outliers in transformer blocks
    for (std::size_t i = 0; i < d; ++i) {
        const bool out1 = norm_rng.next_double() < 1.0 / 16.0;
        block.norm1_gain_[i] = (0.75 + 0.5 * norm_rng.next_double()) * (out1 ? 5.0 : 1.0);
        block.norm1_shift_[i] = 0.8 * (norm_rng.next_double() - 0.5);
        const bool out2 = norm_rng.next_double() < 1.0 / 16.0;
        block.norm2_gain_[i] = (0.75 + 0.5 * norm_rng.next_double()) * (out2 ? 5.0 : 1.0);
        block.norm2_shift_[i] = 0.8 * (norm_rng.next_double() - 0.5);
    }

    std::uint64_t layer_tag = 16;
    for (const SiteDesc& desc : site_descs) {
        PhiloxRng rng(derive_seed(seed, layer_tag++), 0);
        std::size_t d_in = d, d_out = d;
        if (desc.id == "FC1") {
            d_out = block.ffn_dim_;
        } else if (desc.id == "FC2") {
            d_in = block.ffn_dim_;
        } else if (desc.id != "QKV" && desc.id != "OP" && desc.id != "TX") {
            throw ParamError("ToyDiTBlock: unknown site id " + desc.id);
        }
        QuantSite site;
        site.id = desc.id;
        site.layer = make_layer(desc.id, d_in, d_out, rng);
        site.plan = TransformPlan::none(d_in);
        site.center_exempt = desc.center_exempt;
        site.enabled = desc.enabled;
        block.sites_.push_back(std::move(site));
    }
    for (const char* required : {"QKV", "TX", "OP", "FC1", "FC2"}) {
        block.site(required);
    }
    return block;
}

QuantSite& ToyDiTBlock::site(const std::string& id) {
    for (QuantSite& s : sites_) {
        if (s.id == id) {
            return s;
        }
    }
    throw ParamError("ToyDiTBlock: no site " + id);
}

const QuantSite& ToyDiTBlock::site(const std::string& id) const {
    return const_cast<ToyDiTBlock*>(this)->site(id);
}

template <typename SiteFn>
Tensor2D ToyDiTBlock::eval(const Tensor2D& x_img, const Tensor2D& x_txt,
                           SiteFn&& site_fn) const {
    if (x_img.rows() != s_img_ || x_img.cols() != d_) {
        throw DimensionError("ToyDiTBlock: image input shape mismatch");
    }
    if (x_txt.rows() != s_txt_ || x_txt.cols() != d_) {
        throw DimensionError("ToyDiTBlock: text input shape mismatch");
    }
    const Tensor2D a0 = affine_channels(x_img, norm1_gain_, norm1_shift_);
    const Tensor2D qkv_out = site_fn(site("QKV"), a0);
    const Tensor2D tx_out = site_fn(site("TX"), x_txt);
    const Tensor2D attn = add(matmul(mix_self_, qkv_out), matmul(mix_cross_, tx_out));
    const Tensor2D op_out = site_fn(site("OP"), attn);
    const Tensor2D h1 = add(x_img, op_out);
    const Tensor2D a1 = affine_channels(h1, norm2_gain_, norm2_shift_);
    const Tensor2D f1 = site_fn(site("FC1"), a1);
    const Tensor2D f2 = site_fn(site("FC2"), gelu(f1));
    return add(h1, f2);
}

ToyDiTBlock::ReferenceRun ToyDiTBlock::run_reference(const Tensor2D& x_img,
                                                     const Tensor2D& x_txt) const {
    ReferenceRun run;
    run.output = eval(x_img, x_txt, [&](const QuantSite& site, const Tensor2D& in) {
        run.site_inputs[site.id] = in;
        return run_baseline(in, site.layer);
    });
    return run;
}

Tensor2D ToyDiTBlock::run(const Tensor2D& x_img, const Tensor2D& x_txt) const {
    return eval(x_img, x_txt, [](const QuantSite& site, const Tensor2D& in) {
        return run_quantized(in, site);
    });
}

void apply_preset(ToyDiTBlock& block, TransformPreset preset, double alpha,
                  double epsilon,
                  const std::map<std::string, std::vector<double>>& act_absmax_stats) {
    const PresetFlags flags = preset_flags(preset);
    for (QuantSite& site : block.sites()) {
        const auto it = act_absmax_stats.find(site.id);
        if (it == act_absmax_stats.end()) {
            throw ParamError("apply_preset: no calibration statistics for site " + site.id);
        }
        const std::vector<double>& act_absmax = it->second;
        const std::vector<double> w_absmax = weight_input_absmax(site.layer.weights);
        const bool center = flags.center && !site.center_exempt;
        std::vector<double> sigma =
            flags.scale ? compute_sigma(act_absmax, w_absmax, alpha, epsilon)
                        : std::vector<double>(act_absmax.size(), 1.0);
        site.plan = TransformPlan::make(center, flags.scale, flags.hadamard,
                                        std::move(sigma), alpha, epsilon);
    }
}

void apply_preset(ToyDiTBlock& block, TransformPreset preset, double alpha,
                  double epsilon,
                  const std::map<std::string, Tensor2D>& calib_site_inputs) {
    std::map<std::string, std::vector<double>> stats;
    for (const auto& [id, tensor] : calib_site_inputs) {
        stats[id] = channel_absmax(tensor);
    }
    apply_preset(block, preset, alpha, epsilon, stats);
}

std::map<std::string, double> ablate_sites(ToyDiTBlock& block, const Tensor2D& x_img,
                                           const Tensor2D& x_txt, TransformPreset preset,
                                           int bits, double alpha, double epsilon,
                                           const Tensor2D* calib_img,
                                           const Tensor2D* calib_txt) {
    const Tensor2D& cal_img = calib_img ? *calib_img : x_img;
    const Tensor2D& cal_txt = calib_txt ? *calib_txt : x_txt;
    const auto calib_run = block.run_reference(cal_img, cal_txt);
    apply_preset(block, preset, alpha, epsilon, calib_run.site_inputs);
    return ablate_sites_with_plans(block, x_img, x_txt, bits);
}

std::map<std::string, double> ablate_sites_with_plans(ToyDiTBlock& block,
                                                      const Tensor2D& x_img,
                                                      const Tensor2D& x_txt, int bits) {
    const Tensor2D fp_out = block.run_reference(x_img, x_txt).output;

    struct SavedState {
        std::optional<QuantConfig> act, w;
        bool enabled;
    };
    std::vector<SavedState> saved;
    for (const QuantSite& s : block.sites()) {
        saved.push_back({s.act_cfg, s.w_cfg, s.enabled});
    }

    std::map<std::string, double> result;
    for (const QuantSite& target : block.sites()) {
        for (QuantSite& s : block.sites()) {
            s.act_cfg.reset();
            s.w_cfg.reset();
            s.enabled = false;
        }
        QuantSite& active = block.site(target.id);
        active.enabled = true;
        if (bits != 0) {
            active.act_cfg = QuantConfig::activations(bits);
        }
        result[target.id] = sqnr(fp_out, block.run(x_img, x_txt));
    }

    for (std::size_t i = 0; i < saved.size(); ++i) {
        block.sites()[i].act_cfg = saved[i].act;
        block.sites()[i].w_cfg = saved[i].w;
        block.sites()[i].enabled = saved[i].enabled;
    }
    return result;
}

} // namespace prequant
