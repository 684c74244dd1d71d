#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prequant/quant.hpp"
#include "prequant/tensor.hpp"
#include "prequant/transforms.hpp"

namespace prequant {

struct LinearLayer {
    Tensor2D weights;         // d x m
    std::vector<double> bias; // m
    std::string name;
};

// One quantized linear layer instance inside the toy block: the layer, the
// transform applied to its input, and the (optional) activation and weight
// quantizers. A site with enabled=false runs the exact full-precision path.
struct QuantSite {
    std::string id;
    LinearLayer layer;
    TransformPlan plan;
    std::optional<QuantConfig> act_cfg; // nullopt = full-precision activations
    std::optional<QuantConfig> w_cfg;   // nullopt = full-precision weights
    bool center_exempt = false;         // per-site opt-out of dynamic centering
    bool enabled = true;
};

// exact 64-bit X W + b
Tensor2D run_baseline(const Tensor2D& x, const LinearLayer& layer);

// forward transform -> fake-quant activations -> multiply by the
// (fake-quantized) fused weights -> add the effective bias computed from
// the weights actually used. Falls back to run_baseline when disabled.
Tensor2D run_quantized(const Tensor2D& x, const QuantSite& site);

// max_j |W(i, j)| per input channel i, the weight statistic of the sigma rule
std::vector<double> weight_input_absmax(const Tensor2D& w);

struct SiteDesc {
    std::string id;
    bool center_exempt = false;
    bool enabled = true;
};

std::vector<SiteDesc> default_site_descs();

// Simplified transformer block with five quantized linear sites:
//
//   image:  X -> affine -> [QKV] -> token mixing -> [OP] -> +X
//              -> affine -> [FC1] -> gelu -> [FC2] -> +residual
//   text:   X_txt -> [TX] -> cross mixing, added into the token mixing output
//
// Attention is replaced by constant seeded row-stochastic mixing matrices;
// norms are exact per-channel affine maps. Only linear-layer inputs are
// ever quantized.
class ToyDiTBlock {
public:
    static ToyDiTBlock build(std::size_t s_img, std::size_t s_txt, std::size_t d,
                             std::size_t ffn_mult, std::uint64_t seed,
                             std::vector<SiteDesc> site_descs = default_site_descs());

    struct ReferenceRun {
        Tensor2D output;
        std::map<std::string, Tensor2D> site_inputs;
    };

    // Full-precision pass; captures every site's input for calibration.
    ReferenceRun run_reference(const Tensor2D& x_img, const Tensor2D& x_txt) const;

    // Pass honoring each site's plan and quantizer settings.
    Tensor2D run(const Tensor2D& x_img, const Tensor2D& x_txt) const;

    QuantSite& site(const std::string& id);
    const QuantSite& site(const std::string& id) const;
    std::vector<QuantSite>& sites() { return sites_; }
    const std::vector<QuantSite>& sites() const { return sites_; }

    std::size_t s_img() const { return s_img_; }
    std::size_t s_txt() const { return s_txt_; }
    std::size_t d() const { return d_; }
    std::size_t ffn_dim() const { return ffn_dim_; }

private:
    std::size_t s_img_ = 0, s_txt_ = 0, d_ = 0, ffn_dim_ = 0;
    Tensor2D mix_self_;  // s_img x s_img, row-stochastic
    Tensor2D mix_cross_; // s_img x s_txt, row-stochastic
    std::vector<double> norm1_gain_, norm1_shift_;
    std::vector<double> norm2_gain_, norm2_shift_;
    std::vector<QuantSite> sites_;

    template <typename SiteFn>
    Tensor2D eval(const Tensor2D& x_img, const Tensor2D& x_txt, SiteFn&& site_fn) const;
};

// Assigns every site the plan for `preset`, with sigma computed from the
// calibration inputs (per-site activation absmax) and the site's weight
// input absmax. Honors per-site center exemption.
void apply_preset(ToyDiTBlock& block, TransformPreset preset, double alpha,
                  double epsilon,
                  const std::map<std::string, Tensor2D>& calib_site_inputs);

// Same, from precomputed per-site activation absmax vectors (e.g.
// aggregated over several calibration batches).
void apply_preset(ToyDiTBlock& block, TransformPreset preset, double alpha,
                  double epsilon,
                  const std::map<std::string, std::vector<double>>& act_absmax_stats);

// Per-site SQNR with the block's current plans: for each site in turn,
// only that site's activation quantizer runs (weights full precision).
// bits=0 means passthrough.
std::map<std::string, double> ablate_sites_with_plans(ToyDiTBlock& block,
                                                      const Tensor2D& x_img,
                                                      const Tensor2D& x_txt, int bits);

// Per-site SQNR of the block output with only that site's activation
// quantizer on (weights full precision), relative to the full-precision
// block. bits=0 means passthrough (no quantization anywhere). When
// calibration tensors are given they drive the sigma statistics; otherwise
// the evaluation inputs calibrate themselves.
std::map<std::string, double> ablate_sites(ToyDiTBlock& block,
                                           const Tensor2D& x_img,
                                           const Tensor2D& x_txt,
                                           TransformPreset preset, int bits,
                                           double alpha = 0.5, double epsilon = 1e-5,
                                           const Tensor2D* calib_img = nullptr,
                                           const Tensor2D* calib_txt = nullptr);

} // namespace prequant
