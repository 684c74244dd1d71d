#pragma once

#include <span>
#include <string>
#include <vector>

#include "prequant/tensor.hpp"

namespace prequant {

// Which of the three pre-quantization steps a layer applies, in fixed
// order: center (subtract dynamic per-channel mean), scale (multiply by
// diag(sigma^-1)), hadamard (rotate channels). sigma is static per layer;
// the mean is recomputed per call.
struct TransformPlan {
    bool center = false;
    bool scale = false;
    bool hadamard = false;
    std::vector<double> sigma; // length d, all-ones when scale is off
    double alpha = 0.0;
    double epsilon = 1e-5;

    std::size_t dim() const { return sigma.size(); }

    // Validates the invariants: sigma >= epsilon elementwise, sigma all-ones
    // when scale is off, power-of-two dimension when hadamard is set.
    static TransformPlan make(bool center, bool scale, bool hadamard,
                              std::vector<double> sigma, double alpha,
                              double epsilon = 1e-5);

    // Identity plan (no steps) of dimension d.
    static TransformPlan none(std::size_t d);
};

enum class TransformPreset {
    none,        // no transform
    smoothquant, // scale only
    quarot,      // hadamard only
    sdcb,        // scale + hadamard
    dyncenter,   // center only
    hadanorm,    // center + scale + hadamard
};

inline constexpr TransformPreset kAllPresets[] = {
    TransformPreset::none,      TransformPreset::smoothquant,
    TransformPreset::quarot,    TransformPreset::sdcb,
    TransformPreset::dyncenter, TransformPreset::hadanorm,
};

const char* to_string(TransformPreset p);
TransformPreset preset_from_string(const std::string& name);

struct PresetFlags {
    bool center = false;
    bool scale = false;
    bool hadamard = false;
};
PresetFlags preset_flags(TransformPreset p);

// sigma_i = max(act_absmax_i, eps)^alpha / max(weight_absmax_i, eps)^(1-alpha),
// clamped below at eps. Migration strength alpha must lie in [0, 1].
std::vector<double> compute_sigma(std::span<const double> act_absmax,
                                  std::span<const double> weight_absmax,
                                  double alpha, double epsilon = 1e-5);

// Builds the plan for a preset; sigma is computed from the calibration
// statistics only when the preset has the scale step, otherwise all-ones.
TransformPlan preset_to_plan(TransformPreset preset,
                             std::span<const double> act_absmax,
                             std::span<const double> weight_absmax,
                             double alpha, double epsilon = 1e-5);

struct ForwardResult {
    Tensor2D x_tilde;
    std::vector<double> mu; // zero vector when the plan has no center step
};

// Applies, in order, each active step: subtract the per-channel mean,
// multiply by diag(sigma^-1), rotate rows by H.
ForwardResult forward_transform(const Tensor2D& x, const TransformPlan& plan);

// Folds the inverse steps into the weights: H^T diag(sigma) W, factors
// skipped when their flag is off.
Tensor2D fuse_weights(const Tensor2D& w, const TransformPlan& plan);

// Bias correction that restores the subtracted mean. Takes the weights
// actually used at inference (typically dequantized fused weights) so the
// correction matches them: b + mu diag(sigma^-1) H w_tilde.
std::vector<double> effective_bias(std::span<const double> b,
                                   std::span<const double> mu,
                                   const TransformPlan& plan,
                                   const Tensor2D& w_tilde_dequant);

// Transformed layer bundle: fused weights plus the mu-independent bias part.
struct FusedLinear {
    Tensor2D w_tilde;
    std::vector<double> b_tilde_static; // = original bias; the mu correction is dynamic
    std::vector<double> original_bias;
};

FusedLinear fuse_linear(const Tensor2D& w, std::span<const double> b,
                        const TransformPlan& plan);

} // namespace prequant
