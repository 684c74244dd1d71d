#include "prequant/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "prequant/fwht.hpp"

namespace prequant {

TransformPlan TransformPlan::make(bool center, bool scale, bool hadamard,
                                  std::vector<double> sigma, double alpha,
                                  double epsilon) {
    if (epsilon <= 0.0) {
        throw ParamError("TransformPlan: epsilon must be positive");
    }
    if (alpha < 0.0 || alpha > 1.0) {
        throw ParamError("TransformPlan: alpha outside [0, 1]");
    }
    if (sigma.empty()) {
        throw DimensionError("TransformPlan: empty sigma");
    }
    if (hadamard && !is_power_of_two(sigma.size())) {
        throw DimensionError("TransformPlan: hadamard requires a power-of-two dimension, got " +
                             std::to_string(sigma.size()));
    }
    if (!scale) {
        for (double s : sigma) {
            if (s != 1.0) {
                throw ParamError("TransformPlan: sigma must be all-ones when scale is off");
            }
        }
    } else {
        for (double s : sigma) {
            if (!(s >= epsilon)) {
                throw ParamError("TransformPlan: sigma below epsilon floor");
            }
        }
    }
    TransformPlan plan;
    plan.center = center;
    plan.scale = scale;
    plan.hadamard = hadamard;
    plan.sigma = std::move(sigma);
    plan.alpha = alpha;
    plan.epsilon = epsilon;
    return plan;
}

TransformPlan TransformPlan::none(std::size_t d) {
    return make(false, false, false, std::vector<double>(d, 1.0), 0.0);
}

const char* to_string(TransformPreset p) {
    switch (p) {
        case TransformPreset::none: return "none";
        case TransformPreset::smoothquant: return "smoothquant";
        case TransformPreset::quarot: return "quarot";
        case TransformPreset::sdcb: return "sdcb";
        case TransformPreset::dyncenter: return "dyncenter";
        case TransformPreset::hadanorm: return "hadanorm";
    }
    return "unknown";
}

TransformPreset preset_from_string(const std::string& name) {
    for (TransformPreset p : kAllPresets) {
        if (name == to_string(p)) {
            return p;
        }
    }
    throw ParamError("unknown transform preset: " + name);
}

PresetFlags preset_flags(TransformPreset p) {
    switch (p) {
        case TransformPreset::none: return {false, false, false};
        case TransformPreset::smoothquant: return {false, true, false};
        case TransformPreset::quarot: return {false, false, true};
        case TransformPreset::sdcb: return {false, true, true};
        case TransformPreset::dyncenter: return {true, false, false};
        case TransformPreset::hadanorm: return {true, true, true};
    }
    return {};
}

std::vector<double> compute_sigma(std::span<const double> act_absmax,
                                  std::span<const double> weight_absmax,
                                  double alpha, double epsilon) {
    if (alpha < 0.0 || alpha > 1.0) {
        throw ParamError("compute_sigma: alpha outside [0, 1]");
    }
    if (epsilon <= 0.0) {
        throw ParamError("compute_sigma: epsilon must be positive");
    }
    if (act_absmax.size() != weight_absmax.size()) {
        throw DimensionError("compute_sigma: statistics length mismatch");
    }
    std::vector<double> sigma(act_absmax.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        const double a = std::max(act_absmax[i], epsilon);
        const double w = std::max(weight_absmax[i], epsilon);
        sigma[i] = std::max(std::pow(a, alpha) / std::pow(w, 1.0 - alpha), epsilon);
    }
    return sigma;
}

TransformPlan preset_to_plan(TransformPreset preset,
                             std::span<const double> act_absmax,
                             std::span<const double> weight_absmax,
                             double alpha, double epsilon) {
    const PresetFlags f = preset_flags(preset);
    std::vector<double> sigma =
        f.scale ? compute_sigma(act_absmax, weight_absmax, alpha, epsilon)
                : std::vector<double>(act_absmax.size(), 1.0);
    return TransformPlan::make(f.center, f.scale, f.hadamard, std::move(sigma),
                               alpha, epsilon);
}

ForwardResult forward_transform(const Tensor2D& x, const TransformPlan& plan) {
    if (x.cols() != plan.dim()) {
        throw DimensionError("forward_transform: tensor cols " + std::to_string(x.cols()) +
                             " do not match plan dimension " + std::to_string(plan.dim()));
    }
    ForwardResult res;
    res.mu.assign(plan.dim(), 0.0);

    Tensor2D cur = x;
    if (plan.center) {
        res.mu = channel_means(cur);
        cur = sub_row_vector(cur, res.mu);
    }
    if (plan.scale) {
        std::vector<double> inv(plan.dim());
        for (std::size_t i = 0; i < inv.size(); ++i) {
            inv[i] = 1.0 / plan.sigma[i];
        }
        cur = scale_columns(cur, inv);
    }
    if (plan.hadamard) {
        cur = fwht_rows(cur);
    }
    res.x_tilde = std::move(cur);
    return res;
}

Tensor2D fuse_weights(const Tensor2D& w, const TransformPlan& plan) {
    if (w.rows() != plan.dim()) {
        throw DimensionError("fuse_weights: weight rows " + std::to_string(w.rows()) +
                             " do not match plan dimension " + std::to_string(plan.dim()));
    }
    Tensor2D out = plan.scale ? scale_rows(w, plan.sigma) : w;
    if (plan.hadamard) {
        out = fwht_cols(out); // H^T = H for the orthonormal symmetric transform
    }
    return out;
}

std::vector<double> effective_bias(std::span<const double> b,
                                   std::span<const double> mu,
                                   const TransformPlan& plan,
                                   const Tensor2D& w_tilde_dequant) {
    if (mu.size() != plan.dim() || w_tilde_dequant.rows() != plan.dim()) {
        throw DimensionError("effective_bias: dimension mismatch");
    }
    if (b.size() != w_tilde_dequant.cols()) {
        throw DimensionError("effective_bias: bias length does not match output width");
    }
    std::vector<double> out(b.begin(), b.end());
    if (!plan.center) {
        return out;
    }
    // correction row vector: mu diag(sigma^-1) H, then times the weights in use
    std::vector<double> corr(mu.begin(), mu.end());
    if (plan.scale) {
        for (std::size_t i = 0; i < corr.size(); ++i) {
            corr[i] /= plan.sigma[i];
        }
    }
    if (plan.hadamard) {
        fwht_inplace(corr);
    }
    for (std::size_t j = 0; j < out.size(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < corr.size(); ++i) {
            acc += corr[i] * w_tilde_dequant(i, j);
        }
        out[j] += acc;
    }
    return out;
}

FusedLinear fuse_linear(const Tensor2D& w, std::span<const double> b,
                        const TransformPlan& plan) {
    if (b.size() != w.cols()) {
        throw DimensionError("fuse_linear: bias length does not match weight cols");
    }
    FusedLinear fused;
    fused.w_tilde = fuse_weights(w, plan);
    fused.b_tilde_static.assign(b.begin(), b.end());
    fused.original_bias.assign(b.begin(), b.end());
    return fused;
}

} // namespace prequant
