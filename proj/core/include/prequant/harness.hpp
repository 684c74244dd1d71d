#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prequant/config.hpp"
#include "prequant/layersim.hpp"
#include "prequant/synthetic.hpp"
#include "prequant/tensor.hpp"
#include "prequant/transforms.hpp"

namespace prequant {

// Sub-stream tags for derive_seed so every tensor drawn in a run has its
// own counter stream. Part of the documented seeding scheme.
enum SeedTag : std::uint64_t {
    kSeedImage = 100,
    kSeedText = 101,
    kSeedCalibImage = 102,
    kSeedCalibText = 103,
    kSeedBlock = 104,
    kSeedCalibData = 105,
    kSeedCalibLayer = 106,
    kSeedStudyData = 107,
    kSeedStudyCalib = 108,
};

// Deterministic random layer for standalone experiments and tests,
// drawn the same way as the toy-block layers.
LinearLayer make_random_layer(const std::string& name, std::size_t d_in,
                              std::size_t d_out, std::uint64_t seed);

struct CalibrationResult {
    double best_alpha = 0.0;
    std::vector<std::pair<double, double>> table; // (alpha, sqnr_db), grid order
};

// Sweeps alpha over `grid` (sorted ascending): builds the preset's plan
// from the calibration tensor statistics, runs the fully quantized layer
// (activations and weights both at `bits`), and scores SQNR against the
// exact layer. Ties within 1e-9 dB resolve toward the smaller alpha.
// Presets without the scale step return alpha 0 and an empty table.
CalibrationResult calibrate_alpha(const Tensor2D& calib, const LinearLayer& layer,
                                  TransformPreset preset, std::vector<double> grid,
                                  int bits);

// Data-level transform comparison on synthetic channels: quantize the
// transformed tensor per token at `bits`, reconstruct through the inverse
// transform, and score against the raw data. Also reports the whitening
// score of the transformed tensor.
struct ChannelStudyRow {
    TransformPreset preset;
    double sqnr_db = 0.0;
    double whitening = 0.0;
};
struct ChannelStudy {
    double whitening_raw = 0.0;
    std::vector<ChannelStudyRow> rows;
};
ChannelStudy channel_study(const std::vector<ChannelGenSpec>& spec, std::size_t s,
                           std::uint64_t seed, std::span<const TransformPreset> presets,
                           int bits, double alpha, double epsilon = 1e-5);

// Experiment drivers behind the CLI subcommands. Each validates the
// config, writes its reports under cfg.output_dir, and returns the list
// of files written. Outputs are byte-deterministic for a fixed config.
std::vector<std::string> run_gen(const ExperimentConfig& cfg);
std::vector<std::string> run_calibrate(const ExperimentConfig& cfg);
std::vector<std::string> run_ablation(const ExperimentConfig& cfg);
std::vector<std::string> run_end2end_toy(const ExperimentConfig& cfg);

// In-memory results backing run_ablation / run_end2end_toy; exposed for
// tests and the acceptance suite.
struct AblationCell {
    std::string preset;
    std::string site;
    std::uint64_t seed = 0;
    double sqnr_db = 0.0;
};
std::vector<AblationCell> ablation_cells(const ExperimentConfig& cfg);

struct End2EndCell {
    std::string preset;
    std::uint64_t seed = 0;
    double sqnr_db = 0.0;
};
std::vector<End2EndCell> end2end_cells(const ExperimentConfig& cfg);

// Quick transform-identity check (exit-code-4 path of the CLI): verifies
// the quantizer-free transformed path against the exact layer across all
// presets on a few random layers. Throws NumericError on violation.
void self_test();

} // namespace prequant
