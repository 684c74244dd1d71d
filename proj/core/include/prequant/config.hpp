#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "prequant/synthetic.hpp"
#include "prequant/transforms.hpp"

namespace prequant {

enum class ReportFormat {
    csv,  // CSV + JSON reports
    json, // CSV + JSON reports
    svg,  // CSV + JSON + SVG chart
};

const char* to_string(ReportFormat f);
ReportFormat report_format_from_string(const std::string& name);

struct DimsSpec {
    std::size_t s = 128;       // image-stream tokens
    std::size_t d = 64;        // channels
    std::size_t m = 64;        // output width of standalone calibration layers
    std::size_t ffn_mult = 4;  // FFN hidden = ffn_mult * d
    std::size_t s_txt = 64;    // text-stream tokens

    bool operator==(const DimsSpec&) const = default;
};

struct SiteSpec {
    std::string id;
    bool center_exempt = false;
    bool enabled = true;

    bool operator==(const SiteSpec&) const = default;
};

// Full declarative description of a harness run. Every field has a default;
// a config file overrides fields, command-line flags override the file.
struct ExperimentConfig {
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    DimsSpec dims;
    int bits_act = 4;
    int bits_weight = 4;
    std::size_t weight_block = 128;
    std::vector<TransformPreset> presets{std::begin(kAllPresets), std::end(kAllPresets)};
    double alpha = 0.5;
    std::vector<double> alpha_grid; // empty = default {0.0, 0.1, ..., 1.0}
    double epsilon = 1e-5;
    std::vector<ChannelGenSpec> channel_spec;     // empty = bundled default
    std::vector<ChannelGenSpec> txt_channel_spec; // empty = bundled default
    std::vector<SiteSpec> sites;                  // empty = bundled five sites
    std::size_t calib_s = 4096; // calibration tokens for the alpha sweep
    std::string output_dir = "out";
    ReportFormat format = ReportFormat::csv;

    void validate() const;

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_json_file(const std::string& path);
    void save_json_file(const std::string& path) const;

    // FNV-1a 64 over the canonical serialized form, as a hex string;
    // stamped into every report row.
    std::string hash() const;

    // Defaults materialized for empty channel_spec / txt_channel_spec /
    // sites / alpha_grid.
    std::vector<ChannelGenSpec> effective_channel_spec() const;
    std::vector<ChannelGenSpec> effective_txt_spec() const;
    std::vector<SiteSpec> effective_sites() const;
    std::vector<double> effective_alpha_grid() const;

    bool operator==(const ExperimentConfig&) const = default;
};

bool operator==(const ChannelGenSpec& a, const ChannelGenSpec& b);

} // namespace prequant
