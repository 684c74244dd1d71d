#include "prequant/config.hpp"

#include <fstream>

#include "prequant/fwht.hpp"
#include "prequant/layersim.hpp"

namespace prequant {

const char* to_string(ReportFormat f) {
    switch (f) {
        case ReportFormat::csv: return "csv";
        case ReportFormat::json: return "json";
        case ReportFormat::svg: return "svg";
    }
    return "unknown";
}

ReportFormat report_format_from_string(const std::string& name) {
    if (name == "csv") return ReportFormat::csv;
    if (name == "json") return ReportFormat::json;
    if (name == "svg") return ReportFormat::svg;
    throw ParamError("unknown report format: " + name);
}

bool operator==(const ChannelGenSpec& a, const ChannelGenSpec& b) {
    return a.mean == b.mean && a.std == b.std && a.tail == b.tail && a.dof == b.dof &&
           a.fraction == b.fraction && a.magnitude == b.magnitude;
}

namespace {

const char* to_string(TailKind t) {
    switch (t) {
        case TailKind::normal: return "normal";
        case TailKind::student_t: return "student_t";
        case TailKind::outlier_mix: return "outlier_mix";
    }
    return "unknown";
}

TailKind tail_from_string(const std::string& name) {
    if (name == "normal") return TailKind::normal;
    if (name == "student_t") return TailKind::student_t;
    if (name == "outlier_mix") return TailKind::outlier_mix;
    throw ParamError("unknown tail kind: " + name);
}

nlohmann::json channel_to_json(const ChannelGenSpec& c) {
    nlohmann::json j;
    j["mean"] = c.mean;
    j["std"] = c.std;
    j["tail"] = to_string(c.tail);
    if (c.tail == TailKind::student_t) {
        j["dof"] = c.dof;
    }
    if (c.tail == TailKind::outlier_mix) {
        j["fraction"] = c.fraction;
        j["magnitude"] = c.magnitude;
    }
    return j;
}

ChannelGenSpec channel_from_json(const nlohmann::json& j) {
    ChannelGenSpec c;
    c.mean = j.value("mean", 0.0);
    c.std = j.value("std", 1.0);
    c.tail = tail_from_string(j.value("tail", std::string("normal")));
    c.dof = j.value("dof", 3.0);
    c.fraction = j.value("fraction", 0.0);
    c.magnitude = j.value("magnitude", 1.0);
    return c;
}

} // namespace

void ExperimentConfig::validate() const {
    if (seeds.empty()) {
        throw ParamError("config: seeds must be non-empty");
    }
    if (dims.s == 0 || dims.d == 0 || dims.m == 0 || dims.ffn_mult == 0 || dims.s_txt == 0) {
        throw ParamError("config: dims must be positive");
    }
    if (bits_act < 2 || bits_act > 8 || bits_weight < 2 || bits_weight > 8) {
        throw ParamError("config: bits must lie in [2, 8]");
    }
    if (weight_block < 1) {
        throw ParamError("config: weight_block must be >= 1");
    }
    if (presets.empty()) {
        throw ParamError("config: presets must be non-empty");
    }
    if (alpha < 0.0 || alpha > 1.0) {
        throw ParamError("config: alpha outside [0, 1]");
    }
    for (double a : alpha_grid) {
        if (a < 0.0 || a > 1.0) {
            throw ParamError("config: alpha grid value outside [0, 1]");
        }
    }
    if (epsilon <= 0.0) {
        throw ParamError("config: epsilon must be positive");
    }
    bool any_hadamard = false;
    for (TransformPreset p : presets) {
        any_hadamard = any_hadamard || preset_flags(p).hadamard;
    }
    if (any_hadamard &&
        (!is_power_of_two(dims.d) || !is_power_of_two(dims.d * dims.ffn_mult))) {
        throw ParamError("config: hadamard presets need power-of-two d and d*ffn_mult");
    }
    for (const ChannelGenSpec& c : channel_spec) {
        c.validate();
    }
    for (const ChannelGenSpec& c : txt_channel_spec) {
        c.validate();
    }
    if (calib_s == 0) {
        throw ParamError("config: calib_s must be positive");
    }
    if (output_dir.empty()) {
        throw ParamError("config: output_dir must be non-empty");
    }
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["seeds"] = seeds;
    j["dims"] = {{"s", dims.s}, {"d", dims.d}, {"m", dims.m},
                 {"ffn_mult", dims.ffn_mult}, {"s_txt", dims.s_txt}};
    j["bits_act"] = bits_act;
    j["bits_weight"] = bits_weight;
    j["weight_block"] = weight_block;
    std::vector<std::string> preset_names;
    for (TransformPreset p : presets) {
        preset_names.emplace_back(to_string(p));
    }
    j["presets"] = preset_names;
    j["alpha"] = alpha;
    j["alpha_grid"] = alpha_grid;
    j["epsilon"] = epsilon;
    j["channel_spec"] = nlohmann::json::array();
    for (const ChannelGenSpec& c : channel_spec) {
        j["channel_spec"].push_back(channel_to_json(c));
    }
    j["txt_channel_spec"] = nlohmann::json::array();
    for (const ChannelGenSpec& c : txt_channel_spec) {
        j["txt_channel_spec"].push_back(channel_to_json(c));
    }
    j["sites"] = nlohmann::json::array();
    for (const SiteSpec& s : sites) {
        j["sites"].push_back({{"id", s.id},
                              {"center_exempt", s.center_exempt},
                              {"enabled", s.enabled}});
    }
    j["calib_s"] = calib_s;
    j["output_dir"] = output_dir;
    j["format"] = to_string(format);
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    try {
        if (j.contains("seeds")) {
            cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        }
        if (j.contains("dims")) {
            const auto& d = j.at("dims");
            cfg.dims.s = d.value("s", cfg.dims.s);
            cfg.dims.d = d.value("d", cfg.dims.d);
            cfg.dims.m = d.value("m", cfg.dims.m);
            cfg.dims.ffn_mult = d.value("ffn_mult", cfg.dims.ffn_mult);
            cfg.dims.s_txt = d.value("s_txt", cfg.dims.s_txt);
        }
        cfg.bits_act = j.value("bits_act", cfg.bits_act);
        cfg.bits_weight = j.value("bits_weight", cfg.bits_weight);
        cfg.weight_block = j.value("weight_block", cfg.weight_block);
        if (j.contains("presets")) {
            cfg.presets.clear();
            for (const auto& name : j.at("presets")) {
                cfg.presets.push_back(preset_from_string(name.get<std::string>()));
            }
        }
        cfg.alpha = j.value("alpha", cfg.alpha);
        if (j.contains("alpha_grid")) {
            cfg.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
        }
        cfg.epsilon = j.value("epsilon", cfg.epsilon);
        if (j.contains("channel_spec")) {
            for (const auto& c : j.at("channel_spec")) {
                cfg.channel_spec.push_back(channel_from_json(c));
            }
        }
        if (j.contains("txt_channel_spec")) {
            for (const auto& c : j.at("txt_channel_spec")) {
                cfg.txt_channel_spec.push_back(channel_from_json(c));
            }
        }
        if (j.contains("sites")) {
            for (const auto& s : j.at("sites")) {
                SiteSpec spec;
                spec.id = s.at("id").get<std::string>();
                spec.center_exempt = s.value("center_exempt", false);
                spec.enabled = s.value("enabled", true);
                cfg.sites.push_back(spec);
            }
        }
        cfg.calib_s = j.value("calib_s", cfg.calib_s);
        cfg.output_dir = j.value("output_dir", cfg.output_dir);
        if (j.contains("format")) {
            cfg.format = report_format_from_string(j.at("format").get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParamError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(path + ": cannot open config file");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParamError(path + ": invalid JSON: " + e.what());
    }
    return from_json(j);
}

void ExperimentConfig::save_json_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) {
        throw IoError(path + ": cannot open for writing");
    }
    out << to_json().dump(2) << "\n";
    if (!out) {
        throw IoError(path + ": write failed");
    }
}

std::string ExperimentConfig::hash() const {
    const std::string dump = to_json().dump();
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001B3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<ChannelGenSpec> ExperimentConfig::effective_channel_spec() const {
    if (!channel_spec.empty()) {
        return channel_spec;
    }
    return dims.d == 4 ? four_channel_fixture() : default_image_spec();
}

std::vector<ChannelGenSpec> ExperimentConfig::effective_txt_spec() const {
    return txt_channel_spec.empty() ? default_text_spec() : txt_channel_spec;
}

std::vector<SiteSpec> ExperimentConfig::effective_sites() const {
    if (!sites.empty()) {
        std::vector<SiteSpec> out = sites;
        return out;
    }
    std::vector<SiteSpec> out;
    for (const SiteDesc& d : default_site_descs()) {
        out.push_back({d.id, d.center_exempt, d.enabled});
    }
    return out;
}

std::vector<double> ExperimentConfig::effective_alpha_grid() const {
    if (!alpha_grid.empty()) {
        return alpha_grid;
    }
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) {
        grid.push_back(0.1 * i);
    }
    return grid;
}

} // namespace prequant
