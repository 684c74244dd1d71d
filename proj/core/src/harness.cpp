#include "prequant/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include <json.hpp>

#include "prequant/fwht.hpp"
#include "prequant/metrics.hpp"
#include "prequant/quant.hpp"
#include "prequant/report.hpp"
#include "prequant/rng.hpp"
#include "prequant/tensor_io.hpp"
#include "prequant/version.hpp"

namespace prequant {

LinearLayer make_random_layer(const std::string& name, std::size_t d_in,
                              std::size_t d_out, std::uint64_t seed) {
    PhiloxRng rng(seed, 0);
    LinearLayer layer;
    layer.name = name;
    Tensor2D w(d_in, d_out);
    const double base = 1.0 / std::sqrt(static_cast<double>(d_in));
    for (std::size_t r = 0; r < d_in; ++r) {
        const double row_scale = std::exp2(2.4 * (rng.next_double() - 0.5));
        auto row = w.row(r);
        for (std::size_t c = 0; c < d_out; ++c) {
            row[c] = base * row_scale * rng.next_normal();
        }
    }
    layer.weights = std::move(w);
    layer.bias.resize(d_out);
    for (double& b : layer.bias) {
        b = 0.2 * rng.next_normal();
    }
    return layer;
}

CalibrationResult calibrate_alpha(const Tensor2D& calib, const LinearLayer& layer,
                                  TransformPreset preset, std::vector<double> grid,
                                  int bits) {
    CalibrationResult result;
    if (!preset_flags(preset).scale) {
        return result; // nothing to tune
    }
    if (grid.empty()) {
        throw ParamError("calibrate_alpha: empty grid");
    }
    std::sort(grid.begin(), grid.end());

    const std::vector<double> act_absmax = channel_absmax(calib);
    const std::vector<double> w_absmax = weight_input_absmax(layer.weights);
    const Tensor2D baseline = run_baseline(calib, layer);

    double best_sqnr = -1e300;
    for (double a : grid) {
        QuantSite site;
        site.id = layer.name;
        site.layer = layer;
        site.plan = preset_to_plan(preset, act_absmax, w_absmax, a);
        site.act_cfg = QuantConfig::activations(bits);
        site.w_cfg = QuantConfig::weights_blocked(bits);
        const double s = sqnr(baseline, run_quantized(calib, site));
        result.table.emplace_back(a, s);
        if (s > best_sqnr + 1e-9) {
            best_sqnr = s;
            result.best_alpha = a;
        }
    }
    return result;
}

ChannelStudy channel_study(const std::vector<ChannelGenSpec>& spec, std::size_t s,
                           std::uint64_t seed, std::span<const TransformPreset> presets,
                           int bits, double alpha, double epsilon) {
    const Tensor2D x = gen_synthetic(spec, s, derive_seed(seed, kSeedStudyData));
    const Tensor2D x_cal = gen_synthetic(spec, s, derive_seed(seed, kSeedStudyCalib));
    const std::vector<double> act_absmax = channel_absmax(x_cal);
    // data-level study: no weights, so the migration denominator is flat
    const std::vector<double> unit_w(act_absmax.size(), 1.0);

    ChannelStudy study;
    study.whitening_raw = whitening_score(x);
    for (TransformPreset preset : presets) {
        const TransformPlan plan = preset_to_plan(preset, act_absmax, unit_w, alpha, epsilon);
        const ForwardResult fwd = forward_transform(x, plan);
        Tensor2D rec = fake_quant(fwd.x_tilde, QuantConfig::activations(bits));
        // inverse steps in reverse order
        if (plan.hadamard) {
            rec = fwht_rows(rec);
        }
        if (plan.scale) {
            rec = scale_columns(rec, plan.sigma);
        }
        if (plan.center) {
            rec = add_row_vector(rec, fwd.mu);
        }
        study.rows.push_back({preset, sqnr(x, rec), whitening_score(fwd.x_tilde)});
    }
    return study;
}

namespace {

namespace fs = std::filesystem;

std::string ensure_output_dir(const ExperimentConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) {
        throw IoError(cfg.output_dir + ": cannot create output directory: " + ec.message());
    }
    return cfg.output_dir;
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

struct SeedRun {
    ToyDiTBlock block;
    Tensor2D x_img, x_txt;
    std::map<std::string, std::vector<double>> calib_stats; // per-site act absmax
    Tensor2D fp_out;
};

// Calibration statistics aggregate the per-site activation absmax over
// ceil(calib_s / s) disjoint batches: rare-spike channels (heavy tails,
// barely-active nonlinearity outputs) need more than one batch worth of
// tokens for a usable absmax estimate.
SeedRun make_seed_run(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto img_spec = cfg.effective_channel_spec();
    const auto txt_spec = cfg.effective_txt_spec();
    std::vector<SiteDesc> descs;
    for (const SiteSpec& s : cfg.effective_sites()) {
        descs.push_back({s.id, s.center_exempt, s.enabled});
    }
    SeedRun run{
        .block = ToyDiTBlock::build(cfg.dims.s, cfg.dims.s_txt, cfg.dims.d,
                                    cfg.dims.ffn_mult, derive_seed(seed, kSeedBlock), descs),
        .x_img = gen_synthetic(img_spec, cfg.dims.s, derive_seed(seed, kSeedImage), cfg.dims.d),
        .x_txt = gen_synthetic(txt_spec, cfg.dims.s_txt, derive_seed(seed, kSeedText), cfg.dims.d),
    };
    const std::size_t batches = std::max<std::size_t>(1, (cfg.calib_s + cfg.dims.s - 1) / cfg.dims.s);
    for (std::size_t b = 0; b < batches; ++b) {
        const Tensor2D c_img = gen_synthetic(
            img_spec, cfg.dims.s, derive_seed(derive_seed(seed, kSeedCalibImage), b), cfg.dims.d);
        const Tensor2D c_txt = gen_synthetic(
            txt_spec, cfg.dims.s_txt, derive_seed(derive_seed(seed, kSeedCalibText), b),
            cfg.dims.d);
        const auto ref = run.block.run_reference(c_img, c_txt);
        for (const auto& [id, tensor] : ref.site_inputs) {
            std::vector<double> absmax = channel_absmax(tensor);
            auto [it, inserted] = run.calib_stats.try_emplace(id, absmax);
            if (!inserted) {
                for (std::size_t i = 0; i < absmax.size(); ++i) {
                    it->second[i] = std::max(it->second[i], absmax[i]);
                }
            }
        }
    }
    run.fp_out = run.block.run_reference(run.x_img, run.x_txt).output;
    return run;
}

nlohmann::json provenance_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["config_hash"] = cfg.hash();
    j["config"] = cfg.to_json();
    return j;
}

} // namespace

std::vector<AblationCell> ablation_cells(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<AblationCell> cells;
    for (std::uint64_t seed : cfg.seeds) {
        SeedRun run = make_seed_run(cfg, seed);
        for (TransformPreset preset : cfg.presets) {
            apply_preset(run.block, preset, cfg.alpha, cfg.epsilon, run.calib_stats);
            const auto site_sqnr =
                ablate_sites_with_plans(run.block, run.x_img, run.x_txt, cfg.bits_act);
            for (const auto& [site, db] : site_sqnr) {
                cells.push_back({to_string(preset), site, seed, db});
            }
        }
    }
    std::sort(cells.begin(), cells.end(), [](const AblationCell& a, const AblationCell& b) {
        return std::tie(a.preset, a.site, a.seed) < std::tie(b.preset, b.site, b.seed);
    });
    return cells;
}

std::vector<std::string> run_ablation(const ExperimentConfig& cfg) {
    const std::vector<AblationCell> cells = ablation_cells(cfg);
    const std::string dir = ensure_output_dir(cfg);
    const std::string hash = cfg.hash();
    std::vector<std::string> written;

    std::ostringstream csv;
    csv << "preset,site,seed,sqnr_db,config_hash,version\n";
    for (const AblationCell& c : cells) {
        csv << c.preset << "," << c.site << "," << c.seed << "," << format_double(c.sqnr_db)
            << "," << hash << "," << kVersion << "\n";
    }
    const std::string csv_path = join_path(dir, "ablation.csv");
    write_text_file(csv_path, csv.str());
    written.push_back(csv_path);

    // preset -> site -> per-seed values, plus the mean
    nlohmann::json results;
    std::map<std::string, std::map<std::string, std::vector<double>>> grouped;
    for (const AblationCell& c : cells) {
        grouped[c.preset][c.site].push_back(c.sqnr_db);
    }
    for (const auto& [preset, sites] : grouped) {
        for (const auto& [site, vals] : sites) {
            double mean = 0.0;
            for (double v : vals) {
                mean += v;
            }
            mean /= static_cast<double>(vals.size());
            results[preset][site] = {{"per_seed", vals}, {"mean_sqnr_db", mean}};
        }
    }
    nlohmann::json j = provenance_json(cfg);
    j["results"] = results;
    const std::string json_path = join_path(dir, "ablation.json");
    write_text_file(json_path, j.dump(2) + "\n");
    written.push_back(json_path);

    if (cfg.format == ReportFormat::svg) {
        std::vector<std::string> sites;
        for (const auto& [site, _] : grouped.begin()->second) {
            sites.push_back(site);
        }
        std::vector<std::string> presets;
        std::vector<std::vector<double>> values;
        for (const auto& [preset, site_map] : grouped) {
            presets.push_back(preset);
            std::vector<double> row;
            for (const std::string& site : sites) {
                const auto& vals = site_map.at(site);
                double mean = 0.0;
                for (double v : vals) {
                    mean += v;
                }
                row.push_back(mean / static_cast<double>(vals.size()));
            }
            values.push_back(std::move(row));
        }
        const std::string svg_path = join_path(dir, "ablation.svg");
        write_text_file(svg_path,
                        grouped_bar_svg("Per-site SQNR by transform", "SQNR [dB]", sites,
                                        presets, values));
        written.push_back(svg_path);
    }
    return written;
}

std::vector<End2EndCell> end2end_cells(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<End2EndCell> cells;
    for (std::uint64_t seed : cfg.seeds) {
        SeedRun run = make_seed_run(cfg, seed);
        for (TransformPreset preset : cfg.presets) {
            apply_preset(run.block, preset, cfg.alpha, cfg.epsilon, run.calib_stats);
            for (QuantSite& site : run.block.sites()) {
                site.enabled = true;
                site.act_cfg = QuantConfig::activations(cfg.bits_act);
                site.w_cfg = QuantConfig::weights_blocked(cfg.bits_weight, cfg.weight_block);
            }
            const Tensor2D out = run.block.run(run.x_img, run.x_txt);
            cells.push_back({to_string(preset), seed, sqnr(run.fp_out, out)});
        }
    }
    std::sort(cells.begin(), cells.end(), [](const End2EndCell& a, const End2EndCell& b) {
        return std::tie(a.preset, a.seed) < std::tie(b.preset, b.seed);
    });
    return cells;
}

std::vector<std::string> run_end2end_toy(const ExperimentConfig& cfg) {
    const std::vector<End2EndCell> cells = end2end_cells(cfg);
    const std::string dir = ensure_output_dir(cfg);
    const std::string hash = cfg.hash();
    std::vector<std::string> written;

    std::ostringstream csv;
    csv << "preset,seed,sqnr_db,config_hash,version\n";
    for (const End2EndCell& c : cells) {
        csv << c.preset << "," << c.seed << "," << format_double(c.sqnr_db) << "," << hash
            << "," << kVersion << "\n";
    }
    const std::string csv_path = join_path(dir, "end2end.csv");
    write_text_file(csv_path, csv.str());
    written.push_back(csv_path);

    std::map<std::string, std::vector<double>> grouped;
    for (const End2EndCell& c : cells) {
        grouped[c.preset].push_back(c.sqnr_db);
    }
    nlohmann::json results;
    for (const auto& [preset, vals] : grouped) {
        double mean = 0.0;
        for (double v : vals) {
            mean += v;
        }
        mean /= static_cast<double>(vals.size());
        results[preset] = {{"per_seed", vals}, {"mean_sqnr_db", mean}};
    }

    // companion data-level study on the bundled four-channel fixture
    const ChannelStudy study = channel_study(four_channel_fixture(), 4096, cfg.seeds.front(),
                                             cfg.presets, cfg.bits_act, cfg.alpha, cfg.epsilon);
    nlohmann::json study_json;
    study_json["whitening_raw"] = study.whitening_raw;
    for (const ChannelStudyRow& row : study.rows) {
        study_json["presets"][to_string(row.preset)] = {{"sqnr_db", row.sqnr_db},
                                                        {"whitening", row.whitening}};
    }

    nlohmann::json j = provenance_json(cfg);
    j["results"] = results;
    j["channel_study"] = study_json;
    const std::string json_path = join_path(dir, "end2end.json");
    write_text_file(json_path, j.dump(2) + "\n");
    written.push_back(json_path);

    if (cfg.format == ReportFormat::svg) {
        std::vector<std::string> presets;
        std::vector<double> means;
        for (const auto& [preset, vals] : grouped) {
            presets.push_back(preset);
            double mean = 0.0;
            for (double v : vals) {
                mean += v;
            }
            means.push_back(mean / static_cast<double>(vals.size()));
        }
        const std::string svg_path = join_path(dir, "end2end.svg");
        write_text_file(svg_path, grouped_bar_svg("End-to-end toy-block SQNR", "SQNR [dB]",
                                                  presets, {"mean over seeds"}, {means}));
        written.push_back(svg_path);
    }
    return written;
}

std::vector<std::string> run_gen(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::string dir = ensure_output_dir(cfg);
    const std::uint64_t seed = cfg.seeds.front();
    const char* ext = cfg.format == ReportFormat::csv ? ".csv" : ".npy";

    const Tensor2D img = gen_synthetic(cfg.effective_channel_spec(), cfg.dims.s,
                                       derive_seed(seed, kSeedImage), cfg.dims.d);
    const Tensor2D txt = gen_synthetic(cfg.effective_txt_spec(), cfg.dims.s_txt,
                                       derive_seed(seed, kSeedText), cfg.dims.d);

    std::vector<std::string> written;
    const std::string img_path = join_path(dir, std::string("synthetic_img") + ext);
    save_tensor(img, img_path);
    written.push_back(img_path);
    const std::string txt_path = join_path(dir, std::string("synthetic_txt") + ext);
    save_tensor(txt, txt_path);
    written.push_back(txt_path);
    return written;
}

std::vector<std::string> run_calibrate(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::string dir = ensure_output_dir(cfg);
    const std::uint64_t seed = cfg.seeds.front();
    const TransformPreset preset = cfg.presets.front();

    const Tensor2D calib = gen_synthetic(cfg.effective_channel_spec(), cfg.calib_s,
                                         derive_seed(seed, kSeedCalibData), cfg.dims.d);
    const LinearLayer layer = make_random_layer("calibration", cfg.dims.d, cfg.dims.m,
                                                derive_seed(seed, kSeedCalibLayer));
    const CalibrationResult result =
        calibrate_alpha(calib, layer, preset, cfg.effective_alpha_grid(), cfg.bits_act);

    const std::string hash = cfg.hash();
    std::vector<std::string> written;

    std::ostringstream csv;
    csv << "preset,alpha,seed,sqnr_db,config_hash,version\n";
    for (const auto& [a, s] : result.table) {
        csv << to_string(preset) << "," << format_double(a) << "," << seed << ","
            << format_double(s) << "," << hash << "," << kVersion << "\n";
    }
    const std::string csv_path = join_path(dir, "calibration.csv");
    write_text_file(csv_path, csv.str());
    written.push_back(csv_path);

    nlohmann::json j = provenance_json(cfg);
    j["preset"] = to_string(preset);
    j["best_alpha"] = result.best_alpha;
    j["table"] = nlohmann::json::array();
    for (const auto& [a, s] : result.table) {
        j["table"].push_back({{"alpha", a}, {"sqnr_db", s}});
    }
    const std::string json_path = join_path(dir, "calibration.json");
    write_text_file(json_path, j.dump(2) + "\n");
    written.push_back(json_path);
    return written;
}

void self_test() {
    const std::size_t d = 16, s = 8, m = 8;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const LinearLayer layer = make_random_layer("selftest", d, m, derive_seed(seed, 1));
        std::vector<ChannelGenSpec> spec = four_channel_fixture();
        const Tensor2D x = gen_synthetic(spec, s, derive_seed(seed, 2), d);
        const Tensor2D baseline = run_baseline(x, layer);
        for (TransformPreset preset : kAllPresets) {
            QuantSite site;
            site.id = "selftest";
            site.layer = layer;
            site.plan = preset_to_plan(preset, channel_absmax(x),
                                       weight_input_absmax(layer.weights), 0.5);
            const Tensor2D out = run_quantized(x, site);
            const double rel = error_report(baseline, out).rel_fro_err;
            if (!(rel <= 1e-9)) {
                throw NumericError(std::string("self_test: transform identity violated for ") +
                                   to_string(preset) + ", relative error " + format_double(rel));
            }
        }
    }
    // orthonormal transform sanity
    PhiloxRng rng(7, 0);
    std::vector<double> v(256);
    for (double& x : v) {
        x = rng.next_normal();
    }
    const std::vector<double> twice = fwht_vector(fwht_vector(v));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (std::fabs(twice[i] - v[i]) > 1e-10) {
            throw NumericError("self_test: transform involution violated");
        }
    }
}

} // namespace prequant
