#include <doctest.h>

#include <filesystem>

#include "prequant/config.hpp"

using namespace prequant;

TEST_CASE("default config validates and round-trips") {
    ExperimentConfig cfg;
    cfg.validate();
    const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
    CHECK(back == cfg);
    CHECK(back.hash() == cfg.hash());
}

TEST_CASE("non-default fields survive the round trip") {
    ExperimentConfig cfg;
    cfg.seeds = {9, 8, 7};
    cfg.dims = {64, 32, 16, 2, 24};
    cfg.bits_act = 6;
    cfg.bits_weight = 3;
    cfg.weight_block = 17;
    cfg.presets = {TransformPreset::hadanorm, TransformPreset::none};
    cfg.alpha = 0.3;
    cfg.alpha_grid = {0.0, 0.25, 0.5};
    cfg.epsilon = 1e-4;
    cfg.channel_spec = four_channel_fixture();
    cfg.txt_channel_spec = default_text_spec();
    cfg.sites = {{"QKV", true, true}, {"TX", false, false}};
    cfg.calib_s = 128;
    cfg.output_dir = "elsewhere";
    cfg.format = ReportFormat::svg;
    cfg.validate();

    const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
    CHECK(back == cfg);
}

TEST_CASE("config file round trip") {
    ExperimentConfig cfg;
    cfg.seeds = {123};
    cfg.alpha = 0.7;
    const std::string path =
        (std::filesystem::temp_directory_path() / "prequant_cfg.json").string();
    cfg.save_json_file(path);
    const ExperimentConfig back = ExperimentConfig::from_json_file(path);
    CHECK(back == cfg);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(ExperimentConfig::from_json_file("/nonexistent/prequant.json"), IoError);
}

TEST_CASE("hash is sensitive to every field") {
    ExperimentConfig a;
    ExperimentConfig b;
    CHECK(a.hash() == b.hash());
    b.alpha = 0.25;
    CHECK(a.hash() != b.hash());
    ExperimentConfig c;
    c.seeds = {2, 3, 4, 5, 6};
    CHECK(a.hash() != c.hash());
}

TEST_CASE("validation rejects out-of-contract configs") {
    ExperimentConfig cfg;

    cfg.seeds.clear();
    CHECK_THROWS_AS(cfg.validate(), ParamError);
    cfg = {};

    cfg.dims.d = 0;
    CHECK_THROWS_AS(cfg.validate(), ParamError);
    cfg = {};

    cfg.bits_act = 1;
    CHECK_THROWS_AS(cfg.validate(), ParamError);
    cfg = {};

    cfg.alpha = 2.0;
    CHECK_THROWS_AS(cfg.validate(), ParamError);
    cfg = {};

    cfg.alpha_grid = {0.5, 1.5};
    CHECK_THROWS_AS(cfg.validate(), ParamError);
    cfg = {};

    // hadamard preset with non-power-of-two channel count
    cfg.dims.d = 48;
    CHECK_THROWS_AS(cfg.validate(), ParamError);
    cfg.presets = {TransformPreset::none, TransformPreset::dyncenter};
    cfg.dims.m = 48;
    CHECK_NOTHROW(cfg.validate()); // fine without hadamard
    cfg = {};

    // ffn_mult breaking the power of two
    cfg.dims.ffn_mult = 3;
    CHECK_THROWS_AS(cfg.validate(), ParamError);
    cfg = {};

    cfg.epsilon = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ParamError);
    cfg = {};

    cfg.presets.clear();
    CHECK_THROWS_AS(cfg.validate(), ParamError);
}

TEST_CASE("malformed json maps to ParamError") {
    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json{{"presets", {"bogus"}}}),
                    ParamError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json{{"bits_act", 99}}), ParamError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json{{"seeds", "nope"}}), ParamError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json{{"format", "pdf"}}), ParamError);
}

TEST_CASE("effective defaults materialize") {
    ExperimentConfig cfg;
    CHECK(cfg.effective_channel_spec().size() == default_image_spec().size());
    cfg.dims.d = 4;
    CHECK(cfg.effective_channel_spec().size() == 4);
    CHECK(cfg.effective_channel_spec()[0].mean == -2.0);
    CHECK(cfg.effective_txt_spec().size() == default_text_spec().size());
    CHECK(cfg.effective_sites().size() == 5);
    CHECK(cfg.effective_alpha_grid().size() == 11);
    CHECK(cfg.effective_alpha_grid().front() == 0.0);
    CHECK(cfg.effective_alpha_grid().back() == doctest::Approx(1.0));
}
