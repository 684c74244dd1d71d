// prequant: pre-quantization transform harness.
//
// Subcommands: gen, calibrate, ablate, bench, fwht-bench, selftest.
// Exit codes: 0 success, 2 config error, 3 I/O error, 4 numerical-contract
// violation.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prequant/config.hpp"
#include "prequant/errors.hpp"
#include "prequant/fwht.hpp"
#include "prequant/harness.hpp"
#include "prequant/rng.hpp"
#include "prequant/version.hpp"

namespace {

using namespace prequant;

struct FlagOverrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> bits_act;
    std::optional<int> bits_weight;
    std::optional<std::size_t> weight_block;
    std::optional<std::string> preset;
    std::optional<double> alpha;
    std::optional<std::string> alpha_grid;
    std::optional<std::string> out;
    std::optional<std::string> format;
};

void add_common_flags(CLI::App* sub, FlagOverrides& flags) {
    sub->add_option("--config", flags.config_path, "Config file (JSON)");
    sub->add_option("--seed", flags.seed, "Replace the seed list with this single seed");
    sub->add_option("--bits-act", flags.bits_act, "Activation bit width [2,8]");
    sub->add_option("--bits-weight", flags.bits_weight, "Weight bit width [2,8]");
    sub->add_option("--weight-block", flags.weight_block, "Weight quantization block size");
    sub->add_option("--preset", flags.preset,
                    "Transform preset: none|smoothquant|quarot|sdcb|dyncenter|hadanorm");
    sub->add_option("--alpha", flags.alpha, "Migration strength in [0,1]");
    sub->add_option("--alpha-grid", flags.alpha_grid, "Comma-separated alpha sweep values");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--format", flags.format, "Report format: csv|json|svg");
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            grid.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ParamError("--alpha-grid: unparseable value '" + item + "'");
        }
    }
    if (grid.empty()) {
        throw ParamError("--alpha-grid: empty grid");
    }
    return grid;
}

ExperimentConfig build_config(const FlagOverrides& flags) {
    ExperimentConfig cfg = flags.config_path.empty()
                               ? ExperimentConfig{}
                               : ExperimentConfig::from_json_file(flags.config_path);
    if (flags.seed) {
        cfg.seeds = {*flags.seed};
    }
    if (flags.bits_act) {
        cfg.bits_act = *flags.bits_act;
    }
    if (flags.bits_weight) {
        cfg.bits_weight = *flags.bits_weight;
    }
    if (flags.weight_block) {
        cfg.weight_block = *flags.weight_block;
    }
    if (flags.preset) {
        cfg.presets = {preset_from_string(*flags.preset)};
    }
    if (flags.alpha) {
        cfg.alpha = *flags.alpha;
    }
    if (flags.alpha_grid) {
        cfg.alpha_grid = parse_grid(*flags.alpha_grid);
    }
    if (flags.out) {
        cfg.output_dir = *flags.out;
    }
    if (flags.format) {
        cfg.format = report_format_from_string(*flags.format);
    }
    cfg.validate();
    return cfg;
}

void print_written(const std::vector<std::string>& paths) {
    for (const std::string& p : paths) {
        std::cout << "wrote " << p << "\n";
    }
}

int run_fwht_bench(std::size_t rows, std::size_t dim, int reps) {
    if (!is_power_of_two(dim)) {
        throw ParamError("fwht-bench: dim must be a power of two");
    }
    Tensor2D x(rows, dim);
    PhiloxRng rng(1, 0);
    for (double& v : x.data()) {
        v = rng.next_normal();
    }
    // warm-up, also keeps the result observable
    double sink = fwht_rows(x)(0, 0);

    double best_ms = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        const Tensor2D y = fwht_rows(x);
        const auto t1 = std::chrono::steady_clock::now();
        sink += y(rows / 2, dim / 2);
        best_ms = std::min(best_ms,
                           std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    const double elems = static_cast<double>(rows) * static_cast<double>(dim);
    std::printf("fwht_rows %zux%zu: best %.2f ms, %.1f Melem/s (sink %.3g)\n", rows, dim,
                best_ms, elems / best_ms / 1e3, sink);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"prequant: mean-centered pre-quantization transform harness"};
    app.set_version_flag("--version", std::string("prequant ") + kVersion);
    app.require_subcommand(1);

    FlagOverrides flags;
    CLI::App* gen = app.add_subcommand("gen", "Write synthetic calibration/eval tensors");
    CLI::App* calibrate = app.add_subcommand("calibrate", "Sweep the migration strength alpha");
    CLI::App* ablate = app.add_subcommand("ablate", "Per-site activation-quantizer ablation");
    CLI::App* bench = app.add_subcommand("bench", "End-to-end toy-block preset comparison");
    for (CLI::App* sub : {gen, calibrate, ablate, bench}) {
        add_common_flags(sub, flags);
    }

    CLI::App* fwht_bench = app.add_subcommand("fwht-bench", "Transform kernel throughput");
    std::size_t fb_rows = 1024, fb_dim = 4096;
    int fb_reps = 5;
    fwht_bench->add_option("--rows", fb_rows, "Tensor rows");
    fwht_bench->add_option("--dim", fb_dim, "Channel count (power of two)");
    fwht_bench->add_option("--reps", fb_reps, "Timing repetitions");

    CLI::App* selftest =
        app.add_subcommand("selftest", "Verify the exact transform identities");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (fwht_bench->parsed()) {
            return run_fwht_bench(fb_rows, fb_dim, fb_reps);
        }
        if (selftest->parsed()) {
            self_test();
            std::cout << "selftest: all transform identities hold\n";
            return 0;
        }
        const ExperimentConfig cfg = build_config(flags);
        if (gen->parsed()) {
            print_written(run_gen(cfg));
        } else if (calibrate->parsed()) {
            print_written(run_calibrate(cfg));
        } else if (ablate->parsed()) {
            print_written(run_ablation(cfg));
        } else if (bench->parsed()) {
            print_written(run_end2end_toy(cfg));
        }
        return 0;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numerical contract violation: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
}
