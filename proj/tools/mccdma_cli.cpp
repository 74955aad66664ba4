#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mccdma/channel.hpp"
#include "mccdma/config.hpp"
#include "mccdma/simulator.hpp"

namespace {

mccdma::SimConfig config_from(const std::string& path) {
    return path.empty() ? mccdma::SimConfig{} : mccdma::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Downlink STBC MC-CDMA link-level simulator"};
    app.require_subcommand(1);

    auto* simulate = app.add_subcommand("simulate", "Run a BER/FER sweep and write CSV");
    std::string sim_config;
    std::string ebn0_text;
    std::uint64_t seed = 0;
    std::string out_path;
    int workers = 1;
    bool quiet = false;
    simulate->add_option("--config", sim_config, "Configuration file (defaults apply when omitted)");
    auto* ebn0_opt = simulate->add_option("--ebn0", ebn0_text, "Comma-separated Eb/N0 points in dB");
    auto* seed_opt = simulate->add_option("--seed", seed, "Master seed");
    simulate->add_option("--out", out_path, "CSV output path (stdout when omitted)");
    simulate->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    simulate->add_flag("--quiet", quiet, "Suppress the summary on stderr");

    auto* validate = app.add_subcommand("validate-channel", "Estimate antenna correlation of a channel profile");
    std::string profile_path;
    double spacing = 0.5;
    std::string side = "bs";
    int realizations = 2000;
    std::uint64_t channel_seed = 1;
    validate->add_option("--profile", profile_path, "Power delay profile file (built-in BRAN E when omitted)");
    validate->add_option("--spacing", spacing, "Element spacing in wavelengths");
    validate->add_option("--side", side, "Array side: bs or ms");
    validate->add_option("--realizations", realizations, "Channel draws")->check(CLI::PositiveNumber);
    validate->add_option("--seed", channel_seed, "Seed");

    auto* info = app.add_subcommand("info", "Print derived rates of a configuration");
    std::string info_config;
    info->add_option("--config", info_config, "Configuration file (defaults apply when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            mccdma::SimConfig cfg = config_from(sim_config);
            if (ebn0_opt->count()) cfg.ebn0_list = mccdma::parse_double_list(ebn0_text);
            if (seed_opt->count()) cfg.master_seed = seed;
            cfg.validate();
            mccdma::SweepOptions options;
            options.workers = workers;
            if (!quiet) {
                options.on_point = [&](const mccdma::PointResult& p) {
                    std::cerr << mccdma::report_summary(cfg, {p});
                };
            }
            const auto points = mccdma::sweep(cfg, options);
            if (out_path.empty())
                std::cout << mccdma::report_csv(cfg, points);
            else
                mccdma::write_csv(out_path, cfg, points);
        } else if (validate->parsed()) {
            const auto profile = profile_path.empty() ? mccdma::bran_e_profile() : mccdma::load_profile(profile_path);
            const mccdma::SpatialConfig spatial{};
            const auto array_side = mccdma::parse_array_side(side);
            const double rho =
                mccdma::estimate_spatial_correlation(profile, spatial, spacing, array_side, realizations, channel_seed);
            std::printf("profile            %s (%zu taps)\n", profile.source.c_str(), profile.taps.size());
            std::printf("rms delay spread   %.4f us\n", profile.rms_delay_spread_s() * 1e6);
            std::printf("side               %s\n", side.c_str());
            std::printf("spacing            %.4g lambda\n", spacing);
            std::printf("correlation        %.4f\n", rho);
        } else if (info->parsed()) {
            std::cout << mccdma::format_info(config_from(info_config));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
