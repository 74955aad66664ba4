#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>

#include "mccdma/config.hpp"

using namespace mccdma;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "t.cfg");
    } catch (const InvalidParameter& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("defaults describe the outdoor system") {
    const SimConfig c;
    c.validate();
    CHECK(c.chip_mapping == MappingScheme::k1Db);
    CHECK(c.detector == Detector::kMmse);
    CHECK(c.lc == 32);
    CHECK(c.num_users() == 32);
    CHECK(c.nt == 2);
    CHECK(c.nr == 2);
    CHECK(c.ofdm.fft_size == 1024);
    CHECK(c.ofdm.used_carriers == 736);
    CHECK(c.ofdm.guard_samples == 216);
    CHECK(c.frame_symbols == 30);
    CHECK(c.bs_spacing_lambda == 10.0);
    CHECK(c.ms_spacing_lambda == 0.5);
    CHECK(c.modulation == Modulation::kQpsk);
    CHECK(c.coding == Coding::kNone);
    CHECK(c.coding_rate() == 1.0);
    CHECK(c.effective_spread_time() == 1);
    CHECK(c.spatial().velocity_mps == doctest::Approx(60.0 / 3.6));
    CHECK(c.spatial().nt == 2);
}

TEST_CASE("render and parse round trip") {
    SimConfig c;
    c.chip_mapping = MappingScheme::k2Da;
    c.spread_time = 4;
    c.users = 5;
    c.detector = Detector::kZf;
    c.gamma_mode = parse_gamma_mode("fixed:12.5");
    c.nt = 1;
    c.nr = 2;
    c.velocity_kmh = 3.3;
    c.modulation = Modulation::kQam16;
    c.coding = Coding::kTurboR12;
    c.log_map_correction = true;
    c.ebn0_list = {-1.5, 0.1, 7};
    c.master_seed = 18446744073709551615ull;
    c.channel_model = ChannelModel::kFlatRayleigh;
    const std::string text = render_config(c);
    const SimConfig back = parse_config(text);
    CHECK(render_config(back) == text);
    CHECK(back.ebn0_list == c.ebn0_list);
    CHECK(back.master_seed == c.master_seed);
    CHECK(back.velocity_kmh == c.velocity_kmh);
    CHECK(back.gamma_mode.fixed_value == 12.5);
    CHECK_FALSE(back.gamma_mode.genie);
    CHECK(back.effective_spread_time() == 4);
    CHECK(config_entries(c).size() == config_entries(SimConfig{}).size());
}

TEST_CASE("syntax: comments, blank lines, colon separator, quoting, list brackets") {
    const SimConfig c = parse_config(
        "# header\n"
        "\n"
        "lc = 16   # spreading length\n"
        "users: 4\n"
        "ebn0_list = [0, 5 ,10]\n"
        "channel_profile = \"builtin:bran_e\"\n"
        "log_map_correction = yes\n");
    CHECK(c.lc == 16);
    CHECK(c.users == 4);
    CHECK(c.ebn0_list == std::vector<double>{0, 5, 10});
    CHECK(c.channel_profile == "builtin:bran_e");
    CHECK(c.log_map_correction);
    CHECK(parse_double_list("1,2.5") == std::vector<double>{1, 2.5});
}

TEST_CASE("errors name the source line") {
    CHECK(error_of("lc = 32\nfoo = 1\n").find("t.cfg:2") != std::string::npos);
    CHECK(error_of("foo = 1\n").find("unknown config key 'foo'") != std::string::npos);
    CHECK(error_of("lc 32\n").find("t.cfg:1") != std::string::npos);
    CHECK(error_of("lc = 3x\n").find("lc") != std::string::npos);
}

TEST_CASE("bad values are rejected") {
    for (const char* text : {
             "lc = 12\n",                     // not a power of two
             "lc = 0\n",
             "users = 33\n",                  // more users than codes
             "users = -1\n",
             "nt = 3\n",
             "nr = 0\n",
             "detector = ml\n",
             "chip_mapping = 3D\n",
             "modulation = 8psk\n",
             "coding = ldpc\n",
             "channel_model = rician\n",
             "gamma_mode = fixed:0\n",
             "gamma_mode = fixed:abc\n",
             "gamma_mode = oracle\n",
             "frame_symbols = 29\n",          // Alamouti pairs
             "frame_symbols = 0\n",
             "chip_mapping = 2Da\nspread_time = 3\n",
             "chip_mapping = 2Da\nspread_time = 64\n",
             "turbo_iterations = 0\n",
             "max_frames = 0\n",
             "target_bit_errors = 0\n",
             "used_carriers = 2000\n",
             "guard_samples = -1\n",
             "velocity_kmh = nan\n",
             "ebn0_list = 1, x\n",
             "log_map_correction = maybe\n",
             "master_seed = -4\n",
         }) {
        CAPTURE(text);
        CHECK_THROWS_AS(parse_config(text), InvalidParameter);
    }
}

TEST_CASE("validate on a mutated configuration") {
    SimConfig c;
    c.nt = 4;
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
    c = SimConfig{};
    c.num_subrays = 0;
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
    c = SimConfig{};
    c.ms_spacing_lambda = -0.5;
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
}

TEST_CASE("load_config resolves profiles next to the config file") {
    const auto dir = std::filesystem::temp_directory_path() / "mccdma_test_config";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "two.profile") << "0 0\n500 -3\n";
        std::ofstream(dir / "run.cfg") << "channel_profile = two.profile\nnt = 1\n";
    }
    const SimConfig c = load_config(dir / "run.cfg");
    CHECK(std::filesystem::path(c.channel_profile) == (dir / "two.profile").lexically_normal());
    const auto p = resolve_profile(c);
    CHECK(p.taps.size() == 2);
    CHECK(resolve_profile(SimConfig{}).taps.size() == 17);
    CHECK_THROWS_AS(load_config(dir / "missing.cfg"), InvalidParameter);
    std::filesystem::remove_all(dir);
}
