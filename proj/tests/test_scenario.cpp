// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <set>

#include "cfsim/geometry.hpp"
#include "cfsim/scenario.hpp"

using namespace cfsim;

TEST_CASE("reference distance and snr normalization") {
    SimConfig c;
    c.num_rus = 10;
    const auto d = derive_constants(c);
    // 2 sqrt(225^2 / (10 pi)) evaluated by hand
    CHECK(d.d_ref == doctest::Approx(80.2855852268747).epsilon(1e-12));
    CHECK(std::abs(d.mean_beta_ref * c.antennas_per_ru * d.snr - 1.0) <= 1e-12);
    CHECK(d.mean_beta_ref == doctest::Approx(expected_lsfc(3.0 * d.d_ref, c.umi)).epsilon(1e-15));
    CHECK(d.p_ue_dbm == doctest::Approx(c.noise_dbm + 10.0 * std::log10(d.snr)).epsilon(1e-12));

    SimConfig c40 = c;
    c40.num_rus = 40;
    CHECK(derive_constants(c40).d_ref == doctest::Approx(0.5 * d.d_ref).epsilon(1e-12));

    for (int M : {1, 16, 64}) {
        for (int L : {1, 10, 40}) {
            SimConfig x = c;
            x.num_rus = L;
            x.antennas_per_ru = M;
            const auto dx = derive_constants(x);
            CHECK(std::abs(dx.mean_beta_ref * M * dx.snr - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("larger area needs more UE power") {
    SimConfig a;
    SimConfig b;
    b.area_side = 400.0;
    const auto da = derive_constants(a);
    const auto db = derive_constants(b);
    CHECK(db.d_ref > da.d_ref);
    CHECK(db.p_ue_dbm > da.p_ue_dbm);
}

TEST_CASE("derive_constants rejects zero RUs") {
    SimConfig c;
    c.num_rus = 0;
    CHECK_THROWS_AS(derive_constants(c), std::invalid_argument);
}

TEST_CASE("config diagnostics") {
    SimConfig c;
    CHECK(c.diagnostics().empty());
    c.pilot_dim = 300;
    const auto d = c.diagnostics();
    REQUIRE(d.size() == 1);
    CHECK(d.front() == "pilot dim exceeds coherence block");
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);

    SimConfig bad;
    bad.angular_spread = 7.0;
    bad.max_cluster_size = 0;
    CHECK(bad.diagnostics().size() == 2);
}

TEST_CASE("config text round trip") {
    SimConfig c;
    c.num_rus = 20;
    c.antennas_per_ru = 32;
    c.angular_spread = 0.123456789012345;
    c.master_seed = 0xfedcba9876543210ULL;
    c.dl_power_mode = DlPowerMode::per_ru;
    c.umi.los_mode = LosMode::always_nlos;
    c.umi.shadowing = false;
    const std::string text = to_config_text(c);
    const SimConfig back = parse_config_text(text);
    CHECK(to_config_text(back) == text);
    CHECK(back.angular_spread == c.angular_spread);
    CHECK(back.master_seed == c.master_seed);
    CHECK(back.umi.los_mode == LosMode::always_nlos);
    CHECK_FALSE(back.umi.shadowing);
}

TEST_CASE("config parser") {
    const auto c = parse_config_text("# comment\n  num_ues = 42  # trailing\n\npilot_dim=8\n");
    CHECK(c.num_ues == 42);
    CHECK(c.pilot_dim == 8);
    CHECK_THROWS_AS(parse_config_text("bogus = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("num_ues = many\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("num_ues 3\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("dl_power_mode = sometimes\n"), std::invalid_argument);
    std::set<std::string> keys;
    for (const auto& k : config_keys()) CHECK(keys.insert(k).second);
    CHECK(keys.count("num_rus") == 1);
    CHECK(keys.count("carrier_freq_ghz") == 1);
}

TEST_CASE("dbm conversions") {
    CHECK(dbm_to_mw(0.0) == doctest::Approx(1.0));
    CHECK(dbm_to_mw(-30.0) == doctest::Approx(1e-3));
    CHECK(mw_to_dbm(dbm_to_mw(-96.0)) == doctest::Approx(-96.0));
}

TEST_CASE("random streams are reproducible and distinct") {
    auto a = stream_for(1, {3, StreamPurpose::fading, 5});
    auto b = stream_for(1, {3, StreamPurpose::fading, 5});
    auto c = stream_for(1, {3, StreamPurpose::fading, 6});
    auto d = stream_for(2, {3, StreamPurpose::fading, 5});
    auto e = stream_for(1, {3, StreamPurpose::pilot_noise, 5});
    int diff_c = 0, diff_d = 0, diff_e = 0;
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform();
        CHECK(x == b.uniform());
        diff_c += x != c.uniform();
        diff_d += x != d.uniform();
        diff_e += x != e.uniform();
    }
    CHECK(diff_c == 100);
    CHECK(diff_d == 100);
    CHECK(diff_e == 100);
}

TEST_CASE("random stream moments") {
    auto rng = stream_for(11, {0, StreamPurpose::test, 0});
    const int n = 100000;
    double su = 0.0, sn = 0.0, sn2 = 0.0, sc2 = 0.0;
    double umin = 1.0, umax = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        umin = std::min(umin, u);
        umax = std::max(umax, u);
        su += u;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
        sc2 += std::norm(rng.complex_normal());
    }
    CHECK(umin >= 0.0);
    CHECK(umax < 1.0);
    // 3 standard errors
    CHECK(std::abs(su / n - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(sn / n) < 3.0 / std::sqrt(n));
    CHECK(std::abs(sn2 / n - 1.0) < 3.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(sc2 / n - 1.0) < 3.0 * std::sqrt(1.0 / n));
}
