// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration, derived physical constants and the seeded
// random-stream contract shared by every other module.

#ifndef CFSIM_SCENARIO_HPP
#define CFSIM_SCENARIO_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace cfsim {

inline constexpr double kPi = 3.14159265358979323846;

enum class DlPowerMode { balanced, per_ru };
enum class LosMode { stochastic, always_los, always_nlos };

/// Parameters of the urban-microcell street-canyon pathloss model.
struct UmiParams {
    double carrier_freq_ghz = 3.7;
    double ru_height = 10.0;
    double ue_height = 1.5;
    double shadow_sigma_los_db = 4.0;
    double shadow_sigma_nlos_db = 7.82;
    bool shadowing = true;
    LosMode los_mode = LosMode::stochastic;
};

/// Full description of one simulated scenario. Every field has a key of the
/// same name in the flat config format (see config_entries / apply_config_entry).
struct SimConfig {
    double area_side = 225.0;          // meters; square area, torus topology
    int num_rus = 10;                  // L
    int num_ues = 100;                 // K
    int antennas_per_ru = 64;          // M
    int pilot_dim = 40;                // tau_p
    int coherence_block = 200;         // T, symbols
    double angular_spread = kPi / 8.0; // Delta, radians
    int max_cluster_size = 10;         // Q
    double snr_threshold = 1.0;        // eta
    double noise_dbm = -96.0;          // N0
    int num_layouts = 50;
    int fading_draws_per_layout = 100;
    std::uint64_t master_seed = 1;
    DlPowerMode dl_power_mode = DlPowerMode::balanced;
    double ru_power_dbm = 0.0; // P_ru, only read in per_ru mode
    int lsfd_stat_draws = 500;
    UmiParams umi;

    /// Human-readable problems; empty when the configuration is usable.
    std::vector<std::string> diagnostics() const;
    /// Throws std::invalid_argument carrying the first diagnostic.
    void validate() const;
};

struct DerivedConstants {
    double snr = 0.0;            // P_ue / N0, linear
    double d_ref = 0.0;          // d_L = 2 sqrt(A / (pi L)), meters
    double mean_beta_ref = 0.0;  // mean LSFC at 3 d_L
    double p_ue_dbm = 0.0;       // UE transmit power giving mean_beta_ref * M * snr = 1
};

DerivedConstants derive_constants(const SimConfig& config);

// Flat "key = value" text format. Unknown keys and malformed values throw
// std::invalid_argument naming the key.
std::vector<std::pair<std::string, std::string>> config_entries(const SimConfig& config);
void apply_config_entry(SimConfig& config, const std::string& key, const std::string& value);
SimConfig parse_config_text(const std::string& text, SimConfig base = {});
std::string to_config_text(const SimConfig& config);
std::vector<std::string> config_keys();

std::string to_string(DlPowerMode mode);
std::string to_string(LosMode mode);

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

// ---------------------------------------------------------------------------
// Random streams

enum class StreamPurpose : std::uint32_t {
    placement = 1,
    link_state = 2,   // LOS draw and shadowing
    ue_order = 3,
    fading = 4,
    pilot_noise = 5,
    lsfd_fading = 6,
    lsfd_pilot_noise = 7,
    test = 99,
};

struct StreamId {
    std::uint64_t layout = 0;
    StreamPurpose purpose = StreamPurpose::test;
    std::uint64_t draw = 0;
};

/// A reproducible pseudo-random sequence keyed by (master seed, stream id).
/// Single owner; copy it only when an identical replay is wanted.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, StreamId id);

    double uniform();                       // [0, 1)
    double uniform(double lo, double hi);   // [lo, hi)
    double normal();                        // N(0, 1)
    std::complex<double> complex_normal();  // CN(0, 1)
    std::mt19937_64& engine() { return engine_; }

    std::uint64_t seed() const { return seed_; }
    const StreamId& id() const { return id_; }

private:
    std::uint64_t seed_;
    StreamId id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

RngStream stream_for(std::uint64_t master_seed, StreamId id);

}  // namespace cfsim

#endif
