// SPDX-License-Identifier: Apache-2.0

#include "cfsim/scenario.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "cfsim/geometry.hpp"

namespace cfsim {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': not a number: '" + value + "'");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    long long v = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw std::invalid_argument("config key '" + key + "': not an integer: '" + value + "'");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw std::invalid_argument("config key '" + key + "': not an unsigned integer: '" + value + "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    throw std::invalid_argument("config key '" + key + "': not a boolean: '" + value + "'");
}

int parse_count(const std::string& key, const std::string& value) {
    const auto v = parse_int(key, value);
    if (v < 0 || v > 1'000'000'000) throw std::invalid_argument("config key '" + key + "': out of range");
    return static_cast<int>(v);
}

struct Field {
    const char* key;
    std::function<std::string(const SimConfig&)> get;
    std::function<void(SimConfig&, const std::string&, const std::string&)> set;
};

#define CFSIM_DOUBLE_FIELD(name, member)                                                             \
    Field {                                                                                          \
        name, [](const SimConfig& c) { return format_double(c.member); },                            \
            [](SimConfig& c, const std::string& k, const std::string& v) { c.member = parse_double(k, v); } \
    }
#define CFSIM_COUNT_FIELD(name, member)                                                              \
    Field {                                                                                          \
        name, [](const SimConfig& c) { return std::to_string(c.member); },                           \
            [](SimConfig& c, const std::string& k, const std::string& v) { c.member = parse_count(k, v); } \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        CFSIM_DOUBLE_FIELD("area_side", area_side),
        CFSIM_COUNT_FIELD("num_rus", num_rus),
        CFSIM_COUNT_FIELD("num_ues", num_ues),
        CFSIM_COUNT_FIELD("antennas_per_ru", antennas_per_ru),
        CFSIM_COUNT_FIELD("pilot_dim", pilot_dim),
        CFSIM_COUNT_FIELD("coherence_block", coherence_block),
        CFSIM_DOUBLE_FIELD("angular_spread", angular_spread),
        CFSIM_COUNT_FIELD("max_cluster_size", max_cluster_size),
        CFSIM_DOUBLE_FIELD("snr_threshold", snr_threshold),
        CFSIM_DOUBLE_FIELD("noise_dbm", noise_dbm),
        CFSIM_DOUBLE_FIELD("carrier_freq_ghz", umi.carrier_freq_ghz),
        CFSIM_COUNT_FIELD("num_layouts", num_layouts),
        CFSIM_COUNT_FIELD("fading_draws_per_layout", fading_draws_per_layout),
        Field{"master_seed", [](const SimConfig& c) { return std::to_string(c.master_seed); },
              [](SimConfig& c, const std::string& k, const std::string& v) { c.master_seed = parse_u64(k, v); }},
        Field{"dl_power_mode", [](const SimConfig& c) { return to_string(c.dl_power_mode); },
              [](SimConfig& c, const std::string& k, const std::string& v) {
                  if (v == "balanced") c.dl_power_mode = DlPowerMode::balanced;
                  else if (v == "per_ru") c.dl_power_mode = DlPowerMode::per_ru;
                  else throw std::invalid_argument("config key '" + k + "': expected balanced|per_ru, got '" + v + "'");
              }},
        CFSIM_DOUBLE_FIELD("ru_power_dbm", ru_power_dbm),
        CFSIM_COUNT_FIELD("lsfd_stat_draws", lsfd_stat_draws),
        CFSIM_DOUBLE_FIELD("ru_height", umi.ru_height),
        CFSIM_DOUBLE_FIELD("ue_height", umi.ue_height),
        CFSIM_DOUBLE_FIELD("shadow_sigma_los_db", umi.shadow_sigma_los_db),
        CFSIM_DOUBLE_FIELD("shadow_sigma_nlos_db", umi.shadow_sigma_nlos_db),
        Field{"shadowing", [](const SimConfig& c) { return std::string(c.umi.shadowing ? "true" : "false"); },
              [](SimConfig& c, const std::string& k, const std::string& v) { c.umi.shadowing = parse_bool(k, v); }},
        Field{"los_mode", [](const SimConfig& c) { return to_string(c.umi.los_mode); },
              [](SimConfig& c, const std::string& k, const std::string& v) {
                  if (v == "stochastic") c.umi.los_mode = LosMode::stochastic;
                  else if (v == "los") c.umi.los_mode = LosMode::always_los;
                  else if (v == "nlos") c.umi.los_mode = LosMode::always_nlos;
                  else throw std::invalid_argument("config key '" + k + "': expected stochastic|los|nlos, got '" + v + "'");
              }},
    };
    return table;
}

#undef CFSIM_DOUBLE_FIELD
#undef CFSIM_COUNT_FIELD

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::vector<std::string> SimConfig::diagnostics() const {
    std::vector<std::string> out;
    if (!(area_side > 0.0)) out.emplace_back("area_side must be positive");
    if (num_rus < 1) out.emplace_back("num_rus must be at least 1");
    if (num_ues < 1) out.emplace_back("num_ues must be at least 1");
    if (antennas_per_ru < 1) out.emplace_back("antennas_per_ru must be at least 1");
    if (pilot_dim < 1) out.emplace_back("pilot_dim must be at least 1");
    if (coherence_block < 1) out.emplace_back("coherence_block must be at least 1");
    if (pilot_dim > coherence_block) out.emplace_back("pilot dim exceeds coherence block");
    if (!(angular_spread > 0.0 && angular_spread <= 2.0 * kPi + 1e-12)) {
        out.emplace_back("angular_spread must lie in (0, 2 pi]");
    }
    if (max_cluster_size < 1) out.emplace_back("max_cluster_size must be at least 1");
    if (!(snr_threshold >= 0.0)) out.emplace_back("snr_threshold must be non-negative");
    if (!(umi.carrier_freq_ghz > 0.0)) out.emplace_back("carrier_freq_ghz must be positive");
    if (num_layouts < 1) out.emplace_back("num_layouts must be at least 1");
    if (fading_draws_per_layout < 1) out.emplace_back("fading_draws_per_layout must be at least 1");
    if (lsfd_stat_draws < 1) out.emplace_back("lsfd_stat_draws must be at least 1");
    if (!(umi.ru_height > 0.0) || !(umi.ue_height > 0.0)) out.emplace_back("antenna heights must be positive");
    if (umi.ru_height == umi.ue_height) out.emplace_back("ru_height and ue_height must differ (zero 3-D distance)");
    if (!(umi.shadow_sigma_los_db >= 0.0) || !(umi.shadow_sigma_nlos_db >= 0.0)) {
        out.emplace_back("shadowing sigmas must be non-negative");
    }
    return out;
}

void SimConfig::validate() const {
    const auto d = diagnostics();
    if (!d.empty()) throw std::invalid_argument(d.front());
}

DerivedConstants derive_constants(const SimConfig& config) {
    if (config.num_rus < 1) throw std::invalid_argument("derive_constants: num_rus must be positive");
    if (config.antennas_per_ru < 1) throw std::invalid_argument("derive_constants: antennas_per_ru must be positive");
    if (!(config.area_side > 0.0)) throw std::invalid_argument("derive_constants: area_side must be positive");

    DerivedConstants c;
    const double area = config.area_side * config.area_side;
    c.d_ref = 2.0 * std::sqrt(area / (kPi * config.num_rus));
    c.mean_beta_ref = expected_lsfc(3.0 * c.d_ref, config.umi);
    c.snr = 1.0 / (c.mean_beta_ref * config.antennas_per_ru);
    c.p_ue_dbm = config.noise_dbm + 10.0 * std::log10(c.snr);
    return c;
}

std::vector<std::pair<std::string, std::string>> config_entries(const SimConfig& config) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : fields()) out.emplace_back(f.key, f.get(config));
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.emplace_back(f.key);
    return out;
}

void apply_config_entry(SimConfig& config, const std::string& key, const std::string& value) {
    for (const auto& f : fields()) {
        if (key == f.key) {
            f.set(config, key, trim(value));
            return;
        }
    }
    throw std::invalid_argument("unknown config key '" + key + "'");
}

SimConfig parse_config_text(const std::string& text, SimConfig base) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        }
        apply_config_entry(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

std::string to_config_text(const SimConfig& config) {
    std::string out;
    for (const auto& [k, v] : config_entries(config)) out += k + " = " + v + "\n";
    return out;
}

std::string to_string(DlPowerMode mode) { return mode == DlPowerMode::balanced ? "balanced" : "per_ru"; }

std::string to_string(LosMode mode) {
    switch (mode) {
        case LosMode::stochastic: return "stochastic";
        case LosMode::always_los: return "los";
        case LosMode::always_nlos: return "nlos";
    }
    return "stochastic";
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// ---------------------------------------------------------------------------

RngStream::RngStream(std::uint64_t master_seed, StreamId id) : seed_(master_seed), id_(id) {
    std::uint64_t h = splitmix64(master_seed);
    h = splitmix64(h ^ id.layout);
    h = splitmix64(h ^ static_cast<std::uint64_t>(id.purpose));
    h = splitmix64(h ^ id.draw);
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                      static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)};
    engine_.seed(seq);
}

double RngStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::normal() { return normal_(engine_); }

std::complex<double> RngStream::complex_normal() {
    constexpr double s = 0.70710678118654752440;
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
}

RngStream stream_for(std::uint64_t master_seed, StreamId id) { return RngStream(master_seed, id); }

}  // namespace cfsim
