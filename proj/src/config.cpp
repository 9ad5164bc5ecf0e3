#include "gazehmm/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <variant>

namespace gazehmm {

namespace {

// Wrapped so the variant stays well-formed where uint64_t and size_t coincide.
struct Seed {
    std::uint64_t* p;
};

using Slot = std::variant<double*, std::size_t*, bool*, Seed>;

std::map<std::string, Slot, std::less<>> slots(Config& c) {
    auto& h = c.hhmm;
    auto& t = c.thresholds;
    auto& m = c.hmm3;
    return {
        {"hhmm.epochs1", &h.epochs1},
        {"hhmm.epochs2", &h.epochs2},
        {"hhmm.init1.low_pct", &h.init1.low_pct},
        {"hhmm.init1.high_pct", &h.init1.high_pct},
        {"hhmm.init1.stay", &h.init1.stay},
        {"hhmm.init2.low_pct", &h.init2.low_pct},
        {"hhmm.init2.high_pct", &h.init2.high_pct},
        {"hhmm.init2.stay", &h.init2.stay},
        {"hhmm.finetune_t", &h.finetune_t},
        {"hhmm.finetune_high", &h.finetune_high},
        {"hhmm.fixation_speed_ceiling", &h.fixation_speed_ceiling},
        {"hhmm.finetune_low", &h.finetune_low},
        {"hhmm.window_ms", &h.window_ms},
        {"hhmm.variance_floor", &h.variance_floor},
        {"merge.gap_ms", &h.merge.gap_ms},
        {"merge.dist_deg", &h.merge.dist_deg},
        {"merge.min_fixation_ms", &h.merge.min_fixation_ms},
        {"merge.min_pursuit_ms", &h.merge.min_pursuit_ms},
        {"merge.min_saccade_ms", &h.merge.min_saccade_ms},
        {"ivvt.v_high", &t.v_high},
        {"ivvt.v_low", &t.v_low},
        {"ivt.v_sac", &t.v_sac},
        {"ivdt.dispersion_deg", &t.dispersion_deg},
        {"ivdt.window_ms", &t.window_ms},
        {"ivmp.window_ms", &t.direction_window_ms},
        {"ivmp.similarity_cut", &t.similarity_cut},
        {"hmm3.epochs", &m.epochs},
        {"hmm3.low_pct", &m.low_pct},
        {"hmm3.mid_pct", &m.mid_pct},
        {"hmm3.high_pct", &m.high_pct},
        {"hmm3.stay", &m.stay},
        {"hmm3.variance_floor", &m.variance_floor},
        {"metrics.fqns_tol_fraction", &c.metrics.fqns_tol_fraction},
        {"metrics.fqns_tol_min_deg", &c.metrics.fqns_tol_min_deg},
        {"metrics.sqns_response_ms", &c.metrics.sqns_response_ms},
        {"features.k", &c.kmeans_k},
        {"seed", Seed{&c.seed}},
    };
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
    throw GazeError(ErrorCode::InvalidConfig, "bad value '" + std::string(value) + "' for " + std::string(key));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) bad_value(key, value);
    return out;
}

std::string format_double(double v) {
    // shortest form that reads back exactly
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

void set_config_value(Config& cfg, std::string_view key, std::string_view value) {
    auto table = slots(cfg);
    const auto it = table.find(key);
    if (it == table.end()) throw GazeError(ErrorCode::InvalidConfig, "unknown config key '" + std::string(key) + "'");
    value = trim(value);
    auto unsigned_value = [&]<typename T>(T* p) {
        if (!value.empty() && value.front() == '-') bad_value(key, value);
        *p = parse_number<T>(key, value);
    };
    std::visit(
        [&](auto slot) {
            using S = decltype(slot);
            if constexpr (std::is_same_v<S, Seed>) {
                unsigned_value(slot.p);
            } else if constexpr (std::is_same_v<S, bool*>) {
                if (value == "true" || value == "1") {
                    *slot = true;
                } else if (value == "false" || value == "0") {
                    *slot = false;
                } else {
                    bad_value(key, value);
                }
            } else if constexpr (std::is_same_v<S, double*>) {
                const double v = parse_number<double>(key, value);
                if (!std::isfinite(v)) bad_value(key, value);
                *slot = v;
            } else {
                unsigned_value(slot);
            }
        },
        it->second);
    cfg.hmm3.merge = cfg.hhmm.merge;
}

void parse_config(std::istream& in, Config& cfg) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s(line);
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) {
            throw GazeError(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": expected key = value");
        }
        set_config_value(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw GazeError(ErrorCode::Io, "cannot open config " + path.string());
    Config cfg;
    parse_config(in, cfg);
    return cfg;
}

void validate(const Config& cfg) {
    validate(cfg.hhmm);
    validate(cfg.thresholds);
    if (cfg.hmm3.epochs < 1) throw GazeError(ErrorCode::InvalidConfig, "hmm3.epochs must be >= 1");
    if (!(cfg.hmm3.low_pct >= 0.0 && cfg.hmm3.low_pct < cfg.hmm3.mid_pct && cfg.hmm3.mid_pct < cfg.hmm3.high_pct &&
          cfg.hmm3.high_pct <= 100.0)) {
        throw GazeError(ErrorCode::InvalidConfig, "hmm3 percentiles must be increasing within [0, 100]");
    }
    if (!(cfg.hmm3.stay > 0.0 && cfg.hmm3.stay < 1.0)) throw GazeError(ErrorCode::InvalidConfig, "hmm3.stay must be in (0, 1)");
    if (!(cfg.hmm3.variance_floor > 0.0)) throw GazeError(ErrorCode::InvalidConfig, "hmm3.variance_floor must be positive");
    if (!(cfg.metrics.fqns_tol_fraction >= 0.0) || !(cfg.metrics.fqns_tol_min_deg >= 0.0) ||
        !(cfg.metrics.sqns_response_ms >= 0.0)) {
        throw GazeError(ErrorCode::InvalidConfig, "metric settings must be non-negative");
    }
    if (cfg.kmeans_k < 1) throw GazeError(ErrorCode::InvalidConfig, "features.k must be >= 1");
}

std::map<std::string, std::string> config_snapshot(const Config& cfg) {
    Config copy = cfg;
    std::map<std::string, std::string> out;
    for (const auto& [key, slot] : slots(copy)) {
        out[key] = std::visit(
            [](auto s) -> std::string {
                using S = decltype(s);
                if constexpr (std::is_same_v<S, Seed>) {
                    return std::to_string(*s.p);
                } else if constexpr (std::is_same_v<S, bool*>) {
                    return *s ? "true" : "false";
                } else if constexpr (std::is_same_v<S, double*>) {
                    return format_double(*s);
                } else {
                    return std::to_string(*s);
                }
            },
            slot);
    }
    return out;
}

void write_config(std::ostream& out, const Config& cfg) {
    for (const auto& [key, value] : config_snapshot(cfg)) out << key << " = " << value << '\n';
}

std::vector<std::string> config_keys() {
    Config c;
    std::vector<std::string> keys;
    for (const auto& [key, slot] : slots(c)) keys.push_back(key);
    return keys;
}

}  // namespace gazehmm
