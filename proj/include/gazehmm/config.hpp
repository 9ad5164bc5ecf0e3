#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

#include "gazehmm/baselines.hpp"
#include "gazehmm/hierarchy.hpp"
#include "gazehmm/metrics.hpp"

namespace gazehmm {

// Everything a run can be configured with. Files are flat `key = value`
// lines; `#` starts a comment. Keys are listed by config_keys().
struct Config {
    HierarchicalConfig hhmm;
    ThresholdConfig thresholds;
    ThreeStateConfig hmm3;  // merge settings are shared with hhmm
    MetricsConfig metrics;
    std::size_t kmeans_k = 3;
    std::uint64_t seed = 42;
};

// Throws InvalidConfig on an unknown key or a malformed value.
void set_config_value(Config& cfg, std::string_view key, std::string_view value);
void parse_config(std::istream& in, Config& cfg);
Config load_config(const std::filesystem::path& path);
// Checks every section; called before a run.
void validate(const Config& cfg);

// Key to canonical value text (doubles as %.17g).
std::map<std::string, std::string> config_snapshot(const Config& cfg);
void write_config(std::ostream& out, const Config& cfg);
std::vector<std::string> config_keys();

}  // namespace gazehmm
