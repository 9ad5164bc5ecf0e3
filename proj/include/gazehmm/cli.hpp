#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gazehmm/config.hpp"
#include "gazehmm/gaze_data.hpp"
#include "gazehmm/hierarchy.hpp"

namespace gazehmm {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kConfigEnv = "GAZE_HHMM_CONFIG";

enum class Algo : std::uint8_t { Hhmm, Ivvt, Ivdt, Ivmp, Hmm3 };

inline constexpr Algo kAllAlgos[] = {Algo::Hhmm, Algo::Hmm3, Algo::Ivvt, Algo::Ivdt, Algo::Ivmp};

std::string_view algo_name(Algo a) noexcept;
// Throws Usage for an unknown name.
Algo parse_algo(std::string_view name);

// The one code path behind `classify`: features, then the chosen classifier.
// Baseline events are the plain run-length segmentation of their labels.
ClassifyResult run_algorithm(Algo algo, const GazeRecording& rec, const Config& cfg);

// --config wins, then $GAZE_HHMM_CONFIG, then built-in defaults.
Config resolve_config(const std::optional<std::filesystem::path>& config_path);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Write to a temporary sibling, then rename over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// kind,onset_ms,offset_ms,duration_ms,first,last,centroid_x,centroid_y,amplitude_deg,mean_speed
std::string events_csv(const std::vector<Event>& events);
// t_ms,x_deg,y_deg,label with invalid positions left empty
std::string plot_series_csv(const GazeRecording& rec, const std::vector<SampleLabel>& labels);
// t_ms,speed,accel,disp with absent entries left empty
std::string features_csv(const GazeRecording& rec, const FeatureSeries& features);

struct Manifest {
    std::string command;
    std::map<std::string, std::string> config;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> inputs;  // path -> sha256
    std::vector<std::string> outputs;
    std::vector<std::string> flags;
    double wall_time_s = 0.0;
};

std::string manifest_json(const Manifest& m);

// Full command line without the program name. Returns the process exit code;
// failures print one `error: code=<Name> msg=<text>` line to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gazehmm
