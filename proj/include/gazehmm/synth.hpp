#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "gazehmm/gaze_data.hpp"
#include "gazehmm/metrics.hpp"

namespace gazehmm {

// Hold the current position. A given pos must equal the current position;
// moving the target is what Jump is for.
struct Fixate {
    std::optional<Vec2> pos;
    double dur_ms = 0.0;
};

// Step the target to `to`. The eye answers with a minimum-jerk saccade whose
// duration defaults to the main sequence (2.2 ms/deg + 21 ms).
struct Jump {
    Vec2 to;
    std::optional<double> dur_ms;
};

// Move the target at constant velocity.
struct Pursue {
    Vec2 velocity;  // deg/s
    double dur_ms = 0.0;
};

using Segment = std::variant<Fixate, Jump, Pursue>;

struct Scenario {
    Vec2 start;
    std::vector<Segment> script;
    double rate_hz = 1000.0;
    // Per-axis noise std. It splits into an uncorrelated measurement jitter of
    // std noise_white_deg and a slow component carrying the rest of the
    // variance, smoothed by a Gaussian kernel of std noise_corr_ms.
    double noise_sigma_deg = 0.0;
    double noise_white_deg = 0.0;
    double noise_corr_ms = 100.0;
    double latency_ms = 0.0;
    double corrective_rate = 0.0;  // per second of pursuit
    double corrective_min_deg = 2.0;
    double corrective_max_deg = 4.0;
    // Dead time around each corrective saccade and at pursuit edges.
    double corrective_spacing_ms = 100.0;
    std::uint64_t seed = 42;
};

void validate(const Scenario& sc);

struct SynthOutput {
    GazeRecording rec;
    StimulusTrack stim;
    std::vector<SampleLabel> truth;
};

SynthOutput generate(const Scenario& sc);

// Ground-truth labels scored against the stimulus: the best any classifier
// can reach under the scenario's latency and noise.
BehaviorScores ideal_scores(const Scenario& sc);

// 10 tau^3 - 15 tau^4 + 6 tau^5
double min_jerk(double tau) noexcept;
double main_sequence_ms(double amplitude_deg) noexcept;
// Peak speed of a minimum-jerk movement: 15/8 * amplitude / duration.
double min_jerk_peak_speed(double amplitude_deg, double duration_ms) noexcept;

// Three fixations, two jumps over 10 deg, two pursuit ramps (10 and 12.5 deg/s),
// 0.3 deg noise, 150 ms latency, corrective saccades at 1/s, 1000 Hz, 20 s.
Scenario default_scenario();
// The default script without latency, noise or corrective saccades.
Scenario clean_scenario();

Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::filesystem::path& path);
void write_scenario(std::ostream& out, const Scenario& sc);

}  // namespace gazehmm
