#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazehmm/features.hpp"
#include "gazehmm/gaze_data.hpp"
#include "gazehmm/hierarchy.hpp"

namespace gazehmm {

// Stimulus-referenced behaviour scores. A score is absent (nullopt) when the
// stimulus offers nothing to score it against; absent is never reported as 0.
struct BehaviorScores {
    std::optional<double> sqns;    // %
    std::optional<double> fqns;    // %
    std::optional<double> pqns;    // %
    std::optional<double> misfix;  // %
    std::optional<double> fqls;    // deg
    std::optional<double> pqls_p;  // deg
    std::optional<double> pqls_v;  // deg/s
};

struct MetricsConfig {
    // FQnS position tolerance: this fraction of the preceding stimulus saccade
    // amplitude, never below tol_min_deg.
    double fqns_tol_fraction = 1.0 / 3.0;
    double fqns_tol_min_deg = 0.5;
    // A detected saccade counts towards SQnS when its onset lies within this
    // many ms after a stimulus saccade onset. 0 counts every detected saccade.
    double sqns_response_ms = 250.0;
};

struct StimulusSaccade {
    std::size_t first = 0;  // stimulus sample indices of the Saccade run
    std::size_t last = 0;
    double amplitude = 0.0;  // |pos(last) - pos(sample before the run)|
};

std::vector<StimulusSaccade> stimulus_saccades(const StimulusTrack& stim);

// Stimulus kind in effect at time t (zero-order hold); nullopt outside the track.
std::optional<SampleLabel> stimulus_kind_at(const StimulusTrack& stim, double t);

// Stimulus target speed, central differences over the whole track, deg/s.
std::vector<double> stimulus_speed(const StimulusTrack& stim);

// Detected saccade amplitude over stimulus saccade amplitude. With a response
// window only saccades starting inside it count, so corrective saccades made
// while tracking a moving target are not taken as responses to a jump.
std::optional<double> sqns(const std::vector<Event>& events, const StimulusTrack& stim, const MetricsConfig& cfg = {});
std::optional<double> fqns(const std::vector<SampleLabel>& labels, const GazeRecording& rec,
                           const StimulusTrack& stim, const MetricsConfig& cfg = {});
std::optional<double> pqns(const std::vector<SampleLabel>& labels, const GazeRecording& rec,
                           const StimulusTrack& stim);
std::optional<double> misfix(const std::vector<SampleLabel>& labels, const GazeRecording& rec,
                             const StimulusTrack& stim);
std::optional<double> fqls(const std::vector<SampleLabel>& labels, const GazeRecording& rec,
                           const StimulusTrack& stim);
std::optional<double> pqls_p(const std::vector<SampleLabel>& labels, const GazeRecording& rec,
                             const StimulusTrack& stim);
std::optional<double> pqls_v(const std::vector<SampleLabel>& labels, std::span<const double> gaze_speed,
                             const GazeRecording& rec, const StimulusTrack& stim);

// All seven scores; events are the run-length segmentation of `labels`.
BehaviorScores behavior_scores(const std::vector<SampleLabel>& labels, const GazeRecording& rec,
                               const StimulusTrack& stim, const MetricsConfig& cfg = {});

struct Agreement {
    // confusion[truth][predicted], indexed by SampleLabel
    std::array<std::array<std::size_t, kLabelCount>, kLabelCount> confusion{};
    std::array<std::optional<double>, kLabelCount> precision{};
    std::array<std::optional<double>, kLabelCount> recall{};
    // Absent for a class that occurs in neither truth nor prediction.
    std::array<std::optional<double>, kLabelCount> f1{};
    double accuracy = 0.0;

    double f1_or_zero(SampleLabel l) const { return f1[static_cast<std::size_t>(l)].value_or(0.0); }
};

Agreement sample_agreement(const std::vector<SampleLabel>& labels, const std::vector<SampleLabel>& truth);

// Row names in table order.
inline constexpr std::array<const char*, 7> kScoreNames{"SQnS", "FQnS", "PQnS", "MisFix", "FQlS", "PQlS_P", "PQlS_V"};

std::array<std::optional<double>, 7> as_row(const BehaviorScores& s);

struct ScoreColumn {
    std::string name;
    BehaviorScores scores;
};

// CSV: metric,<col1>,<col2>,... with absent scores as '-'.
std::string score_table_csv(const std::vector<ScoreColumn>& columns);
// Aligned plain-text table with units.
std::string score_table_text(const std::vector<ScoreColumn>& columns);

}  // namespace gazehmm
