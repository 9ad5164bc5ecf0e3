#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazehmm/features.hpp"
#include "gazehmm/gaze_data.hpp"
#include "gazehmm/hmm.hpp"

namespace gazehmm {

struct MergeConfig {
    double gap_ms = 75.0;
    double dist_deg = 0.5;
    // Events shorter than these are absorbed into their longer neighbour.
    double min_fixation_ms = 50.0;
    double min_pursuit_ms = 50.0;
    double min_saccade_ms = 10.0;

    double min_duration(SampleLabel kind) const noexcept;
};

// Initial parameters for a stage HMM: state means at the given percentiles of
// the observed feature, shared variance equal to the feature variance.
struct StageInit {
    double low_pct = 25.0;
    double high_pct = 90.0;
    double stay = 0.95;
};

struct HierarchicalConfig {
    std::size_t epochs1 = 3;
    std::size_t epochs2 = 3;
    // Saccade samples are a percent or two of a recording, so the upper
    // stage-1 mean starts far out in the speed tail.
    StageInit init1{25.0, 99.9, 0.95};
    StageInit init2{25.0, 90.0, 0.95};
    // Stage-2 fine-tuning on speed: Pursuit above finetune_t becomes Saccade,
    // Pursuit below fixation_speed_ceiling becomes Fixation.
    double finetune_t = 100.0;
    bool finetune_high = true;
    double fixation_speed_ceiling = 1.5;
    bool finetune_low = true;
    double window_ms = 100.0;
    double variance_floor = kVarianceFloor;
    MergeConfig merge;
};

void validate(const HierarchicalConfig& cfg);
void validate(const MergeConfig& cfg);

enum class Stage1Label : std::uint8_t { NonSaccade = 0, Saccade = 1, Noise = 2 };

struct Stage1Result {
    std::vector<Stage1Label> labels;
    std::optional<FitResult> fit;  // empty when the speed signal is degenerate
    bool degenerate = false;
};

Stage1Result stage1_filter_saccades(const FeatureSeries& features, const HierarchicalConfig& cfg);

struct Stage2Result {
    std::vector<SampleLabel> labels;
    std::optional<FitResult> fit;
    std::vector<double> displacement;  // NaN outside non-saccade samples
    bool degenerate = false;
    std::size_t finetuned_to_saccade = 0;
    std::size_t finetuned_to_fixation = 0;
};

Stage2Result stage2_split_fix_pursuit(const FeatureSeries& features, const GazeRecording& rec,
                                      const Stage1Result& stage1, const HierarchicalConfig& cfg);

struct Event {
    SampleLabel kind = SampleLabel::Fixation;
    double onset = 0.0;   // ms, first sample
    double offset = 0.0;  // ms, exclusive end
    Vec2 centroid;
    double amplitude = 0.0;   // deg, first to last valid sample
    double mean_speed = 0.0;  // deg/s
    std::size_t first = 0;    // sample indices, inclusive
    std::size_t last = 0;

    double duration() const noexcept { return offset - onset; }
};

struct Segmentation {
    std::vector<SampleLabel> labels;
    std::vector<Event> events;
};

// Plain run-length segmentation; Noise runs separate events and are not events.
Segmentation segment_events(const std::vector<SampleLabel>& labels, const GazeRecording& rec);

// Criterion merge (gap and centroid distance), short-event absorption, then a
// final criterion pass over neighbours made adjacent by absorption.
Segmentation merge_events(const std::vector<SampleLabel>& labels, const GazeRecording& rec, const MergeConfig& cfg);

struct ClassifyResult {
    std::vector<SampleLabel> labels;
    std::vector<Event> events;
    std::vector<std::string> flags;
};

ClassifyResult classify(const GazeRecording& rec, const HierarchicalConfig& cfg = {});

}  // namespace gazehmm
