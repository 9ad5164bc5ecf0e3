#pragma once

#include <span>
#include <string>
#include <vector>

#include "gazehmm/features.hpp"
#include "gazehmm/gaze_data.hpp"
#include "gazehmm/hierarchy.hpp"

namespace gazehmm {

// Threshold settings for the classic baselines. None are hard-coded in the
// classifiers; they are expected to be tuned per recording.
struct ThresholdConfig {
    // I-VVT
    double v_high = 70.0;  // deg/s
    double v_low = 5.0;    // deg/s
    // I-VDT and I-VMP saccade threshold
    double v_sac = 70.0;
    // I-VDT
    double dispersion_deg = 1.0;
    double window_ms = 100.0;
    // I-VMP
    double direction_window_ms = 100.0;
    double similarity_cut = 0.5;
};

void validate(const ThresholdConfig& cfg);

// speed > v_high: Saccade; speed <= v_low: Fixation; otherwise Pursuit.
std::vector<SampleLabel> ivvt(const FeatureSeries& features, const ThresholdConfig& cfg);

// I-VT saccades, then I-DT windows over the remaining runs.
std::vector<SampleLabel> ivdt(const FeatureSeries& features, const GazeRecording& rec, const ThresholdConfig& cfg);

// I-VT saccades, then mean resultant length of step directions per window.
std::vector<SampleLabel> ivmp(const FeatureSeries& features, const GazeRecording& rec, const ThresholdConfig& cfg);

// (max x - min x) + (max y - min y)
double idt_dispersion(std::span<const Vec2> pos);

// |sum of unit step vectors| / number of non-zero steps; 0 if every step is zero.
double mean_resultant_length(std::span<const Vec2> path);

struct ThreeStateConfig {
    std::size_t epochs = 3;
    double low_pct = 25.0;
    double mid_pct = 75.0;
    double high_pct = 99.0;
    double stay = 0.95;
    double variance_floor = kVarianceFloor;
    MergeConfig merge;
};

// Single-stage ablation: one 3-state Gaussian HMM on speed, states mapped by
// fitted mean (low Fixation, mid Pursuit, high Saccade), then merged.
ClassifyResult three_state_hmm(const FeatureSeries& features, const GazeRecording& rec,
                               const ThreeStateConfig& cfg = {});

}  // namespace gazehmm
