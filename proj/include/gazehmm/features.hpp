#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gazehmm/gaze_data.hpp"

namespace gazehmm {

// Per-sample kinematic features. Absent entries (invalid samples) hold NaN.
struct FeatureSeries {
    std::vector<double> speed;  // deg/s
    std::vector<double> accel;  // deg/s^2, magnitude
    std::vector<double> disp;   // deg, max pairwise distance inside the window
    double window_ms = 100.0;

    std::size_t size() const noexcept { return speed.size(); }
    bool present(std::size_t i) const noexcept { return !std::isnan(speed[i]); }
};

// Central-difference speed magnitude over one contiguous run, one-sided at
// the run ends. Times in ms, result in deg/s. A single-sample run yields 0.
std::vector<double> run_speed(std::span<const double> t_ms, std::span<const Vec2> pos);

// Same scheme applied to a scalar signal; returns |d value / dt| per second.
std::vector<double> run_derivative_magnitude(std::span<const double> t_ms, std::span<const double> value);

// Maximum pairwise distance inside a window of window_samples centred on each
// sample. Runs are maximal stretches where include[i] is true; a window never
// crosses a run boundary and is shifted to stay inside it. Excluded samples get NaN.
std::vector<double> windowed_displacement(std::span<const Vec2> pos, std::span<const std::uint8_t> include,
                                          std::size_t window_samples);

// Per-sample speed of a recording, differentiated within runs of valid
// samples. NaN at invalid samples. No minimum length.
std::vector<double> sample_speed(const GazeRecording& rec);

// Number of samples spanned by a window of the given length at the recording rate.
std::size_t window_samples(const GazeRecording& rec, double window_ms);

FeatureSeries compute_features(const GazeRecording& rec, double window_ms = 100.0);

struct ClusterReport {
    std::size_t k = 0;
    std::vector<std::size_t> assignments;
    std::vector<std::vector<double>> centroids;  // in input units
    double inertia = 0.0;                        // final objective in clustering space
    std::vector<double> inertia_trace;           // objective after every assignment step
    std::size_t iterations = 0;
    bool standardized = true;
    // All points identical with k > 1: duplicate centroids were emitted.
    bool degenerate = false;
};

struct KMeansOptions {
    std::size_t max_iterations = 300;
    // Cluster on z-scored dimensions (constant dimensions are left unscaled).
    bool standardize = true;
};

// Lloyd's algorithm with k-means++ seeding. Deterministic for a given seed.
ClusterReport kmeans(const std::vector<std::vector<double>>& points, std::size_t k, std::uint64_t seed,
                     const KMeansOptions& opts = {});

enum class Feature : std::uint8_t { Speed, Accel, Disp };

std::string feature_name(Feature f);

struct FeatureCluster {
    Feature feature = Feature::Speed;
    std::vector<double> values;  // present samples only
    ClusterReport report;
};

// Clusters each feature on its own (1-D) over the present samples.
std::vector<FeatureCluster> analyze_features(const FeatureSeries& features, std::size_t k, std::uint64_t seed);

// Between-cluster over within-cluster variance of a 1-D clustering. 0 for a
// constant feature; +inf when clusters are perfectly tight but distinct.
double separation_statistic(std::span<const double> values, std::span<const std::size_t> assignments,
                            std::size_t k);

struct FeatureScore {
    Feature feature = Feature::Speed;
    double separation = 0.0;
};

struct FeatureSelection {
    Feature stage1 = Feature::Speed;
    Feature stage2 = Feature::Disp;
    std::vector<FeatureScore> scores;
};

FeatureSelection select_features(const std::vector<FeatureCluster>& reports);

}  // namespace gazehmm
