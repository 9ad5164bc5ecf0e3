#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "gazehmm/error.hpp"

namespace gazehmm {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) noexcept = default;
};

inline double norm(Vec2 v) noexcept { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) noexcept { return norm(a - b); }

// Noise marks invalid samples or samples a classifier explicitly rejects.
enum class SampleLabel : std::uint8_t { Fixation = 0, Saccade = 1, Pursuit = 2, Noise = 3 };

inline constexpr std::size_t kLabelCount = 4;

std::string_view label_code(SampleLabel label) noexcept;
std::optional<SampleLabel> parse_label_code(std::string_view code) noexcept;

struct GazeSample {
    double t = 0.0;  // ms
    double x = 0.0;  // deg
    double y = 0.0;  // deg
    bool valid = true;

    Vec2 pos() const noexcept { return {x, y}; }
};

struct GazeRecording {
    std::vector<GazeSample> samples;
    double rate_hz = 1000.0;
    // Later duplicates dropped at ingestion when LoadOptions::drop_duplicates is set.
    std::size_t dropped_duplicates = 0;

    std::size_t size() const noexcept { return samples.size(); }
    std::size_t valid_count() const noexcept;
    double period_ms() const noexcept { return 1000.0 / rate_hz; }
};

struct StimulusSample {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    SampleLabel kind = SampleLabel::Fixation;

    Vec2 pos() const noexcept { return {x, y}; }
};

struct StimulusTrack {
    std::vector<StimulusSample> samples;

    std::size_t size() const noexcept { return samples.size(); }
};

struct LoadOptions {
    // Default rejects repeated timestamps; when set, later duplicates are
    // dropped and counted instead.
    bool drop_duplicates = false;
    // 0 infers the nominal rate from the median sample interval.
    double rate_hz = 0.0;
};

GazeRecording parse_recording(std::istream& in, const LoadOptions& opts = {});
GazeRecording load_recording(const std::filesystem::path& path, const LoadOptions& opts = {});
void write_recording(std::ostream& out, const GazeRecording& rec);
void write_recording(const std::filesystem::path& path, const GazeRecording& rec);

StimulusTrack parse_stimulus(std::istream& in, const LoadOptions& opts = {});
StimulusTrack load_stimulus(const std::filesystem::path& path, const LoadOptions& opts = {});
void write_stimulus(std::ostream& out, const StimulusTrack& stim);
void write_stimulus(const std::filesystem::path& path, const StimulusTrack& stim);

struct LabelSeries {
    std::vector<double> t;
    std::vector<SampleLabel> labels;
};

LabelSeries parse_labels(std::istream& in);
LabelSeries load_labels(const std::filesystem::path& path);
void write_labels(std::ostream& out, const GazeRecording& rec, const std::vector<SampleLabel>& labels);
void write_labels(const std::filesystem::path& path, const GazeRecording& rec,
                  const std::vector<SampleLabel>& labels);

// Zero-order hold pairing: each gaze sample gets the stimulus sample with the
// greatest t <= gaze t, provided the gaze sample lies inside the stimulus span.
struct Alignment {
    std::vector<std::optional<std::size_t>> stim_index;
    std::size_t paired = 0;
};

Alignment align(const GazeRecording& rec, const StimulusTrack& stim);

// Labels read back from disk must line up sample-for-sample with a recording.
std::vector<SampleLabel> labels_for_recording(const LabelSeries& series, const GazeRecording& rec);

}  // namespace gazehmm
