#include "gazehmm/gaze_data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace gazehmm {

std::string_view error_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Usage: return "Usage";
        case ErrorCode::Io: return "Io";
        case ErrorCode::MalformedCsv: return "MalformedCsv";
        case ErrorCode::NonMonotoneTime: return "NonMonotoneTime";
        case ErrorCode::EmptyRecording: return "EmptyRecording";
        case ErrorCode::UnknownKind: return "UnknownKind";
        case ErrorCode::NoOverlap: return "NoOverlap";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::InvalidScript: return "InvalidScript";
        case ErrorCode::EmptyObservation: return "EmptyObservation";
        case ErrorCode::NumericalUnderflow: return "NumericalUnderflow";
        case ErrorCode::InvalidModel: return "InvalidModel";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

std::string_view label_code(SampleLabel label) noexcept {
    switch (label) {
        case SampleLabel::Fixation: return "fix";
        case SampleLabel::Saccade: return "sac";
        case SampleLabel::Pursuit: return "sp";
        case SampleLabel::Noise: return "noise";
    }
    return "noise";
}

std::optional<SampleLabel> parse_label_code(std::string_view code) noexcept {
    if (code == "fix") return SampleLabel::Fixation;
    if (code == "sac") return SampleLabel::Saccade;
    if (code == "sp") return SampleLabel::Pursuit;
    if (code == "noise") return SampleLabel::Noise;
    return std::nullopt;
}

std::size_t GazeRecording::valid_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(samples.begin(), samples.end(), [](const GazeSample& s) { return s.valid; }));
}

namespace {

// Splits one CSV line into at most N fields; returns the field count seen.
template <std::size_t N>
std::size_t split_fields(std::string_view line, std::array<std::string_view, N>& out) {
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        const std::string_view field =
            line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        if (count < N) out[count] = field;
        ++count;
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return count;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

std::string where(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

double parse_double(std::string_view field, std::size_t line_no) {
    field = trim(field);
    if (field.empty()) return std::nan("");
    if (field == "nan" || field == "NaN" || field == "NAN") return std::nan("");
    double value = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw GazeError(ErrorCode::MalformedCsv, where(line_no) + "bad number '" + std::string(field) + "'");
    }
    return value;
}

// Reads header + rows; calls on_row(fields, line_no) for every non-empty row.
template <std::size_t N, typename OnRow>
void read_csv(std::istream& in, std::string_view expected_header, OnRow&& on_row) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::array<std::string_view, N> fields{};
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
        view = trim(view);
        if (!have_header) {
            if (view != expected_header) {
                throw GazeError(ErrorCode::MalformedCsv,
                                where(line_no) + "expected header '" + std::string(expected_header) + "'");
            }
            have_header = true;
            continue;
        }
        if (view.empty()) continue;
        if (split_fields(view, fields) != N) {
            throw GazeError(ErrorCode::MalformedCsv, where(line_no) + "expected " + std::to_string(N) + " fields");
        }
        on_row(fields, line_no);
    }
    if (!have_header) throw GazeError(ErrorCode::EmptyRecording, "file has no header");
}

// Enforces strictly increasing time; returns false when the row should be skipped.
bool accept_time(double t, std::optional<double>& last, std::size_t line_no, const LoadOptions& opts,
                 std::size_t& dropped) {
    if (!std::isfinite(t)) throw GazeError(ErrorCode::MalformedCsv, where(line_no) + "non-finite timestamp");
    if (last) {
        if (t < *last) {
            throw GazeError(ErrorCode::NonMonotoneTime, where(line_no) + "timestamp decreases");
        }
        if (t == *last) {
            if (!opts.drop_duplicates) {
                throw GazeError(ErrorCode::NonMonotoneTime, where(line_no) + "duplicate timestamp");
            }
            ++dropped;
            return false;
        }
    }
    last = t;
    return true;
}

double infer_rate(const std::vector<double>& times) {
    if (times.size() < 2) return 1000.0;
    std::vector<double> dt;
    dt.reserve(times.size() - 1);
    for (std::size_t i = 1; i < times.size(); ++i) dt.push_back(times[i] - times[i - 1]);
    auto mid = dt.begin() + static_cast<std::ptrdiff_t>(dt.size() / 2);
    std::nth_element(dt.begin(), mid, dt.end());
    return 1000.0 / *mid;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw GazeError(ErrorCode::Io, "cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw GazeError(ErrorCode::Io, "cannot write " + path.string());
    return out;
}

void put_fixed(std::ostream& out, double v) {
    if (!std::isfinite(v)) {
        out << "nan";
        return;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    out << buf;
}

}  // namespace

GazeRecording parse_recording(std::istream& in, const LoadOptions& opts) {
    GazeRecording rec;
    std::optional<double> last;
    read_csv<4>(in, "t_ms,x_deg,y_deg,valid", [&](const auto& f, std::size_t line_no) {
        const double t = parse_double(f[0], line_no);
        if (!accept_time(t, last, line_no, opts, rec.dropped_duplicates)) return;
        GazeSample s;
        s.t = t;
        s.x = parse_double(f[1], line_no);
        s.y = parse_double(f[2], line_no);
        const std::string_view valid = trim(f[3]);
        if (valid == "1") {
            s.valid = true;
        } else if (valid == "0") {
            s.valid = false;
        } else {
            throw GazeError(ErrorCode::MalformedCsv, where(line_no) + "valid must be 0 or 1");
        }
        if (!std::isfinite(s.x) || !std::isfinite(s.y)) s.valid = false;
        rec.samples.push_back(s);
    });
    if (rec.samples.empty()) throw GazeError(ErrorCode::EmptyRecording, "recording has no samples");
    if (opts.rate_hz > 0.0) {
        rec.rate_hz = opts.rate_hz;
    } else {
        std::vector<double> times;
        times.reserve(rec.samples.size());
        for (const auto& s : rec.samples) times.push_back(s.t);
        rec.rate_hz = infer_rate(times);
    }
    return rec;
}

GazeRecording load_recording(const std::filesystem::path& path, const LoadOptions& opts) {
    auto in = open_in(path);
    return parse_recording(in, opts);
}

void write_recording(std::ostream& out, const GazeRecording& rec) {
    out << "t_ms,x_deg,y_deg,valid\n";
    for (const auto& s : rec.samples) {
        put_fixed(out, s.t);
        out << ',';
        put_fixed(out, s.x);
        out << ',';
        put_fixed(out, s.y);
        out << ',' << (s.valid ? '1' : '0') << '\n';
    }
}

void write_recording(const std::filesystem::path& path, const GazeRecording& rec) {
    auto out = open_out(path);
    write_recording(out, rec);
}

StimulusTrack parse_stimulus(std::istream& in, const LoadOptions& opts) {
    StimulusTrack stim;
    std::optional<double> last;
    std::size_t dropped = 0;
    read_csv<4>(in, "t_ms,x_deg,y_deg,kind", [&](const auto& f, std::size_t line_no) {
        const double t = parse_double(f[0], line_no);
        if (!accept_time(t, last, line_no, opts, dropped)) return;
        StimulusSample s;
        s.t = t;
        s.x = parse_double(f[1], line_no);
        s.y = parse_double(f[2], line_no);
        if (!std::isfinite(s.x) || !std::isfinite(s.y)) {
            throw GazeError(ErrorCode::MalformedCsv, where(line_no) + "stimulus position must be finite");
        }
        const std::string_view code = trim(f[3]);
        const auto kind = parse_label_code(code);
        if (!kind || *kind == SampleLabel::Noise) {
            throw GazeError(ErrorCode::UnknownKind, where(line_no) + "unknown kind '" + std::string(code) + "'");
        }
        s.kind = *kind;
        stim.samples.push_back(s);
    });
    if (stim.samples.empty()) throw GazeError(ErrorCode::EmptyRecording, "stimulus has no samples");
    return stim;
}

StimulusTrack load_stimulus(const std::filesystem::path& path, const LoadOptions& opts) {
    auto in = open_in(path);
    return parse_stimulus(in, opts);
}

void write_stimulus(std::ostream& out, const StimulusTrack& stim) {
    out << "t_ms,x_deg,y_deg,kind\n";
    for (const auto& s : stim.samples) {
        put_fixed(out, s.t);
        out << ',';
        put_fixed(out, s.x);
        out << ',';
        put_fixed(out, s.y);
        out << ',' << label_code(s.kind) << '\n';
    }
}

void write_stimulus(const std::filesystem::path& path, const StimulusTrack& stim) {
    auto out = open_out(path);
    write_stimulus(out, stim);
}

LabelSeries parse_labels(std::istream& in) {
    LabelSeries series;
    std::optional<double> last;
    std::size_t dropped = 0;
    read_csv<2>(in, "t_ms,label", [&](const auto& f, std::size_t line_no) {
        const double t = parse_double(f[0], line_no);
        accept_time(t, last, line_no, LoadOptions{}, dropped);
        const std::string_view code = trim(f[1]);
        const auto label = parse_label_code(code);
        if (!label) {
            throw GazeError(ErrorCode::UnknownKind, where(line_no) + "unknown label '" + std::string(code) + "'");
        }
        series.t.push_back(t);
        series.labels.push_back(*label);
    });
    if (series.labels.empty()) throw GazeError(ErrorCode::EmptyRecording, "label file has no rows");
    return series;
}

LabelSeries load_labels(const std::filesystem::path& path) {
    auto in = open_in(path);
    return parse_labels(in);
}

void write_labels(std::ostream& out, const GazeRecording& rec, const std::vector<SampleLabel>& labels) {
    if (labels.size() != rec.size()) {
        throw GazeError(ErrorCode::InvalidArgument, "label count does not match recording length");
    }
    out << "t_ms,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        put_fixed(out, rec.samples[i].t);
        out << ',' << label_code(labels[i]) << '\n';
    }
}

void write_labels(const std::filesystem::path& path, const GazeRecording& rec,
                  const std::vector<SampleLabel>& labels) {
    auto out = open_out(path);
    write_labels(out, rec, labels);
}

Alignment align(const GazeRecording& rec, const StimulusTrack& stim) {
    Alignment result;
    result.stim_index.assign(rec.size(), std::nullopt);
    if (stim.samples.empty()) throw GazeError(ErrorCode::NoOverlap, "empty stimulus");
    const double first = stim.samples.front().t;
    const double last = stim.samples.back().t;
    std::size_t j = 0;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const double t = rec.samples[i].t;
        if (t < first || t > last) continue;
        while (j + 1 < stim.samples.size() && stim.samples[j + 1].t <= t) ++j;
        result.stim_index[i] = j;
        ++result.paired;
    }
    if (result.paired == 0) throw GazeError(ErrorCode::NoOverlap, "recording and stimulus do not overlap");
    return result;
}

std::vector<SampleLabel> labels_for_recording(const LabelSeries& series, const GazeRecording& rec) {
    if (series.labels.size() != rec.size()) {
        throw GazeError(ErrorCode::InvalidArgument,
                        "label file has " + std::to_string(series.labels.size()) + " rows, recording has " +
                            std::to_string(rec.size()));
    }
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (std::abs(series.t[i] - rec.samples[i].t) > 5e-6) {
            throw GazeError(ErrorCode::InvalidArgument,
                            "label timestamps diverge from recording at row " + std::to_string(i + 1));
        }
    }
    return series.labels;
}

}  // namespace gazehmm
