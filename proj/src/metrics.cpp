#include "gazehmm/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace gazehmm {

std::vector<StimulusSaccade> stimulus_saccades(const StimulusTrack& stim) {
    std::vector<StimulusSaccade> out;
    const auto& s = stim.samples;
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i].kind != SampleLabel::Saccade) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < s.size() && s[j + 1].kind == SampleLabel::Saccade) ++j;
        const Vec2 from = i > 0 ? s[i - 1].pos() : s[i].pos();
        out.push_back({i, j, distance(s[j].pos(), from)});
        i = j + 1;
    }
    return out;
}

std::optional<SampleLabel> stimulus_kind_at(const StimulusTrack& stim, double t) {
    const auto& s = stim.samples;
    if (s.empty() || t < s.front().t || t > s.back().t) return std::nullopt;
    auto it = std::upper_bound(s.begin(), s.end(), t, [](double v, const StimulusSample& x) { return v < x.t; });
    return std::prev(it)->kind;
}

std::vector<double> stimulus_speed(const StimulusTrack& stim) {
    std::vector<double> t(stim.size());
    std::vector<Vec2> pos(stim.size());
    for (std::size_t i = 0; i < stim.size(); ++i) {
        t[i] = stim.samples[i].t;
        pos[i] = stim.samples[i].pos();
    }
    return run_speed(t, pos);
}

namespace {

void require_labels(const std::vector<SampleLabel>& labels, const GazeRecording& rec) {
    if (labels.size() != rec.size()) throw GazeError(ErrorCode::InvalidArgument, "labels and recording differ in length");
}

std::optional<double> percent(std::size_t hit, std::size_t total) {
    if (total == 0) return std::nullopt;
    return 100.0 * static_cast<double>(hit) / static_cast<double>(total);
}

// Mean of f(i, stim_index) over gaze samples labelled `want` during stimulus `kind`.
template <typename F>
std::optional<double> mean_over(const std::vector<SampleLabel>& labels, const GazeRecording& rec,
                                const StimulusTrack& stim, SampleLabel kind, SampleLabel want, F&& f) {
    require_labels(labels, rec);
    const auto al = align(rec, stim);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const auto j = al.stim_index[i];
        if (!j || stim.samples[*j].kind != kind || labels[i] != want || !rec.samples[i].valid) continue;
        sum += f(i, *j);
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

// Share of gaze samples during stimulus `kind` that carry `want`.
std::optional<double> share(const std::vector<SampleLabel>& labels, const GazeRecording& rec,
                            const StimulusTrack& stim, SampleLabel kind, SampleLabel want) {
    require_labels(labels, rec);
    const auto al = align(rec, stim);
    std::size_t hit = 0, total = 0;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const auto j = al.stim_index[i];
        if (!j || stim.samples[*j].kind != kind) continue;
        ++total;
        if (labels[i] == want) ++hit;
    }
    return percent(hit, total);
}

}  // namespace

std::optional<double> sqns(const std::vector<Event>& events, const StimulusTrack& stim, const MetricsConfig& cfg) {
    const auto saccades = stimulus_saccades(stim);
    double stimulus_total = 0.0;
    for (const auto& s : saccades) stimulus_total += s.amplitude;
    if (stimulus_total <= 0.0) return std::nullopt;
    const auto responds = [&](double onset) {
        if (cfg.sqns_response_ms <= 0.0) return true;
        return std::any_of(saccades.begin(), saccades.end(), [&](const StimulusSaccade& s) {
            const double t0 = stim.samples[s.first].t;
            return onset >= t0 && onset <= t0 + cfg.sqns_response_ms;
        });
    };
    double detected = 0.0;
    for (const auto& e : events) {
        if (e.kind == SampleLabel::Saccade && responds(e.onset)) detected += e.amplitude;
    }
    return 100.0 * detected / stimulus_total;
}

std::optional<double> fqns(const std::vector<SampleLabel>& labels, const GazeRecording& rec,
                           const StimulusTrack& stim, const MetricsConfig& cfg) {
    require_labels(labels, rec);
    const auto al = align(rec, stim);
    // Tolerance in effect at each stimulus sample.
    std::vector<double> tol(stim.size(), cfg.fqns_tol_min_deg);
    const auto saccades = stimulus_saccades(stim);
    std::size_t next = 0;
    double current = cfg.fqns_tol_min_deg;
    for (std::size_t j = 0; j < stim.size(); ++j) {
        while (next < saccades.size() && saccades[next].last < j) {
            current = std::max(cfg.fqns_tol_min_deg, cfg.fqns_tol_fraction * saccades[next].amplitude);
            ++next;
        }
        tol[j] = current;
    }
    std::size_t hit = 0, total = 0;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const auto j = al.stim_index[i];
        if (!j || stim.samples[*j].kind != SampleLabel::Fixation) continue;
        ++total;
        const auto& g = rec.samples[i];
        if (labels[i] == SampleLabel::Fixation && g.valid && distance(g.pos(), stim.samples[*j].pos()) <= tol[*j]) {
            ++hit;
        }
    }
    return percent(hit, total);
}

std::optional<double> pqns(const std::vector<SampleLabel>& labels, const GazeRecording& rec,
                           const StimulusTrack& stim) {
    return share(labels, rec, stim, SampleLabel::Pursuit, SampleLabel::Pursuit);
}

std::optional<double> misfix(const std::vector<SampleLabel>& labels, const GazeRecording& rec,
                             const StimulusTrack& stim) {
    return share(labels, rec, stim, SampleLabel::Fixation, SampleLabel::Pursuit);
}

std::optional<double> fqls(const std::vector<SampleLabel>& labels, const GazeRecording& rec,
                           const StimulusTrack& stim) {
    return mean_over(labels, rec, stim, SampleLabel::Fixation, SampleLabel::Fixation,
                     [&](std::size_t i, std::size_t j) { return distance(rec.samples[i].pos(), stim.samples[j].pos()); });
}

std::optional<double> pqls_p(const std::vector<SampleLabel>& labels, const GazeRecording& rec,
                             const StimulusTrack& stim) {
    return mean_over(labels, rec, stim, SampleLabel::Pursuit, SampleLabel::Pursuit,
                     [&](std::size_t i, std::size_t j) { return distance(rec.samples[i].pos(), stim.samples[j].pos()); });
}

std::optional<double> pqls_v(const std::vector<SampleLabel>& labels, std::span<const double> gaze_speed,
                             const GazeRecording& rec, const StimulusTrack& stim) {
    if (gaze_speed.size() != rec.size()) throw GazeError(ErrorCode::InvalidArgument, "speed and recording differ in length");
    const auto target_speed = stimulus_speed(stim);
    return mean_over(labels, rec, stim, SampleLabel::Pursuit, SampleLabel::Pursuit,
                     [&](std::size_t i, std::size_t j) { return std::abs(gaze_speed[i] - target_speed[j]); });
}

BehaviorScores behavior_scores(const std::vector<SampleLabel>& labels, const GazeRecording& rec,
                               const StimulusTrack& stim, const MetricsConfig& cfg) {
    const auto seg = segment_events(labels, rec);
    const auto speed = sample_speed(rec);
    BehaviorScores s;
    s.sqns = sqns(seg.events, stim, cfg);
    s.fqns = fqns(labels, rec, stim, cfg);
    s.pqns = pqns(labels, rec, stim);
    s.misfix = misfix(labels, rec, stim);
    s.fqls = fqls(labels, rec, stim);
    s.pqls_p = pqls_p(labels, rec, stim);
    s.pqls_v = pqls_v(labels, speed, rec, stim);
    return s;
}

Agreement sample_agreement(const std::vector<SampleLabel>& labels, const std::vector<SampleLabel>& truth) {
    if (labels.size() != truth.size()) throw GazeError(ErrorCode::InvalidArgument, "label sequences differ in length");
    Agreement a;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ++a.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(labels[i])];
    }
    std::size_t correct = 0;
    for (std::size_t c = 0; c < kLabelCount; ++c) {
        std::size_t predicted = 0, actual = 0;
        for (std::size_t o = 0; o < kLabelCount; ++o) {
            predicted += a.confusion[o][c];
            actual += a.confusion[c][o];
        }
        const std::size_t tp = a.confusion[c][c];
        correct += tp;
        if (predicted > 0) a.precision[c] = static_cast<double>(tp) / static_cast<double>(predicted);
        if (actual > 0) a.recall[c] = static_cast<double>(tp) / static_cast<double>(actual);
        if (predicted + actual > 0) a.f1[c] = 2.0 * static_cast<double>(tp) / static_cast<double>(predicted + actual);
    }
    a.accuracy = labels.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(labels.size());
    return a;
}

std::array<std::optional<double>, 7> as_row(const BehaviorScores& s) {
    return {s.sqns, s.fqns, s.pqns, s.misfix, s.fqls, s.pqls_p, s.pqls_v};
}

namespace {

std::string fmt(const std::optional<double>& v, const char* unit) {
    if (!v) return "-";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f%s", *v, unit);
    return buf;
}

constexpr std::array<const char*, 7> kUnits{"%", "%", "%", "%", "deg", "deg", "deg/s"};

}  // namespace

std::string score_table_csv(const std::vector<ScoreColumn>& columns) {
    std::ostringstream out;
    out << "metric";
    for (const auto& c : columns) out << ',' << c.name;
    out << '\n';
    for (std::size_t r = 0; r < kScoreNames.size(); ++r) {
        out << kScoreNames[r];
        for (const auto& c : columns) out << ',' << fmt(as_row(c.scores)[r], "");
        out << '\n';
    }
    return out.str();
}

std::string score_table_text(const std::vector<ScoreColumn>& columns) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"Behavior score"});
    for (const auto& c : columns) cells.back().push_back(c.name);
    for (std::size_t r = 0; r < kScoreNames.size(); ++r) {
        cells.push_back({kScoreNames[r]});
        for (const auto& c : columns) cells.back().push_back(fmt(as_row(c.scores)[r], kUnits[r]));
    }
    std::vector<std::size_t> width(columns.size() + 1, 0);
    for (const auto& row : cells)
        for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
    std::ostringstream out;
    for (const auto& row : cells) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k > 0) out << "  ";
            if (k == 0) {
                out << row[k] << std::string(width[k] - row[k].size(), ' ');
            } else {
                out << std::string(width[k] - row[k].size(), ' ') << row[k];
            }
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace gazehmm
