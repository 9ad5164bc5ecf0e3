#include "gazehmm/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gazehmm {

double MergeConfig::min_duration(SampleLabel kind) const noexcept {
    switch (kind) {
        case SampleLabel::Fixation: return min_fixation_ms;
        case SampleLabel::Pursuit: return min_pursuit_ms;
        case SampleLabel::Saccade: return min_saccade_ms;
        case SampleLabel::Noise: return 0.0;
    }
    return 0.0;
}

void validate(const MergeConfig& cfg) {
    if (!(cfg.gap_ms >= 0.0) || !(cfg.dist_deg >= 0.0)) {
        throw GazeError(ErrorCode::InvalidConfig, "merge gap and distance must be non-negative");
    }
    if (!(cfg.min_fixation_ms >= 0.0) || !(cfg.min_pursuit_ms >= 0.0) || !(cfg.min_saccade_ms >= 0.0)) {
        throw GazeError(ErrorCode::InvalidConfig, "minimal event durations must be non-negative");
    }
}

void validate(const HierarchicalConfig& cfg) {
    if (cfg.epochs1 < 1 || cfg.epochs2 < 1) throw GazeError(ErrorCode::InvalidConfig, "epochs must be >= 1");
    if (!(cfg.finetune_t > 0.0) || !(cfg.fixation_speed_ceiling > 0.0) || !(cfg.window_ms > 0.0) ||
        !(cfg.variance_floor > 0.0)) {
        throw GazeError(ErrorCode::InvalidConfig, "hierarchical thresholds must be positive");
    }
    for (const StageInit& s : {cfg.init1, cfg.init2}) {
        if (!(s.low_pct >= 0.0 && s.low_pct < s.high_pct && s.high_pct <= 100.0)) {
            throw GazeError(ErrorCode::InvalidConfig, "stage init percentiles must satisfy 0 <= low < high <= 100");
        }
        if (!(s.stay > 0.0 && s.stay < 1.0)) throw GazeError(ErrorCode::InvalidConfig, "stage self-transition must be in (0, 1)");
    }
    validate(cfg.merge);
}

namespace {

double variance(std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size());
}

std::size_t argmax_mean(const GaussianHmm& m) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < m.states(); ++s)
        if (m.emit[s].mean > m.emit[best].mean) best = s;
    return best;
}

}  // namespace

Stage1Result stage1_filter_saccades(const FeatureSeries& features, const HierarchicalConfig& cfg) {
    const std::size_t n = features.size();
    Stage1Result r;
    r.labels.assign(n, Stage1Label::Noise);
    std::vector<double> obs;
    std::vector<std::size_t> where;
    for (std::size_t i = 0; i < n; ++i) {
        if (!features.present(i)) continue;
        obs.push_back(features.speed[i]);
        where.push_back(i);
        r.labels[i] = Stage1Label::NonSaccade;
    }
    if (obs.size() < 2) throw GazeError(ErrorCode::TooShort, "stage 1 needs at least 2 valid samples");
    if (variance(obs) <= 0.0) {
        r.degenerate = true;
        return r;
    }
    const double pct[] = {cfg.init1.low_pct, cfg.init1.high_pct};
    const auto init = initial_model(obs, pct, cfg.init1.stay, cfg.variance_floor);
    r.fit = fit(init, obs, cfg.epochs1, cfg.variance_floor);
    const std::size_t saccade_state = argmax_mean(r.fit->model);
    for (std::size_t k = 0; k < where.size(); ++k) {
        if (r.fit->path[k] == saccade_state) r.labels[where[k]] = Stage1Label::Saccade;
    }
    return r;
}

Stage2Result stage2_split_fix_pursuit(const FeatureSeries& features, const GazeRecording& rec,
                                      const Stage1Result& stage1, const HierarchicalConfig& cfg) {
    const std::size_t n = features.size();
    if (rec.size() != n || stage1.labels.size() != n) {
        throw GazeError(ErrorCode::InvalidArgument, "stage 2 inputs differ in length");
    }
    Stage2Result r;
    r.labels.assign(n, SampleLabel::Noise);
    std::vector<std::uint8_t> include(n, 0);
    std::vector<Vec2> pos(n);
    for (std::size_t i = 0; i < n; ++i) {
        pos[i] = rec.samples[i].pos();
        switch (stage1.labels[i]) {
            case Stage1Label::Saccade: r.labels[i] = SampleLabel::Saccade; break;
            case Stage1Label::NonSaccade:
                r.labels[i] = SampleLabel::Fixation;
                include[i] = 1;
                break;
            case Stage1Label::Noise: break;
        }
    }
    // Dispersion is measured only over non-saccade stretches so that a saccade
    // never inflates the displacement of its neighbouring samples.
    r.displacement = windowed_displacement(pos, include, window_samples(rec, cfg.window_ms));

    std::vector<double> obs;
    std::vector<std::size_t> where;
    for (std::size_t i = 0; i < n; ++i) {
        if (!include[i]) continue;
        obs.push_back(r.displacement[i]);
        where.push_back(i);
    }
    if (obs.size() < 2 || variance(obs) <= 0.0) {
        r.degenerate = true;
    } else {
        const double pct[] = {cfg.init2.low_pct, cfg.init2.high_pct};
        const auto init = initial_model(obs, pct, cfg.init2.stay, cfg.variance_floor);
        r.fit = fit(init, obs, cfg.epochs2, cfg.variance_floor);
        const std::size_t pursuit_state = argmax_mean(r.fit->model);
        for (std::size_t k = 0; k < where.size(); ++k) {
            if (r.fit->path[k] == pursuit_state) r.labels[where[k]] = SampleLabel::Pursuit;
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (r.labels[i] != SampleLabel::Pursuit) continue;
        const double v = features.speed[i];
        if (cfg.finetune_high && v > cfg.finetune_t) {
            r.labels[i] = SampleLabel::Saccade;
            ++r.finetuned_to_saccade;
        } else if (cfg.finetune_low && v < cfg.fixation_speed_ceiling) {
            r.labels[i] = SampleLabel::Fixation;
            ++r.finetuned_to_fixation;
        }
    }
    return r;
}

namespace {

struct Span {
    SampleLabel kind;
    std::size_t first;
    std::size_t last;
};

class EventBuilder {
public:
    EventBuilder(const GazeRecording& rec) : rec_(rec), speed_(sample_speed(rec)) {}

    Event build(const Span& s) const {
        Event e;
        e.kind = s.kind;
        e.first = s.first;
        e.last = s.last;
        e.onset = rec_.samples[s.first].t;
        e.offset = s.last + 1 < rec_.size() ? rec_.samples[s.last + 1].t : rec_.samples[s.last].t + rec_.period_ms();
        double sx = 0.0, sy = 0.0, sv = 0.0;
        std::size_t count = 0;
        std::optional<std::size_t> first_valid, last_valid;
        for (std::size_t i = s.first; i <= s.last; ++i) {
            const auto& g = rec_.samples[i];
            if (!g.valid) continue;
            if (!first_valid) first_valid = i;
            last_valid = i;
            sx += g.x;
            sy += g.y;
            sv += speed_[i];
            ++count;
        }
        if (count > 0) {
            e.centroid = {sx / static_cast<double>(count), sy / static_cast<double>(count)};
            e.mean_speed = sv / static_cast<double>(count);
            e.amplitude = distance(rec_.samples[*last_valid].pos(), rec_.samples[*first_valid].pos());
        }
        return e;
    }

private:
    const GazeRecording& rec_;
    std::vector<double> speed_;
};

std::vector<Span> runs(const std::vector<SampleLabel>& labels) {
    std::vector<Span> out;
    std::size_t i = 0;
    while (i < labels.size()) {
        std::size_t j = i;
        while (j + 1 < labels.size() && labels[j + 1] == labels[i]) ++j;
        if (labels[i] != SampleLabel::Noise) out.push_back({labels[i], i, j});
        i = j + 1;
    }
    return out;
}

void paint(std::vector<SampleLabel>& labels, const GazeRecording& rec, const Event& e) {
    for (std::size_t i = e.first; i <= e.last; ++i) {
        labels[i] = rec.samples[i].valid ? e.kind : SampleLabel::Noise;
    }
}

// Left-to-right: each event is merged with the most recent same-kind event
// when both the gap and the centroid distance criteria hold. The gap may hold
// Noise and fragments shorter than their minimal duration, never a full event
// of another kind.
std::vector<Event> criterion_merge(std::vector<Event> events, const EventBuilder& builder, const MergeConfig& cfg) {
    std::vector<Event> out;
    for (auto& e : events) {
        auto same = out.rbegin();
        while (same != out.rend() && same->kind != e.kind && same->duration() < cfg.min_duration(same->kind)) ++same;
        if (same != out.rend() && same->kind == e.kind) {
            const Event& p = *same;
            if (e.onset - p.offset <= cfg.gap_ms && distance(p.centroid, e.centroid) <= cfg.dist_deg) {
                const Event merged = builder.build({e.kind, p.first, e.last});
                out.erase(std::prev(same.base()), out.end());
                out.push_back(merged);
                continue;
            }
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<Event> absorb_short(std::vector<Event> events, const EventBuilder& builder, const MergeConfig& cfg) {
    while (events.size() > 1) {
        std::size_t victim = events.size();
        for (std::size_t i = 0; i < events.size(); ++i) {
            if (events[i].duration() >= cfg.min_duration(events[i].kind)) continue;
            if (victim == events.size() || events[i].duration() < events[victim].duration()) victim = i;
        }
        if (victim == events.size()) break;
        std::size_t host = 0;
        if (victim == 0) {
            host = 1;
        } else if (victim + 1 == events.size()) {
            host = victim - 1;
        } else {
            host = events[victim + 1].duration() > events[victim - 1].duration() ? victim + 1 : victim - 1;
        }
        const Event& h = events[host];
        const Event& v = events[victim];
        const Event merged = builder.build({h.kind, std::min(h.first, v.first), std::max(h.last, v.last)});
        const std::size_t lo = std::min(host, victim);
        events.erase(events.begin() + static_cast<std::ptrdiff_t>(lo),
                     events.begin() + static_cast<std::ptrdiff_t>(lo + 2));
        events.insert(events.begin() + static_cast<std::ptrdiff_t>(lo), merged);
    }
    return events;
}

}  // namespace

Segmentation segment_events(const std::vector<SampleLabel>& labels, const GazeRecording& rec) {
    if (labels.size() != rec.size()) throw GazeError(ErrorCode::InvalidArgument, "labels and recording differ in length");
    const EventBuilder builder(rec);
    Segmentation seg;
    seg.labels = labels;
    for (const auto& s : runs(labels)) seg.events.push_back(builder.build(s));
    return seg;
}

Segmentation merge_events(const std::vector<SampleLabel>& labels, const GazeRecording& rec, const MergeConfig& cfg) {
    validate(cfg);
    if (labels.size() != rec.size()) throw GazeError(ErrorCode::InvalidArgument, "labels and recording differ in length");
    const EventBuilder builder(rec);
    std::vector<Event> events;
    for (const auto& s : runs(labels)) events.push_back(builder.build(s));

    events = criterion_merge(std::move(events), builder, cfg);
    events = absorb_short(std::move(events), builder, cfg);
    events = criterion_merge(std::move(events), builder, cfg);

    Segmentation seg;
    seg.labels = labels;
    for (const auto& e : events) paint(seg.labels, rec, e);
    seg.events = std::move(events);
    return seg;
}

ClassifyResult classify(const GazeRecording& rec, const HierarchicalConfig& cfg) {
    validate(cfg);
    ClassifyResult out;
    if (rec.valid_count() == 0) {
        out.labels.assign(rec.size(), SampleLabel::Noise);
        out.flags.push_back("NoValidSamples");
        return out;
    }
    const auto features = compute_features(rec, cfg.window_ms);
    const auto s1 = stage1_filter_saccades(features, cfg);
    if (s1.degenerate) out.flags.push_back("DegenerateSignal");
    if (s1.fit && !s1.fit->starved.empty()) out.flags.push_back("StateStarvation:stage1");
    const auto s2 = stage2_split_fix_pursuit(features, rec, s1, cfg);
    if (s2.fit && !s2.fit->starved.empty()) out.flags.push_back("StateStarvation:stage2");
    auto seg = merge_events(s2.labels, rec, cfg.merge);
    out.labels = std::move(seg.labels);
    out.events = std::move(seg.events);
    return out;
}

}  // namespace gazehmm
