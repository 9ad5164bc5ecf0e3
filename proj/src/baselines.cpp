#include "gazehmm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gazehmm {

void validate(const ThresholdConfig& cfg) {
    // v_low == v_high is allowed: I-VVT then reduces to a two-class I-VT split.
    if (!(cfg.v_low > 0.0) || !(cfg.v_high >= cfg.v_low)) {
        throw GazeError(ErrorCode::InvalidConfig, "I-VVT needs v_high >= v_low > 0");
    }
    if (!(cfg.v_sac > 0.0) || !(cfg.dispersion_deg > 0.0) || !(cfg.window_ms > 0.0) ||
        !(cfg.direction_window_ms > 0.0)) {
        throw GazeError(ErrorCode::InvalidConfig, "baseline thresholds must be positive");
    }
    if (!(cfg.similarity_cut >= 0.0 && cfg.similarity_cut <= 1.0)) {
        throw GazeError(ErrorCode::InvalidConfig, "similarity_cut must lie in [0, 1]");
    }
}

namespace {

// [begin, end) runs of valid samples at or below the saccade threshold; those
// above it are labelled Saccade in `labels`.
std::vector<std::pair<std::size_t, std::size_t>> ivt_split(const FeatureSeries& features, double v_sac,
                                                           std::vector<SampleLabel>& labels) {
    const std::size_t n = features.size();
    labels.assign(n, SampleLabel::Noise);
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    std::size_t i = 0;
    while (i < n) {
        if (!features.present(i)) {
            ++i;
            continue;
        }
        if (features.speed[i] > v_sac) {
            labels[i] = SampleLabel::Saccade;
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && features.present(j) && !(features.speed[j] > v_sac)) ++j;
        runs.emplace_back(i, j);
        i = j;
    }
    return runs;
}

std::vector<Vec2> positions(const GazeRecording& rec) {
    std::vector<Vec2> pos(rec.size());
    for (std::size_t i = 0; i < rec.size(); ++i) pos[i] = rec.samples[i].pos();
    return pos;
}

void require_same_length(const FeatureSeries& features, const GazeRecording& rec) {
    if (features.size() != rec.size()) {
        throw GazeError(ErrorCode::InvalidArgument, "features and recording differ in length");
    }
}

}  // namespace

double idt_dispersion(std::span<const Vec2> pos) {
    if (pos.empty()) return 0.0;
    auto [min_x, max_x] = std::pair{pos[0].x, pos[0].x};
    auto [min_y, max_y] = std::pair{pos[0].y, pos[0].y};
    for (const auto& p : pos) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    return (max_x - min_x) + (max_y - min_y);
}

double mean_resultant_length(std::span<const Vec2> path) {
    Vec2 sum;
    std::size_t steps = 0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const Vec2 d = path[i] - path[i - 1];
        const double len = norm(d);
        if (len == 0.0) continue;
        sum = sum + (1.0 / len) * d;
        ++steps;
    }
    return steps == 0 ? 0.0 : norm(sum) / static_cast<double>(steps);
}

std::vector<SampleLabel> ivvt(const FeatureSeries& features, const ThresholdConfig& cfg) {
    validate(cfg);
    std::vector<SampleLabel> labels(features.size(), SampleLabel::Noise);
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (!features.present(i)) continue;
        const double v = features.speed[i];
        if (v > cfg.v_high) {
            labels[i] = SampleLabel::Saccade;
        } else if (v <= cfg.v_low) {
            labels[i] = SampleLabel::Fixation;
        } else {
            labels[i] = SampleLabel::Pursuit;
        }
    }
    return labels;
}

std::vector<SampleLabel> ivdt(const FeatureSeries& features, const GazeRecording& rec, const ThresholdConfig& cfg) {
    validate(cfg);
    require_same_length(features, rec);
    std::vector<SampleLabel> labels;
    const auto runs = ivt_split(features, cfg.v_sac, labels);
    const auto pos = positions(rec);
    const std::size_t w = window_samples(rec, cfg.window_ms);

    for (const auto& [begin, end] : runs) {
        std::size_t i = begin;
        while (i < end) {
            if (i + w > end) {
                std::fill(labels.begin() + static_cast<std::ptrdiff_t>(i),
                          labels.begin() + static_cast<std::ptrdiff_t>(end), SampleLabel::Pursuit);
                break;
            }
            std::size_t j = i + w;
            double min_x = pos[i].x, max_x = pos[i].x, min_y = pos[i].y, max_y = pos[i].y;
            for (std::size_t k = i; k < j; ++k) {
                min_x = std::min(min_x, pos[k].x);
                max_x = std::max(max_x, pos[k].x);
                min_y = std::min(min_y, pos[k].y);
                max_y = std::max(max_y, pos[k].y);
            }
            if ((max_x - min_x) + (max_y - min_y) > cfg.dispersion_deg) {
                labels[i] = SampleLabel::Pursuit;
                ++i;
                continue;
            }
            // Grow the window while the dispersion stays under the threshold.
            while (j < end) {
                const double nx0 = std::min(min_x, pos[j].x), nx1 = std::max(max_x, pos[j].x);
                const double ny0 = std::min(min_y, pos[j].y), ny1 = std::max(max_y, pos[j].y);
                if ((nx1 - nx0) + (ny1 - ny0) > cfg.dispersion_deg) break;
                min_x = nx0;
                max_x = nx1;
                min_y = ny0;
                max_y = ny1;
                ++j;
            }
            std::fill(labels.begin() + static_cast<std::ptrdiff_t>(i),
                      labels.begin() + static_cast<std::ptrdiff_t>(j), SampleLabel::Fixation);
            i = j;
        }
    }
    return labels;
}

std::vector<SampleLabel> ivmp(const FeatureSeries& features, const GazeRecording& rec, const ThresholdConfig& cfg) {
    validate(cfg);
    require_same_length(features, rec);
    std::vector<SampleLabel> labels;
    const auto runs = ivt_split(features, cfg.v_sac, labels);
    const auto pos = positions(rec);
    const std::size_t w_cfg = window_samples(rec, cfg.direction_window_ms);

    for (const auto& [begin, end] : runs) {
        const std::size_t w = std::min(w_cfg, end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            std::size_t lo = i >= begin + w / 2 ? i - w / 2 : begin;
            lo = std::min(lo, end - w);
            const double r = mean_resultant_length(std::span<const Vec2>(pos.data() + lo, w));
            labels[i] = r > cfg.similarity_cut ? SampleLabel::Pursuit : SampleLabel::Fixation;
        }
    }
    return labels;
}

ClassifyResult three_state_hmm(const FeatureSeries& features, const GazeRecording& rec, const ThreeStateConfig& cfg) {
    require_same_length(features, rec);
    if (cfg.epochs < 1) throw GazeError(ErrorCode::InvalidConfig, "epochs must be >= 1");
    if (!(cfg.low_pct < cfg.mid_pct && cfg.mid_pct < cfg.high_pct)) {
        throw GazeError(ErrorCode::InvalidConfig, "3-state init percentiles must be increasing");
    }
    ClassifyResult out;
    std::vector<SampleLabel> labels(features.size(), SampleLabel::Noise);
    std::vector<double> obs;
    std::vector<std::size_t> where;
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (!features.present(i)) continue;
        obs.push_back(features.speed[i]);
        where.push_back(i);
        labels[i] = SampleLabel::Fixation;
    }
    if (obs.size() < 2) throw GazeError(ErrorCode::TooShort, "3-state HMM needs at least 2 valid samples");

    const double mean = std::accumulate(obs.begin(), obs.end(), 0.0) / static_cast<double>(obs.size());
    const bool constant = std::all_of(obs.begin(), obs.end(), [&](double v) { return v == mean; });
    if (constant) {
        // Three identical states cannot be told apart; nothing to fit.
        out.flags.push_back("DegenerateSignal");
    } else {
        const double pct[] = {cfg.low_pct, cfg.mid_pct, cfg.high_pct};
        const auto init = initial_model(obs, pct, cfg.stay, cfg.variance_floor);
        const auto fitted = fit(init, obs, cfg.epochs, cfg.variance_floor);
        for (std::size_t s : fitted.starved) out.flags.push_back("StateStarvation:" + std::to_string(s));

        std::vector<std::size_t> order(3);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return fitted.model.emit[a].mean < fitted.model.emit[b].mean;
        });
        SampleLabel by_state[3];
        by_state[order[0]] = SampleLabel::Fixation;
        by_state[order[1]] = SampleLabel::Pursuit;
        by_state[order[2]] = SampleLabel::Saccade;
        for (std::size_t k = 0; k < where.size(); ++k) labels[where[k]] = by_state[fitted.path[k]];
    }
    auto seg = merge_events(labels, rec, cfg.merge);
    out.labels = std::move(seg.labels);
    out.events = std::move(seg.events);
    return out;
}

}  // namespace gazehmm
