#include "gazehmm/features.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace gazehmm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// [begin, end) ranges of consecutive samples with include[i] set.
std::vector<std::pair<std::size_t, std::size_t>> runs_of(std::span<const std::uint8_t> include) {
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    std::size_t i = 0;
    while (i < include.size()) {
        if (!include[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < include.size() && include[j]) ++j;
        runs.emplace_back(i, j);
        i = j;
    }
    return runs;
}

double squared(double v) { return v * v; }

}  // namespace

std::vector<double> run_speed(std::span<const double> t_ms, std::span<const Vec2> pos) {
    const std::size_t n = pos.size();
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
        out[i] = distance(pos[hi], pos[lo]) / (t_ms[hi] - t_ms[lo]) * 1000.0;
    }
    return out;
}

std::vector<double> run_derivative_magnitude(std::span<const double> t_ms, std::span<const double> value) {
    const std::size_t n = value.size();
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
        out[i] = std::abs(value[hi] - value[lo]) / (t_ms[hi] - t_ms[lo]) * 1000.0;
    }
    return out;
}

std::vector<double> windowed_displacement(std::span<const Vec2> pos, std::span<const std::uint8_t> include,
                                          std::size_t window_samples) {
    std::vector<double> out(pos.size(), kNaN);
    window_samples = std::max<std::size_t>(window_samples, 1);
    for (const auto& [begin, end] : runs_of(include)) {
        const std::size_t len = end - begin;
        const std::size_t w = std::min(window_samples, len);
        for (std::size_t i = begin; i < end; ++i) {
            std::size_t lo = i >= begin + w / 2 ? i - w / 2 : begin;
            lo = std::min(lo, end - w);
            double best = 0.0;
            for (std::size_t a = lo; a < lo + w; ++a) {
                for (std::size_t b = a + 1; b < lo + w; ++b) {
                    best = std::max(best, squared(pos[a].x - pos[b].x) + squared(pos[a].y - pos[b].y));
                }
            }
            out[i] = std::sqrt(best);
        }
    }
    return out;
}

std::size_t window_samples(const GazeRecording& rec, double window_ms) {
    const double n = std::round(window_ms / rec.period_ms());
    return static_cast<std::size_t>(std::max(2.0, n));
}

std::vector<double> sample_speed(const GazeRecording& rec) {
    const std::size_t n = rec.size();
    std::vector<double> out(n, kNaN);
    std::vector<std::uint8_t> valid(n);
    std::vector<double> t(n);
    std::vector<Vec2> pos(n);
    for (std::size_t i = 0; i < n; ++i) {
        valid[i] = rec.samples[i].valid ? 1 : 0;
        t[i] = rec.samples[i].t;
        pos[i] = rec.samples[i].pos();
    }
    for (const auto& [begin, end] : runs_of(valid)) {
        const auto speed = run_speed(std::span<const double>(t.data() + begin, end - begin),
                                     std::span<const Vec2>(pos.data() + begin, end - begin));
        std::copy(speed.begin(), speed.end(), out.begin() + static_cast<std::ptrdiff_t>(begin));
    }
    return out;
}

FeatureSeries compute_features(const GazeRecording& rec, double window_ms) {
    if (rec.valid_count() < 3) {
        throw GazeError(ErrorCode::TooShort, "feature computation needs at least 3 valid samples");
    }
    if (!(window_ms >= 2.0 * rec.period_ms())) {
        throw GazeError(ErrorCode::InvalidArgument, "displacement window must span at least 2 sample periods");
    }
    const std::size_t n = rec.size();
    FeatureSeries fs;
    fs.window_ms = window_ms;
    fs.speed.assign(n, kNaN);
    fs.accel.assign(n, kNaN);

    std::vector<std::uint8_t> valid(n);
    std::vector<double> t(n);
    std::vector<Vec2> pos(n);
    for (std::size_t i = 0; i < n; ++i) {
        valid[i] = rec.samples[i].valid ? 1 : 0;
        t[i] = rec.samples[i].t;
        pos[i] = rec.samples[i].pos();
    }

    // Invalid samples split differentiation runs.
    for (const auto& [begin, end] : runs_of(valid)) {
        const std::span<const double> run_t(t.data() + begin, end - begin);
        const auto speed = run_speed(run_t, std::span<const Vec2>(pos.data() + begin, end - begin));
        const auto accel = run_derivative_magnitude(run_t, speed);
        std::copy(speed.begin(), speed.end(), fs.speed.begin() + static_cast<std::ptrdiff_t>(begin));
        std::copy(accel.begin(), accel.end(), fs.accel.begin() + static_cast<std::ptrdiff_t>(begin));
    }
    fs.disp = windowed_displacement(pos, valid, window_samples(rec, window_ms));
    return fs;
}

ClusterReport kmeans(const std::vector<std::vector<double>>& points, std::size_t k, std::uint64_t seed,
                     const KMeansOptions& opts) {
    const std::size_t n = points.size();
    if (k < 1 || k > n) throw GazeError(ErrorCode::InvalidArgument, "kmeans needs 1 <= k <= number of points");
    const std::size_t dims = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dims) throw GazeError(ErrorCode::InvalidArgument, "kmeans points differ in dimension");
    }

    std::vector<double> mean(dims, 0.0), scale(dims, 1.0);
    if (opts.standardize) {
        for (const auto& p : points)
            for (std::size_t d = 0; d < dims; ++d) mean[d] += p[d];
        for (auto& m : mean) m /= static_cast<double>(n);
        std::vector<double> var(dims, 0.0);
        for (const auto& p : points)
            for (std::size_t d = 0; d < dims; ++d) var[d] += squared(p[d] - mean[d]);
        for (std::size_t d = 0; d < dims; ++d) {
            const double sd = std::sqrt(var[d] / static_cast<double>(n));
            scale[d] = sd > 0.0 ? sd : 1.0;
        }
    }
    std::vector<std::vector<double>> z(n, std::vector<double>(dims));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < dims; ++d) z[i][d] = (points[i][d] - mean[d]) / scale[d];

    auto dist2 = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t d = 0; d < dims; ++d) s += squared(a[d] - b[d]);
        return s;
    };

    ClusterReport report;
    report.k = k;
    report.standardized = opts.standardize;

    // k-means++ seeding.
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> centers;
    centers.reserve(k);
    centers.push_back(z[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = dist2(z[i], centers[0]);
    while (centers.size() < k) {
        const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
        std::size_t pick = 0;
        if (total <= 0.0) {
            report.degenerate = true;
            pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        } else {
            double r = std::uniform_real_distribution<double>(0.0, total)(rng);
            for (pick = 0; pick + 1 < n; ++pick) {
                r -= nearest[pick];
                if (r < 0.0) break;
            }
        }
        centers.push_back(z[pick]);
        for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], dist2(z[i], centers.back()));
    }

    std::vector<std::size_t> assign(n, k);
    for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = dist2(z[i], centers[0]);
            for (std::size_t c = 1; c < k; ++c) {
                const double d = dist2(z[i], centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[i] != best) changed = true;
            assign[i] = best;
            inertia += best_d;
        }
        assert(report.inertia_trace.empty() ||
               inertia <= report.inertia_trace.back() * (1.0 + 1e-12) + 1e-12);
        report.inertia_trace.push_back(inertia);
        report.iterations = iter + 1;
        if (!changed) break;

        std::vector<std::vector<double>> sums(k, std::vector<double>(dims, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assign[i]];
            for (std::size_t d = 0; d < dims; ++d) sums[assign[i]][d] += z[i][d];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its centre
            for (std::size_t d = 0; d < dims; ++d) centers[c][d] = sums[c][d] / static_cast<double>(counts[c]);
        }
    }

    report.assignments = assign;
    report.inertia = report.inertia_trace.back();
    report.centroids.assign(k, std::vector<double>(dims));
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t d = 0; d < dims; ++d) report.centroids[c][d] = centers[c][d] * scale[d] + mean[d];
    return report;
}

std::string feature_name(Feature f) {
    switch (f) {
        case Feature::Speed: return "speed";
        case Feature::Accel: return "accel";
        case Feature::Disp: return "disp";
    }
    return "unknown";
}

std::vector<FeatureCluster> analyze_features(const FeatureSeries& features, std::size_t k, std::uint64_t seed) {
    std::vector<FeatureCluster> out;
    for (Feature f : {Feature::Speed, Feature::Accel, Feature::Disp}) {
        const auto& series = f == Feature::Speed ? features.speed : f == Feature::Accel ? features.accel : features.disp;
        FeatureCluster fc;
        fc.feature = f;
        std::vector<std::vector<double>> points;
        for (double v : series) {
            if (std::isnan(v)) continue;
            fc.values.push_back(v);
            points.push_back({v});
        }
        fc.report = kmeans(points, k, seed);
        out.push_back(std::move(fc));
    }
    return out;
}

double separation_statistic(std::span<const double> values, std::span<const std::size_t> assignments,
                            std::size_t k) {
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    const double grand = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        sum[assignments[i]] += values[i];
        ++count[assignments[i]];
    }
    double between = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        if (count[c] == 0) continue;
        between += static_cast<double>(count[c]) * squared(sum[c] / static_cast<double>(count[c]) - grand);
    }
    double within = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        within += squared(values[i] - sum[assignments[i]] / static_cast<double>(count[assignments[i]]));
    }
    if (between <= 0.0) return 0.0;
    if (within <= 0.0) return std::numeric_limits<double>::infinity();
    return between / within;
}

FeatureSelection select_features(const std::vector<FeatureCluster>& reports) {
    FeatureSelection sel;
    for (const auto& r : reports) {
        sel.scores.push_back({r.feature, separation_statistic(r.values, r.report.assignments, r.report.k)});
    }
    // Speed isolates saccades; dispersion is location-invariant and separates
    // fixation from pursuit, where speed is biased.
    sel.stage1 = Feature::Speed;
    sel.stage2 = Feature::Disp;
    return sel;
}

}  // namespace gazehmm
