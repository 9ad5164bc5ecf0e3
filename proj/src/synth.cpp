#include "gazehmm/synth.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

namespace gazehmm {

double min_jerk(double tau) noexcept {
    const double t3 = tau * tau * tau;
    return t3 * (10.0 - 15.0 * tau + 6.0 * tau * tau);
}

double main_sequence_ms(double amplitude_deg) noexcept { return 2.2 * amplitude_deg + 21.0; }

double min_jerk_peak_speed(double amplitude_deg, double duration_ms) noexcept {
    return 1.875 * amplitude_deg / (duration_ms / 1000.0);
}

namespace {

[[noreturn]] void bad_script(const std::string& msg) { throw GazeError(ErrorCode::InvalidScript, msg); }

bool finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

std::size_t samples_for(double ms, double rate_hz) {
    return static_cast<std::size_t>(std::llround(ms * rate_hz / 1000.0));
}

// Samples spanned by a minimum-jerk movement, both end points included.
std::size_t movement_samples(double dur_ms, double rate_hz) { return std::max<std::size_t>(2, samples_for(dur_ms, rate_hz) + 1); }

struct Timeline {
    std::vector<Vec2> stim;
    std::vector<SampleLabel> kind;
    std::vector<Vec2> eye;
    std::vector<SampleLabel> label;
    struct PursuitSpan {
        std::size_t begin, end;
        Vec2 dir;
    };
    std::vector<PursuitSpan> pursuits;

    void push(Vec2 s, SampleLabel k, Vec2 e, SampleLabel l) {
        stim.push_back(s);
        kind.push_back(k);
        eye.push_back(e);
        label.push_back(l);
    }
};

Timeline build_timeline(const Scenario& sc) {
    Timeline tl;
    Vec2 cur = sc.start;
    for (const auto& seg : sc.script) {
        if (const auto* f = std::get_if<Fixate>(&seg)) {
            const std::size_t n = samples_for(f->dur_ms, sc.rate_hz);
            for (std::size_t k = 0; k < n; ++k) tl.push(cur, SampleLabel::Fixation, cur, SampleLabel::Fixation);
        } else if (const auto* j = std::get_if<Jump>(&seg)) {
            const double amp = distance(j->to, cur);
            const std::size_t n = movement_samples(j->dur_ms.value_or(main_sequence_ms(amp)), sc.rate_hz);
            for (std::size_t k = 0; k < n; ++k) {
                const double tau = static_cast<double>(k) / static_cast<double>(n - 1);
                const Vec2 e = k + 1 == n ? j->to : cur + min_jerk(tau) * (j->to - cur);
                tl.push(j->to, SampleLabel::Saccade, e, SampleLabel::Saccade);
            }
            cur = j->to;
        } else {
            const auto& p = std::get<Pursue>(seg);
            const std::size_t n = samples_for(p.dur_ms, sc.rate_hz);
            const Vec2 from = cur;
            const std::size_t begin = tl.stim.size();
            for (std::size_t k = 0; k < n; ++k) {
                cur = from + (static_cast<double>(k + 1) / sc.rate_hz) * p.velocity;
                tl.push(cur, SampleLabel::Pursuit, cur, SampleLabel::Pursuit);
            }
            const double speed = norm(p.velocity);
            const Vec2 dir = speed > 0.0 ? (1.0 / speed) * p.velocity : Vec2{1.0, 0.0};
            tl.pursuits.push_back({begin, tl.stim.size(), dir});
        }
    }
    return tl;
}

// Corrective saccades come in pairs: a catch-up step ahead of the target and a
// return to it, so pursuit segments end on target.
void add_corrective_saccades(const Scenario& sc, Timeline& tl, std::mt19937_64& rng) {
    if (sc.corrective_rate <= 0.0) return;
    const std::size_t spacing = samples_for(sc.corrective_spacing_ms, sc.rate_hz);
    std::exponential_distribution<double> gap(sc.corrective_rate / sc.rate_hz);
    std::uniform_real_distribution<double> amp(sc.corrective_min_deg, sc.corrective_max_deg);
    for (const auto& span : tl.pursuits) {
        struct Slot {
            std::size_t start, n;
        };
        std::vector<Slot> slots;
        std::vector<double> amps;
        std::size_t cursor = span.begin + spacing;
        while (true) {
            const double a = amps.size() % 2 == 0 ? amp(rng) : amps.back();
            const std::size_t n = movement_samples(main_sequence_ms(a), sc.rate_hz);
            const std::size_t start = cursor + static_cast<std::size_t>(std::floor(gap(rng)));
            if (start + n + spacing > span.end) break;
            slots.push_back({start, n});
            amps.push_back(a);
            cursor = start + n + spacing;
        }
        if (slots.size() % 2 == 1) {
            slots.pop_back();
            amps.pop_back();
        }
        for (std::size_t s = 0; s < slots.size(); s += 2) {
            const Slot& fwd = slots[s];
            const Slot& back = slots[s + 1];
            const double a = amps[s];
            for (std::size_t i = fwd.start; i < back.start + back.n; ++i) {
                double offset = a;
                if (i < fwd.start + fwd.n) {
                    offset = a * min_jerk(static_cast<double>(i - fwd.start) / static_cast<double>(fwd.n - 1));
                    tl.label[i] = SampleLabel::Saccade;
                } else if (i >= back.start) {
                    offset = a * (1.0 - min_jerk(static_cast<double>(i - back.start) / static_cast<double>(back.n - 1)));
                    tl.label[i] = SampleLabel::Saccade;
                }
                tl.eye[i] = tl.eye[i] + offset * span.dir;
            }
        }
    }
}

// Gaussian-smoothed white noise with marginal std sigma.
std::vector<double> correlated_noise(std::size_t n, double sigma, double corr_samples, std::mt19937_64& rng) {
    std::vector<double> out(n, 0.0);
    if (sigma <= 0.0 || n == 0) return out;
    std::normal_distribution<double> normal(0.0, 1.0);
    if (corr_samples <= 0.0) {
        for (auto& v : out) v = sigma * normal(rng);
        return out;
    }
    const std::size_t half = static_cast<std::size_t>(std::ceil(4.0 * corr_samples));
    std::vector<double> kernel(2 * half + 1);
    double energy = 0.0;
    for (std::size_t k = 0; k < kernel.size(); ++k) {
        const double d = static_cast<double>(k) - static_cast<double>(half);
        kernel[k] = std::exp(-0.5 * d * d / (corr_samples * corr_samples));
        energy += kernel[k] * kernel[k];
    }
    const double scale = sigma / std::sqrt(energy);
    std::vector<double> white(n + 2 * half);
    for (auto& w : white) w = normal(rng);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * white[i + k];
        out[i] = scale * acc;
    }
    return out;
}

}  // namespace

void validate(const Scenario& sc) {
    if (!(sc.rate_hz > 0.0) || !std::isfinite(sc.rate_hz)) bad_script("rate_hz must be positive");
    if (!(sc.noise_sigma_deg >= 0.0) || !(sc.noise_corr_ms >= 0.0) || !(sc.noise_white_deg >= 0.0)) {
        bad_script("noise parameters must be non-negative");
    }
    if (sc.noise_white_deg > sc.noise_sigma_deg) bad_script("noise_white_deg exceeds noise_sigma_deg");
    if (!(sc.latency_ms >= 0.0)) bad_script("latency_ms must be non-negative");
    if (!(sc.corrective_rate >= 0.0)) bad_script("corrective_rate must be non-negative");
    if (!(sc.corrective_min_deg > 0.0) || !(sc.corrective_max_deg >= sc.corrective_min_deg)) {
        bad_script("corrective amplitude range must be positive and ordered");
    }
    if (!(sc.corrective_spacing_ms >= 0.0)) bad_script("corrective_spacing_ms must be non-negative");
    if (!finite(sc.start)) bad_script("start position must be finite");
    if (sc.script.empty()) bad_script("script is empty");
    Vec2 cur = sc.start;
    for (std::size_t i = 0; i < sc.script.size(); ++i) {
        const std::string at = "segment " + std::to_string(i) + ": ";
        if (const auto* f = std::get_if<Fixate>(&sc.script[i])) {
            if (!(f->dur_ms > 0.0)) bad_script(at + "fixate duration must be positive");
            if (f->pos && !(*f->pos == cur)) bad_script(at + "fixate position differs from the current target; use a jump");
            if (samples_for(f->dur_ms, sc.rate_hz) == 0) bad_script(at + "fixate shorter than one sample");
        } else if (const auto* j = std::get_if<Jump>(&sc.script[i])) {
            if (!finite(j->to)) bad_script(at + "jump target must be finite");
            if (!(distance(j->to, cur) > 0.0)) bad_script(at + "jump amplitude must be positive");
            if (j->dur_ms && !(*j->dur_ms > 0.0)) bad_script(at + "jump duration must be positive");
            cur = j->to;
        } else {
            const auto& p = std::get<Pursue>(sc.script[i]);
            if (!(p.dur_ms > 0.0)) bad_script(at + "pursue duration must be positive");
            if (!finite(p.velocity)) bad_script(at + "pursue velocity must be finite");
            if (samples_for(p.dur_ms, sc.rate_hz) == 0) bad_script(at + "pursue shorter than one sample");
            cur = cur + (p.dur_ms / 1000.0) * p.velocity;
        }
    }
}

SynthOutput generate(const Scenario& sc) {
    validate(sc);
    std::mt19937_64 rng(sc.seed);
    Timeline tl = build_timeline(sc);
    add_corrective_saccades(sc, tl, rng);

    const std::size_t n = tl.stim.size();
    const std::size_t lag = samples_for(sc.latency_ms, sc.rate_hz);
    const double corr = sc.noise_corr_ms * sc.rate_hz / 1000.0;
    const double slow = std::sqrt(sc.noise_sigma_deg * sc.noise_sigma_deg - sc.noise_white_deg * sc.noise_white_deg);
    auto nx = correlated_noise(n, slow, corr, rng);
    auto ny = correlated_noise(n, slow, corr, rng);
    const auto jx = correlated_noise(n, sc.noise_white_deg, 0.0, rng);
    const auto jy = correlated_noise(n, sc.noise_white_deg, 0.0, rng);
    for (std::size_t i = 0; i < n; ++i) {
        nx[i] += jx[i];
        ny[i] += jy[i];
    }

    SynthOutput out;
    out.rec.rate_hz = sc.rate_hz;
    out.rec.samples.resize(n);
    out.stim.samples.resize(n);
    out.truth.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * 1000.0 / sc.rate_hz;
        out.stim.samples[i] = {t, tl.stim[i].x, tl.stim[i].y, tl.kind[i]};
        const Vec2 eye = i < lag ? sc.start : tl.eye[i - lag];
        out.truth[i] = i < lag ? SampleLabel::Fixation : tl.label[i - lag];
        out.rec.samples[i] = {t, eye.x + nx[i], eye.y + ny[i], true};
    }
    return out;
}

BehaviorScores ideal_scores(const Scenario& sc) {
    const auto g = generate(sc);
    return behavior_scores(g.truth, g.rec, g.stim);
}

Scenario default_scenario() {
    Scenario sc;
    sc.start = {-4.0, 3.0};
    sc.script = {
        Fixate{std::nullopt, 4800.0},
        Jump{{10.0, 0.0}, std::nullopt},
        Pursue{{-10.0, 0.0}, 3000.0},
        Fixate{std::nullopt, 4800.0},
        Jump{{-18.0, -12.0}, std::nullopt},
        Pursue{{10.0, 7.5}, 2500.0},
        Fixate{std::nullopt, 4798.0},
    };
    sc.rate_hz = 1000.0;
    sc.noise_sigma_deg = 0.3;
    sc.noise_white_deg = 0.0;
    sc.noise_corr_ms = 100.0;
    sc.latency_ms = 150.0;
    sc.corrective_rate = 1.0;
    sc.seed = 42;
    return sc;
}

Scenario clean_scenario() {
    Scenario sc = default_scenario();
    sc.noise_sigma_deg = 0.0;
    sc.noise_white_deg = 0.0;
    sc.latency_ms = 0.0;
    sc.corrective_rate = 0.0;
    return sc;
}

// Scenario files are JSON:
// {"start":[x,y], "rate_hz":1000, ..., "script":[{"fixate":{"dur_ms":500}},
//  {"jump":{"to":[x,y]}}, {"pursue":{"velocity":[vx,vy],"dur_ms":1000}}]}
namespace {

using nlohmann::json;

Vec2 vec_from(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        bad_script("expected a [x, y] pair");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

json vec_to(Vec2 v) { return json::array({v.x, v.y}); }

double number(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) bad_script(std::string(key) + " must be a number");
    return obj[key].get<double>();
}

}  // namespace

Scenario parse_scenario(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        bad_script(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) bad_script("scenario must be a JSON object");
    Scenario sc;
    if (doc.contains("start")) sc.start = vec_from(doc["start"]);
    sc.rate_hz = number(doc, "rate_hz", sc.rate_hz);
    sc.noise_sigma_deg = number(doc, "noise_sigma_deg", sc.noise_sigma_deg);
    sc.noise_white_deg = number(doc, "noise_white_deg", sc.noise_white_deg);
    sc.noise_corr_ms = number(doc, "noise_corr_ms", sc.noise_corr_ms);
    sc.latency_ms = number(doc, "latency_ms", sc.latency_ms);
    sc.corrective_rate = number(doc, "corrective_rate", sc.corrective_rate);
    sc.corrective_min_deg = number(doc, "corrective_min_deg", sc.corrective_min_deg);
    sc.corrective_max_deg = number(doc, "corrective_max_deg", sc.corrective_max_deg);
    sc.corrective_spacing_ms = number(doc, "corrective_spacing_ms", sc.corrective_spacing_ms);
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) bad_script("seed must be a non-negative integer");
        sc.seed = doc["seed"].get<std::uint64_t>();
    }
    if (!doc.contains("script") || !doc["script"].is_array()) bad_script("scenario needs a script array");
    for (const auto& item : doc["script"]) {
        if (!item.is_object() || item.size() != 1) bad_script("each script entry holds exactly one segment");
        const auto& [kind, body] = *item.items().begin();
        if (!body.is_object()) bad_script("segment body must be an object");
        if (kind == "fixate") {
            Fixate f;
            if (body.contains("pos")) f.pos = vec_from(body["pos"]);
            f.dur_ms = number(body, "dur_ms", 0.0);
            sc.script.emplace_back(f);
        } else if (kind == "jump") {
            if (!body.contains("to")) bad_script("jump needs a target");
            Jump j{vec_from(body["to"]), std::nullopt};
            if (body.contains("dur_ms")) j.dur_ms = number(body, "dur_ms", 0.0);
            sc.script.emplace_back(j);
        } else if (kind == "pursue") {
            if (!body.contains("velocity")) bad_script("pursue needs a velocity");
            sc.script.emplace_back(Pursue{vec_from(body["velocity"]), number(body, "dur_ms", 0.0)});
        } else {
            bad_script("unknown segment kind '" + kind + "'");
        }
    }
    validate(sc);
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw GazeError(ErrorCode::Io, "cannot open " + path.string());
    return parse_scenario(in);
}

void write_scenario(std::ostream& out, const Scenario& sc) {
    json doc;
    doc["start"] = vec_to(sc.start);
    doc["rate_hz"] = sc.rate_hz;
    doc["noise_sigma_deg"] = sc.noise_sigma_deg;
    doc["noise_white_deg"] = sc.noise_white_deg;
    doc["noise_corr_ms"] = sc.noise_corr_ms;
    doc["latency_ms"] = sc.latency_ms;
    doc["corrective_rate"] = sc.corrective_rate;
    doc["corrective_min_deg"] = sc.corrective_min_deg;
    doc["corrective_max_deg"] = sc.corrective_max_deg;
    doc["corrective_spacing_ms"] = sc.corrective_spacing_ms;
    doc["seed"] = sc.seed;
    json script = json::array();
    for (const auto& seg : sc.script) {
        if (const auto* f = std::get_if<Fixate>(&seg)) {
            json body{{"dur_ms", f->dur_ms}};
            if (f->pos) body["pos"] = vec_to(*f->pos);
            script.push_back({{"fixate", body}});
        } else if (const auto* j = std::get_if<Jump>(&seg)) {
            json body{{"to", vec_to(j->to)}};
            if (j->dur_ms) body["dur_ms"] = *j->dur_ms;
            script.push_back({{"jump", body}});
        } else {
            const auto& p = std::get<Pursue>(seg);
            script.push_back({{"pursue", {{"velocity", vec_to(p.velocity)}, {"dur_ms", p.dur_ms}}}});
        }
    }
    doc["script"] = script;
    out << doc.dump(2) << '\n';
}

}  // namespace gazehmm
