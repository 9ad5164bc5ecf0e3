#include "gazehmm/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "gazehmm/baselines.hpp"
#include "gazehmm/features.hpp"
#include "gazehmm/metrics.hpp"
#include "gazehmm/synth.hpp"

namespace gazehmm {

namespace fs = std::filesystem;

std::string_view algo_name(Algo a) noexcept {
    switch (a) {
        case Algo::Hhmm: return "hhmm";
        case Algo::Ivvt: return "ivvt";
        case Algo::Ivdt: return "ivdt";
        case Algo::Ivmp: return "ivmp";
        case Algo::Hmm3: return "hmm3";
    }
    return "?";
}

Algo parse_algo(std::string_view name) {
    for (Algo a : kAllAlgos) {
        if (algo_name(a) == name) return a;
    }
    throw GazeError(ErrorCode::Usage, "unknown algorithm '" + std::string(name) + "'");
}

ClassifyResult run_algorithm(Algo algo, const GazeRecording& rec, const Config& cfg) {
    if (algo == Algo::Hhmm) return classify(rec, cfg.hhmm);
    const FeatureSeries f = compute_features(rec, cfg.hhmm.window_ms);
    if (algo == Algo::Hmm3) return three_state_hmm(f, rec, cfg.hmm3);
    ClassifyResult out;
    switch (algo) {
        case Algo::Ivvt: out.labels = ivvt(f, cfg.thresholds); break;
        case Algo::Ivdt: out.labels = ivdt(f, rec, cfg.thresholds); break;
        default: out.labels = ivmp(f, rec, cfg.thresholds); break;
    }
    out.events = segment_events(out.labels, rec).events;
    return out;
}

Config resolve_config(const std::optional<fs::path>& config_path) {
    if (config_path) return load_config(*config_path);
    if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') return load_config(env);
    return Config{};
}

namespace {

std::string to_hex(const unsigned char* p, unsigned n) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(2 * n);
    for (unsigned i = 0; i < n; ++i) {
        s.push_back(digits[p[i] >> 4]);
        s.push_back(digits[p[i] & 0xf]);
    }
    return s;
}

struct Sha256 {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};

    Sha256() {
        if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
            throw GazeError(ErrorCode::Io, "sha256 unavailable");
        }
    }
    void update(const char* p, std::size_t n) { EVP_DigestUpdate(ctx.get(), p, n); }
    std::string hex() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned len = 0;
        EVP_DigestFinal_ex(ctx.get(), md, &len);
        return to_hex(md, len);
    }
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GazeError(ErrorCode::Io, "cannot open " + path.string());
    Sha256 h;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        h.update(buf, static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw GazeError(ErrorCode::Io, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw GazeError(ErrorCode::Io, "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw GazeError(ErrorCode::Io, "cannot rename onto " + path.string());
    }
}

namespace {

void put(std::string& s, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    s += buf;
}

void put_opt(std::string& s, double v) {
    if (!std::isnan(v)) put(s, v);
}

}  // namespace

std::string events_csv(const std::vector<Event>& events) {
    std::string s = "kind,onset_ms,offset_ms,duration_ms,first,last,centroid_x,centroid_y,amplitude_deg,mean_speed\n";
    for (const Event& e : events) {
        s += label_code(e.kind);
        for (double v : {e.onset, e.offset, e.duration()}) {
            s += ',';
            put(s, v);
        }
        s += ',' + std::to_string(e.first) + ',' + std::to_string(e.last);
        for (double v : {e.centroid.x, e.centroid.y, e.amplitude, e.mean_speed}) {
            s += ',';
            put(s, v);
        }
        s += '\n';
    }
    return s;
}

std::string plot_series_csv(const GazeRecording& rec, const std::vector<SampleLabel>& labels) {
    if (labels.size() != rec.size()) throw GazeError(ErrorCode::InvalidArgument, "label count does not match recording length");
    std::string s = "t_ms,x_deg,y_deg,label\n";
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const auto& g = rec.samples[i];
        put(s, g.t);
        s += ',';
        if (g.valid) put(s, g.x);
        s += ',';
        if (g.valid) put(s, g.y);
        s += ',';
        s += label_code(labels[i]);
        s += '\n';
    }
    return s;
}

std::string features_csv(const GazeRecording& rec, const FeatureSeries& f) {
    std::string s = "t_ms,speed,accel,disp\n";
    for (std::size_t i = 0; i < rec.size(); ++i) {
        put(s, rec.samples[i].t);
        s += ',';
        put_opt(s, f.speed[i]);
        s += ',';
        put_opt(s, f.accel[i]);
        s += ',';
        put_opt(s, f.disp[i]);
        s += '\n';
    }
    return s;
}

std::string manifest_json(const Manifest& m) {
    nlohmann::ordered_json j;
    j["command"] = m.command;
    j["tool_version"] = kToolVersion;
    j["seed"] = m.seed;
    j["config"] = m.config;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    j["flags"] = m.flags;
    j["wall_time_s"] = m.wall_time_s;
    return j.dump(2) + "\n";
}

namespace {

using Clock = std::chrono::steady_clock;

// Options shared by every subcommand.
struct Common {
    std::optional<std::string> config;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool drop_duplicates = false;
    std::map<std::string, std::string> overrides;  // config key -> flag text
};

void add_common(CLI::App* sub, Common& c, bool needs_out = true) {
    sub->add_option("--config", c.config, "config file (key = value lines)");
    sub->add_option("--set", c.sets, "override a config entry, key=value")->allow_extra_args(false);
    sub->add_option("--seed", c.seed, "random seed");
    auto* o = sub->add_option("--out", c.out, "output directory");
    if (needs_out) o->required();
    sub->add_flag("--drop-duplicates", c.drop_duplicates, "drop repeated timestamps instead of failing");
}

void add_overrides(CLI::App* sub, Common& c) {
    const std::pair<const char*, const char*> flags[] = {
        {"--v-high", "ivvt.v_high"},        {"--v-low", "ivvt.v_low"},
        {"--v-sac", "ivt.v_sac"},           {"--dispersion", "ivdt.dispersion_deg"},
        {"--ivdt-window", "ivdt.window_ms"}, {"--ivmp-window", "ivmp.window_ms"},
        {"--similarity-cut", "ivmp.similarity_cut"},
        {"--epochs1", "hhmm.epochs1"},       {"--epochs2", "hhmm.epochs2"},
        {"--window-ms", "hhmm.window_ms"},   {"--finetune-t", "hhmm.finetune_t"},
        {"--merge-gap", "merge.gap_ms"},     {"--merge-dist", "merge.dist_deg"},
    };
    for (const auto& [flag, key] : flags) {
        sub->add_option(flag, c.overrides[key], std::string("sets ") + key);
    }
}

Config build_config(const Common& c) {
    Config cfg = resolve_config(c.config ? std::optional<fs::path>(*c.config) : std::nullopt);
    for (const auto& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw GazeError(ErrorCode::Usage, "--set expects key=value, got '" + kv + "'");
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [key, value] : c.overrides) {
        if (!value.empty()) set_config_value(cfg, key, value);
    }
    if (c.seed) cfg.seed = *c.seed;
    validate(cfg);
    return cfg;
}

LoadOptions load_options(const Common& c) {
    LoadOptions o;
    o.drop_duplicates = c.drop_duplicates;
    return o;
}

fs::path out_dir(const Common& c) {
    fs::path d(c.out);
    std::error_code ec;
    fs::create_directories(d, ec);
    if (!fs::is_directory(d)) throw GazeError(ErrorCode::Io, "cannot create output directory " + d.string());
    return d;
}

Manifest start_manifest(std::string command, const Config& cfg) {
    Manifest m;
    m.command = std::move(command);
    m.config = config_snapshot(cfg);
    m.seed = cfg.seed;
    return m;
}

void add_input(Manifest& m, const std::string& path) { m.inputs[path] = sha256_file(path); }

// Writes every file, then the manifest last, each one atomically.
void finish(const fs::path& dir, Manifest& m, const std::vector<std::pair<std::string, std::string>>& files,
            Clock::time_point t0, const std::string& manifest_name = "manifest.json") {
    for (const auto& [name, body] : files) {
        write_file_atomic(dir / name, body);
        m.outputs.push_back(name);
    }
    m.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
    write_file_atomic(dir / manifest_name, manifest_json(m));
}

GazeRecording read_recording(const std::string& path, const Common& c, std::ostream& err) {
    GazeRecording rec = load_recording(path, load_options(c));
    if (rec.dropped_duplicates > 0) {
        err << "warning: dropped " << rec.dropped_duplicates << " duplicate timestamps in " << path << '\n';
    }
    return rec;
}

std::string labels_csv(const GazeRecording& rec, const std::vector<SampleLabel>& labels) {
    std::ostringstream s;
    write_labels(s, rec, labels);
    return s.str();
}

std::vector<SampleLabel> read_labels_for(const std::string& path, const GazeRecording& rec) {
    return labels_for_recording(load_labels(path), rec);
}

std::string fmt4(std::optional<double> v) {
    if (!v) return "-";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return buf;
}

struct AgreementRow {
    std::string name;
    Agreement a;
};

std::string agreement_csv(const std::vector<AgreementRow>& rows) {
    std::string s = "algo,accuracy,f1_fix,f1_sac,f1_sp\n";
    for (const auto& r : rows) {
        s += r.name + ',' + fmt4(r.a.accuracy);
        for (SampleLabel l : {SampleLabel::Fixation, SampleLabel::Saccade, SampleLabel::Pursuit}) {
            s += ',' + fmt4(r.a.f1[static_cast<std::size_t>(l)]);
        }
        s += '\n';
    }
    return s;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception by
// index is rethrown once every task has finished.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

// ---- classify

struct ClassifyArgs {
    Common common;
    std::vector<std::string> recordings;
    std::string algo = "hhmm";
    std::size_t jobs = 1;
};

int cmd_classify(const ClassifyArgs& a, std::ostream& out, std::ostream& err) {
    const Config cfg = build_config(a.common);
    const Algo algo = parse_algo(a.algo);
    const fs::path dir = out_dir(a.common);

    std::vector<std::string> stems;
    for (const auto& r : a.recordings) {
        std::string stem = fs::path(r).stem().string();
        if (std::find(stems.begin(), stems.end(), stem) != stems.end()) {
            throw GazeError(ErrorCode::InvalidArgument, "two recordings share the name '" + stem + "'");
        }
        stems.push_back(std::move(stem));
    }

    std::vector<std::string> notes(a.recordings.size());
    std::mutex err_mutex;
    parallel_for(a.recordings.size(), a.jobs, [&](std::size_t i) {
        const auto t0 = Clock::now();
        std::ostringstream warn;
        const GazeRecording rec = read_recording(a.recordings[i], a.common, warn);
        if (!warn.str().empty()) {
            std::lock_guard lock(err_mutex);
            err << warn.str();
        }
        const ClassifyResult res = run_algorithm(algo, rec, cfg);
        Manifest m = start_manifest("classify --algo " + std::string(algo_name(algo)), cfg);
        add_input(m, a.recordings[i]);
        m.flags = res.flags;
        finish(dir, m,
               {{stems[i] + ".labels.csv", labels_csv(rec, res.labels)},
                {stems[i] + ".events.csv", events_csv(res.events)}},
               t0, stems[i] + ".manifest.json");
        notes[i] = stems[i] + ": " + std::to_string(rec.size()) + " samples, " + std::to_string(res.events.size()) +
                   " events";
        for (const auto& f : res.flags) notes[i] += " [" + f + "]";
    });
    for (const auto& n : notes) out << n << '\n';
    return 0;
}

// ---- evaluate

struct EvaluateArgs {
    Common common;
    std::string rec;
    std::string stim;
    std::vector<std::string> labels;
    std::vector<std::string> names;
    std::optional<std::string> truth;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
    const auto t0 = Clock::now();
    const Config cfg = build_config(a.common);
    if (!a.names.empty() && a.names.size() != a.labels.size()) {
        throw GazeError(ErrorCode::Usage, "--name must be given once per --labels");
    }
    const fs::path dir = out_dir(a.common);
    const GazeRecording rec = read_recording(a.rec, a.common, err);
    const StimulusTrack stim = load_stimulus(a.stim, load_options(a.common));
    Manifest m = start_manifest("evaluate", cfg);
    add_input(m, a.rec);
    add_input(m, a.stim);

    std::optional<std::vector<SampleLabel>> truth;
    if (a.truth) {
        truth = read_labels_for(*a.truth, rec);
        add_input(m, *a.truth);
    }
    std::vector<ScoreColumn> cols;
    std::vector<AgreementRow> agree;
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        const auto labels = read_labels_for(a.labels[i], rec);
        add_input(m, a.labels[i]);
        std::string name = a.names.empty() ? fs::path(a.labels[i]).stem().string() : a.names[i];
        cols.push_back({name, behavior_scores(labels, rec, stim, cfg.metrics)});
        if (truth) agree.push_back({name, sample_agreement(labels, *truth)});
    }
    std::vector<std::pair<std::string, std::string>> files{{"scores.csv", score_table_csv(cols)},
                                                           {"scores.txt", score_table_text(cols)}};
    if (truth) files.emplace_back("agreement.csv", agreement_csv(agree));
    finish(dir, m, files, t0);
    out << score_table_text(cols);
    return 0;
}

// ---- features

struct FeaturesArgs {
    Common common;
    std::string rec;
};

int cmd_features(const FeaturesArgs& a, std::ostream& out, std::ostream& err) {
    const auto t0 = Clock::now();
    const Config cfg = build_config(a.common);
    const fs::path dir = out_dir(a.common);
    const GazeRecording rec = read_recording(a.rec, a.common, err);
    const FeatureSeries f = compute_features(rec, cfg.hhmm.window_ms);
    const auto reports = analyze_features(f, cfg.kmeans_k, cfg.seed);
    const FeatureSelection sel = select_features(reports);

    // Cluster ids per sample, one column per feature; blank where the feature is absent.
    std::string clusters = "t_ms,speed_cluster,accel_cluster,disp_cluster\n";
    std::array<std::size_t, 3> cursor{};
    const std::array<const std::vector<double>*, 3> series{&f.speed, &f.accel, &f.disp};
    for (std::size_t i = 0; i < rec.size(); ++i) {
        put(clusters, rec.samples[i].t);
        for (std::size_t k = 0; k < 3; ++k) {
            clusters += ',';
            if (!std::isnan((*series[k])[i])) clusters += std::to_string(reports[k].report.assignments[cursor[k]++]);
        }
        clusters += '\n';
    }

    std::string summary = "feature,separation,inertia,iterations,centroids\n";
    for (std::size_t k = 0; k < reports.size(); ++k) {
        const auto& r = reports[k].report;
        summary += feature_name(reports[k].feature) + ',';
        put(summary, sel.scores[k].separation);
        summary += ',';
        put(summary, r.inertia);
        summary += ',' + std::to_string(r.iterations) + ',';
        std::vector<double> c;
        for (const auto& v : r.centroids) c.push_back(v.at(0));
        std::sort(c.begin(), c.end());
        for (std::size_t j = 0; j < c.size(); ++j) {
            if (j) summary += ';';
            put(summary, c[j]);
        }
        summary += '\n';
    }
    summary += "selected,stage1=" + feature_name(sel.stage1) + ",stage2=" + feature_name(sel.stage2) + ",,\n";

    Manifest m = start_manifest("features", cfg);
    add_input(m, a.rec);
    for (const auto& r : reports) {
        if (r.report.degenerate) m.flags.push_back("DegenerateInput:" + feature_name(r.feature));
    }
    finish(dir, m,
           {{"features.csv", features_csv(rec, f)}, {"clusters.csv", clusters}, {"selection.csv", summary}}, t0);
    out << summary;
    return 0;
}

// ---- synth

struct SynthArgs {
    Common common;
    std::optional<std::string> scenario;
    std::string preset = "default";
};

Scenario pick_scenario(const std::optional<std::string>& file, const std::string& preset, Manifest* m) {
    if (file) {
        if (m) add_input(*m, *file);
        return load_scenario(*file);
    }
    if (preset == "default") return default_scenario();
    if (preset == "clean") return clean_scenario();
    throw GazeError(ErrorCode::Usage, "unknown preset '" + preset + "'");
}

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream&) {
    const auto t0 = Clock::now();
    Config cfg = build_config(a.common);
    const fs::path dir = out_dir(a.common);
    Manifest m = start_manifest("synth", cfg);
    Scenario sc = pick_scenario(a.scenario, a.preset, &m);
    if (a.common.seed) sc.seed = *a.common.seed;
    m.seed = sc.seed;
    const SynthOutput g = generate(sc);

    std::ostringstream rec, stim, scen;
    write_recording(rec, g.rec);
    write_stimulus(stim, g.stim);
    write_scenario(scen, sc);
    const std::vector<ScoreColumn> ideal{{"ideal", behavior_scores(g.truth, g.rec, g.stim, cfg.metrics)}};
    finish(dir, m,
           {{"recording.csv", rec.str()},
            {"stimulus.csv", stim.str()},
            {"truth.csv", labels_csv(g.rec, g.truth)},
            {"scenario.json", scen.str()},
            {"ideal.csv", score_table_csv(ideal)}},
           t0);
    out << "synth: " << g.rec.size() << " samples, seed " << sc.seed << '\n';
    return 0;
}

// ---- ablate

struct AblateArgs {
    Common common;
    std::optional<std::string> rec;
    std::optional<std::string> stim;
    std::optional<std::string> truth;
    std::optional<std::string> scenario;
    std::string preset = "default";
    std::size_t jobs = 1;
};

int cmd_ablate(const AblateArgs& a, std::ostream& out, std::ostream& err) {
    const auto t0 = Clock::now();
    const Config cfg = build_config(a.common);
    const fs::path dir = out_dir(a.common);
    Manifest m = start_manifest("ablate", cfg);

    GazeRecording rec;
    StimulusTrack stim;
    std::optional<std::vector<SampleLabel>> truth;
    if (a.rec || a.stim) {
        if (!a.rec || !a.stim) throw GazeError(ErrorCode::Usage, "--rec and --stim go together");
        if (a.scenario) throw GazeError(ErrorCode::Usage, "--scenario cannot be combined with --rec");
        rec = read_recording(*a.rec, a.common, err);
        stim = load_stimulus(*a.stim, load_options(a.common));
        add_input(m, *a.rec);
        add_input(m, *a.stim);
        if (a.truth) {
            truth = read_labels_for(*a.truth, rec);
            add_input(m, *a.truth);
        }
    } else {
        if (a.truth) throw GazeError(ErrorCode::Usage, "--truth needs --rec and --stim");
        Scenario sc = pick_scenario(a.scenario, a.preset, &m);
        if (a.common.seed) sc.seed = *a.common.seed;
        m.seed = sc.seed;
        SynthOutput g = generate(sc);
        rec = std::move(g.rec);
        stim = std::move(g.stim);
        truth = std::move(g.truth);
    }

    constexpr std::size_t n = std::size(kAllAlgos);
    std::array<ClassifyResult, n> results;
    parallel_for(n, a.jobs, [&](std::size_t i) { results[i] = run_algorithm(kAllAlgos[i], rec, cfg); });

    std::vector<ScoreColumn> cols;
    std::vector<AgreementRow> agree;
    if (truth) cols.push_back({"ideal", behavior_scores(*truth, rec, stim, cfg.metrics)});
    std::vector<std::pair<std::string, std::string>> files;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string name(algo_name(kAllAlgos[i]));
        cols.push_back({name, behavior_scores(results[i].labels, rec, stim, cfg.metrics)});
        if (truth) agree.push_back({name, sample_agreement(results[i].labels, *truth)});
        for (const auto& f : results[i].flags) m.flags.push_back(name + ":" + f);
        files.emplace_back(name + ".labels.csv", labels_csv(rec, results[i].labels));
    }
    files.emplace_back("ablation.csv", score_table_csv(cols));
    files.emplace_back("ablation.txt", score_table_text(cols));
    if (truth) files.emplace_back("agreement.csv", agreement_csv(agree));
    finish(dir, m, files, t0);
    out << score_table_text(cols);
    if (truth) out << '\n' << agreement_csv(agree);
    return 0;
}

// ---- plot

struct PlotArgs {
    Common common;
    std::string rec;
    std::string labels;
};

int cmd_plot(const PlotArgs& a, std::ostream& out, std::ostream& err) {
    const auto t0 = Clock::now();
    const Config cfg = build_config(a.common);
    const fs::path dir = out_dir(a.common);
    const GazeRecording rec = read_recording(a.rec, a.common, err);
    const auto labels = read_labels_for(a.labels, rec);
    Manifest m = start_manifest("plot", cfg);
    add_input(m, a.rec);
    add_input(m, a.labels);
    finish(dir, m, {{"series.csv", plot_series_csv(rec, labels)}}, t0);
    out << "plot: " << rec.size() << " rows\n";
    return 0;
}

void error_line(std::ostream& err, std::string_view code, std::string msg) {
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: code=" << code << " msg=" << msg << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hierarchical HMM eye-movement classification", "gazehmm"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    ClassifyArgs ca;
    auto* classify_cmd = app.add_subcommand("classify", "label samples and events of one or more recordings");
    add_common(classify_cmd, ca.common);
    add_overrides(classify_cmd, ca.common);
    classify_cmd->add_option("recordings", ca.recordings, "recording CSV files")->required();
    classify_cmd->add_option("--algo", ca.algo, "hhmm, hmm3, ivvt, ivdt or ivmp")
        ->check(CLI::IsMember({"hhmm", "hmm3", "ivvt", "ivdt", "ivmp"}));
    classify_cmd->add_option("--jobs", ca.jobs, "recordings processed concurrently")->check(CLI::PositiveNumber);

    EvaluateArgs ea;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "behaviour scores of label files against a stimulus");
    add_common(evaluate_cmd, ea.common);
    evaluate_cmd->add_option("--rec", ea.rec, "recording CSV")->required();
    evaluate_cmd->add_option("--stim", ea.stim, "stimulus CSV")->required();
    evaluate_cmd->add_option("--labels", ea.labels, "label CSV, one column each")->required()->allow_extra_args(false);
    evaluate_cmd->add_option("--name", ea.names, "column names, one per --labels")->allow_extra_args(false);
    evaluate_cmd->add_option("--truth", ea.truth, "ground-truth labels for per-sample agreement");

    FeaturesArgs fa;
    auto* features_cmd = app.add_subcommand("features", "per-sample features and k-means analysis");
    add_common(features_cmd, fa.common);
    features_cmd->add_option("recording", fa.rec, "recording CSV")->required();
    features_cmd->add_option("--k", fa.common.overrides["features.k"], "number of clusters");
    features_cmd->add_option("--window-ms", fa.common.overrides["hhmm.window_ms"], "displacement window");

    SynthArgs sa;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic recording with ground truth");
    add_common(synth_cmd, sa.common);
    synth_cmd->add_option("--scenario", sa.scenario, "scenario JSON");
    synth_cmd->add_option("--preset", sa.preset, "default or clean")->check(CLI::IsMember({"default", "clean"}));

    AblateArgs aa;
    auto* ablate_cmd = app.add_subcommand("ablate", "run every classifier and tabulate their scores");
    add_common(ablate_cmd, aa.common);
    add_overrides(ablate_cmd, aa.common);
    ablate_cmd->add_option("--rec", aa.rec, "recording CSV (default: synthesize)");
    ablate_cmd->add_option("--stim", aa.stim, "stimulus CSV");
    ablate_cmd->add_option("--truth", aa.truth, "ground-truth labels");
    ablate_cmd->add_option("--scenario", aa.scenario, "scenario JSON when synthesizing");
    ablate_cmd->add_option("--preset", aa.preset, "default or clean")->check(CLI::IsMember({"default", "clean"}));
    ablate_cmd->add_option("--jobs", aa.jobs, "classifiers run concurrently")->check(CLI::PositiveNumber);

    PlotArgs pa;
    auto* plot_cmd = app.add_subcommand("plot", "long-format t,x,y,label series for plotting");
    add_common(plot_cmd, pa.common);
    plot_cmd->add_option("--rec", pa.rec, "recording CSV")->required();
    plot_cmd->add_option("--labels", pa.labels, "label CSV")->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        error_line(err, error_name(ErrorCode::Usage), e.what());
        return static_cast<int>(ErrorCode::Usage);
    }

    try {
        if (*classify_cmd) return cmd_classify(ca, out, err);
        if (*evaluate_cmd) return cmd_evaluate(ea, out, err);
        if (*features_cmd) return cmd_features(fa, out, err);
        if (*synth_cmd) return cmd_synth(sa, out, err);
        if (*ablate_cmd) return cmd_ablate(aa, out, err);
        if (*plot_cmd) return cmd_plot(pa, out, err);
    } catch (const GazeError& e) {
        error_line(err, error_name(e.code()), e.what());
        return e.exit_code();
    } catch (const fs::filesystem_error& e) {
        error_line(err, error_name(ErrorCode::Io), e.what());
        return static_cast<int>(ErrorCode::Io);
    } catch (const nlohmann::json::exception& e) {
        error_line(err, error_name(ErrorCode::InvalidScript), e.what());
        return static_cast<int>(ErrorCode::InvalidScript);
    } catch (const std::exception& e) {
        error_line(err, error_name(ErrorCode::InvalidArgument), e.what());
        return static_cast<int>(ErrorCode::InvalidArgument);
    }
    error_line(err, error_name(ErrorCode::Usage), "no subcommand");
    return static_cast<int>(ErrorCode::Usage);
}

}  // namespace gazehmm
