// One line per acceptance criterion; exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gazehmm/baselines.hpp"
#include "gazehmm/hierarchy.hpp"
#include "gazehmm/hmm.hpp"
#include "gazehmm/metrics.hpp"
#include "gazehmm/synth.hpp"
#include "helpers.hpp"
#include "oracles/brute_force_hmm.hpp"

using namespace gazehmm;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
    std::printf("[%s] C%d %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<oracle::Instance> small_instances() {
    std::mt19937_64 rng(20240601);
    std::vector<oracle::Instance> v;
    for (int k = 0; k < 1000; ++k) v.push_back(oracle::random_instance(rng, 3, 8));
    return v;
}

void viterbi_oracle(const std::vector<oracle::Instance>& inst) {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (const auto& i : inst) {
        const auto v = viterbi(i.model, i.obs);
        const auto e = oracle::enumerate_paths(i.model, i.obs);
        worst = std::max(worst, std::abs(v.log_prob - e.best));
        worst = std::max(worst, std::abs(oracle::path_log_prob(i.model, i.obs, v.path) - e.best));
    }
    const double secs = seconds_since(t0);
    report(1, worst <= 1e-9 && secs < 5.0, "Viterbi equals exhaustive maximum",
           fmt("1000 instances, max |diff| %.3g, %.3f s", worst, secs));
}

void likelihood_oracle(const std::vector<oracle::Instance>& inst) {
    double worst = 0.0;
    for (const auto& i : inst) {
        const auto post = forward_backward(i.model, i.obs);
        const auto e = oracle::enumerate_paths(i.model, i.obs);
        worst = std::max(worst, std::abs(post.loglik - e.log_sum));
    }
    report(2, worst <= 1e-9, "forward-backward equals path-sum likelihood",
           fmt("1000 instances, max |diff| %.3g", worst));
}

void em_monotone() {
    std::mt19937_64 rng(77);
    double worst_drop = 0.0;
    for (int k = 0; k < 100; ++k) {
        auto inst = oracle::random_instance(rng, 3, 60, 2);
        double prev = -INFINITY;
        for (int it = 0; it < 10; ++it) {
            const auto step = baum_welch_step(inst.model, inst.obs);
            if (std::isfinite(prev)) worst_drop = std::max(worst_drop, prev - step.loglik);
            prev = step.loglik;
            inst.model = step.model;
        }
    }
    report(3, worst_drop <= 1e-9, "EM log-likelihood never decreases",
           fmt("100 instances x 10 iterations, largest drop %.3g", worst_drop));
}

void perfect_identity() {
    const auto s = ideal_scores(clean_scenario());
    const bool ok = s.sqns == 100.0 && s.fqns == 100.0 && s.pqns == 100.0 && s.misfix == 0.0 && s.fqls == 0.0 &&
                    s.pqls_p == 0.0 && s.pqls_v == 0.0;
    report(4, ok, "ground truth on a clean scenario scores perfectly",
           fmt("SQnS %.17g FQnS %.17g PQnS %.17g MisFix %.17g", s.sqns.value_or(NAN), s.fqns.value_or(NAN),
               s.pqns.value_or(NAN), s.misfix.value_or(NAN)) +
               fmt(" FQlS %.17g PQlS_P %.17g PQlS_V %.17g", s.fqls.value_or(NAN), s.pqls_p.value_or(NAN),
                   s.pqls_v.value_or(NAN)));
}

struct Scenario5 {
    SynthOutput g;
    ClassifyResult hhmm;
    double secs = 0.0;
};

Scenario5 run_default() {
    Scenario5 r;
    r.g = generate(default_scenario());
    const auto t0 = Clock::now();
    r.hhmm = classify(r.g.rec);
    r.secs = seconds_since(t0);
    return r;
}

void end_to_end(const Scenario5& s) {
    const auto a = sample_agreement(s.hhmm.labels, s.g.truth);
    const double f1s = a.f1_or_zero(SampleLabel::Saccade), f1p = a.f1_or_zero(SampleLabel::Pursuit);
    const bool ok = a.accuracy >= 0.9 && f1s >= 0.9 && f1p >= 0.8 && s.secs < 10.0;
    report(5, ok, "hierarchical HMM on the default scenario",
           fmt("accuracy %.4f, saccade F1 %.4f, pursuit F1 %.4f, %.3f s", a.accuracy, f1s, f1p, s.secs));
}

double misfix_gap(const std::vector<SampleLabel>& labels, const SynthOutput& g, double ideal) {
    return std::abs(misfix(labels, g.rec, g.stim).value_or(NAN) - ideal);
}

void ablation(const Scenario5& s, double ideal_misfix) {
    const auto f = compute_features(s.g.rec);
    const auto h3 = three_state_hmm(f, s.g.rec);
    const double p_h = sample_agreement(s.hhmm.labels, s.g.truth).f1_or_zero(SampleLabel::Pursuit);
    const double p_3 = sample_agreement(h3.labels, s.g.truth).f1_or_zero(SampleLabel::Pursuit);
    const double d_h = misfix_gap(s.hhmm.labels, s.g, ideal_misfix);
    const double d_3 = misfix_gap(h3.labels, s.g, ideal_misfix);
    report(6, p_h > p_3 && d_h < d_3, "hierarchy beats the single 3-state HMM",
           fmt("pursuit F1 %.4f vs %.4f, |MisFix - ideal| %.3f vs %.3f", p_h, p_3, d_h, d_3));
}

void baseline_order(const Scenario5& s, double ideal_misfix) {
    const auto f = compute_features(s.g.rec);
    const auto v = ivvt(f, {});
    const double d_v = misfix_gap(v, s.g, ideal_misfix);
    const double d_h = misfix_gap(s.hhmm.labels, s.g, ideal_misfix);
    report(7, d_v > d_h, "I-VVT MisFix further from ideal than the hierarchy",
           fmt("|MisFix - ideal| I-VVT %.3f, hierarchy %.3f (ideal %.3f)", d_v, d_h, ideal_misfix));
}

void merge_semantics() {
    std::mt19937_64 rng(31337);
    std::uniform_int_distribution<std::size_t> dur(60, 250), gap(1, 150), kind(0, 2);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    const MergeConfig cfg;
    std::size_t bad = 0, merged = 0, kept = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto k = static_cast<SampleLabel>(kind(rng));
        const std::size_t d1 = dur(rng), g = gap(rng), d2 = dur(rng);
        const double d = dist(rng);
        std::vector<Vec2> pos;
        for (std::size_t i = 0; i < d1; ++i) pos.push_back({2.0, -1.0});
        for (std::size_t i = 0; i < g; ++i) pos.push_back({0.0, 0.0});
        for (std::size_t i = 0; i < d2; ++i) pos.push_back({2.0 + d * 0.6, -1.0 + d * 0.8});
        auto rec = testutil::recording_from(pos);
        std::vector<SampleLabel> labels(pos.size(), k);
        for (std::size_t i = d1; i < d1 + g; ++i) {
            rec.samples[i].valid = false;
            labels[i] = SampleLabel::Noise;
        }
        const auto seg = merge_events(labels, rec, cfg);
        const bool expect = static_cast<double>(g) <= cfg.gap_ms && d <= cfg.dist_deg + 1e-12;
        const bool got = seg.events.size() == 1;
        if (expect != got) ++bad;
        (got ? merged : kept) += 1;
    }
    report(8, bad == 0, "merge iff gap <= 75 ms and distance <= 0.5 deg",
           fmt("1000 random pairs, %.0f merged, %.0f kept, %.0f violations", static_cast<double>(merged),
               static_cast<double>(kept), static_cast<double>(bad)));
}

// Every file in a directory, manifests without their wall-clock field.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::string body = testutil::slurp(e.path());
        const auto name = e.path().filename().string();
        if (name.ends_with("manifest.json")) {
            auto j = nlohmann::ordered_json::parse(body);
            j.erase("wall_time_s");
            body = j.dump();
        }
        out[name] = body;
    }
    return out;
}

bool run_cli_binary(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(GAZEHMM_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    return std::system(cmd.c_str()) == 0;
}

void determinism() {
    const auto root = testutil::scratch_dir("acceptance_determinism");
    struct Cmd {
        std::string name;
        std::function<std::string(const fs::path&)> args;
    };
    const std::string rec = (root / "syn_a/recording.csv").string();
    const std::string stim = (root / "syn_a/stimulus.csv").string();
    const std::string truth = (root / "syn_a/truth.csv").string();
    const std::vector<Cmd> cmds{
        {"synth", [](const fs::path& o) { return "synth --seed 42 --out " + o.string(); }},
        {"classify-hhmm", [&](const fs::path& o) { return "classify " + rec + " --algo hhmm --out " + o.string(); }},
        {"classify-hmm3", [&](const fs::path& o) { return "classify " + rec + " --algo hmm3 --out " + o.string(); }},
        {"classify-ivvt", [&](const fs::path& o) { return "classify " + rec + " --algo ivvt --out " + o.string(); }},
        {"classify-ivdt", [&](const fs::path& o) { return "classify " + rec + " --algo ivdt --out " + o.string(); }},
        {"classify-ivmp", [&](const fs::path& o) { return "classify " + rec + " --algo ivmp --out " + o.string(); }},
        {"evaluate",
         [&](const fs::path& o) {
             return "evaluate --rec " + rec + " --stim " + stim + " --labels " + truth + " --truth " + truth +
                    " --out " + o.string();
         }},
        {"features", [&](const fs::path& o) { return "features " + rec + " --seed 42 --out " + o.string(); }},
        {"ablate", [&](const fs::path& o) { return "ablate --seed 42 --jobs 4 --out " + o.string(); }},
        {"plot", [&](const fs::path& o) { return "plot --rec " + rec + " --labels " + truth + " --out " + o.string(); }},
    };
    // The first synth run also provides the inputs for the others.
    if (!run_cli_binary("synth --seed 42 --out " + (root / "syn_a").string(), root / "syn_a.log")) {
        report(9, false, "CLI outputs are byte-identical across runs", "synth failed");
        return;
    }
    std::vector<std::string> differing;
    std::size_t files = 0;
    for (const auto& c : cmds) {
        const auto a = root / (c.name + "_1"), b = root / (c.name + "_2");
        const bool ok_a = run_cli_binary(c.args(a), root / (c.name + "_1.log"));
        const bool ok_b = run_cli_binary(c.args(b), root / (c.name + "_2.log"));
        if (!ok_a || !ok_b) {
            differing.push_back(c.name + " (failed)");
            continue;
        }
        const auto sa = snapshot(a), sb = snapshot(b);
        files += sa.size();
        if (sa != sb || testutil::slurp(root / (c.name + "_1.log")) != testutil::slurp(root / (c.name + "_2.log"))) {
            differing.push_back(c.name);
        }
    }
    std::string detail = std::to_string(cmds.size()) + " commands, " + std::to_string(files) + " files compared";
    for (const auto& d : differing) detail += "; differs: " + d;
    report(9, differing.empty(), "CLI outputs are byte-identical across runs", detail);
}

}  // namespace

int main() {
    const auto inst = small_instances();
    viterbi_oracle(inst);
    likelihood_oracle(inst);
    em_monotone();
    perfect_identity();
    const auto s = run_default();
    end_to_end(s);
    const double ideal = ideal_scores(default_scenario()).misfix.value_or(NAN);
    ablation(s, ideal);
    baseline_order(s, ideal);
    merge_semantics();
    determinism();
    std::printf("%d of 9 criteria failed\n", failures);
    return failures;
}
