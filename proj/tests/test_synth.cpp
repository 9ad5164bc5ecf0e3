#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gazehmm/features.hpp"
#include "gazehmm/synth.hpp"
#include "helpers.hpp"

using namespace gazehmm;

namespace {

struct Run {
    SampleLabel kind;
    std::size_t length;
};

std::vector<Run> runs(const std::vector<SampleLabel>& l) {
    std::vector<Run> out;
    for (auto x : l) {
        if (out.empty() || out.back().kind != x) {
            out.push_back({x, 1});
        } else {
            ++out.back().length;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("a single clean fixation reproduces the stimulus") {
    Scenario sc;
    sc.start = {1.0, 2.0};
    sc.script = {Fixate{std::nullopt, 500.0}};
    const auto g = generate(sc);
    REQUIRE(g.rec.size() == 500);
    for (std::size_t i = 0; i < g.rec.size(); ++i) {
        CHECK(g.rec.samples[i].x == g.stim.samples[i].x);
        CHECK(g.rec.samples[i].y == g.stim.samples[i].y);
        CHECK(g.truth[i] == SampleLabel::Fixation);
    }
}

TEST_CASE("minimum-jerk profile") {
    CHECK(min_jerk(0.0) == 0.0);
    CHECK(min_jerk(1.0) == doctest::Approx(1.0));
    CHECK(min_jerk(0.5) == doctest::Approx(0.5));
    CHECK(min_jerk_peak_speed(10.0, 40.0) == doctest::Approx(468.75));
    CHECK(main_sequence_ms(10.0) == doctest::Approx(43.0));
}

TEST_CASE("numerical peak speed of a 10 deg, 40 ms jump") {
    Scenario sc;
    sc.start = {0, 0};
    sc.script = {Fixate{std::nullopt, 50.0}, Jump{{0.0, 10.0}, 40.0}, Fixate{std::nullopt, 50.0}};
    const auto g = generate(sc);
    const auto v = sample_speed(g.rec);
    const double peak = *std::max_element(v.begin(), v.end());
    CHECK(std::abs(peak - 468.75) < 0.01 * 468.75);
    const auto n_sac = std::count(g.truth.begin(), g.truth.end(), SampleLabel::Saccade);
    CHECK(n_sac == 41);
}

TEST_CASE("latency delays the response to a pursuit onset") {
    Scenario sc;
    sc.start = {0, 0};
    sc.script = {Fixate{std::nullopt, 300.0}, Pursue{{10.0, 0.0}, 500.0}, Fixate{std::nullopt, 300.0}};
    sc.latency_ms = 150.0;
    const auto g = generate(sc);
    std::size_t onset = 0;
    while (g.stim.samples[onset].kind != SampleLabel::Pursuit) ++onset;
    CHECK(onset == 300);
    for (std::size_t i = onset; i < onset + 150; ++i) CHECK(g.truth[i] == SampleLabel::Fixation);
    CHECK(g.truth[onset + 150] == SampleLabel::Pursuit);
}

TEST_CASE("zero-latency zero-noise ideal scores are perfect") {
    const auto s = ideal_scores(clean_scenario());
    CHECK(*s.sqns == 100.0);
    CHECK(*s.fqns == 100.0);
    CHECK(*s.pqns == 100.0);
    CHECK(*s.misfix == 0.0);
    CHECK(*s.fqls == 0.0);
    CHECK(*s.pqls_p == 0.0);
    CHECK(*s.pqls_v == 0.0);
}

TEST_CASE("150 ms latency gives MisFix above zero") {
    auto sc = clean_scenario();
    sc.latency_ms = 150.0;
    const auto s = ideal_scores(sc);
    CHECK(*s.misfix > 0.0);
    CHECK(*s.pqns < 100.0);
}

TEST_CASE("default scenario ideal vector matches the frozen golden file") {
    const auto text = score_table_csv({{"ideal", ideal_scores(default_scenario())}});
    const auto golden = testutil::slurp(std::filesystem::path(GAZEHMM_SOURCE_DIR) / "tests/golden/ideal_default.csv");
    CHECK(text == golden);
}

TEST_CASE("equal seeds give identical output and different seeds differ") {
    const auto a = generate(default_scenario());
    const auto b = generate(default_scenario());
    REQUIRE(a.rec.size() == b.rec.size());
    bool same = true;
    for (std::size_t i = 0; i < a.rec.size(); ++i) {
        same = same && a.rec.samples[i].x == b.rec.samples[i].x && a.rec.samples[i].y == b.rec.samples[i].y;
    }
    CHECK(same);
    CHECK(a.truth == b.truth);
    auto sc = default_scenario();
    sc.seed = 43;
    const auto c = generate(sc);
    CHECK(c.rec.samples[5000].x != a.rec.samples[5000].x);
}

TEST_CASE("truth label runs follow the script durations") {
    const auto g = generate(clean_scenario());
    const auto r = runs(g.truth);
    REQUIRE(r.size() == 7);
    const std::size_t expect[] = {4800, 0, 3000, 4800, 0, 2500, 4798};
    for (std::size_t k : {0u, 2u, 3u, 5u, 6u}) {
        CHECK(r[k].length + 1 >= expect[k]);
        CHECK(r[k].length <= expect[k] + 1);
    }
    CHECK(r[1].kind == SampleLabel::Saccade);
    CHECK(r[2].kind == SampleLabel::Pursuit);
    CHECK(g.rec.size() == 20000);
}

TEST_CASE("pursuit speed away from corrective saccades matches the script") {
    const auto sc = default_scenario();
    const auto g = generate(sc);
    // Windowed displacement speed; the noise bound follows from two noisy endpoints.
    const std::size_t w = 200;
    const double bound = 4.0 * sc.noise_sigma_deg * sc.rate_hz / static_cast<double>(w);
    std::size_t checked = 0;
    for (std::size_t i = 0; i + w < g.rec.size(); i += 50) {
        bool clean = true;
        for (std::size_t k = i; k <= i + w; ++k) clean = clean && g.truth[k] == SampleLabel::Pursuit;
        if (!clean) continue;
        const double v = distance(g.rec.samples[i + w].pos(), g.rec.samples[i].pos()) * sc.rate_hz / static_cast<double>(w);
        const double scripted = i < 10000 ? 10.0 : 12.5;
        CHECK(std::abs(v - scripted) < bound);
        ++checked;
    }
    CHECK(checked > 20);
}

TEST_CASE("corrective saccades appear during pursuit") {
    const auto sc = default_scenario();
    const auto g = generate(sc);
    const auto r = runs(g.truth);
    std::size_t inside = 0;
    for (std::size_t k = 1; k + 1 < r.size(); ++k) {
        if (r[k].kind == SampleLabel::Saccade && r[k - 1].kind == SampleLabel::Pursuit &&
            r[k + 1].kind == SampleLabel::Pursuit) {
            ++inside;
        }
    }
    CHECK(inside >= 2);
}

TEST_CASE("invalid scripts are rejected") {
    auto expect_invalid = [](const Scenario& sc) {
        try {
            generate(sc);
            FAIL("expected InvalidScript");
        } catch (const GazeError& e) {
            CHECK(e.code() == ErrorCode::InvalidScript);
        }
    };
    Scenario sc;
    sc.script = {Fixate{std::nullopt, 0.0}};
    expect_invalid(sc);
    sc.script = {Fixate{Vec2{1.0, 0.0}, 100.0}};
    expect_invalid(sc);
    sc.script = {Jump{{0.0, 0.0}, std::nullopt}};
    expect_invalid(sc);
    sc.script = {Fixate{std::nullopt, 100.0}};
    sc.rate_hz = 0.0;
    expect_invalid(sc);
    sc.rate_hz = 1000.0;
    sc.script.clear();
    expect_invalid(sc);
}

TEST_CASE("scenario JSON round trip") {
    const auto sc = default_scenario();
    std::ostringstream out;
    write_scenario(out, sc);
    std::istringstream in(out.str());
    const auto back = parse_scenario(in);
    std::ostringstream again;
    write_scenario(again, back);
    CHECK(out.str() == again.str());
    const auto a = generate(sc), b = generate(back);
    CHECK(a.rec.samples[12345].x == b.rec.samples[12345].x);

    std::istringstream bad("{\"script\":[{\"wiggle\":{}}]}");
    CHECK_THROWS_AS(parse_scenario(bad), GazeError);
    std::istringstream junk("not json");
    CHECK_THROWS_AS(parse_scenario(junk), GazeError);
}
