#include <doctest.h>

#include <random>

#include "gazehmm/baselines.hpp"
#include "gazehmm/metrics.hpp"
#include "gazehmm/synth.hpp"
#include "helpers.hpp"
#include "oracles/naive_idt.hpp"

using namespace gazehmm;

TEST_CASE("I-VVT thresholds") {
    FeatureSeries f;
    f.speed = {0.0, 5.0, 5.1, 70.0, 70.1, std::nan("")};
    f.accel = f.disp = f.speed;
    const auto l = ivvt(f, {});
    CHECK(l[0] == SampleLabel::Fixation);
    CHECK(l[1] == SampleLabel::Fixation);
    CHECK(l[2] == SampleLabel::Pursuit);
    CHECK(l[3] == SampleLabel::Pursuit);
    CHECK(l[4] == SampleLabel::Saccade);
    CHECK(l[5] == SampleLabel::Noise);
}

TEST_CASE("I-VVT with equal thresholds has no pursuit") {
    FeatureSeries f;
    f.speed = {1.0, 20.0, 30.0, 31.0};
    f.accel = f.disp = f.speed;
    ThresholdConfig c;
    c.v_low = c.v_high = 30.0;
    const auto l = ivvt(f, c);
    CHECK(std::count(l.begin(), l.end(), SampleLabel::Pursuit) == 0);
    c.v_high = 10.0;
    CHECK_THROWS_AS(ivvt(f, c), GazeError);
}

TEST_CASE("I-VDT agrees with the from-scratch dispersion oracle") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        Scenario sc = default_scenario();
        sc.seed = 100 + static_cast<std::uint64_t>(trial);
        sc.script.resize(4);  // fixate, jump, pursue, fixate
        auto g = generate(sc);
        std::uniform_int_distribution<std::size_t> pick(0, g.rec.size() - 1);
        for (int k = 0; k < 5; ++k) g.rec.samples[pick(rng)].valid = false;
        const auto f = compute_features(g.rec);
        ThresholdConfig c;
        c.dispersion_deg = 0.5 + 0.1 * trial;
        CHECK(ivdt(f, g.rec, c) == oracle::naive_ivdt(f, g.rec, c));
    }
}

TEST_CASE("I-VMP marks straight motion as pursuit and jitter as fixation") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 0.05);
    std::vector<Vec2> pos;
    for (int i = 0; i < 300; ++i) pos.push_back({g(rng), g(rng)});
    for (int i = 0; i < 300; ++i) pos.push_back({0.01 * i, 0.0});
    const auto rec = testutil::recording_from(pos);
    const auto f = compute_features(rec);
    ThresholdConfig c;
    c.v_sac = 1e9;
    const auto l = ivmp(f, rec, c);
    CHECK(std::count(l.begin(), l.begin() + 250, SampleLabel::Fixation) > 240);
    CHECK(std::count(l.begin() + 350, l.end(), SampleLabel::Pursuit) == 250);
}

TEST_CASE("dispersion and resultant length helpers") {
    const std::vector<Vec2> box{{0, 0}, {1, 0}, {1, 2}, {0.5, 1}};
    CHECK(idt_dispersion(box) == doctest::Approx(3.0));
    const std::vector<Vec2> line{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
    CHECK(mean_resultant_length(line) == doctest::Approx(1.0));
    const std::vector<Vec2> back{{0, 0}, {1, 0}, {0, 0}};
    CHECK(mean_resultant_length(back) == doctest::Approx(0.0));
    const std::vector<Vec2> still{{1, 1}, {1, 1}};
    CHECK(mean_resultant_length(still) == 0.0);
}

TEST_CASE("three-state HMM orders states by mean speed") {
    const auto g = generate(clean_scenario());
    const auto f = compute_features(g.rec);
    const auto res = three_state_hmm(f, g.rec);
    const auto a = sample_agreement(res.labels, g.truth);
    CHECK(a.accuracy > 0.9);
    CHECK(a.f1_or_zero(SampleLabel::Saccade) > 0.8);
}

TEST_CASE("three-state HMM on constant speed is flagged") {
    const auto rec = testutil::recording_of(200, [](std::size_t) { return Vec2{1.0, 1.0}; });
    const auto res = three_state_hmm(compute_features(rec), rec);
    CHECK(res.flags == std::vector<std::string>{"DegenerateSignal"});
}

TEST_CASE("threshold validation") {
    ThresholdConfig c;
    c.similarity_cut = 1.5;
    CHECK_THROWS_AS(validate(c), GazeError);
    ThresholdConfig d;
    d.dispersion_deg = 0.0;
    CHECK_THROWS_AS(validate(d), GazeError);
}
