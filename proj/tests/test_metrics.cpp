#include <doctest.h>

#include "gazehmm/metrics.hpp"
#include "gazehmm/synth.hpp"
#include "helpers.hpp"

using namespace gazehmm;

namespace {

// Fixation at 0, jump to 10 over 20 ms, fixation, then pursuit at 10 deg/s.
struct Toy {
    GazeRecording rec;
    StimulusTrack stim;
    std::vector<SampleLabel> truth;
};

Toy toy() {
    Scenario sc;
    sc.start = {0, 0};
    sc.script = {Fixate{std::nullopt, 200.0}, Jump{{10.0, 0.0}, 20.0}, Fixate{std::nullopt, 200.0},
                 Pursue{{10.0, 0.0}, 300.0}, Fixate{std::nullopt, 100.0}};
    auto g = generate(sc);
    return {g.rec, g.stim, g.truth};
}

}  // namespace

TEST_CASE("perfect labels on a clean recording score perfectly") {
    const auto t = toy();
    const auto s = behavior_scores(t.truth, t.rec, t.stim);
    CHECK(*s.sqns == doctest::Approx(100.0));
    CHECK(*s.fqns == 100.0);
    CHECK(*s.pqns == 100.0);
    CHECK(*s.misfix == 0.0);
    CHECK(*s.fqls == 0.0);
    CHECK(*s.pqls_p == 0.0);
    CHECK(*s.pqls_v == 0.0);
}

TEST_CASE("calling everything fixation") {
    const auto t = toy();
    std::vector<SampleLabel> all(t.rec.size(), SampleLabel::Fixation);
    const auto s = behavior_scores(all, t.rec, t.stim);
    CHECK(*s.sqns == 0.0);
    CHECK(*s.pqns == 0.0);
    CHECK(*s.misfix == 0.0);
    CHECK_FALSE(s.pqls_p.has_value());
    CHECK_FALSE(s.pqls_v.has_value());
}

TEST_CASE("calling everything pursuit") {
    const auto t = toy();
    std::vector<SampleLabel> all(t.rec.size(), SampleLabel::Pursuit);
    const auto s = behavior_scores(all, t.rec, t.stim);
    CHECK(*s.misfix == 100.0);
    CHECK(*s.fqns == 0.0);
    CHECK_FALSE(s.fqls.has_value());
}

TEST_CASE("scores without a matching stimulus phase are absent") {
    const auto rec = testutil::recording_of(100, [](std::size_t) { return Vec2{}; });
    StimulusTrack stim;
    for (std::size_t i = 0; i < 100; ++i) stim.samples.push_back({static_cast<double>(i), 0, 0, SampleLabel::Fixation});
    std::vector<SampleLabel> labels(100, SampleLabel::Fixation);
    const auto s = behavior_scores(labels, rec, stim);
    CHECK_FALSE(s.sqns.has_value());
    CHECK_FALSE(s.pqns.has_value());
    CHECK(*s.fqns == 100.0);
    const auto csv = score_table_csv({{"x", s}});
    CHECK(csv.find("SQnS,-") != std::string::npos);
}

TEST_CASE("SQnS response window ignores late saccades") {
    const auto t = toy();
    auto labels = t.truth;
    // a fake saccade in the middle of the pursuit
    for (std::size_t i = 600; i < 620; ++i) labels[i] = SampleLabel::Saccade;
    const auto seg = segment_events(labels, t.rec);
    CHECK(*sqns(seg.events, t.stim) == doctest::Approx(100.0));
    MetricsConfig any;
    any.sqns_response_ms = 0.0;
    CHECK(*sqns(seg.events, t.stim, any) > 100.0);
}

TEST_CASE("FQnS tolerance grows with the preceding saccade") {
    const auto t = toy();
    auto rec = t.rec;
    // shift fixation samples after the jump by 2 deg: inside 10/3, outside 0.5
    for (std::size_t i = 250; i < 400; ++i) rec.samples[i].x += 2.0;
    CHECK(*fqns(t.truth, rec, t.stim) == 100.0);
    MetricsConfig strict;
    strict.fqns_tol_fraction = 0.0;
    CHECK(*fqns(t.truth, rec, t.stim, strict) < 100.0);
}

TEST_CASE("stimulus saccade amplitude") {
    const auto t = toy();
    const auto s = stimulus_saccades(t.stim);
    REQUIRE(s.size() == 1);
    CHECK(s[0].amplitude == doctest::Approx(10.0));
    CHECK(stimulus_kind_at(t.stim, 0.0) == SampleLabel::Fixation);
    CHECK_FALSE(stimulus_kind_at(t.stim, -1.0).has_value());
}

TEST_CASE("agreement counts") {
    const std::vector<SampleLabel> truth{SampleLabel::Fixation, SampleLabel::Fixation, SampleLabel::Saccade,
                                         SampleLabel::Pursuit};
    const std::vector<SampleLabel> pred{SampleLabel::Fixation, SampleLabel::Pursuit, SampleLabel::Saccade,
                                        SampleLabel::Pursuit};
    const auto a = sample_agreement(pred, truth);
    CHECK(a.accuracy == doctest::Approx(0.75));
    CHECK(a.confusion[0][2] == 1);
    CHECK(*a.f1[1] == doctest::Approx(1.0));
    CHECK(*a.f1[2] == doctest::Approx(2.0 / 3.0));
    CHECK_FALSE(a.f1[3].has_value());
}

TEST_CASE("score tables keep the row order") {
    BehaviorScores s;
    s.sqns = 50.0;
    const auto csv = score_table_csv({{"a", s}, {"b", {}}});
    CHECK(csv.rfind("metric,a,b\nSQnS,50.0000,-\nFQnS,-,-\n", 0) == 0);
    const auto text = score_table_text({{"a", s}});
    CHECK(text.find("PQlS_V") != std::string::npos);
}
