#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gazehmm/hmm.hpp"
#include "oracles/brute_force_hmm.hpp"

using namespace gazehmm;

namespace {

GaussianHmm two_state() {
    GaussianHmm m;
    m.pi = {0.6, 0.4};
    m.trans = {{0.9, 0.1}, {0.2, 0.8}};
    m.emit = {{0.0, 1.0}, {5.0, 2.0}};
    return m;
}

}  // namespace

TEST_CASE("viterbi matches exhaustive enumeration on small instances") {
    std::mt19937_64 rng(101);
    for (int k = 0; k < 200; ++k) {
        const auto inst = oracle::random_instance(rng, 3, 7);
        const auto v = viterbi(inst.model, inst.obs);
        const auto e = oracle::enumerate_paths(inst.model, inst.obs);
        CHECK(v.log_prob == doctest::Approx(e.best).epsilon(1e-12));
        CHECK(oracle::path_log_prob(inst.model, inst.obs, v.path) == doctest::Approx(e.best).epsilon(1e-12));
    }
}

TEST_CASE("forward-backward likelihood equals the path sum") {
    std::mt19937_64 rng(202);
    for (int k = 0; k < 200; ++k) {
        const auto inst = oracle::random_instance(rng, 3, 7);
        const auto post = forward_backward(inst.model, inst.obs);
        const auto e = oracle::enumerate_paths(inst.model, inst.obs);
        CHECK(std::abs(post.loglik - e.log_sum) < 1e-9);
        for (const auto& g : post.gamma) {
            double s = 0.0;
            for (double p : g) s += p;
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("viterbi breaks ties towards the lower state") {
    GaussianHmm m;
    m.pi = {0.5, 0.5};
    m.trans = {{0.5, 0.5}, {0.5, 0.5}};
    m.emit = {{0.0, 1.0}, {0.0, 1.0}};
    const std::vector<double> obs{0.3, -0.1, 2.0};
    const auto v = viterbi(m, obs);
    CHECK(v.path == std::vector<std::size_t>{0, 0, 0});
}

TEST_CASE("baum-welch never lowers the likelihood") {
    std::mt19937_64 rng(303);
    for (int k = 0; k < 50; ++k) {
        auto inst = oracle::random_instance(rng, 3, 40, 2);
        double prev = -std::numeric_limits<double>::infinity();
        for (int it = 0; it < 10; ++it) {
            const auto step = baum_welch_step(inst.model, inst.obs);
            CHECK(step.loglik >= prev - 1e-9);
            prev = step.loglik;
            inst.model = step.model;
        }
    }
}

TEST_CASE("re-estimated model stays stochastic with floored variances") {
    const std::vector<double> obs{1.0, 1.0, 1.0, 1.0, 5.0, 5.0, 5.0};
    const auto step = baum_welch_step(two_state(), obs);
    CHECK_NOTHROW(validate(step.model));
    for (const auto& e : step.model.emit) CHECK(e.var >= kVarianceFloor);
}

TEST_CASE("a state with no posterior mass keeps its parameters") {
    GaussianHmm m;
    m.pi = {1.0, 0.0};
    m.trans = {{1.0, 0.0}, {0.0, 1.0}};
    m.emit = {{0.0, 1.0}, {100.0, 1.0}};
    const std::vector<double> obs{0.1, -0.2, 0.3};
    const auto step = baum_welch_step(m, obs);
    REQUIRE(step.starved == std::vector<std::size_t>{1});
    CHECK(step.model.emit[1].mean == 100.0);
    CHECK(step.model.trans[1] == std::vector<double>{0.0, 1.0});
}

TEST_CASE("fit recovers two well separated regimes") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> lo(0.0, 0.5), hi(20.0, 1.0);
    std::vector<double> obs;
    std::vector<std::size_t> truth;
    for (int block = 0; block < 10; ++block) {
        for (int i = 0; i < 50; ++i) {
            const bool h = block % 2 == 1;
            obs.push_back(h ? hi(rng) : lo(rng));
            truth.push_back(h ? 1 : 0);
        }
    }
    const std::vector<double> pct{25.0, 90.0};
    const auto res = fit(initial_model(obs, pct), obs, 3);
    CHECK(res.loglik_trace.size() == 3);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < obs.size(); ++i) agree += res.path[i] == truth[i];
    CHECK(agree == obs.size());
}

TEST_CASE("underflow is reported with the sample index") {
    // The only reachable state cannot explain the second sample at all.
    GaussianHmm m;
    m.pi = {1.0, 0.0};
    m.trans = {{1.0, 0.0}, {0.0, 1.0}};
    m.emit = {{0.0, 1e-6}, {1e6, 1e-6}};
    const std::vector<double> obs{0.0, 1e6};
    try {
        forward_backward(m, obs);
        FAIL("expected underflow");
    } catch (const GazeError& e) {
        CHECK(e.code() == ErrorCode::NumericalUnderflow);
        CHECK(std::string(e.what()).find('1') != std::string::npos);
    }
}

TEST_CASE("invalid models and empty observations are rejected") {
    auto m = two_state();
    m.trans[0] = {0.5, 0.6};
    CHECK_THROWS_AS(validate(m), GazeError);
    auto v = two_state();
    v.emit[1].var = 0.0;
    CHECK_THROWS_AS(validate(v), GazeError);
    const std::vector<double> none;
    try {
        viterbi(two_state(), none);
        FAIL("expected error");
    } catch (const GazeError& e) {
        CHECK(e.code() == ErrorCode::EmptyObservation);
    }
}

TEST_CASE("model text round trip") {
    const auto m = two_state();
    std::ostringstream out;
    write_model(out, m);
    std::istringstream in(out.str());
    const auto back = read_model(in);
    CHECK(back.pi == m.pi);
    CHECK(back.trans == m.trans);
    CHECK(back.emit[1].mean == m.emit[1].mean);
    CHECK(back.emit[1].var == m.emit[1].var);
}

TEST_CASE("percentile interpolates linearly") {
    const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
    CHECK(percentile(v, 0.0) == 1.0);
    CHECK(percentile(v, 100.0) == 4.0);
    CHECK(percentile(v, 50.0) == doctest::Approx(2.5));
}
