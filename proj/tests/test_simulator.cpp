#include <catch_amalgamated.hpp>

#include <cmath>

#include "cmj/simulator.hpp"

using namespace cmj;
using D = BirthTimeDistribution;
using X = OffspringDistribution;
using Catch::Approx;

namespace {

EpidemicSpec spec_of(X x, D s) {
    EpidemicSpec e;
    e.offspring = x;
    e.sigma = s;
    return e;
}

}  // namespace

TEST_CASE("binary tree with unit lifetimes", "[simulator]") {
    auto spec = spec_of(X::constant(2), D::deterministic(1));
    for (bool ex : {false, true}) {
        auto r = simulate_once(spec, 5, 10, 1, ex);
        CHECK(r.cap_hit);
        CHECK(r.hit_time == 3);
        CHECK(r.population_at_horizon == 10);
        CHECK(r.m_seq == std::vector<double>{1, 2, 3});
    }
    // below the cap the whole tree up to the horizon is counted: 1 + 2 + 4
    auto r = simulate_once(spec, 2, 1000, 1);
    CHECK_FALSE(r.cap_hit);
    CHECK(r.population_at_horizon == 7);
}

TEST_CASE("first-generation birth times follow sigma", "[simulator]") {
    auto spec = spec_of(X::constant(1), D::exponential(1));
    SimOptions o;
    o.horizon = 50;
    o.cap = 1000000;
    Simulator sim(spec, o);
    auto recs = run_trials(sim, 4000, 3);
    std::vector<double> a, b;
    detail::Rng rng(77);
    for (auto& r : recs) {
        REQUIRE(!r.m_seq.empty());
        a.push_back(r.m_seq[0]);
        b.push_back(-std::log(rng.u()));
    }
    CHECK(ks_two_sample(a, b).p_value > 0.001);
}

TEST_CASE("independent trials are reproducible and seed-dependent", "[simulator]") {
    auto spec = spec_of(X::power_law(0.5), D::exponential(1));
    auto a = simulate_once(spec, 1, 2000, 42), b = simulate_once(spec, 1, 2000, 42), c = simulate_once(spec, 1, 2000, 43);
    CHECK(a.hit_time == b.hit_time);
    CHECK(a.tau_seq == b.tau_seq);
    CHECK(a.events_processed == b.events_processed);
    CHECK((a.tau_seq != c.tau_seq || a.hit_time != c.hit_time));
    SimOptions o;
    o.horizon = 1;
    o.cap = 2000;
    Simulator sim(spec, o);
    auto one = run_trials(sim, 50, 9, 1), four = run_trials(sim, 50, 9, 4);
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(one[i].hit_time == four[i].hit_time);
        CHECK(one[i].seed == hash_seed(9, i));
    }
}

TEST_CASE("cap-hit frequency for an explosive process", "[simulator]") {
    auto spec = spec_of(X::power_law(0.5), D::exponential(1));
    auto e = estimate_cdf(spec, {1.0, 2.0}, 100000, 300, 5);
    // operator reference: 0.3915 at t = 1 and 0.6312 at t = 2
    CHECK(std::fabs(e.estimate[0] - 0.3915) < 3 * e.half_width(0) + 0.01);
    CHECK(std::fabs(e.estimate[1] - 0.6312) < 3 * e.half_width(1) + 0.01);
    CHECK(e.estimate[0] <= e.estimate[1]);
}

TEST_CASE("subcritical finite process never reaches a large cap", "[simulator]") {
    auto spec = spec_of(X::finite_table({0.5, 0.3, 0.2}), D::exponential(1));
    auto e = estimate_cdf(spec, {5.0}, 10000, 200, 1);
    CHECK(e.hits[0] == 0);
}

TEST_CASE("samplers", "[simulator]") {
    detail::Rng rng(1);
    double s = 0, s2 = 0;
    const int N = 20000;
    for (int i = 0; i < N; ++i) {
        double k = detail::binomial_draw(50, 0.3, rng);
        s += k;
        s2 += k * k;
    }
    CHECK(s / N == Approx(15).margin(0.1));
    CHECK(s2 / N - (s / N) * (s / N) == Approx(10.5).margin(0.4));
    CHECK(detail::binomial_draw(10, 0, rng) == 0);
    CHECK(detail::binomial_draw(10, 1, rng) == 10);
    double big = detail::binomial_draw(1e12, 0.5, rng);
    CHECK(std::fabs(big - 5e11) < 6 * std::sqrt(2.5e11));
}

TEST_CASE("heap orders events", "[simulator]") {
    struct Ev {
        double t;
        std::uint64_t id;
    };
    detail::MinHeap<Ev> h;
    std::uint64_t id = 0;
    for (double x : {5.0, 1.0, 4.0, 2.0, 3.0, 1.0}) h.push({x, id++});
    h.replace_top({2.5, id++});
    std::vector<double> out;
    std::vector<std::uint64_t> ids;
    while (!h.empty()) {
        out.push_back(h.top().t);
        ids.push_back(h.top().id);
        h.pop();
    }
    CHECK(out == std::vector<double>{1, 2, 2.5, 3, 4, 5});
    CHECK(ids[0] == 5);  // ties broken by insertion id; id 1 was replaced
}

TEST_CASE("atoms at zero are rejected when the zero-time process is supercritical", "[simulator]") {
    auto spec = spec_of(X::power_law(0.5), D::deterministic(0));
    CHECK_THROWS_AS(simulate_once(spec, 1, 100, 1), SimulationRejected);
    auto heavy = spec_of(X::power_law(0.5), D::exponential(1));
    heavy.direction = Direction::backward;
    CHECK_NOTHROW(simulate_once(heavy, 0.5, 100, 1));
    auto unbounded = spec_of(X::power_law(0.5), D::exponential(1));
    CHECK_THROWS_AS(simulate_once(unbounded, 0.5, 100, 1, true), std::invalid_argument);
}
