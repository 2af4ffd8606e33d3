#include <catch_amalgamated.hpp>

#include <cmath>

#include "cmj/offspring.hpp"

using namespace cmj;
using X = OffspringDistribution;
using Catch::Approx;

TEST_CASE("power_law tail is the Sibuya product", "[offspring]") {
    for (double a : {0.3, 0.5, 0.8}) {
        auto d = X::power_law(a);
        double t = 1;
        for (int k = 1; k <= 40; ++k) {
            t *= 1 - a / k;
            INFO("alpha=" << a << " k=" << k);
            CHECK(d.tail(k) == Approx(t).epsilon(1e-12));
        }
        CHECK(d.pmf(1) == Approx(a));
        CHECK(d.pmf(0) == 0);
    }
}

TEST_CASE("power_law generating function", "[offspring]") {
    auto d = X::power_law(0.5);
    for (double s : {0.0, 0.2, 0.7, 0.99}) CHECK(d.h(s) == Approx(1 - std::sqrt(1 - s)).epsilon(1e-14));
    CHECK(d.g(1e-300) == Approx(1e-150).epsilon(1e-12));
    CHECK(extinction_probability(d) == 0);
}

TEST_CASE("pareto tail", "[offspring]") {
    auto d = X::pareto_tail(0.5, 1.0);
    CHECK(d.tail(4) == Approx(0.5));
    CHECK(d.tail(100) == Approx(0.1));
    CHECK(d.quantile_tail(0.1) == Approx(100));
    // h(s) = sum_k P(X = k) s^k checked against a direct sum
    double s = 0.6, direct = 0;
    for (long k = 1; k < 4000; ++k) direct += d.pmf(k) * std::pow(s, double(k));
    CHECK(d.h(s) == Approx(direct).epsilon(1e-9));
}

TEST_CASE("finite table and constant", "[offspring]") {
    auto t = X::finite_table({0.25, 0.25, 0.25, 0.25});
    CHECK(t.h(0.5) == Approx(0.25 * (1 + 0.5 + 0.25 + 0.125)));
    CHECK(t.tail(1) == Approx(0.5));
    auto c = X::constant(2);
    CHECK(c.h(0.3) == Approx(0.09));
    CHECK(c.g(0.1) == Approx(1 - 0.81));
    // q = 1/4 + q/4 + q^2/4 + q^3/4 has smallest root sqrt(2) - 1
    CHECK(extinction_probability(t) == Approx(std::sqrt(2.0) - 1).epsilon(1e-9));
}

TEST_CASE("tail quantile and samplers", "[offspring]") {
    for (auto d : {X::power_law(0.5), X::pareto_tail(0.7, 2.0), X::log_tail(), X::tail_sandwich(0.3, 0.6)}) {
        for (double q : {0.9, 0.3, 1e-3, 1e-8}) {
            double k = d.quantile_tail(q);
            INFO(d.describe() << " q=" << q);
            CHECK(d.tail(k) <= q);
            // k - 1 is only distinct from k below 2^53
            if (k > 0 && k < 9e15) CHECK(d.tail(k - 1) > q);
            CHECK(d.sample_tail(q) == k);
        }
    }
}

TEST_CASE("plumpness audit", "[offspring]") {
    auto d = X::power_law(0.5);
    auto pp = d.plump_params();
    REQUIRE(pp);
    CHECK(plump_check(d, pp->c, pp->delta, pp->x0, 1e12).cls == PlumpClass::plump_power_law);
    // log tails are plump but not power-law bounded from above
    auto l = X::log_tail();
    CHECK(plump_check(l, 0.5, 0.5, 3, 1e12).cls != PlumpClass::neither);
    CHECK(plump_check(X::constant(3), 0.5, 0.5, 2, 1e6).cls == PlumpClass::neither);
}

TEST_CASE("generating function ordering", "[offspring]") {
    // heavier tail has the smaller generating function near 1
    CHECK(gen_fn_dominates(X::power_law(0.3), X::power_law(0.8), 0.5));
    CHECK_FALSE(gen_fn_dominates(X::power_law(0.8), X::power_law(0.3), 0.5));
}

TEST_CASE("offspring validation", "[offspring]") {
    CHECK_THROWS_AS(X::power_law(1.0), std::invalid_argument);
    CHECK_THROWS_AS(X::finite_table({0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(X::tail_sandwich(0.6, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(X::power_law(0.5).h(1.5), std::domain_error);
}
