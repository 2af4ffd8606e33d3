#include <catch_amalgamated.hpp>

#include <cmath>

#include "cmj/criteria.hpp"

using namespace cmj;
using D = BirthTimeDistribution;
using X = OffspringDistribution;
using Catch::Approx;

TEST_CASE("h recursion for power laws is doubly exponential", "[criteria]") {
    // h(n+1) = h(n)^{1/alpha}, so log log h(n) = log log x0 + n log(1/alpha)
    for (double a : {0.3, 0.5, 0.8}) {
        auto h = h_sequence(X::power_law(a), 2.0, 50);
        for (std::size_t n = 0; n < h.loglog_h.size(); ++n)
            CHECK(h.loglog_h[n] == Approx(std::log(std::log(2.0)) - double(n) * std::log(a)).epsilon(1e-12));
        CHECK(h.loglog_at(1000) == Approx(std::log(std::log(2.0)) - 1000 * std::log(a)).epsilon(1e-9));
    }
}

TEST_CASE("steep_gamma boundary", "[criteria]") {
    // F^{-1}(1/h(n)) = (n log(1/alpha) + log log 2)^{-1/gamma}: summable iff gamma < 1
    auto Xp = X::power_law(0.5);
    CHECK(criterion(D::steep_gamma(0.5), Xp).verdict == Verdict::explosive);
    CHECK(criterion(D::steep_gamma(0.9), Xp).verdict == Verdict::explosive);
    CHECK(criterion(D::steep_gamma(1.0), Xp).verdict == Verdict::conservative);
    CHECK(criterion(D::steep_gamma(2.0), Xp).verdict == Verdict::conservative);
    CHECK(integral_verdict(D::steep_gamma(0.9), 1, 0.5).verdict == Verdict::explosive);
    CHECK(integral_verdict(D::steep_gamma(1.1), 1, 0.5).verdict == Verdict::conservative);
}

TEST_CASE("infinite-mean offspring makes every law with mass near 0 explode", "[criteria]") {
    // F^{-1}(1/h(n)) is doubly exponentially small whenever F(t) >= c t^k near 0
    auto Xp = X::power_law(0.5);
    for (auto d : {D::exponential(1), D::uniform(1), D::power_at_origin(3)}) {
        INFO(d.describe());
        CHECK(criterion(d, Xp).verdict == Verdict::explosive);
        CHECK(integral_verdict(d, 2, 0.25).verdict == Verdict::explosive);
    }
    CHECK(criterion(D::deterministic(1), Xp).verdict == Verdict::conservative);
    CHECK(integral_verdict(D::deterministic(1), 2, 0.25).verdict == Verdict::conservative);
}

TEST_CASE("nu_beta threshold sits at e", "[criteria]") {
    CHECK(integral_verdict(D::nu_beta(2.5), 1, 0.5).verdict == Verdict::explosive);
    CHECK(integral_verdict(D::nu_beta(2.8), 1, 0.5).verdict == Verdict::conservative);
    CHECK(criterion(D::nu_beta(2), X::power_law(0.5)).verdict == Verdict::explosive);
}

TEST_CASE("slowly varying law explodes", "[criteria]") {
    CHECK(criterion(D::slow_log(), X::power_law(0.5)).verdict == Verdict::explosive);
    CHECK(integral_verdict(D::slow_log(), 1, 0.5).verdict == Verdict::explosive);
}

TEST_CASE("partial sums are the running series", "[criteria]") {
    auto Xp = X::power_law(0.5);
    auto sg = D::steep_gamma(0.5);
    auto v = criterion(sg, Xp);
    auto h = h_sequence(Xp, 2.0, 10);
    double run = 0;
    for (std::size_t n = 0; n < 5; ++n) {
        run += sg.quantile(std::exp(-std::exp(h.loglog_h[n])));
        CHECK(v.partial_sums[n] == Approx(run).epsilon(1e-9));
    }
    CHECK(v.tail_bound >= 0);
}

TEST_CASE("defective laws: only the tail matters", "[criteria]") {
    auto Xp = X::power_law(0.5);
    auto th = combine(CombineMode::thin, D::steep_gamma(0.5), std::nullopt, 0.05);
    CHECK(criterion(th, Xp).verdict == Verdict::explosive);
    CHECK(integral_verdict(th, 1, 0.5).verdict == Verdict::explosive);
    CHECK(criterion(D::infinite(), Xp).verdict == Verdict::conservative);
    CHECK(integral_verdict(D::infinite(), 1, 0.5).verdict == Verdict::conservative);
}

TEST_CASE("offspring outside the plump power-law class cannot certify conservative", "[criteria]") {
    // log tails give a triply exponential h; the sum converges but no conservative claim is possible
    CHECK(criterion(D::exponential(1), X::log_tail()).verdict == Verdict::explosive);
    CHECK(criterion(D::deterministic(1), X::log_tail()).verdict == Verdict::inconclusive);
}

TEST_CASE("mass at zero decision tree", "[criteria]") {
    CHECK(mass_at_zero_classify(1.5, 0.1, true, true) == MassZeroClass::explosive);
    CHECK(mass_at_zero_classify(0.5, 0.1, true, true) == MassZeroClass::conservative);
    CHECK(mass_at_zero_classify(0.5, 0.1, false, true) == MassZeroClass::out_of_scope);
    CHECK(mass_at_zero_classify(1.0, 0.0, true, true) == MassZeroClass::explosive);
    CHECK(mass_at_zero_classify(1.0, 0.3, true, false) == MassZeroClass::conservative);
    CHECK(mass_at_zero_classify(1.0, 0.3, true, true) == MassZeroClass::reduce_to_infinite_intensity);
    CHECK_THROWS_AS(mass_at_zero_classify(-1, 0, true, true), std::invalid_argument);
}

TEST_CASE("criteria validation", "[criteria]") {
    CHECK_THROWS_AS(integral_verdict(D::exponential(1), 0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(integral_verdict(D::exponential(1), 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(h_sequence(X::power_law(0.5), 1.0, 10), std::invalid_argument);
}

TEST_CASE("pareto h sequence in the continuous idealization", "[criteria]") {
    auto h = h_sequence(X::pareto_tail(0.5), 2.0, 6, true);
    const double want[] = {2, 4, 16, 256, 65536};
    for (int n = 0; n < 5; ++n) CHECK(std::exp(h.log_h[n]) == Approx(want[n]).epsilon(1e-9));
    auto h9 = h_sequence(X::pareto_tail(0.9), 2.0, 30, true);
    for (std::size_t n = 0; n < h9.log_h.size(); ++n)
        CHECK(h9.log_h[n] == Approx(std::pow(1 / 0.9, double(n)) * std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("bounded offspring has no h recursion", "[criteria]") {
    CHECK_THROWS_AS(h_sequence(X::constant(3), 2.0, 10), RecursionError);
}

TEST_CASE("verdicts do not depend on the starting threshold", "[criteria]") {
    auto Xp = X::power_law(0.5);
    for (auto d : {D::steep_gamma(0.5), D::steep_gamma(1.5), D::exponential(1), D::cantor(), D::nu_beta(2)}) {
        auto v = criterion(d, Xp, 2.0).verdict;
        INFO(d.describe());
        CHECK(criterion(d, Xp, 10.0).verdict == v);
        CHECK(criterion(d, Xp, 100.0).verdict == v);
    }
}
