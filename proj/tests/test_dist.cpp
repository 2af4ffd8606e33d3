#include <catch_amalgamated.hpp>

#include <cmath>

#include "cmj/dist.hpp"

using namespace cmj;
using D = BirthTimeDistribution;
using Catch::Approx;

TEST_CASE("closed-form laws", "[dist]") {
    auto e = D::exponential(2);
    CHECK(e.cdf(0.5) == Approx(1 - std::exp(-1.0)).epsilon(1e-15));
    CHECK(e.quantile(0.5) == Approx(std::log(2.0) / 2).epsilon(1e-15));

    auto u = D::uniform(2);
    CHECK(u.cdf(1) == 0.5);
    CHECK(u.quantile(0.25) == Approx(0.5));

    auto p = D::power_at_origin(2);
    CHECK(p.cdf(0.5) == Approx(0.25));
    CHECK(p.quantile(0.09) == Approx(0.3));

    auto sg = D::steep_gamma(0.5);
    CHECK(sg.cdf(0.25) == Approx(std::exp(-std::exp(2.0))).epsilon(1e-14));
    CHECK(sg.cdf(2) == 1.0);
    // uniform continuation on (1,2]
    double f1 = std::exp(-std::exp(1.0));
    CHECK(sg.cdf(1.5) == Approx(f1 + 0.5 * (1 - f1)));

    auto sl = D::slow_log();
    CHECK(sl.cdf(std::exp(-2.0)) == Approx(0.5));
    CHECK(sl.cdf(0.5) == 1.0);
}

TEST_CASE("deterministic atoms and left limits", "[dist]") {
    auto d = D::deterministic(1);
    CHECK(d.cdf_left(1) == 0);
    CHECK(d.cdf(1) == 1);
    CHECK(d.atom_mass(1) == Approx(1));
    CHECK(d.quantile(1e-9) == 1);
    CHECK(d.quantile(1) == 1);
}

TEST_CASE("generalized inverse is the left-continuous inverse", "[dist]") {
    for (auto d : {D::exponential(1), D::uniform(3), D::steep_gamma(1.5), D::power_at_origin(0.7), D::cantor(),
                   D::mu_c(), D::nu_beta(2.5)}) {
        for (double y : {1e-6, 0.01, 0.2, 0.5, 0.77, 0.99}) {
            double q = d.quantile(y);
            INFO(d.describe() << " y=" << y);
            CHECK(d.cdf(q) >= y * (1 - 1e-12));
            if (q > 1e-12) CHECK(d.cdf_left(q * (1 - 1e-9)) <= y * (1 + 1e-9));
        }
    }
}

TEST_CASE("cantor function at exact ternary points", "[dist]") {
    auto c = D::cantor();
    CHECK(c.cdf(1.0 / 3) == Approx(0.5).epsilon(1e-15));
    CHECK(c.cdf(2.0 / 3) == Approx(0.5).epsilon(1e-15));
    CHECK(c.cdf(0.25) == Approx(1.0 / 3).epsilon(1e-12));
    CHECK(c.cdf(0.75) == Approx(2.0 / 3).epsilon(1e-12));
    CHECK(c.cdf(1.0 / 9) == Approx(0.25).epsilon(1e-15));
    // self-similarity F(t/3) = F(t)/2; rounding t/3 moves F by up to ~1e-10
    for (double t : {0.1, 0.37, 0.8})
        CHECK(c.cdf(t / 3) == Approx(c.cdf(t) / 2).margin(1e-9));
}

TEST_CASE("mu_c scaling on dyadic points", "[dist]") {
    auto m = D::mu_c();
    for (double t : {0.3, 0.55, 0.9})
        CHECK(m.cdf(t / 2) == Approx(m.cdf(t) / 3).epsilon(1e-12));
    CHECK(m.cdf(0.0) == 0);
    CHECK(m.cdf(1.0) == 1);
}

TEST_CASE("nu_beta atoms", "[dist]") {
    auto n = D::nu_beta(2);
    double expect = 0;
    for (int k = 1; k <= 6; ++k) expect += std::exp(-std::exp(std::pow(2.0, k)));
    CHECK(n.cdf(std::exp(-1.0)) == Approx(expect).epsilon(1e-12));
    CHECK(n.atom_mass(std::exp(-2.0)) == Approx(std::exp(-std::exp(4.0))).epsilon(1e-9));
    CHECK(n.cdf(0.999) == Approx(expect).epsilon(1e-12));
    CHECK(n.cdf(1.0) == 1.0);
}

TEST_CASE("log-scale evaluation agrees with the cdf", "[dist]") {
    for (auto d : {D::exponential(1), D::steep_gamma(0.5), D::slow_log(), D::cantor(), D::power_at_origin(2)}) {
        for (double t : {0.001, 0.05, 0.2}) {
            double F = d.cdf(t);
            INFO(d.describe() << " t=" << t);
            if (F > 0 && F < 1) CHECK(d.lnl(std::log(t)) == Approx(std::log(-std::log(F))).epsilon(1e-9));
        }
    }
    // far outside double range: steep_gamma has lnl = t^-gamma exactly
    CHECK(D::steep_gamma(0.5).lnl(-1000.0) == Approx(std::exp(500.0)));
}

TEST_CASE("combinations", "[dist]") {
    auto a = D::exponential(1), b = D::uniform(1);
    auto mx = combine(CombineMode::max, a, b), mn = combine(CombineMode::min, a, b);
    for (double t : {0.1, 0.5, 0.9}) {
        CHECK(mx.cdf(t) == Approx(a.cdf(t) * b.cdf(t)));
        CHECK(mn.cdf(t) == Approx(1 - (1 - a.cdf(t)) * (1 - b.cdf(t))));
    }
    // Exp(1) + U(0,1): F(t) = t - 1 + e^{-t} on [0,1]
    auto s = combine(CombineMode::sum, a, b);
    CHECK(s.cdf(0.5) == Approx(0.5 - 1 + std::exp(-0.5)).margin(1e-5));
    auto sc = combine(CombineMode::scale, a, std::nullopt, 3);
    CHECK(sc.cdf(3) == Approx(a.cdf(1)));
    auto th = combine(CombineMode::thin, a, std::nullopt, 0.2);
    CHECK(th.total_mass() == Approx(0.2));
    CHECK(th.cdf(1) == Approx(0.2 * a.cdf(1)));
    CHECK(std::isinf(th.quantile(0.3)));
    CHECK_THROWS_AS(combine(CombineMode::max, a), std::invalid_argument);
}

TEST_CASE("backward thinning and windows", "[dist]") {
    // sigma = U(0,1), I = U(0,1): cdf(t) = int_0^t x dx = t^2/2
    auto bt = backward_thinned(D::uniform(1), D::uniform(1));
    CHECK(bt.cdf(0.5) == Approx(0.125).margin(1e-6));
    CHECK(bt.total_mass() == Approx(0.5).margin(1e-6));
    // window with I = 0 and C ~ Exp(1): cdf(t) = int_0^t e^{-x} dx
    auto w = window_law(D::uniform(1), D::deterministic(0), D::exponential(1), false);
    CHECK(w.cdf(1.0) == Approx(1 - std::exp(-1.0)).margin(1e-6));
}

TEST_CASE("h_gamma tilt", "[dist]") {
    auto sg = D::steep_gamma(0.5);
    auto h = h_gamma_law(sg, 1.0, 0.25);
    CHECK(h.cdf(0.1) == Approx(0.1 * sg.cdf(0.1)).epsilon(1e-12));
    CHECK(dominates_at_origin(sg, h, 0.25, 256));
}

TEST_CASE("validation", "[dist]") {
    CHECK_THROWS_AS(D::exponential(0), std::invalid_argument);
    CHECK_THROWS_AS(D::nu_beta(1), std::invalid_argument);
    CHECK_THROWS_AS(D::omega(3, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(D::exponential(1).cdf(-1), std::domain_error);
    CHECK_THROWS_AS(D::exponential(1).quantile(0), std::domain_error);
    CHECK(D::infinite().total_mass() == 0);
}
