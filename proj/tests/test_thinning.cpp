#include <catch_amalgamated.hpp>

#include <cmath>

#include "cmj/thinning.hpp"

using namespace cmj;
using D = BirthTimeDistribution;
using X = OffspringDistribution;
using Catch::Approx;

TEST_CASE("survival bound is a geometric series", "[thinning]") {
    // sum_j (1/2)^j (4/3)^j = sum_j (2/3)^j = 2
    ThinningSchedule s;
    s.alpha = 0.5;
    s.beta = 0.75;
    s.C = s.C_p = 1;
    CHECK(survival_bound(s) == Approx(std::exp(-2.0)).epsilon(1e-12));
    for (int j = 1; j <= 12; ++j) s.log_p_seq.push_back(-1 / std::pow(0.75, j));
    CHECK(survival_bound(s) == Approx(std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("W_n recursion for g(s) = s^alpha", "[thinning]") {
    auto Xp = X::power_law(0.5);
    std::vector<double> p{std::exp(-1 / 0.75), std::exp(-1 / 0.5625)};
    // W_2(1) = g(p_1 g(1)) = sqrt(p_1)
    CHECK(wn_recursion(Xp, p, 2, 1.0) == Approx(std::exp(-0.5 / 0.75)).epsilon(1e-14));
    CHECK(wn_recursion(Xp, p, 2, 1.0) == Approx(0.513417).margin(1e-6));
    std::vector<double> lp{std::log(p[0]), std::log(p[1])};
    for (std::size_t n = 0; n <= 3; ++n) {
        double ls = std::log(0.3);
        CHECK(std::exp(wn_recursion_log(0.5, lp, n, ls)) == Approx(wn_recursion(Xp, p, n, 0.3)).epsilon(1e-12));
        CHECK(wn_recursion_log(0.5, lp, n, ls) == Approx(wn_closed_form_log(0.5, lp, n, ls)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(wn_recursion(Xp, p, 2, 1.5), std::domain_error);
}

TEST_CASE("plain schedules", "[thinning]") {
    auto Xp = X::power_law(0.5);
    // delta = 1/2: alpha = 3/4, beta = 7/8; t_1 = F^{-1}(exp(-C/beta))
    auto sg = build_schedule(D::steep_gamma(0.5), Xp, 5, 10, 0.5);
    CHECK(sg.feasible());
    CHECK(sg.alpha == 0.75);
    CHECK(sg.beta == 0.875);
    CHECK(sg.t_seq[0] == Approx(std::pow(std::log(sg.C / 0.875), -2.0)).epsilon(1e-10));
    CHECK(std::isfinite(sg.total_T));
    CHECK(survival_bound(sg) > 0);
    for (std::size_t i = 1; i < sg.t_seq.size(); ++i) CHECK(sg.t_seq[i] < sg.t_seq[i - 1]);
    for (std::size_t i = 1; i < sg.log_p_seq.size(); ++i) CHECK(sg.log_p_seq[i] < sg.log_p_seq[i - 1]);

    // exponential thresholds are -log(1 - p_n) with p_n = exp(-C/beta^n)
    auto ex = build_schedule(D::exponential(1), Xp, 5, 10, 0.5);
    CHECK(ex.feasible());
    CHECK(ex.t_seq[0] == Approx(-std::log1p(-std::exp(-ex.C / 0.875))).epsilon(1e-10));
    CHECK_THROWS_AS(build_schedule(D::deterministic(1), Xp, 1, 10), ScheduleInfeasible);
}

TEST_CASE("ratio estimate", "[thinning]") {
    auto u = assumption_q_estimate(D::uniform(1), 0.5, 0.25);
    CHECK(u.q_hat == Approx(0.5).epsilon(1e-9));
    CHECK_FALSE(u.slowly_varying);
    CHECK(assumption_q_estimate(D::slow_log(), 0.5, 0.25).slowly_varying);
    CHECK(assumption_q_estimate(D::steep_gamma(0.5), 0.5, 0.25).q_hat == Approx(0).margin(1e-12));
}

TEST_CASE("h_gamma transform", "[thinning]") {
    auto h = h_gamma_transform(D::slow_log(), 1.0);
    CHECK(h.cdf(std::exp(-2.0)) == Approx(std::exp(-2.0) / 2).epsilon(1e-14));
    CHECK_FALSE(assumption_q_estimate(h, 0.5, 0.25).slowly_varying);
}

TEST_CASE("forward incubation schedule", "[thinning]") {
    auto Xp = X::power_law(0.5);
    auto sg = D::steep_gamma(0.5);
    auto s = forward_incubation_schedule(sg, sg, Xp, 0.5, 1.0, 20, 0.5);
    CHECK(s.feasible());
    CHECK(s.mode == ScheduleMode::forward_incubation);
    CHECK(s.C_p == Approx(s.C / s.beta));
    CHECK(s.t_seq[0] <= 0.25);
    CHECK(survival_bound(s) > 0);
    // a deterministic incubation period leaves no mass near 0
    CHECK_THROWS_AS(forward_incubation_schedule(sg, D::deterministic(0.1), Xp, 0.5, 1.0, 20, 0.5),
                    ScheduleInfeasible);
    CHECK_THROWS_AS(forward_incubation_schedule(D::slow_log(), sg, Xp, 0.5, 1.0, 20, 0.5), std::invalid_argument);
}
