#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "criteria.hpp"
#include "dist.hpp"
#include "numeric.hpp"
#include "offspring.hpp"

namespace cmj {

struct ScheduleInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ScheduleMode { plain, forward_incubation };
enum class ScheduleStatus { feasible, inconclusive };

/// Generation-dependent thinning thresholds t_n with retention
/// p_n = exp(-C_p / beta^n).  p is stored as log p.
struct ThinningSchedule {
    double C = 1;
    double C_p = 1;  // constant in the retention sequence (C/beta after the index shift)
    double alpha = 0.5, beta = 0.75;
    double s0 = 0;
    std::vector<double> t_seq;      // t_1..t_n
    std::vector<double> log_p_seq;  // log p_1..log p_n
    double total_T = kInf;          // upper bound on sum of all t_n
    ScheduleMode mode = ScheduleMode::plain;
    double a = 0, q = 0;
    ScheduleStatus status = ScheduleStatus::inconclusive;
    std::string notes;

    bool feasible() const { return status == ScheduleStatus::feasible; }
};

/// W_n(s) from W_0(s) = s, W_{n+1}(s) = W_n(p_n g(s)) with p_0 = 1.
/// p_seq[i-1] holds p_i.
inline double wn_recursion(const OffspringDistribution& X, const std::vector<double>& p_seq, std::size_t n, double s) {
    if (!(s >= 0 && s <= 1)) throw std::domain_error("wn_recursion: s must lie in [0,1]");
    if (n == 0) return s;
    if (p_seq.size() + 1 < n) throw std::invalid_argument("wn_recursion: retention sequence too short");
    double x = X.g(s);
    for (std::size_t i = n - 1; i >= 1; --i) x = X.g(std::clamp(p_seq[i - 1] * x, 0.0, 1.0));
    return x;
}

/// log W_n for g(s) = s^alpha, from log p_i and log s
inline double wn_recursion_log(double alpha, const std::vector<double>& log_p, std::size_t n, double log_s) {
    if (n == 0) return log_s;
    double lx = alpha * log_s;
    for (std::size_t i = n - 1; i >= 1; --i) lx = alpha * (log_p[i - 1] + lx);
    return lx;
}

/// log of s^{alpha^n} prod_{i=1}^{n-1} p_i^{alpha^i}
inline double wn_closed_form_log(double alpha, const std::vector<double>& log_p, std::size_t n, double log_s) {
    double v = std::pow(alpha, double(n)) * log_s;
    for (std::size_t i = 1; i < n; ++i) v += std::pow(alpha, double(i)) * log_p[i - 1];
    return v;
}

/// lim_n prod_{j=1}^{n} p_j^{alpha^j}; the stored prefix is summed as is
/// and the remainder follows p_j = exp(-C_p/beta^j).
inline double survival_bound(const ThinningSchedule& s) {
    double lsum = 0;
    double aj = 1;
    std::size_t j = 1;
    for (; j <= s.log_p_seq.size(); ++j) {
        aj *= s.alpha;
        lsum += aj * s.log_p_seq[j - 1];
    }
    if (s.C_p > 0) {
        double r = s.alpha / s.beta;
        // sum_{i >= j} C_p (alpha/beta)^i
        lsum -= s.C_p * std::pow(r, double(j)) / (1 - r);
    }
    return std::exp(lsum);
}

namespace detail {

// 1 - s0: largest grid u with g(v) >= v^alpha for every grid v <= u
inline double comparison_threshold(const OffspringDistribution& X, double alpha) {
    const int N = 4096;
    double ok_u = 0;
    for (int k = N - 1; k >= 0; --k) {
        double u = std::pow(10.0, -12.0 * k / (N - 1));
        if (X.g(u) < std::pow(u, alpha) * (1 - 1e-12)) break;
        ok_u = u;
    }
    return ok_u;
}

// log t_n on n = 2^k for the condensed summability certificate
template <class LogT>
CertResult threshold_series_certificate(LogT log_t, std::size_t k_max = 200) {
    std::vector<double> lb;
    for (std::size_t k = 0; k < k_max; ++k) lb.push_back(double(k) * std::log(2.0) + log_t(std::ldexp(1.0, int(k))));
    return condensed_certificate(lb);
}

inline ThinningSchedule finish_schedule(ThinningSchedule s, const BirthTimeDistribution& law, double shift,
                                        std::size_t n_max) {
    auto log_t = [&](double n) { return law.log_quantile_ll(std::log(s.C) - (n + shift) * std::log(s.beta)); };
    for (std::size_t n = 1; n <= n_max; ++n) {
        s.t_seq.push_back(std::exp(log_t(double(n))));
        s.log_p_seq.push_back(-s.C_p / std::pow(s.beta, double(n)));
    }
    auto cert = threshold_series_certificate(log_t);
    if (cert.verdict == Verdict::conservative)
        throw ScheduleInfeasible("thinning thresholds are not summable: " + law.describe());
    if (cert.verdict == Verdict::explosive) {
        // sum_n t_n <= sum_k 2^k t_{2^k}
        double lsum = -kInf;
        for (std::size_t k = 0; k < 200; ++k)
            lsum = logaddexp(lsum, double(k) * std::log(2.0) + log_t(std::ldexp(1.0, int(k))));
        s.total_T = std::exp(lsum) + cert.tail;
        s.status = ScheduleStatus::feasible;
    } else {
        s.total_T = kInf;
        s.notes += "summability of thresholds not certified; ";
    }
    return s;
}

inline void raise_constant(ThinningSchedule& s, double one_minus_s0) {
    if (!(one_minus_s0 > 0)) throw ScheduleInfeasible("offspring law does not dominate the power-law comparison near 1");
    // exp(-(C_p/beta)/(1 - alpha/beta)) < 1 - s0
    for (int it = 0; it < 200; ++it) {
        double lhs = -(s.C_p / s.beta) / (1 - s.alpha / s.beta);
        if (lhs < std::log(one_minus_s0)) return;
        s.C *= 2;
        s.C_p *= 2;
    }
    throw ScheduleInfeasible("no admissible thinning constant found");
}

inline double witnessed_delta(const OffspringDistribution& X, std::optional<double> delta) {
    if (delta) {
        if (!(*delta > 0 && *delta < 1)) throw std::invalid_argument("thinning: delta must lie in (0,1)");
        return *delta;
    }
    auto pp = X.plump_params();
    if (!pp) throw std::invalid_argument("thinning: offspring law has no plump witness; pass delta explicitly");
    return pp->delta;
}

}  // namespace detail

/// Plain schedule: t_n = F^{-1}(exp(-C/beta^n)), alpha = 1 - delta/2,
/// beta = 1 - delta/4.  C is doubled until the comparison condition holds.
inline ThinningSchedule build_schedule(const BirthTimeDistribution& sigma, const OffspringDistribution& X, double C,
                                       std::size_t n_max, std::optional<double> delta = std::nullopt) {
    if (!(C > 0)) throw std::invalid_argument("build_schedule: C must be > 0");
    double d = detail::witnessed_delta(X, delta);
    ThinningSchedule s;
    s.alpha = 1 - d / 2;
    s.beta = 1 - d / 4;
    s.C = s.C_p = C;
    double u = detail::comparison_threshold(X, s.alpha);
    s.s0 = 1 - u;
    detail::raise_constant(s, u);
    return detail::finish_schedule(std::move(s), sigma, 0.0, n_max);
}

struct QEstimate {
    double q_hat = 1;
    bool slowly_varying = false;
};

/// max of F(a t)/F(t) over the smallest decade of t0 2^{-k}, k <= grid_n
inline QEstimate assumption_q_estimate(const BirthTimeDistribution& sigma, double a, double t0, int grid_n = 1000) {
    if (!(a > 0 && a < 1)) throw std::invalid_argument("assumption_q_estimate: a must lie in (0,1)");
    if (!(t0 > 0)) throw std::invalid_argument("assumption_q_estimate: t0 must be > 0");
    if (grid_n < 8) throw std::invalid_argument("assumption_q_estimate: grid_n must be >= 8");
    grid_n = std::min(grid_n, int(std::floor(std::log2(t0 / 1e-300))));
    auto ratio = [&](double logt) {
        double l1 = sigma.lnl(logt + std::log(a)), l2 = sigma.lnl(logt);
        if (l2 == kInf) return 0.0;
        if (l1 == kInf) return 0.0;
        // log F(at) - log F(t) = -e^{l1} + e^{l2}
        double d = l1 > 30 || l2 > 30 ? -std::exp(l2) * std::expm1(l1 - l2) : -std::exp(l1) + std::exp(l2);
        return std::exp(std::min(0.0, d));
    };
    int decade = int(std::ceil(std::log2(10.0)));
    QEstimate out;
    out.q_hat = 0;
    bool all_high = true;
    for (int k = grid_n - decade; k <= grid_n; ++k) {
        double r = ratio(std::log(t0) - k * std::log(2.0));
        out.q_hat = std::max(out.q_hat, r);
        if (r <= 0.99) all_high = false;
    }
    out.slowly_varying = all_high;
    return out;
}

inline BirthTimeDistribution h_gamma_transform(const BirthTimeDistribution& sigma, double gamma, double t0 = 0.25) {
    if (!(gamma >= 0)) throw std::invalid_argument("h_gamma_transform: gamma must be >= 0");
    return h_gamma_law(sigma, gamma, t0);
}

/// Forward-incubation schedule on the composite law
/// F~(t) = (1-q) F_I(a t) F_sigma(t), indices shifted by one.
inline ThinningSchedule forward_incubation_schedule(const BirthTimeDistribution& sigma,
                                                    const BirthTimeDistribution& incubation,
                                                    const OffspringDistribution& X, double a, double C,
                                                    std::size_t n_max, std::optional<double> delta = std::nullopt,
                                                    double t0 = 0.25) {
    if (!(a > 0 && a < 1)) throw std::invalid_argument("forward_incubation_schedule: a must lie in (0,1)");
    if (!(C > 0)) throw std::invalid_argument("forward_incubation_schedule: C must be > 0");
    auto qe = assumption_q_estimate(sigma, a, t0);
    if (qe.slowly_varying)
        throw std::invalid_argument("forward_incubation_schedule: F_sigma is slowly varying at 0; apply h_gamma_transform first");
    if (!(qe.q_hat < 1)) throw ScheduleInfeasible("ratio condition fails for this window constant");
    double d = detail::witnessed_delta(X, delta);
    auto composite = combine(CombineMode::thin,
                             combine(CombineMode::max, combine(CombineMode::scale, incubation, std::nullopt, 1 / a), sigma),
                             std::nullopt, 1 - qe.q_hat);
    ThinningSchedule s;
    s.mode = ScheduleMode::forward_incubation;
    s.a = a;
    s.q = qe.q_hat;
    s.alpha = 1 - d / 2;
    s.beta = 1 - d / 4;
    s.C = C;
    s.C_p = C / s.beta;
    double u = detail::comparison_threshold(X, s.alpha);
    s.s0 = 1 - u;
    detail::raise_constant(s, u);
    // thresholds must lie where the ratio bound was checked
    for (int it = 0; it < 200; ++it) {
        double t1 = std::exp(composite.log_quantile_ll(std::log(s.C) - 2 * std::log(s.beta)));
        if (t1 <= t0) break;
        if (!std::isfinite(t1) || it == 199) throw ScheduleInfeasible("thresholds do not enter the neighbourhood of 0");
        s.C *= 2;
        s.C_p *= 2;
    }
    return detail::finish_schedule(std::move(s), composite, 1.0, n_max);
}

}  // namespace cmj
