#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dist.hpp"
#include "numeric.hpp"
#include "offspring.hpp"

namespace cmj {

enum class Verdict { explosive, conservative, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::explosive: return "explosive";
        case Verdict::conservative: return "conservative";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct ExplosionVerdict {
    Verdict verdict = Verdict::inconclusive;
    std::vector<double> partial_sums;  // running sums of the first terms
    double tail_bound = kInf;
    double n_used = 0;  // number of original terms covered by the certificate
    std::string notes;
};

/// h(0..n) stored as log h(n) and log log h(n)
struct HSequence {
    std::vector<double> log_h;
    std::vector<double> loglog_h;
    double x0 = 2;
    bool continuous = true;
    // once the log-log increments stabilize, later values are extrapolated
    double step = kNaN;
    std::size_t stable_from = 0;

    /// log log h(n) for any n, extrapolating past the stored range
    double loglog_at(double n) const {
        if (n < double(loglog_h.size())) return loglog_h[std::size_t(n)];
        if (std::isnan(step)) return kNaN;
        return loglog_h.back() + (n - double(loglog_h.size() - 1)) * step;
    }
};

inline double finite_level(double L) { return L == kInf ? 1e300 : L; }

inline HSequence h_sequence(const OffspringDistribution& X, double x0, std::size_t n_max, bool continuous = true) {
    if (!(x0 > 1)) throw std::invalid_argument("h_sequence: x0 must be > 1");
    if (n_max < 1) throw std::invalid_argument("h_sequence: n_max must be >= 1");
    HSequence s;
    s.x0 = x0;
    s.continuous = continuous;
    double L = std::log(std::log(x0));
    s.loglog_h.push_back(L);
    s.log_h.push_back(std::log(x0));
    int stable = 0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        double nl = X.next_loglog_h(L, continuous);
        if (nl == kInf) {
            // loglog h overflowed: every later term is 0 to double precision
            s.loglog_h.push_back(kInf);
            s.log_h.push_back(kInf);
            s.step = kInf;
            s.stable_from = n;
            break;
        }
        if (!(nl > L) || std::isnan(nl)) throw RecursionError("h recursion is not increasing");
        double d = nl - L;
        if (s.loglog_h.size() >= 2) {
            double dprev = L - s.loglog_h[s.loglog_h.size() - 2];
            stable = std::fabs(d - dprev) <= 1e-12 * std::fabs(d) ? stable + 1 : 0;
        }
        L = nl;
        s.loglog_h.push_back(L);
        s.log_h.push_back(std::exp(L));
        if (stable >= 5) {
            s.step = d;
            s.stable_from = n;
            break;
        }
    }
    return s;
}

namespace detail {

struct CertResult {
    Verdict verdict = Verdict::inconclusive;
    double tail = kInf;
    std::size_t K = 0;
    std::string notes;
};

/// Certificates on a condensed nonnegative series given as logs lb[0..K].
/// Explosive: ratios of group sums (group size m) stay below r < 1 for
/// 10 groups and the geometric tail is below 1e-6 of the partial sum.
/// Conservative: over 20 consecutive octaves the terms never drop below
/// half the first one, with no net decay.
inline CertResult condensed_certificate(const std::vector<double>& lb) {
    CertResult out;
    const std::size_t K = lb.size();
    if (K == 0) return out;
    double lsum = log_sum_exp(lb);
    for (std::size_t m : {1, 2, 4, 8}) {
        std::size_t groups = K / m;
        if (groups < 11) continue;
        std::vector<double> g;
        for (std::size_t j = 0; j < groups; ++j) {
            std::vector<double> part(lb.begin() + long(K - (groups - j) * m), lb.begin() + long(K - (groups - j - 1) * m));
            g.push_back(log_sum_exp(part));
        }
        double lr = -kInf;
        for (std::size_t j = groups - 10; j < groups; ++j) {
            double a = g[j - 1], b = g[j];
            double r = b == -kInf ? -kInf : (a == -kInf ? kInf : b - a);
            lr = std::max(lr, r);
        }
        if (lr < 0) {
            double r = std::exp(lr);
            double tail = g.back() == -kInf ? 0.0 : std::exp(g.back() + lr) / (1 - r);
            double total = lsum == -kInf ? 0.0 : std::exp(lsum);
            if (tail <= 1e-6 * total || (tail == 0 && total == 0)) {
                out.verdict = Verdict::explosive;
                out.tail = tail;
                out.K = K;
                out.notes = "geometric tail certificate, group size " + std::to_string(m);
                return out;
            }
        }
    }
    if (K >= 21) {
        std::size_t k0 = K - 21;
        double base = lb[k0];
        if (base > -kInf) {
            bool ok = true;
            for (std::size_t k = k0; k < K; ++k)
                if (lb[k] < base + std::log(0.5)) ok = false;
            double first = -kInf, last = -kInf;
            for (std::size_t k = k0; k < k0 + 5; ++k) first = std::max(first, lb[k]);
            for (std::size_t k = K - 5; k < K; ++k) last = std::max(last, lb[k]);
            if (ok && last >= first + std::log(0.95)) {
                out.verdict = Verdict::conservative;
                out.K = K;
                out.notes = "harmonic lower envelope over 20 octaves";
                return out;
            }
        }
    }
    return out;
}

}  // namespace detail

/// Min-summability verdict for sum_n F_sigma^{-1}(1/h(n)), certified on
/// the Cauchy-condensed series 2^k a_{2^k}.
inline ExplosionVerdict minsum_verdict(const BirthTimeDistribution& sigma, const HSequence& h, std::size_t k_max = 1000) {
    ExplosionVerdict v;
    auto log_term = [&](double n) { return sigma.log_quantile_ll(finite_level(h.loglog_at(n))); };
    double run = 0;
    for (std::size_t n = 0; n < std::min<std::size_t>(64, h.loglog_h.size() + (std::isnan(h.step) ? 0 : 64)); ++n) {
        double lt = log_term(double(n));
        run += lt == -kInf ? 0.0 : std::exp(lt);
        v.partial_sums.push_back(run);
    }
    // a_n for n >= 1 (h(0) enters as the first term but not the condensation)
    std::vector<double> lb;
    for (std::size_t k = 0; k <= k_max; ++k) {
        double n = std::ldexp(1.0, int(k));
        double L = h.loglog_at(n);
        if (std::isnan(L)) {
            v.notes = "h recursion did not stabilize; stopped at n=" + std::to_string(h.loglog_h.size() - 1) + "; ";
            break;
        }
        // an overflowed h is read at a huge finite level, so atoms away from 0 keep their term
        double la = sigma.log_quantile_ll(finite_level(L));
        if (la == kInf) {
            // a defective law has infinite quantiles until 1/h(n) drops below
            // its mass; only a law with no mass at all stays there
            if (!lb.empty() || sigma.total_mass() <= 0) {
                v.verdict = Verdict::conservative;
                v.notes += "infinite quantile (defective law)";
                v.n_used = n;
                return v;
            }
            continue;
        }
        lb.push_back(la == -kInf ? -kInf : double(k) * std::log(2.0) + la);
        if (lb.size() >= 11) {
            auto c = detail::condensed_certificate(lb);
            if (c.verdict != Verdict::inconclusive) {
                v.verdict = c.verdict;
                v.tail_bound = c.tail;
                v.n_used = std::ldexp(1.0, int(c.K));
                v.notes += c.notes;
                return v;
            }
        }
    }
    v.n_used = std::ldexp(1.0, int(lb.size()));
    v.notes += "no certificate within range";
    return v;
}

namespace detail {

// Romberg integral of exp(logf) over [a,b] for nonincreasing logf, as a log.
// Values are scaled by the maximum exp(logf(a)).
template <class LogF>
double log_romberg(LogF logf, double a, double b, double rel_tol = 1e-8, int max_nodes = 1024) {
    const double m = logf(a);
    if (m == -kInf) return -kInf;
    auto f = [&](double x) { return std::exp(logf(x) - m); };
    int n = 1;
    double trap = 0.5 * (b - a) * (1.0 + f(b));
    std::vector<double> prev_row{trap};
    double prev_est = trap;
    for (int level = 1;; ++level) {
        double hstep = (b - a) / (2.0 * n);
        double mid = 0;
        for (int i = 0; i < n; ++i) mid += f(a + (2 * i + 1) * hstep);
        trap = 0.5 * trap + hstep * mid;
        n *= 2;
        std::vector<double> row{trap};
        for (std::size_t j = 1; j <= prev_row.size(); ++j) {
            double p4 = std::pow(4.0, double(j));
            row.push_back((p4 * row[j - 1] - prev_row[j - 1]) / (p4 - 1));
        }
        double est = std::max(row.back(), 0.0);
        if ((level >= 4 && std::fabs(est - prev_est) <= rel_tol * est) || n >= max_nodes) {
            if (n >= max_nodes && std::fabs(est - prev_est) > rel_tol * est) est = std::max(trap, 0.0);
            return est > 0 ? std::log(est) + m : -kInf;
        }
        prev_est = est;
        prev_row.swap(row);
    }
}

}  // namespace detail

/// Verdict for int_{1/eps}^inf F_sigma^{-1}(e^{-Cu}) du/u.  With u = e^v
/// the integrand becomes q(v) = F^{-1}(exp(-e^{v + log C})); the integral
/// is cut into blocks of width 2^k and certified like a condensed series.
inline ExplosionVerdict integral_verdict(const BirthTimeDistribution& sigma, double C, double eps,
                                         std::size_t k_max = 1000) {
    if (!(C > 0)) throw std::invalid_argument("integral_verdict: C must be > 0");
    if (!(eps > 0 && eps < 1)) throw std::invalid_argument("integral_verdict: eps must lie in (0,1)");
    ExplosionVerdict v;
    const double v0 = std::log(1 / eps), lc = std::log(C);
    auto logq = [&](double x) { return sigma.log_quantile_ll(x + lc); };
    if (logq(v0) == kInf && !(sigma.total_mass() > 0)) {
        v.verdict = Verdict::conservative;
        v.notes = "infinite quantile (law without mass)";
        return v;
    }
    std::vector<double> lb;
    double run = 0;
    double start = v0;
    if (logq(v0) == kInf && sigma.total_mass() > 0) {
        // the integrand is infinite until e^{-Cu} drops below the total mass
        start = std::log(-std::log(sigma.total_mass()) / C) + 1;
        while (logq(start) == kInf) start += 1;
        v.notes = "integration starts past the infinite head; ";
    }
    for (std::size_t k = 0; k <= k_max; ++k) {
        double a = start + std::ldexp(1.0, int(k)) - 1;
        double b = start + std::ldexp(1.0, int(k) + 1) - 1;
        double li = detail::log_romberg(logq, a, b);
        lb.push_back(li);
        run += li == -kInf ? 0.0 : std::exp(li);
        v.partial_sums.push_back(run);
        if (lb.size() >= 11) {
            auto c = detail::condensed_certificate(lb);
            if (c.verdict != Verdict::inconclusive) {
                v.verdict = c.verdict;
                v.tail_bound = c.tail;
                v.n_used = double(lb.size());
                v.notes = c.notes;
                return v;
            }
        }
    }
    v.n_used = double(lb.size());
    v.notes = "no certificate within range";
    return v;
}

enum class MassZeroClass { explosive, conservative, reduce_to_infinite_intensity, out_of_scope };

inline const char* to_string(MassZeroClass c) {
    switch (c) {
        case MassZeroClass::explosive: return "explosive";
        case MassZeroClass::conservative: return "conservative";
        case MassZeroClass::reduce_to_infinite_intensity: return "reduce_to_infinite_intensity";
        case MassZeroClass::out_of_scope: return "out_of_scope";
    }
    return "?";
}

/// Decision tree on the summary statistics of xi at and near time 0.
inline MassZeroClass mass_at_zero_classify(double mean_at_zero, double prob_zero_children_at_zero,
                                           bool finite_intensity_near_zero, bool positive_intensity_near_zero) {
    if (!(mean_at_zero >= 0)) throw std::invalid_argument("mass_at_zero_classify: mean must be >= 0");
    if (!(prob_zero_children_at_zero >= 0 && prob_zero_children_at_zero <= 1))
        throw std::invalid_argument("mass_at_zero_classify: probability out of range");
    if (mean_at_zero > 1) return MassZeroClass::explosive;
    if (mean_at_zero < 1) return finite_intensity_near_zero ? MassZeroClass::conservative : MassZeroClass::out_of_scope;
    if (prob_zero_children_at_zero == 0) return MassZeroClass::explosive;
    if (!positive_intensity_near_zero) return MassZeroClass::conservative;
    if (finite_intensity_near_zero) return MassZeroClass::reduce_to_infinite_intensity;
    return MassZeroClass::out_of_scope;
}

/// Convenience: min-sum verdict with the default recursion for X.
inline ExplosionVerdict criterion(const BirthTimeDistribution& sigma, const OffspringDistribution& X,
                                  std::optional<double> x0 = std::nullopt, bool continuous = true) {
    auto h = h_sequence(X, x0.value_or(X.x0()), 4096, continuous);
    auto v = minsum_verdict(sigma, h);
    auto pp = X.plump_params();
    bool ppl = pp && plump_check(X, pp->c, pp->delta, std::max(pp->x0, 1.5), 1e12).cls == PlumpClass::plump_power_law;
    if (!ppl && v.verdict == Verdict::conservative) {
        v.verdict = Verdict::inconclusive;
        v.notes += "; offspring not witnessed plump power-law: the sum is sufficient only";
    } else if (!ppl) {
        v.notes += "; offspring not witnessed plump power-law: sufficient only";
    }
    return v;
}

}  // namespace cmj
