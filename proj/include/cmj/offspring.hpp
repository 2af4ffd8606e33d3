#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "numeric.hpp"

namespace cmj {

enum class OffspringKind { power_law, pareto_tail, log_tail, constant, finite_table, tail_sandwich };

struct PlumpParams {
    double c;
    double delta;
    double x0;
};

struct RecursionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Li_s(lambda) for 0 <= lambda < 1, 0 < s < 1
inline double polylog(double s, double lambda) {
    if (lambda <= 0) return 0.0;
    if (lambda <= 0.5) {
        double sum = 0, p = 1;
        for (int k = 1; k < 200; ++k) {
            p *= lambda;
            double term = p * std::pow(double(k), -s);
            sum += term;
            if (term < 1e-18 * sum) break;
        }
        return sum;
    }
    // Li_s(e^mu) = Gamma(1-s)(-mu)^{s-1} + sum_j zeta(s-j) mu^j / j!
    double mu = std::log(lambda);
    double sum = boost::math::tgamma(1 - s) * std::pow(-mu, s - 1);
    double fact = 1, mp = 1;
    for (int j = 0; j < 60; ++j) {
        if (j) {
            fact *= j;
            mp *= mu;
        }
        double term = boost::math::zeta(s - j) * mp / fact;
        sum += term;
        if (j > 2 && std::fabs(term) < 1e-18 * std::fabs(sum)) break;
    }
    return sum;
}

// lambda^a for huge a given as log a
inline double pow_log_exponent(double log_lambda, double log_a) {
    if (log_a > 700) return 0.0;
    return std::exp(std::exp(log_a) * log_lambda);
}

}  // namespace detail

/// Law of the total progeny X of one individual.
class OffspringDistribution {
public:
    /// Sibuya-type law with h(s) = 1 - (1-s)^alpha exactly; x0 is the
    /// default plumpness threshold.
    static OffspringDistribution power_law(double alpha, double x0 = 2.0) {
        check_alpha(alpha, "power_law");
        if (!(x0 > 1)) throw std::invalid_argument("power_law: x0 must be > 1");
        OffspringDistribution d(OffspringKind::power_law);
        d.a_ = alpha;
        d.x0_ = x0;
        d.plump_ = d.witness_plump(std::min(alpha, 1 - alpha), x0);
        d.build_head();
        return d;
    }
    /// P(X > k) = min(1, c k^-alpha)
    static OffspringDistribution pareto_tail(double alpha, double c = 1.0) {
        check_alpha(alpha, "pareto_tail");
        if (!(c > 0)) throw std::invalid_argument("pareto_tail: c must be > 0");
        OffspringDistribution d(OffspringKind::pareto_tail);
        d.a_ = alpha;
        d.c_ = c;
        d.k1_ = std::max(1.0, std::ceil(std::pow(c, 1 / alpha) * (1 - 1e-15)));
        d.x0_ = std::max(2.0, d.k1_);
        d.plump_ = PlumpParams{c, std::min(alpha, 1 - alpha), d.x0_};
        d.build_head();
        return d;
    }
    /// P(X > k) = min(1, c / floor(log k))
    static OffspringDistribution log_tail(double c = 1.0) {
        if (!(c > 0)) throw std::invalid_argument("log_tail: c must be > 0");
        OffspringDistribution d(OffspringKind::log_tail);
        d.c_ = c;
        d.x0_ = 3;
        d.build_head();
        return d;
    }
    static OffspringDistribution constant(long k) {
        if (k < 0) throw std::invalid_argument("constant: k must be >= 0");
        OffspringDistribution d(OffspringKind::constant);
        d.k_ = double(k);
        return d;
    }
    static OffspringDistribution finite_table(std::vector<double> pmf) {
        if (pmf.empty()) throw std::invalid_argument("finite_table: empty pmf");
        double s = 0;
        for (double p : pmf) {
            if (!(p >= 0)) throw std::invalid_argument("finite_table: negative probability");
            s += p;
        }
        if (std::fabs(s - 1) > 1e-9) throw std::invalid_argument("finite_table: probabilities must sum to 1");
        OffspringDistribution d(OffspringKind::finite_table);
        for (double& p : pmf) p /= s;
        d.pmf_ = std::move(pmf);
        d.tails_.resize(d.pmf_.size());
        double t = 1;
        for (std::size_t k = 0; k < d.pmf_.size(); ++k) {
            t -= d.pmf_[k];
            d.tails_[k] = std::max(0.0, t);
        }
        d.tails_.back() = 0;
        return d;
    }
    /// Staircase tail between x^-alpha_high and x^-alpha_low:
    /// x_0 = 2, x_{j+1} = x_j^{alpha_high/alpha_low}, tail x_j^-alpha_high on [x_j, x_{j+1}).
    static OffspringDistribution tail_sandwich(double alpha_low, double alpha_high) {
        check_alpha(alpha_low, "tail_sandwich");
        check_alpha(alpha_high, "tail_sandwich");
        if (!(alpha_low < alpha_high)) throw std::invalid_argument("tail_sandwich: need alpha_low < alpha_high");
        OffspringDistribution d(OffspringKind::tail_sandwich);
        d.a_ = alpha_low;
        d.a2_ = alpha_high;
        d.x0_ = 2;
        d.plump_ = PlumpParams{1.0, std::min(alpha_low, 1 - alpha_high), 2.0};
        d.build_head();
        return d;
    }

    OffspringKind kind() const { return kind_; }
    double alpha() const { return a_; }
    double alpha_high() const { return a2_; }
    double c() const { return c_; }
    double x0() const { return x0_; }
    const std::optional<PlumpParams>& plump_params() const { return plump_; }
    void set_plump_params(PlumpParams p) { plump_ = p; }

    std::string describe() const {
        switch (kind_) {
            case OffspringKind::power_law: return "power_law(alpha=" + num(a_) + ")";
            case OffspringKind::pareto_tail: return "pareto_tail(alpha=" + num(a_) + ",c=" + num(c_) + ")";
            case OffspringKind::log_tail: return "log_tail(c=" + num(c_) + ")";
            case OffspringKind::constant: return "constant(" + num(k_) + ")";
            case OffspringKind::finite_table: return "finite_table(" + std::to_string(pmf_.size()) + ")";
            case OffspringKind::tail_sandwich: return "tail_sandwich(" + num(a_) + "," + num(a2_) + ")";
        }
        return "?";
    }

    bool bounded() const { return kind_ == OffspringKind::constant || kind_ == OffspringKind::finite_table; }

    /// P(X > x)
    double tail(double x) const {
        if (x < 0) return 1.0;
        double k = std::floor(x);
        switch (kind_) {
            case OffspringKind::power_law: {
                if (k < 1e12)
                    return boost::math::tgamma_delta_ratio(k + 1 - a_, a_) / boost::math::tgamma(1 - a_);
                return std::pow(k + 0.5 * (1 - a_), -a_) / boost::math::tgamma(1 - a_);
            }
            case OffspringKind::pareto_tail: return k < 1 ? 1.0 : std::min(1.0, c_ * std::pow(k, -a_));
            case OffspringKind::log_tail: {
                if (k < 3) return 1.0;
                double m = std::floor(std::log(k));
                // log of an exact e^m may land just below m
                if (std::ceil(std::exp(m + 1)) <= k) m += 1;
                return std::min(1.0, c_ / m);
            }
            case OffspringKind::constant: return k < k_ ? 1.0 : 0.0;
            case OffspringKind::finite_table: return k >= double(tails_.size()) ? 0.0 : tails_[std::size_t(k)];
            case OffspringKind::tail_sandwich: {
                if (k < 2) return 1.0;
                int j = sandwich_block(k);
                return std::exp(-a2_ * sandwich_log_x(j));
            }
        }
        return 0.0;
    }
    double pmf(long k) const {
        if (k < 0) return 0.0;
        return std::max(0.0, tail(double(k) - 1) - tail(double(k)));
    }

    /// g(u) = 1 - h(1-u), accurate for small u
    double g(double u) const {
        if (u < 0 || u > 1) throw std::domain_error("g: argument must lie in [0,1]");
        if (u == 0) return 0.0;
        double lam = 1 - u;
        double ll = std::log1p(-u);  // log lambda
        switch (kind_) {
            case OffspringKind::power_law: return std::pow(u, a_);
            case OffspringKind::constant: return -std::expm1(k_ * ll);
            case OffspringKind::finite_table: {
                double s = 0;
                for (std::size_t k = tails_.size(); k-- > 0;) s = s * lam + tails_[k];
                return std::min(1.0, u * s);
            }
            case OffspringKind::pareto_tail: {
                if (u == 1) return 1.0;
                double head = -std::expm1(k1_ * ll);
                double partial = 0;
                for (long k = 1; k < long(k1_); ++k) partial += std::pow(double(k), -a_) * std::pow(lam, double(k));
                double li = detail::polylog(a_, lam);
                return std::min(1.0, head + u * c_ * (li - partial));
            }
            case OffspringKind::log_tail: {
                if (u == 1) return 1.0;
                // blocks of constant floor(log k): [ceil(e^m), ceil(e^{m+1}) - 1]
                double s = 0;
                double prev = std::exp(3 * ll);  // lambda^3; tail is 1 below k = 3
                s += 1 - prev;
                for (int m = 1; m < 100000; ++m) {
                    double a_next = std::ceil(std::exp(double(m + 1)));
                    double nxt = m + 1 > 700 ? 0.0 : std::exp(a_next * ll);
                    s += std::min(1.0, c_ / m) * (prev - nxt);
                    prev = nxt;
                    if (prev < 1e-300) break;
                }
                return std::min(1.0, s);
            }
            case OffspringKind::tail_sandwich: {
                if (u == 1) return 1.0;
                double prev = std::exp(2 * ll);
                double s = 1 - prev;
                for (int j = 0; j < 4000; ++j) {
                    double lx1 = sandwich_log_x(j + 1);
                    double nxt = lx1 > 700 ? 0.0 : std::exp(sandwich_start(j + 1) * ll);
                    s += std::exp(-a2_ * sandwich_log_x(j)) * (prev - nxt);
                    prev = nxt;
                    if (prev < 1e-300) break;
                }
                return std::min(1.0, s);
            }
        }
        return 0.0;
    }

    /// Generating function E[s^X]
    double h(double s) const {
        if (!(s >= 0 && s <= 1)) throw std::domain_error("h: argument must lie in [0,1]");
        if (s == 1) return 1.0;
        if (kind_ == OffspringKind::finite_table) {
            double v = 0;
            for (std::size_t k = pmf_.size(); k-- > 0;) v = v * s + pmf_[k];
            return v;
        }
        if (kind_ == OffspringKind::constant) return std::pow(s, k_);
        return 1 - g(1 - s);
    }

    /// Smallest integer k with P(X > k) <= q (q in (0,1]); may exceed 2^53
    double quantile_tail(double q) const {
        if (!(q > 0)) throw std::domain_error("quantile: tail level must be > 0");
        if (tail(0) <= q) return 0.0;
        double lo = 0, hi = 1;
        double guess = start_guess(q);
        if (guess >= 1 && guess < 1e300) {
            // bracket around the asymptotic inverse; usually one or two steps
            double step = 1;
            if (tail(guess) <= q) {
                hi = guess;
                lo = std::max(0.0, guess - step);
                while (lo > 0 && tail(lo) <= q) {
                    hi = lo;
                    step *= 2;
                    lo = std::max(0.0, lo - step);
                }
            } else {
                lo = guess;
                hi = guess + step;
                while (tail(hi) > q) {
                    lo = hi;
                    step *= 2;
                    hi += step;
                    if (hi == kInf) return kInf;
                }
            }
        }
        while (tail(hi) > q) {
            lo = hi;
            hi *= 2;
            if (hi == kInf) return kInf;
        }
        while (hi - lo > 1) {
            double mid = std::floor(lo + (hi - lo) / 2);
            if (mid <= lo || mid >= hi) break;
            if (tail(mid) <= q)
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }
    /// Smallest integer x with P(X <= x) >= y
    double quantile(double y) const {
        if (!(y > 0 && y < 1)) throw std::domain_error("quantile: probability must lie in (0,1)");
        return quantile_tail(1 - y);
    }
    /// Continuous idealization: the inverse of the pure lower-bound power law
    double quantile_continuous_tail(double q) const {
        switch (kind_) {
            case OffspringKind::power_law: return std::pow(q, -1 / a_);
            case OffspringKind::pareto_tail: return std::pow(c_ / q, 1 / a_);
            case OffspringKind::tail_sandwich: return std::pow(q, -1 / a2_);
            case OffspringKind::log_tail: return std::exp(c_ / q);
            default: return quantile_tail(q);
        }
    }
    double quantile_continuous(double y) const {
        if (!(y > 0 && y < 1)) throw std::domain_error("quantile: probability must lie in (0,1)");
        return quantile_continuous_tail(1 - y);
    }
    /// Inverse transform from a tail level v; small counts come from a cached table
    double sample_tail(double v) const {
        v = std::max(v, 1e-15);
        if (!head_.empty() && v >= head_.back()) {
            auto it = std::lower_bound(head_.begin(), head_.end(), v, std::greater<double>());
            return double(it - head_.begin());
        }
        return quantile_tail(v);
    }

    /// One step of h(n+1) = F_X^{-1}(1 - 1/h(n)) in log-log coordinates:
    /// takes L = log log h(n), returns log log h(n+1).
    double next_loglog_h(double L, bool continuous) const {
        double lh = std::exp(L);  // log h(n), may be inf
        if (lh < 600) {
            double h = std::exp(lh);
            double nx = continuous ? quantile_continuous_tail(1 / h) : quantile_tail(1 / h);
            if (!(nx > h)) throw RecursionError("h recursion is not increasing (non-plump offspring law?)");
            if (nx == kInf) return large_step(L, continuous);
            return std::log(std::log(nx));
        }
        return large_step(L, continuous);
    }

private:
    explicit OffspringDistribution(OffspringKind k) : kind_(k) {}

    // (c, delta) with c x^{-(1-delta)} <= P(X > x) <= c x^{-delta} on a grid of [x0, 1e12]
    std::optional<PlumpParams> witness_plump(double delta_max, double x0) const {
        for (double f : {0.9, 0.5, 0.25, 0.1}) {
            double delta = delta_max * f;
            double c_lo = kInf, c_hi = 0;
            for (int i = 0; i < 2048; ++i) {
                double x = std::ceil(x0 * std::pow(1e12 / x0, i / 2047.0));
                double t = tail(x);
                c_lo = std::min(c_lo, t * std::pow(x, 1 - delta));
                c_hi = std::max(c_hi, t * std::pow(x, delta));
            }
            if (c_hi < c_lo) return PlumpParams{std::sqrt(c_lo * c_hi), delta, x0};
        }
        return std::nullopt;
    }
    void build_head() {
        head_.resize(1024);
        for (std::size_t k = 0; k < head_.size(); ++k) head_[k] = tail(double(k));
    }
    double start_guess(double q) const {
        switch (kind_) {
            case OffspringKind::power_law:
                return std::floor(std::pow(q * boost::math::tgamma(1 - a_), -1 / a_) - 0.5 * (1 - a_));
            case OffspringKind::pareto_tail: return std::floor(std::pow(c_ / q, 1 / a_));
            default: return 0;
        }
    }
    static void check_alpha(double a, const char* who) {
        if (!(a > 0 && a < 1)) throw std::invalid_argument(std::string(who) + ": alpha must lie in (0,1)");
    }
    static std::string num(double x) {
        std::string s = std::to_string(x);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }
    double sandwich_log_x(int j) const { return std::log(2.0) * std::pow(a2_ / a_, double(j)); }
    // block index j with ceil(x_j) <= k < ceil(x_{j+1})
    int sandwich_block(double k) const {
        double r = std::log(a2_ / a_);
        int j = std::max(0, int(std::floor(std::log(std::log(k) / std::log(2.0)) / r)));
        while (j > 0 && sandwich_start(j) > k) --j;
        while (sandwich_log_x(j + 1) < 700 && sandwich_start(j + 1) <= k) ++j;
        return j;
    }
    // first integer of block j
    double sandwich_start(int j) const { return std::ceil(std::exp(sandwich_log_x(j)) * (1 - 1e-13)); }
    // log log of the next value once h(n) is beyond double range
    double large_step(double L, bool continuous) const {
        double lh = std::exp(L);
        switch (kind_) {
            case OffspringKind::power_law:
                if (continuous) return L - std::log(a_);
                return lnl_add(L, -std::lgamma(1 - a_)) - std::log(a_);
            case OffspringKind::pareto_tail: return lnl_add(L, std::log(c_)) - std::log(a_);
            case OffspringKind::tail_sandwich: {
                if (continuous) return L - std::log(a2_);
                double r = std::log(a2_ / a_);
                double j = std::ceil((L - std::log(a2_ * std::log(2.0))) / r - 1e-12);
                return std::log(std::log(2.0)) + j * r;
            }
            case OffspringKind::log_tail:
                // log h(n+1) = c h(n), or ceil(c h(n)) in integer mode
                return std::log(c_) + lh;
            default: throw RecursionError("h recursion is not increasing (bounded offspring law)");
        }
    }
    OffspringKind kind_;
    double a_ = 0, a2_ = 0, c_ = 1, x0_ = 2, k_ = 0, k1_ = 1;
    std::vector<double> pmf_, tails_, head_;
    std::optional<PlumpParams> plump_;
};

enum class PlumpClass { plump, plump_power_law, neither };

inline const char* to_string(PlumpClass c) {
    switch (c) {
        case PlumpClass::plump: return "plump";
        case PlumpClass::plump_power_law: return "plump_power_law";
        case PlumpClass::neither: return "neither";
    }
    return "?";
}

struct PlumpReport {
    PlumpClass cls;
    std::optional<double> first_violation;  // first x breaking the lower (or, if plump, the upper) bound
};

/// Witness audit of c x^{-(1-delta)} <= P(X > x) (<= c x^{-delta}) on a
/// geometric grid of integers in [x0, x_max].
inline PlumpReport plump_check(const OffspringDistribution& d, double c, double delta, double x0, double x_max) {
    if (!(delta > 0 && delta < 1)) throw std::invalid_argument("plump_check: delta must lie in (0,1)");
    if (!(x0 > 1)) throw std::invalid_argument("plump_check: x0 must be > 1");
    std::vector<double> xs;
    const int n = 2048;
    double lr = std::log(std::max(x_max, x0) / x0);
    for (int i = 0; i < n; ++i) {
        double x = std::ceil(x0 * std::exp(lr * i / (n - 1)));
        if (xs.empty() || x > xs.back()) xs.push_back(x);
    }
    std::optional<double> low_bad, up_bad;
    for (double x : xs) {
        double t = d.tail(x);
        if (!low_bad && t < c * std::pow(x, -(1 - delta)) * (1 - 1e-12)) low_bad = x;
        if (!up_bad && t > c * std::pow(x, -delta) * (1 + 1e-12)) up_bad = x;
    }
    if (low_bad) return {PlumpClass::neither, low_bad};
    if (up_bad) return {PlumpClass::plump, up_bad};
    return {PlumpClass::plump_power_law, std::nullopt};
}

/// h_{d1}(s) <= h_{d2}(s) at 1024 grid points of (s0, 1)
inline bool gen_fn_dominates(const OffspringDistribution& d1, const OffspringDistribution& d2, double s0) {
    if (!(s0 >= 0 && s0 < 1)) throw std::invalid_argument("gen_fn_dominates: s0 must lie in [0,1)");
    for (int i = 1; i <= 1024; ++i) {
        double s = s0 + (1 - s0) * double(i) / 1025.0;
        if (d1.h(s) > d2.h(s) + 1e-15) return false;
    }
    return true;
}

/// Smallest root of q = h(q) on [0,1] (extinction probability)
inline double extinction_probability(const OffspringDistribution& d) {
    double q = 0;
    for (int i = 0; i < 100000; ++i) {
        double nq = d.h(q);
        if (std::fabs(nq - q) < 1e-15) return nq;
        q = nq;
    }
    return q;
}

}  // namespace cmj
