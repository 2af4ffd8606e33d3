#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cmj {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// log(e^a + e^b), safe for infinities
inline double logaddexp(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    if (a == kInf || b == kInf) return kInf;
    double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::fabs(a - b)));
}

// log(1 - e^{-x}) for x > 0
inline double log1mexp(double x) {
    if (x <= 0) return -kInf;
    if (x == kInf) return 0.0;
    return x < 0.693 ? std::log(-std::expm1(-x)) : std::log1p(-std::exp(-x));
}

inline double log_sum_exp(const std::vector<double>& v) {
    double m = -kInf;
    for (double x : v) m = std::max(m, x);
    if (m == -kInf || m == kInf) return m;
    double s = 0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

/// Probability p -> log(-log p).  p=0 -> +inf, p=1 -> -inf.
inline double lnl_of_prob(double p) {
    if (p <= 0) return kInf;
    if (p >= 1) return -kInf;
    return std::log(-std::log(p));
}

/// log p -> log(-log p)
inline double lnl_of_logp(double lp) {
    if (lp == -kInf) return kInf;
    if (lp >= 0) return -kInf;
    return std::log(-lp);
}

/// log(-log p) -> log p  (may be -inf)
inline double logp_of_lnl(double l) {
    if (l == kInf) return -kInf;
    if (l == -kInf) return 0.0;
    return -std::exp(l);
}

// log(e^l + c) without overflowing e^l
inline double lnl_add(double l, double c) {
    if (l == kInf) return kInf;
    if (l == -kInf) return c > 0 ? std::log(c) : -kInf;
    if (l > 30) return l + std::log1p(c * std::exp(-l));
    double v = std::exp(l) + c;
    return v > 0 ? std::log(v) : -kInf;
}

/// Smallest x in [lo, hi] with pred(x) true, pred monotone false->true.
template <class Pred>
double bisect_first_true(double lo, double hi, Pred pred, double abs_tol, int max_iter = 400) {
    for (int i = 0; i < max_iter && hi - lo > abs_tol; ++i) {
        double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (pred(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

// splitmix64 finalizer; used for seed derivation
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(mix64(master) ^ (index * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
}

/// Wilson score interval (95% by default).
struct Interval {
    double lo, hi;
};

inline Interval wilson(std::uint64_t hits, std::uint64_t n, double z = 1.959963984540054) {
    if (n == 0) return {0.0, 1.0};
    double p = double(hits) / double(n);
    double z2 = z * z;
    double denom = 1 + z2 / n;
    double centre = (p + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(p * (1 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Asymptotic Kolmogorov survival function Q(lambda) = P(K > lambda).
inline double kolmogorov_q(double lambda) {
    if (lambda <= 0) return 1.0;
    if (lambda < 0.2) return 1.0;
    double s = 0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 ? 1 : -1) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(2 * s, 0.0, 1.0);
}

struct KsResult {
    double statistic;
    double p_value;
};

/// Two-sample Kolmogorov-Smirnov test (asymptotic p-value with the
/// Stephens small-sample correction).  Ties are handled by stepping
/// through equal values together.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = double(a.size()), nb = double(b.size());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::fabs(i / na - j / nb));
    }
    double ne = na * nb / (na + nb);
    double sq = std::sqrt(ne);
    double lambda = (sq + 0.12 + 0.11 / sq) * d;
    return {d, kolmogorov_q(lambda)};
}

}  // namespace cmj
