#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "numeric.hpp"

namespace cmj {

struct UnsupportedCombination : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class DistKind {
    exponential,
    uniform,
    deterministic,
    power_at_origin,
    steep_gamma,
    nu_beta,
    cantor,
    mu_c,
    omega_counterexample,
    slow_log,
    table,
    combined,
    infinite,
    window,
    h_gamma,
};

enum class CombineMode { max, min, sum, scale, thin };

using Atom = std::pair<double, double>;  // (time, mass)

namespace detail {

/// Shared interface of every birth-time law.  All members are const and
/// the objects are never mutated after construction.
class DistImpl {
public:
    virtual ~DistImpl() = default;
    virtual DistKind kind() const = 0;
    virtual std::string describe() const = 0;
    virtual double cdf(double t) const = 0;
    virtual double atom_mass(double /*t*/) const { return 0.0; }
    virtual double total_mass() const { return 1.0; }
    // finite list of atoms in [0, t_max]; laws with infinitely many atoms
    // may return the heaviest ones only
    virtual std::vector<Atom> atoms(double /*t_max*/) const { return {}; }

    double cdf_left(double t) const {
        if (t <= 0) return 0.0;
        return std::max(0.0, cdf(t) - atom_mass(t));
    }

    virtual double quantile(double y) const { return generic_quantile(y); }

    // log(-log F(e^{logt}))
    virtual double lnl(double logt) const {
        double t = std::exp(logt);
        return lnl_of_prob(cdf(t));
    }

    // log F^{(-1)}(exp(-e^L))
    virtual double log_quantile_ll(double L) const { return generic_log_quantile_ll(L); }

    double generic_quantile(double y) const {
        if (cdf(0.0) >= y) return 0.0;
        auto ok = [&](int k) { return cdf(std::ldexp(1.0, k)) >= y; };
        int hi;
        if (ok(0)) {
            int step = 1, good = 0, bad;
            for (;;) {
                int k = good - step;
                if (k < -1074) {
                    bad = -1075;
                    break;
                }
                if (ok(k)) {
                    good = k;
                    step *= 2;
                } else {
                    bad = k;
                    break;
                }
            }
            while (good - bad > 1) {
                int mid = bad + (good - bad) / 2;
                if (ok(mid))
                    good = mid;
                else
                    bad = mid;
            }
            hi = good;
        } else {
            int k = 1;
            while (k <= 1023 && !ok(k)) ++k;
            if (k > 1023) return kInf;
            hi = k;
        }
        double b = std::ldexp(1.0, hi);
        double a = hi <= -1074 ? 0.0 : std::ldexp(1.0, hi - 1);
        for (int i = 0; i < 200; ++i) {
            double m = a + 0.5 * (b - a);
            if (m <= a || m >= b) break;
            if (cdf(m) >= y)
                b = m;
            else
                a = m;
        }
        return b;
    }

    double generic_log_quantile_ll(double L) const {
        if (L < 6.5) {
            double y = std::exp(-std::exp(L));
            if (y > total_mass()) return kInf;
            double q = quantile(y);
            return q == kInf ? kInf : std::log(q);
        }
        auto ok = [&](double lt) { return lnl(lt) <= L; };
        double hi, lo;
        if (ok(0.0)) {
            hi = 0.0;
            double step = 1.0;
            for (;;) {
                lo = hi - step;
                if (lo < -1e300) return -kInf;
                if (!ok(lo)) break;
                hi = lo;
                step *= 2;
            }
        } else {
            lo = 0.0;
            double step = 1.0;
            for (;;) {
                hi = lo + step;
                if (hi > 709.0) {
                    if (!ok(709.0)) return kInf;
                    hi = 709.0;
                    break;
                }
                if (ok(hi)) break;
                lo = hi;
                step *= 2;
            }
        }
        for (int i = 0; i < 300; ++i) {
            if (hi - lo <= 1e-14 * std::max(1.0, std::fabs(hi))) break;
            double m = lo + 0.5 * (hi - lo);
            if (ok(m))
                hi = m;
            else
                lo = m;
        }
        return hi;
    }
};

using ImplPtr = std::shared_ptr<const DistImpl>;

inline std::string fmt_num(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

// ---------------------------------------------------------------- kinds

class Exponential final : public DistImpl {
public:
    explicit Exponential(double r) : r_(r) {
        if (!(r > 0)) throw std::invalid_argument("exponential: rate must be > 0");
    }
    DistKind kind() const override { return DistKind::exponential; }
    std::string describe() const override { return "exponential(rate=" + fmt_num(r_) + ")"; }
    double cdf(double t) const override { return t <= 0 ? 0.0 : -std::expm1(-r_ * t); }
    double quantile(double y) const override { return y >= 1 ? kInf : -std::log1p(-y) / r_; }
    double lnl(double logt) const override {
        double lx = logt + std::log(r_);
        if (lx < -20) {
            double x = std::exp(lx);
            return std::log(-lx + 0.5 * x);
        }
        double x = std::exp(lx);
        return lnl_of_logp(log1mexp(x));
    }
    double log_quantile_ll(double L) const override {
        if (L > 6.5) return -std::exp(L) - std::log(r_);
        return generic_log_quantile_ll(L);
    }
    double rate() const { return r_; }

private:
    double r_;
};

class Uniform final : public DistImpl {
public:
    explicit Uniform(double b) : b_(b) {
        if (!(b > 0)) throw std::invalid_argument("uniform: upper end must be > 0");
    }
    DistKind kind() const override { return DistKind::uniform; }
    std::string describe() const override { return "uniform(0," + fmt_num(b_) + ")"; }
    double cdf(double t) const override { return t <= 0 ? 0.0 : std::min(t / b_, 1.0); }
    double quantile(double y) const override { return std::min(y, 1.0) * b_; }
    double lnl(double logt) const override { return lnl_of_logp(std::min(0.0, logt - std::log(b_))); }
    double log_quantile_ll(double L) const override { return std::log(b_) - std::exp(L); }

private:
    double b_;
};

class Deterministic final : public DistImpl {
public:
    explicit Deterministic(double c) : c_(c) {
        if (!(c >= 0) || !std::isfinite(c)) throw std::invalid_argument("deterministic: value must be finite and >= 0");
    }
    DistKind kind() const override { return DistKind::deterministic; }
    std::string describe() const override { return "deterministic(" + fmt_num(c_) + ")"; }
    double cdf(double t) const override { return t >= c_ ? 1.0 : 0.0; }
    double atom_mass(double t) const override { return t == c_ ? 1.0 : 0.0; }
    std::vector<Atom> atoms(double t_max) const override {
        if (c_ <= t_max) return {{c_, 1.0}};
        return {};
    }
    double quantile(double) const override { return c_; }
    double lnl(double logt) const override {
        if (c_ == 0) return -kInf;
        return logt >= std::log(c_) ? -kInf : kInf;
    }
    double log_quantile_ll(double) const override { return c_ == 0 ? -kInf : std::log(c_); }
    double value() const { return c_; }

private:
    double c_;
};

class PowerAtOrigin final : public DistImpl {
public:
    explicit PowerAtOrigin(double beta) : b_(beta) {
        if (!(beta > 0)) throw std::invalid_argument("power_at_origin: beta must be > 0");
    }
    DistKind kind() const override { return DistKind::power_at_origin; }
    std::string describe() const override { return "power_at_origin(beta=" + fmt_num(b_) + ")"; }
    double cdf(double t) const override { return t <= 0 ? 0.0 : (t >= 1 ? 1.0 : std::pow(t, b_)); }
    double quantile(double y) const override { return std::pow(std::min(y, 1.0), 1.0 / b_); }
    double lnl(double logt) const override { return lnl_of_logp(std::min(0.0, b_ * logt)); }
    double log_quantile_ll(double L) const override { return -std::exp(L) / b_; }

private:
    double b_;
};

// F(t) = exp(-exp(t^-gamma)) on [0,1]; the remaining mass 1 - e^{-e} is
// spread uniformly on (1,2].
class SteepGamma final : public DistImpl {
public:
    explicit SteepGamma(double g) : g_(g) {
        if (!(g > 0)) throw std::invalid_argument("steep_gamma: gamma must be > 0");
    }
    DistKind kind() const override { return DistKind::steep_gamma; }
    std::string describe() const override { return "steep_gamma(gamma=" + fmt_num(g_) + ")"; }
    static double f_at_one() { return std::exp(-std::exp(1.0)); }
    double cdf(double t) const override {
        if (t <= 0) return 0.0;
        if (t <= 1) return std::exp(-std::exp(std::pow(t, -g_)));
        double f1 = f_at_one();
        return std::min(1.0, f1 + (1 - f1) * (t - 1));
    }
    double quantile(double y) const override {
        double f1 = f_at_one();
        if (y <= f1) return std::pow(std::log(-std::log(y)), -1.0 / g_);
        return std::min(2.0, 1 + (y - f1) / (1 - f1));
    }
    double lnl(double logt) const override {
        if (logt < 0) return std::exp(-g_ * logt);
        return lnl_of_prob(cdf(std::exp(logt)));
    }
    double log_quantile_ll(double L) const override {
        if (L >= 1) return -std::log(L) / g_;
        return generic_log_quantile_ll(L);
    }
    double gamma() const { return g_; }

private:
    double g_;
};

// atoms exp(-exp(beta^n)) at e^{-n}, n >= 1, the rest at 1
class NuBeta final : public DistImpl {
public:
    explicit NuBeta(double beta) : b_(beta) {
        if (!(beta > 1)) throw std::invalid_argument("nu_beta: beta must be > 1");
        double s = 0;
        for (int n = 1; n <= 64; ++n) s += std::exp(-std::exp(std::pow(b_, n)));
        rest_ = 1 - s;
    }
    DistKind kind() const override { return DistKind::nu_beta; }
    std::string describe() const override { return "nu_beta(beta=" + fmt_num(b_) + ")"; }

    // log of the total mass on {e^{-k}: k >= n}
    double log_tail_mass(long n) const {
        double bn = n * std::log(b_);
        if (bn > 700) return -kInf;
        double en = std::exp(std::exp(bn));
        if (en == kInf) return -kInf;
        double rho = 0;
        for (long k = n + 1; k < n + 64; ++k) {
            double bk = k * std::log(b_);
            if (bk > 700) break;
            double d = std::exp(std::exp(bk)) - en;
            if (d > 745) break;
            rho += std::exp(-d);
        }
        return -en + std::log1p(rho);
    }
    // lnl at the point e^{-n}
    double lnl_at_index(long n) const {
        double bn = n * std::log(b_);
        if (bn > 700) return kInf;
        double en = std::exp(bn);
        if (en > 700) return en;  // correction below double precision
        return lnl_of_logp(log_tail_mass(n));
    }
    // smallest n >= 1 with e^{-n} <= t (t < 1)
    static long index_for(double logt) {
        double x = -logt;
        double r = std::round(x);
        if (std::fabs(x - r) <= 1e-12 * std::max(1.0, x)) return std::max(1L, long(r));
        return std::max(1L, long(std::ceil(x)));
    }
    static bool is_node(double t, long& n) {
        if (t <= 0 || t >= 1) return false;
        double x = -std::log(t);
        double r = std::round(x);
        if (r >= 1 && std::fabs(x - r) <= 1e-12 * std::max(1.0, x)) {
            n = long(r);
            return true;
        }
        return false;
    }
    double cdf(double t) const override {
        if (t >= 1) return 1.0;
        if (t <= 0) return 0.0;
        long n = index_for(std::log(t));
        return std::exp(log_tail_mass(n));
    }
    double atom_mass(double t) const override {
        if (t == 1.0) return rest_;
        long n;
        if (is_node(t, n)) return std::exp(-std::exp(std::pow(b_, double(n))));
        return 0.0;
    }
    std::vector<Atom> atoms(double t_max) const override {
        std::vector<Atom> out;
        for (int n = 64; n >= 1; --n) {
            double m = std::exp(-std::exp(std::pow(b_, n)));
            double t = std::exp(-double(n));
            if (m > 0 && t <= t_max) out.emplace_back(t, m);
        }
        if (1.0 <= t_max) out.emplace_back(1.0, rest_);
        return out;
    }
    double quantile(double y) const override {
        if (y > std::exp(log_tail_mass(1))) return 1.0;
        double ly = std::log(y);
        long n = 1;
        while (log_tail_mass(n + 1) >= ly) ++n;
        return std::exp(-double(n));
    }
    double lnl(double logt) const override {
        if (logt >= 0) return -kInf;
        return lnl_at_index(index_for(logt));
    }
    double log_quantile_ll(double L) const override {
        // largest n with lnl_at_index(n) <= L
        if (lnl_at_index(1) > L) return 0.0;
        long guess = std::max(1L, long(std::floor(std::log(std::max(L, 1e-300)) / std::log(b_))));
        long n = std::max(1L, guess - 2);
        while (n > 1 && lnl_at_index(n) > L) --n;
        while (lnl_at_index(n + 1) <= L) ++n;
        return -double(n);
    }
    double beta() const { return b_; }

private:
    double b_;
    double rest_;
};

// Cantor function helpers ------------------------------------------------

// F_Cantor on [1/3, 1) computed from ternary digits, boundaries snapped
inline long double cantor_unit(long double x) {
    long double f = 0, w = 0.5L;
    for (int i = 0; i < 64; ++i) {
        x *= 3;
        long double d = std::floor(x);
        if (d + 1 - x < 1e-13L) d += 1;
        if (d >= 3) d = 2;
        x -= d;
        if (x < 0) x = 0;
        if (d == 1) return f + w;
        if (d == 2) f += w;
        w *= 0.5L;
        if (x <= 1e-30L) break;
    }
    return f;
}

// log F_Cantor(e^{logt}), valid for any logt < 0
inline double cantor_log_cdf(double logt) {
    if (logt >= 0) return 0.0;
    const double l3 = std::log(3.0), l2 = std::log(2.0);
    long m = 0;
    if (logt < -l3) {
        m = long(std::floor(-logt / l3)) - 1;
        if (m < 0) m = 0;
    }
    long double x = std::exp((long double)logt + (long double)m * (long double)l3);
    while (x < 1.0L / 3.0L * (1 - 1e-15L)) {
        x *= 3;
        ++m;
    }
    if (x >= 1) return -double(m) * l2;
    return -double(m) * l2 + double(std::log(cantor_unit(x)));
}

// quantile of the Cantor law for y in [1/2, 1] from its binary digits
inline long double cantor_quantile_unit(double y) {
    if (y >= 1) return 1.0L;
    long double q = 0, w = 1.0L / 3.0L;
    double r = y;
    long double last_w = 0;
    bool seen = false;
    for (int i = 0; i < 1100 && r > 0; ++i) {
        r *= 2;
        if (r >= 1) {
            r -= 1;
            q += 2 * w;
            last_w = w;
            seen = true;
        }
        w /= 3;
    }
    // a terminating binary expansion ends in ...1; the infimum uses ...0111
    if (seen) q -= last_w;
    return q;
}

// binary-digit image of the Cantor law onto [0,1]: x = sum b_i 2^-i -> sum 2 b_i 3^-i
inline long double binary_to_ternary_unit(double f) {
    long double q = 0, w = 1.0L / 3.0L;
    double r = f;
    for (int i = 0; i < 1100 && r > 0; ++i) {
        r *= 2;
        if (r >= 1) {
            r -= 1;
            q += 2 * w;
        }
        w /= 3;
    }
    return q;
}

class Cantor final : public DistImpl {
public:
    DistKind kind() const override { return DistKind::cantor; }
    std::string describe() const override { return "cantor"; }
    double cdf(double t) const override {
        if (t <= 0) return 0.0;
        if (t >= 1) return 1.0;
        // digits of t itself; going through log t costs ~1e-10 near 1/4 at Hoelder exponent 0.63
        if (t > 1e-12) return double(cantor_unit(t));
        return std::exp(cantor_log_cdf(std::log(t)));
    }
    double quantile(double y) const override {
        if (y >= 1) return 1.0;
        int e;
        double f = std::frexp(y, &e);  // y = f 2^e, f in [1/2,1)
        double q = double(cantor_quantile_unit(f) * std::pow(3.0L, (long double)e));
        // rounding q to double can land just left of the inverse
        for (int i = 0; i < 64 && cdf(q) < y; ++i) q = std::nextafter(q, 2.0);
        return q;
    }
    double lnl(double logt) const override { return lnl_of_logp(cantor_log_cdf(logt)); }
    double log_quantile_ll(double L) const override {
        if (L < 6.5) return generic_log_quantile_ll(L);
        const double l2 = std::log(2.0);
        double a = std::exp(L);  // -log y
        if (a == kInf) return -kInf;
        double m = std::floor(a / l2);
        double rem = a - m * l2;
        double f = a > 4e15 ? 0.75 : std::exp(-rem);
        if (f < 0.5) f = 0.5;
        return -m * std::log(3.0) + double(std::log(cantor_quantile_unit(f)));
    }
};

class MuC final : public DistImpl {
public:
    DistKind kind() const override { return DistKind::mu_c; }
    std::string describe() const override { return "mu_c"; }
    static double log_cdf(double t) {
        int e;
        double f = std::frexp(t, &e);  // t = f 2^e
        return double(e) * std::log(3.0) + double(std::log(binary_to_ternary_unit(f)));
    }
    double cdf(double t) const override {
        if (t <= 0) return 0.0;
        if (t >= 1) return 1.0;
        return std::exp(log_cdf(t));
    }
    // position of the last non-zero binary digit of t in (0,1)
    static int last_digit(double t) {
        int e;
        double f = std::frexp(t, &e);
        int pos = -e;
        int last = pos;
        double r = f;
        for (int i = 1; r > 0 && i < 1100; ++i) {
            r *= 2;
            if (r >= 1) {
                r -= 1;
                last = pos + i;
            }
        }
        return last;
    }
    double atom_mass(double t) const override {
        if (t <= 0 || t >= 1) return 0.0;
        return std::pow(3.0, -double(last_digit(t)));
    }
    double quantile(double y) const override {
        if (y >= 1) return 1.0;
        return std::exp(cantor_log_cdf(std::log(y)));
    }
    double lnl(double logt) const override {
        if (logt >= 0) return -kInf;
        if (logt > -700) return lnl_of_logp(log_cdf(std::exp(logt)));
        // self-similarity F(t/2) = F(t)/3
        double k = std::floor(-logt / std::log(2.0)) - 2;
        double lt = logt + k * std::log(2.0);
        return lnl_of_logp(log_cdf(std::exp(lt)) - k * std::log(3.0));
    }
    double log_quantile_ll(double L) const override {
        if (L < 6.5) return generic_log_quantile_ll(L);
        const double l3 = std::log(3.0);
        double a = std::exp(L);
        if (a == kInf) return -kInf;
        double m = std::floor(a / l3);
        double rem = a - m * l3;
        double yp = a > 4e15 ? 0.5 : std::exp(-rem);  // in (1/3, 1]
        if (yp < 1.0 / 3.0) yp = 1.0 / 3.0;
        return -m * std::log(2.0) + cantor_log_cdf(std::log(yp));
    }
};

// the absolutely continuous counterexample: nu_beta mass smeared over
// (e^{-n}/2, 3e^{-n}/2), plus the steep_gamma density on [0,1], plus the
// remainder uniform on (1,2]
class Omega final : public DistImpl {
public:
    Omega(double beta, double gamma) : b_(beta), g_(gamma) {
        if (!(beta > 1 && beta < std::exp(1.0))) throw std::invalid_argument("omega: beta must lie in (1,e)");
        if (!(gamma > 1)) throw std::invalid_argument("omega: gamma must be > 1");
        double s = 0;
        for (int n = 1; n <= 64; ++n) {
            double m = std::exp(-std::exp(std::pow(b_, n)));
            if (m == 0) break;
            mass_.push_back(m);
            s += m;
        }
        rest_ = 1 - s - SteepGamma::f_at_one();
    }
    DistKind kind() const override { return DistKind::omega_counterexample; }
    std::string describe() const override {
        return "omega(beta=" + fmt_num(b_) + ",gamma=" + fmt_num(g_) + ")";
    }
    // log of the smeared component F value, log F_gamma part
    double cdf(double t) const override {
        if (t <= 0) return 0.0;
        double s = 0;
        for (std::size_t i = 0; i < mass_.size(); ++i) {
            double c = std::exp(-double(i + 1));
            s += mass_[i] * std::clamp((t - c / 2) / c, 0.0, 1.0);
        }
        double tg = std::min(t, 1.0);
        s += std::exp(-std::exp(std::pow(tg, -g_)));
        s += rest_ * std::clamp(t - 1, 0.0, 1.0);
        return std::min(s, 1.0);
    }
    double lnl(double logt) const override {
        if (logt > -1.0) return lnl_of_prob(cdf(std::exp(logt)));
        // components in lnl space: smeared masses n >= n0, then F_gamma
        double comps[16];
        int nc = 0;
        long n0 = std::max(1L, long(std::floor(-logt - std::log(2.0))) + 1);
        const double lb = std::log(b_);
        for (long n = n0; n < n0 + 12; ++n) {
            double frac = std::exp(double(n) + logt) - 0.5;  // (t - c/2)/c
            if (frac <= 0) continue;
            frac = std::min(frac, 1.0);
            double bn = double(n) * lb;
            if (bn > 700) break;
            // -log(m_n frac) = e^{beta^n} - log frac
            comps[nc++] = lnl_add(std::exp(bn), -std::log(frac));
        }
        comps[nc++] = std::exp(-g_ * logt);
        double lmin = kInf;
        for (int i = 0; i < nc; ++i) lmin = std::min(lmin, comps[i]);
        if (lmin > 6.0) return lmin;
        std::vector<double> lps;
        for (int i = 0; i < nc; ++i) lps.push_back(logp_of_lnl(comps[i]));
        return lnl_of_logp(log_sum_exp(lps));
    }
    double log_quantile_ll(double L) const override {
        if (L < 6.5) return generic_log_quantile_ll(L);
        // the spread part has lnl about t^{-log beta}, F_gamma has t^{-gamma}
        double lo = -std::log(L) / std::log(b_) - 3;
        double hi = std::min(-1.0, -std::log(L) / g_ + 1);
        if (lo == -kInf) return -kInf;
        lo = std::min(lo, hi - 1);
        while (lnl(lo) <= L) lo -= 4;
        while (lnl(hi) > L) hi = std::min(0.0, hi + 4);
        for (int i = 0; i < 200 && hi - lo > 1e-14 * std::max(1.0, std::fabs(hi)); ++i) {
            double m = lo + 0.5 * (hi - lo);
            if (lnl(m) <= L)
                hi = m;
            else
                lo = m;
        }
        return hi;
    }

private:
    double b_, g_, rest_;
    std::vector<double> mass_;
};

// F(t) = 1/log(1/t) below 1/e; slowly varying at the origin
class SlowLog final : public DistImpl {
public:
    DistKind kind() const override { return DistKind::slow_log; }
    std::string describe() const override { return "slow_log"; }
    double cdf(double t) const override {
        if (t <= 0) return 0.0;
        if (t >= std::exp(-1.0)) return 1.0;
        return 1.0 / (-std::log(t));
    }
    double quantile(double y) const override { return std::exp(-1.0 / std::min(y, 1.0)); }
    double lnl(double logt) const override {
        if (logt >= -1) return -kInf;
        return std::log(std::log(-logt));
    }
    double log_quantile_ll(double L) const override {
        double a = std::exp(L);
        return -std::exp(a);
    }
};

class Table final : public DistImpl {
public:
    explicit Table(std::vector<Atom> pts) : p_(std::move(pts)) {
        if (p_.empty()) throw std::invalid_argument("table: needs at least one breakpoint");
        for (std::size_t i = 0; i < p_.size(); ++i) {
            if (!(p_[i].first >= 0) || !(p_[i].second >= 0) || p_[i].second > 1 + 1e-12)
                throw std::invalid_argument("table: breakpoints must satisfy t >= 0, 0 <= F <= 1");
            if (i && (p_[i].first < p_[i - 1].first || p_[i].second < p_[i - 1].second))
                throw std::invalid_argument("table: breakpoints must be sorted and nondecreasing");
        }
    }
    DistKind kind() const override { return DistKind::table; }
    std::string describe() const override { return "table(" + std::to_string(p_.size()) + " points)"; }
    double total_mass() const override { return std::min(1.0, p_.back().second); }
    double cdf(double t) const override {
        if (t < p_.front().first) return 0.0;
        auto it = std::upper_bound(p_.begin(), p_.end(), t, [](double v, const Atom& a) { return v < a.first; });
        std::size_t k = std::size_t(it - p_.begin()) - 1;
        if (k + 1 >= p_.size()) return total_mass();
        const Atom &a = p_[k], &b = p_[k + 1];
        double w = (t - a.first) / (b.first - a.first);
        return std::min(1.0, a.second + w * (b.second - a.second));
    }
    double atom_mass(double t) const override {
        auto lo = std::lower_bound(p_.begin(), p_.end(), t, [](const Atom& a, double v) { return a.first < v; });
        if (lo == p_.end() || lo->first != t) return 0.0;
        double before = lo == p_.begin() ? 0.0 : (lo - 1)->second;
        if (lo != p_.begin() && (lo - 1)->first < t) before = lo->second;  // continuous from the left
        auto hi = lo;
        while (hi + 1 != p_.end() && (hi + 1)->first == t) ++hi;
        return std::max(0.0, hi->second - before);
    }
    std::vector<Atom> atoms(double t_max) const override {
        std::vector<Atom> out;
        for (std::size_t i = 0; i < p_.size(); ++i) {
            if (p_[i].first > t_max) break;
            if (i && p_[i].first == p_[i - 1].first) continue;
            double m = atom_mass(p_[i].first);
            if (m > 0) out.emplace_back(p_[i].first, m);
        }
        return out;
    }
    double quantile(double y) const override {
        if (y > total_mass()) return kInf;
        if (p_.front().second >= y) return p_.front().first;
        for (std::size_t k = 1; k < p_.size(); ++k) {
            if (p_[k].second >= y) {
                const Atom &a = p_[k - 1], &b = p_[k];
                if (b.first == a.first) return b.first;
                double w = (y - a.second) / (b.second - a.second);
                return a.first + w * (b.first - a.first);
            }
        }
        return p_.back().first;
    }

private:
    std::vector<Atom> p_;
};

// no mass at finite times (an interval that never ends / never starts)
class Infinite final : public DistImpl {
public:
    DistKind kind() const override { return DistKind::infinite; }
    std::string describe() const override { return "infinity"; }
    double cdf(double) const override { return 0.0; }
    double total_mass() const override { return 0.0; }
    double quantile(double) const override { return kInf; }
    double lnl(double) const override { return kInf; }
    double log_quantile_ll(double) const override { return kInf; }
};

}  // namespace detail

// =====================================================================

/// A nonnegative (possibly defective, possibly singular) time law.
/// Cheap to copy; the underlying state is immutable and shared.
class BirthTimeDistribution {
public:
    BirthTimeDistribution() : p_(std::make_shared<detail::Infinite>()) {}
    explicit BirthTimeDistribution(detail::ImplPtr p) : p_(std::move(p)) {}

    static BirthTimeDistribution exponential(double rate) { return make<detail::Exponential>(rate); }
    static BirthTimeDistribution uniform(double b) { return make<detail::Uniform>(b); }
    static BirthTimeDistribution deterministic(double c) { return make<detail::Deterministic>(c); }
    static BirthTimeDistribution power_at_origin(double beta) { return make<detail::PowerAtOrigin>(beta); }
    static BirthTimeDistribution steep_gamma(double gamma) { return make<detail::SteepGamma>(gamma); }
    static BirthTimeDistribution nu_beta(double beta) { return make<detail::NuBeta>(beta); }
    static BirthTimeDistribution cantor() { return make<detail::Cantor>(); }
    static BirthTimeDistribution mu_c() { return make<detail::MuC>(); }
    static BirthTimeDistribution omega(double beta = 2.0, double gamma = 1.5) {
        return make<detail::Omega>(beta, gamma);
    }
    static BirthTimeDistribution slow_log() { return make<detail::SlowLog>(); }
    static BirthTimeDistribution table(std::vector<Atom> pts) { return make<detail::Table>(std::move(pts)); }
    static BirthTimeDistribution infinite() { return make<detail::Infinite>(); }

    DistKind kind() const { return p_->kind(); }
    std::string describe() const { return p_->describe(); }
    double total_mass() const { return p_->total_mass(); }

    double cdf(double t) const {
        if (std::isnan(t) || t < 0) throw std::domain_error("cdf: time must be >= 0");
        if (t == kInf) return total_mass();
        return p_->cdf(t);
    }
    /// F(t-)
    double cdf_left(double t) const {
        if (std::isnan(t) || t < 0) throw std::domain_error("cdf_left: time must be >= 0");
        if (t == kInf) return total_mass();
        return p_->cdf_left(t);
    }
    double atom_mass(double t) const { return t < 0 ? 0.0 : p_->atom_mass(t); }
    std::vector<Atom> atoms(double t_max) const { return p_->atoms(t_max); }

    double quantile(double y) const {
        if (std::isnan(y) || y <= 0) throw std::domain_error("quantile: probability must be > 0");
        if (y > total_mass() * (1 + 1e-15)) return kInf;
        return p_->quantile(y);
    }
    double sample(double u) const {
        if (!(u > 0 && u < 1)) throw std::domain_error("sample: uniform variate must lie in (0,1)");
        return quantile(u);
    }
    /// log(-log F(t)) evaluated from log t; usable far below double range
    double lnl(double logt) const { return p_->lnl(logt); }
    /// log F^{(-1)}(y) with y = exp(-e^L)
    double log_quantile_ll(double L) const { return p_->log_quantile_ll(L); }

    const detail::DistImpl& impl() const { return *p_; }
    const detail::ImplPtr& ptr() const { return p_; }

private:
    template <class T, class... A>
    static BirthTimeDistribution make(A&&... a) {
        return BirthTimeDistribution(std::make_shared<const T>(std::forward<A>(a)...));
    }
    detail::ImplPtr p_;
};

namespace detail {

// ------------------------------------------------------------ combined

class Thin final : public DistImpl {
public:
    Thin(BirthTimeDistribution d, double p) : d_(std::move(d)), p_(p) {
        if (!(p > 0 && p <= 1)) throw std::invalid_argument("thin: p must lie in (0,1]");
    }
    DistKind kind() const override { return DistKind::combined; }
    std::string describe() const override { return "thin(" + fmt_num(p_) + "," + d_.describe() + ")"; }
    double total_mass() const override { return p_ * d_.total_mass(); }
    double cdf(double t) const override { return p_ * d_.cdf(t); }
    double atom_mass(double t) const override { return p_ * d_.atom_mass(t); }
    std::vector<Atom> atoms(double t_max) const override {
        auto a = d_.atoms(t_max);
        for (auto& x : a) x.second *= p_;
        return a;
    }
    double quantile(double y) const override { return d_.quantile(std::min(y / p_, d_.total_mass())); }
    double lnl(double logt) const override {
        if (p_ == 1) return d_.lnl(logt);
        return logaddexp(d_.lnl(logt), std::log(-std::log(p_)));
    }
    double log_quantile_ll(double L) const override {
        if (p_ == 1) return d_.log_quantile_ll(L);
        double a = std::exp(L);
        double lp = std::log(p_);
        if (a == kInf) return d_.log_quantile_ll(L);
        if (a + lp <= 0) return kInf;
        return d_.log_quantile_ll(std::log(a + lp));
    }

private:
    BirthTimeDistribution d_;
    double p_;
};

class Scale final : public DistImpl {
public:
    Scale(BirthTimeDistribution d, double c) : d_(std::move(d)), c_(c) {
        if (!(c > 0) || !std::isfinite(c)) throw std::invalid_argument("scale: factor must be finite and > 0");
    }
    DistKind kind() const override { return DistKind::combined; }
    std::string describe() const override { return "scale(" + fmt_num(c_) + "," + d_.describe() + ")"; }
    double total_mass() const override { return d_.total_mass(); }
    double cdf(double t) const override { return d_.cdf(t / c_); }
    double atom_mass(double t) const override { return d_.atom_mass(t / c_); }
    std::vector<Atom> atoms(double t_max) const override {
        auto a = d_.atoms(t_max / c_);
        for (auto& x : a) x.first *= c_;
        return a;
    }
    double quantile(double y) const override { return c_ * d_.quantile(y); }
    double lnl(double logt) const override { return d_.lnl(logt - std::log(c_)); }
    double log_quantile_ll(double L) const override { return std::log(c_) + d_.log_quantile_ll(L); }

private:
    BirthTimeDistribution d_;
    double c_;
};

inline std::vector<Atom> merge_atom_sites(const std::vector<Atom>& a, const std::vector<Atom>& b) {
    std::vector<Atom> s = a;
    s.insert(s.end(), b.begin(), b.end());
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end(), [](const Atom& x, const Atom& y) { return x.first == y.first; }),
            s.end());
    return s;
}

class MaxLaw final : public DistImpl {
public:
    MaxLaw(BirthTimeDistribution a, BirthTimeDistribution b) : a_(std::move(a)), b_(std::move(b)) {}
    DistKind kind() const override { return DistKind::combined; }
    std::string describe() const override { return "max(" + a_.describe() + "," + b_.describe() + ")"; }
    double total_mass() const override { return a_.total_mass() * b_.total_mass(); }
    double cdf(double t) const override { return a_.cdf(t) * b_.cdf(t); }
    double atom_mass(double t) const override {
        return std::max(0.0, a_.cdf(t) * b_.cdf(t) - a_.cdf_left(t) * b_.cdf_left(t));
    }
    std::vector<Atom> atoms(double t_max) const override {
        auto s = merge_atom_sites(a_.atoms(t_max), b_.atoms(t_max));
        std::vector<Atom> out;
        for (auto& x : s) {
            double m = atom_mass(x.first);
            if (m > 0) out.emplace_back(x.first, m);
        }
        return out;
    }
    double lnl(double logt) const override { return logaddexp(a_.lnl(logt), b_.lnl(logt)); }

private:
    BirthTimeDistribution a_, b_;
};

class MinLaw final : public DistImpl {
public:
    MinLaw(BirthTimeDistribution a, BirthTimeDistribution b) : a_(std::move(a)), b_(std::move(b)) {}
    DistKind kind() const override { return DistKind::combined; }
    std::string describe() const override { return "min(" + a_.describe() + "," + b_.describe() + ")"; }
    double total_mass() const override {
        double x = a_.total_mass(), y = b_.total_mass();
        return x + y - x * y;
    }
    double cdf(double t) const override {
        double x = a_.cdf(t), y = b_.cdf(t);
        return x + y - x * y;
    }
    double atom_mass(double t) const override {
        double x = a_.cdf_left(t), y = b_.cdf_left(t);
        return std::max(0.0, cdf(t) - (x + y - x * y));
    }
    std::vector<Atom> atoms(double t_max) const override {
        auto s = merge_atom_sites(a_.atoms(t_max), b_.atoms(t_max));
        std::vector<Atom> out;
        for (auto& x : s) {
            double m = atom_mass(x.first);
            if (m > 0) out.emplace_back(x.first, m);
        }
        return out;
    }
    double lnl(double logt) const override {
        double l1 = a_.lnl(logt), l2 = b_.lnl(logt);
        double p1 = logp_of_lnl(l1), p2 = logp_of_lnl(l2);
        if (p1 == -kInf && p2 == -kInf) return std::min(l1, l2);
        double s = logaddexp(p1, p2);
        double corr = std::log1p(-std::exp(p1 + p2 - s));
        return lnl_of_logp(std::min(0.0, s + corr));
    }

private:
    BirthTimeDistribution a_, b_;
};

/// Trapezoid Stieltjes integral of a nondecreasing-or-not integrand
/// phi against dF over [0, t]; atoms of F are summed exactly and the
/// grid always contains the atom sites of F and any extra breakpoints.
/// phi_left(x) must return the left limit phi(x-).
template <class Phi, class PhiLeft>
double stieltjes(const BirthTimeDistribution& F, double t, int n, Phi phi, PhiLeft phi_left,
                 const std::vector<double>& extra_breaks = {}) {
    if (t < 0) return 0.0;
    auto at = F.atoms(t);
    std::vector<double> x;
    x.reserve(std::size_t(n) + 1 + at.size() + extra_breaks.size());
    for (int k = 0; k <= n; ++k) x.push_back(t * double(k) / n);
    for (auto& a : at) x.push_back(a.first);
    for (double b : extra_breaks)
        if (b > 0 && b < t) x.push_back(b);
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    double s = F.cdf(0.0) * phi(0.0);
    double prevF = F.cdf(0.0);
    for (std::size_t k = 1; k < x.size(); ++k) {
        double a = x[k - 1], b = x[k];
        double Fb = F.cdf(b);
        double ab = F.atom_mass(b);
        double cont = std::max(0.0, (Fb - ab) - prevF);
        s += 0.5 * (phi(a) + phi_left(b)) * cont + phi(b) * ab;
        prevF = Fb;
    }
    return s;
}

class SumLaw final : public DistImpl {
public:
    SumLaw(BirthTimeDistribution a, BirthTimeDistribution b, int grid_n)
        : a_(std::move(a)), b_(std::move(b)), n_(grid_n) {
        if (a_.total_mass() < 1 - 1e-12 || b_.total_mass() < 1 - 1e-12)
            throw UnsupportedCombination("sum: both laws must be proper (total mass 1)");
        if (grid_n < 2) throw std::invalid_argument("sum: grid size must be >= 2");
    }
    DistKind kind() const override { return DistKind::combined; }
    std::string describe() const override {
        return "sum(" + a_.describe() + "," + b_.describe() + ";n=" + std::to_string(n_) + ")";
    }
    double cdf(double t) const override {
        if (t < 0) return 0.0;
        // breakpoints t - (atoms of a) so that jumps of F_a(t - x) sit on nodes
        std::vector<double> br;
        for (auto& x : a_.atoms(t)) br.push_back(t - x.first);
        double v = stieltjes(
            b_, t, n_, [&](double x) { return a_.cdf(std::max(0.0, t - x)); },
            [&](double x) {
                // F_a((t - x)+) seen from the left of x: right-continuous value at t - x
                return a_.cdf(std::max(0.0, t - x)) - 0.0;
            },
            br);
        return std::clamp(v, 0.0, 1.0);
    }
    double atom_mass(double t) const override {
        double s = 0;
        for (auto& x : b_.atoms(t)) s += x.second * a_.atom_mass(t - x.first);
        return s;
    }
    double lnl(double logt) const override {
        if (logt > -600) {
            double v = cdf(std::exp(logt));
            if (v > 1e-250) return lnl_of_prob(v);
        }
        // F_{a+b}(t) >= F_a(th t) F_b((1-th) t)
        double best = kInf;
        for (int j = 1; j < 32; ++j) {
            double th = j / 32.0;
            best = std::min(best, logaddexp(a_.lnl(logt + std::log(th)), b_.lnl(logt + std::log1p(-th))));
        }
        return best;
    }

private:
    BirthTimeDistribution a_, b_;
    int n_;
};

/// Law of a contact time sigma that is kept only when I <= sigma <= C:
/// cdf(t) = int_0^t P(I <= x <= C) dF_sigma(x).  Without C this is the
/// backward-thinned law.  With `shift` the end is C = I + Y.
class WindowLaw final : public DistImpl {
public:
    WindowLaw(BirthTimeDistribution sigma, BirthTimeDistribution inc, std::optional<BirthTimeDistribution> contagious,
              bool shifted, int grid_n)
        : s_(std::move(sigma)), i_(std::move(inc)), c_(std::move(contagious)), shifted_(shifted), n_(grid_n) {
        double tt = s_.quantile(std::max(1e-300, std::min(s_.total_mass(), 1 - 1e-15)));
        if (!std::isfinite(tt)) tt = 1e6;
        total_ = cdf(tt);
    }
    DistKind kind() const override { return c_ ? DistKind::window : DistKind::combined; }
    std::string describe() const override {
        std::string s = "window(" + s_.describe() + ",I=" + i_.describe();
        if (c_) s += shifted_ ? ",C=I+" + c_->describe() : ",C=" + c_->describe();
        return s + ")";
    }
    double total_mass() const override { return total_; }

    // P(I <= x <= C) and its left limit
    double pi(double x) const {
        if (!c_) return i_.cdf(x);
        if (!shifted_) return i_.cdf(x) * (1 - c_->cdf_left(x));
        const auto& Y = *c_;
        return stieltjes(
            i_, x, 256, [&](double i) { return 1 - Y.cdf_left(std::max(0.0, x - i)); },
            [&](double i) { return 1 - Y.cdf_left(std::max(0.0, x - i)); });
    }
    double pi_left(double x) const {
        if (x <= 0) return 0.0;
        if (!c_) return i_.cdf_left(x);
        if (!shifted_) return i_.cdf_left(x) * (1 - c_->cdf_left(x));
        return pi(x) - 0.0;
    }
    double cdf(double t) const override {
        if (t < 0) return 0.0;
        std::vector<double> br;
        for (auto& a : i_.atoms(t)) br.push_back(a.first);
        if (c_ && !shifted_)
            for (auto& a : c_->atoms(t)) br.push_back(a.first);
        double v = stieltjes(
            s_, t, n_, [&](double x) { return pi(x); }, [&](double x) { return pi_left(x); }, br);
        return std::clamp(v, 0.0, 1.0);
    }
    double atom_mass(double t) const override { return s_.atom_mass(t) * pi(t); }
    std::vector<Atom> atoms(double t_max) const override {
        std::vector<Atom> out;
        for (auto& a : s_.atoms(t_max)) {
            double m = a.second * pi(a.first);
            if (m > 0) out.emplace_back(a.first, m);
        }
        return out;
    }
    double lnl(double logt) const override {
        if (logt > -600) {
            double v = cdf(std::exp(logt));
            if (v > 1e-250) return lnl_of_prob(v);
        }
        if (c_) return lnl_of_prob(0.0);
        // F(t) >= F_I(th t) (F_s(t) - F_s(th t))
        double ls = s_.lnl(logt);
        double best = kInf;
        for (int j = 1; j <= 40; ++j) {
            double lth = std::log1p(-std::ldexp(1.0, -j));
            double lsth = s_.lnl(logt + lth);
            // -log(F(t) - F(th t)) = A(t) - log(1 - exp(-(A(th t) - A(t))))
            double gap;
            if (lsth == kInf)
                gap = kInf;
            else if (ls == -kInf)
                gap = -kInf;
            else
                gap = std::exp(ls) * std::expm1(lsth - ls);
            if (!(gap > 0)) continue;
            double l_diff = lnl_add(ls, -log1mexp(gap));
            best = std::min(best, logaddexp(i_.lnl(logt + lth), l_diff));
        }
        return best;
    }

private:
    BirthTimeDistribution s_, i_;
    std::optional<BirthTimeDistribution> c_;
    bool shifted_;
    int n_;
    double total_ = 0;
};

// H(x) = x^gamma F(x) on [0,t0], normalized continuation beyond t0
class HGamma final : public DistImpl {
public:
    HGamma(BirthTimeDistribution d, double gamma, double t0) : d_(std::move(d)), g_(gamma), t0_(t0) {
        if (!(gamma >= 0)) throw std::invalid_argument("h_gamma: gamma must be >= 0");
        if (!(t0 > 0 && t0 <= 1)) throw std::invalid_argument("h_gamma: splice point must lie in (0,1]");
        f0_ = d_.cdf(t0_);
        h0_ = std::pow(t0_, g_) * f0_;
    }
    DistKind kind() const override { return DistKind::h_gamma; }
    std::string describe() const override {
        return "h_gamma(" + fmt_num(g_) + "," + d_.describe() + ",t0=" + fmt_num(t0_) + ")";
    }
    double cdf(double t) const override {
        if (t <= 0) return std::pow(0.0, g_) * d_.cdf(0.0);
        if (t <= t0_) return std::pow(t, g_) * d_.cdf(t);
        double m = d_.total_mass();
        if (m - f0_ <= 0) return std::min(1.0, h0_ + (1 - h0_) * std::min(1.0, (t - t0_) / t0_));
        return h0_ + (1 - h0_) * (d_.cdf(t) - f0_) / (m - f0_);
    }
    double atom_mass(double t) const override {
        if (t <= t0_) return std::pow(t, g_) * d_.atom_mass(t);
        double m = d_.total_mass();
        if (m - f0_ <= 0) return 0.0;
        return (1 - h0_) * d_.atom_mass(t) / (m - f0_);
    }
    double lnl(double logt) const override {
        if (logt <= std::log(t0_)) return lnl_add(d_.lnl(logt), -g_ * logt);
        return lnl_of_prob(cdf(std::exp(logt)));
    }

private:
    BirthTimeDistribution d_;
    double g_, t0_, f0_, h0_;
};

}  // namespace detail

// ----------------------------------------------------------- operations

/// Combination of birth-time laws.  d2 is required for max/min/sum and
/// ignored otherwise; `param` holds c for scale and p for thin.
inline BirthTimeDistribution combine(CombineMode mode, const BirthTimeDistribution& d1,
                                     const std::optional<BirthTimeDistribution>& d2 = std::nullopt,
                                     double param = 1.0, int grid_n = 1024) {
    using namespace detail;
    bool binary = mode == CombineMode::max || mode == CombineMode::min || mode == CombineMode::sum;
    if (binary != d2.has_value())
        throw std::invalid_argument("combine: second law required exactly for max/min/sum");
    switch (mode) {
        case CombineMode::max: return BirthTimeDistribution(std::make_shared<const MaxLaw>(d1, *d2));
        case CombineMode::min: return BirthTimeDistribution(std::make_shared<const MinLaw>(d1, *d2));
        case CombineMode::sum: return BirthTimeDistribution(std::make_shared<const SumLaw>(d1, *d2, grid_n));
        case CombineMode::scale:
            if (!(param >= 0)) throw std::invalid_argument("scale: factor must be >= 0");
            if (param == 0)
                return BirthTimeDistribution(
                    std::make_shared<const Thin>(BirthTimeDistribution::deterministic(0.0), std::max(d1.total_mass(), 1e-300)));
            return BirthTimeDistribution(std::make_shared<const Scale>(d1, param));
        case CombineMode::thin: return BirthTimeDistribution(std::make_shared<const Thin>(d1, param));
    }
    throw std::invalid_argument("combine: unknown mode");
}

/// Law with cdf int_0^t F_I(x) dF_sigma(x).
inline BirthTimeDistribution backward_thinned(const BirthTimeDistribution& sigma,
                                              const BirthTimeDistribution& incubation, int grid_n = 2048) {
    return BirthTimeDistribution(
        std::make_shared<const detail::WindowLaw>(sigma, incubation, std::nullopt, false, grid_n));
}

/// Effective per-contact law when each contact carries its own window
/// [I, C]; C = I + Y when `shifted` is set (then `contagious` holds Y).
inline BirthTimeDistribution window_law(const BirthTimeDistribution& sigma, const BirthTimeDistribution& incubation,
                                        const BirthTimeDistribution& contagious, bool shifted, int grid_n = 2048) {
    return BirthTimeDistribution(
        std::make_shared<const detail::WindowLaw>(sigma, incubation, contagious, shifted, grid_n));
}

inline BirthTimeDistribution h_gamma_law(const BirthTimeDistribution& sigma, double gamma, double t0) {
    return BirthTimeDistribution(std::make_shared<const detail::HGamma>(sigma, gamma, t0));
}

/// d1 <=_{d,0} d2 with witness t0: cdf(d1) >= cdf(d2) on a grid of
/// [0,t0] and at every atom of either law there.
inline bool dominates_at_origin(const BirthTimeDistribution& d1, const BirthTimeDistribution& d2, double t0,
                                int grid_n) {
    if (!(t0 > 0)) throw std::invalid_argument("dominates_at_origin: t0 must be > 0");
    if (grid_n < 2) throw std::invalid_argument("dominates_at_origin: grid_n must be >= 2");
    std::vector<double> pts;
    for (int k = 0; k < grid_n; ++k) pts.push_back(t0 * double(k) / (grid_n - 1));
    for (auto& a : d1.atoms(t0)) pts.push_back(a.first);
    for (auto& a : d2.atoms(t0)) pts.push_back(a.first);
    for (double t : pts) {
        if (t < 0 || t > t0) continue;
        if (d1.cdf(t) < d2.cdf(t) - 1e-15) return false;
    }
    return true;
}

}  // namespace cmj
