#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dist.hpp"
#include "numeric.hpp"
#include "offspring.hpp"
#include "operator.hpp"

namespace cmj {

struct SimulationRejected : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SimulationRecord {
    bool cap_hit = false;
    double hit_time = kInf;  // birth date of the cap-th individual
    std::uint64_t population_at_horizon = 1;
    std::vector<double> tau_seq;  // first birth dates after the root
    std::vector<double> m_seq;    // M_1, M_2, ...: first birth in each generation
    std::uint64_t events_processed = 0;
    std::uint64_t seed = 0;
    bool coming_generation_available = false;
    double coming_generation = kNaN;  // N(t): children of the born, exact runs only
};

struct SimOptions {
    double horizon = 2.0;
    std::uint64_t cap = 100000;
    std::size_t tau_keep = 64;
    bool exhaustive = false;  // per-contact oracle path; bounded X only
};

namespace detail {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}
    // uniform on (0,1), 53 bits
    double u() { return (double(g_() >> 11) + 0.5) * 0x1.0p-53; }
    std::mt19937_64& engine() { return g_; }
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double r = std::sqrt(-2 * std::log(u())), th = 2 * M_PI * u();
        spare_ = r * std::sin(th);
        has_spare_ = true;
        return r * std::cos(th);
    }

private:
    std::mt19937_64 g_;
    bool has_spare_ = false;
    double spare_ = 0;
};

// Poisson(mu) by inversion, mu < 30
inline double poisson_small(double mu, double u) {
    double p = std::exp(-mu), c = p;
    double k = 0;
    while (u > c && k < 1000) {
        k += 1;
        p *= mu / k;
        c += p;
    }
    return k;
}

/// Binomial(n, p) draw.  Exact for n <= 1e6 (inversion for small means);
/// beyond that Poisson for small means and a continuity-corrected
/// normal otherwise.
inline double binomial_draw(double n, double p, Rng& rng) {
    if (n <= 0 || p <= 0) return 0;
    if (p >= 1) return n;
    double mu = n * p;
    if (n <= 1e6) {
        if (mu < 30) {
            double u = rng.u();
            double q = 1 - p;
            double pk = std::exp(n * std::log1p(-p)), c = pk;
            double k = 0;
            while (u > c && k < n) {
                pk *= (n - k) / (k + 1) * p / q;
                k += 1;
                c += pk;
                if (pk == 0 && c < u) break;
            }
            return k;
        }
        std::binomial_distribution<long long> b((long long)n, p);
        return double(b(rng.engine()));
    }
    if (mu < 30) return std::min(n, poisson_small(mu, rng.u()));
    double k = std::floor(mu + std::sqrt(mu * (1 - p)) * rng.normal() + 0.5);
    return std::clamp(k, 0.0, n);
}

// Piecewise-linear cdf through knots; knots include 0 and the horizon
class KnotLaw {
public:
    KnotLaw() = default;
    KnotLaw(std::vector<double> x, std::vector<double> F) : x_(std::move(x)), F_(std::move(F)) {
        for (std::size_t i = 1; i < F_.size(); ++i) F_[i] = std::max(F_[i], F_[i - 1]);
    }
    double cdf(double t) const {
        if (t < 0) return 0;
        if (t >= x_.back()) return F_.back();
        auto it = std::upper_bound(x_.begin(), x_.end(), t);
        std::size_t i = std::size_t(it - x_.begin());
        if (i == 0) return F_[0];
        double x0 = x_[i - 1], x1 = x_[i];
        return F_[i - 1] + (F_[i] - F_[i - 1]) * (t - x0) / (x1 - x0);
    }
    double cdf_left(double t) const { return t <= 0 ? 0.0 : cdf(t); }
    double quantile(double y) const {
        if (y <= F_[0]) return 0;
        auto it = std::lower_bound(F_.begin(), F_.end(), y);
        if (it == F_.end()) return kInf;
        std::size_t i = std::size_t(it - F_.begin());
        double f0 = F_[i - 1], f1 = F_[i];
        if (f1 <= f0) return x_[i];
        return x_[i - 1] + (x_[i] - x_[i - 1]) * (y - f0) / (f1 - f0);
    }

private:
    std::vector<double> x_, F_;
};

inline KnotLaw tabulate_window_law(const EpidemicSpec& spec, double horizon) {
    auto G = window_law(spec.sigma, spec.incubation, spec.contagious, spec.dependence == IcDependence::shifted, 1024);
    std::vector<double> x{0.0};
    const int n = 1024;
    for (int k = 0; k < n; ++k) x.push_back(horizon * std::pow(1e-9, double(n - 1 - k) / (n - 1)));
    for (int k = 1; k < n; ++k) x.push_back(horizon * double(k) / n);
    for (auto& a : spec.sigma.atoms(horizon)) x.push_back(a.first);
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    std::vector<double> F;
    for (double t : x) F.push_back(G.cdf(t));
    return KnotLaw(std::move(x), std::move(F));
}

// 4-ary min-heap on (t, id) with an in-place replacement of the top
template <class E>
class MinHeap {
public:
    bool empty() const { return v_.empty(); }
    const E& top() const { return v_.front(); }
    void push(E e) {
        v_.push_back(e);
        std::size_t i = v_.size() - 1;
        while (i > 0) {
            std::size_t p = (i - 1) / 4;
            if (!less(e, v_[p])) break;
            v_[i] = v_[p];
            i = p;
        }
        v_[i] = e;
    }
    void pop() {
        E last = v_.back();
        v_.pop_back();
        if (!v_.empty()) sift_down(last);
    }
    void replace_top(E e) { sift_down(e); }

private:
    static bool less(const E& a, const E& b) { return a.t < b.t || (a.t == b.t && a.id < b.id); }
    void sift_down(E e) {
        std::size_t i = 0, n = v_.size();
        for (;;) {
            std::size_t c = 4 * i + 1;
            if (c >= n) break;
            std::size_t best = c, end = std::min(c + 4, n);
            for (std::size_t j = c + 1; j < end; ++j)
                if (less(v_[j], v_[best])) best = j;
            if (!less(v_[best], e)) break;
            v_[i] = v_[best];
            i = best;
        }
        v_[i] = e;
    }
    std::vector<E> v_;
};

inline double offspring_mean(const OffspringDistribution& X) {
    if (!X.bounded()) return kInf;
    double m = 0;
    for (long k = 0; X.tail(double(k)) > 0; ++k) m += X.tail(double(k));
    return m;
}

}  // namespace detail

/// Simulation of D(t) up to a horizon and a population cap.
class Simulator {
public:
    Simulator(EpidemicSpec spec, SimOptions opt) : spec_(std::move(spec)), opt_(opt) {
        if (!(opt.horizon > 0)) throw std::invalid_argument("simulate: horizon must be > 0");
        if (opt.cap < 2) throw std::invalid_argument("simulate: cap must be >= 2");
        age_dep_ = model_kind(spec_) == ModelKind::age_dependent;
        backward_ = spec_.direction == Direction::backward && !age_dep_;
        if (backward_ && !opt.exhaustive) table_ = detail::tabulate_window_law(spec_, opt.horizon);
        // a positive chance of an instantaneous child: supercritical zero clusters are out of scope
        double f0 = backward_ && !opt.exhaustive ? table_.cdf(0.0) : spec_.sigma.cdf(0.0);
        if (f0 > 0) {
            double mean0 = detail::offspring_mean(spec_.offspring) * f0;
            if (mean0 >= 1) throw SimulationRejected("simulate: atom of the birth time at 0 gives instantaneous explosion");
        }
        if (opt.exhaustive && !spec_.offspring.bounded())
            throw std::invalid_argument("simulate: the exhaustive path needs a bounded offspring law");
    }

    SimulationRecord run(std::uint64_t seed) const { return opt_.exhaustive ? run_exhaustive(seed) : run_lazy(seed); }

private:
    struct Parent {
        double tau;
        double Fa, mass;  // window in cdf coordinates
        double lw;        // log(1 - u) of the last order statistic
        double remaining;
        std::uint32_t gen;
    };
    struct Entry {
        double t;
        std::uint64_t id;
        bool operator>(const Entry& o) const { return t > o.t || (t == o.t && id > o.id); }
    };

    double law_cdf(double t) const { return table_mode() ? table_.cdf(t) : spec_.sigma.cdf(t); }
    double law_cdf_left(double t) const { return table_mode() ? table_.cdf_left(t) : spec_.sigma.cdf_left(t); }
    double law_quantile(double y) const {
        if (table_mode()) return table_.quantile(y);
        return spec_.sigma.quantile(std::max(y, std::numeric_limits<double>::min()));
    }
    bool table_mode() const { return backward_ && !opt_.exhaustive; }

    // window [a, b] for a parent born at tau (forward); [0, H - tau] otherwise
    std::pair<double, double> draw_window(double tau, detail::Rng& rng) const {
        double b = opt_.horizon - tau;
        if (table_mode() || age_dep_) return {0.0, b};
        double I = spec_.incubation.sample(rng.u());
        double C = spec_.contagious.sample(rng.u());
        if (spec_.dependence == IcDependence::shifted) C = I + C;
        return {I, std::min(C, b)};
    }

    double draw_x(detail::Rng& rng) const { return spec_.offspring.sample_tail(std::min(rng.u(), 1 - 1e-15)); }

    void record_birth(SimulationRecord& r, double t, std::uint32_t gen) const {
        if (r.tau_seq.size() < opt_.tau_keep) r.tau_seq.push_back(t);
        if (gen > r.m_seq.size()) r.m_seq.push_back(t);
    }

    SimulationRecord run_lazy(std::uint64_t seed) const {
        SimulationRecord r;
        r.seed = seed;
        detail::Rng rng(seed);
        std::vector<Parent> parents;
        detail::MinHeap<Entry> heap;
        std::uint64_t pop = 1;
        double coming = 0;
        bool exact_counts = true;

        auto spawn = [&](double tau, std::uint32_t gen) {
            auto [a, b] = draw_window(tau, rng);
            double X = draw_x(rng);
            if (X >= 9e15) exact_counts = false;
            coming += X;
            if (b < a) return;
            double Fa = law_cdf_left(a), Fb = law_cdf(b);
            double mass = std::max(0.0, Fb - Fa);
            double K = detail::binomial_draw(X, mass, rng);
            if (K <= 0) return;
            Parent p{tau, Fa, mass, 0.0, K, gen};
            p.lw = std::log(rng.u()) / K;
            double t = tau + law_quantile(Fa - mass * std::expm1(p.lw));
            parents.push_back(p);
            heap.push({std::min(t, tau + b), parents.size() - 1});
        };

        spawn(0.0, 0);
        while (!heap.empty()) {
            Entry e = heap.top();
            ++r.events_processed;
            if (e.t > opt_.horizon) break;
            Parent& p = parents[e.id];
            std::uint32_t gen = p.gen + 1;
            double tau_p = p.tau;
            ++pop;
            record_birth(r, e.t, gen);
            if (pop >= opt_.cap) {
                r.cap_hit = true;
                r.hit_time = e.t;
                break;
            }
            p.remaining -= 1;
            if (p.remaining >= 1) {
                p.lw += std::log(rng.u()) / p.remaining;
                double t = tau_p + law_quantile(p.Fa - p.mass * std::expm1(p.lw));
                heap.replace_top({std::max(t, e.t), e.id});
            } else {
                heap.pop();
            }
            spawn(e.t, gen);
        }
        r.population_at_horizon = pop;
        if (!r.cap_hit && exact_counts) {
            r.coming_generation_available = true;
            r.coming_generation = coming - double(pop - 1);
        }
        return r;
    }

    SimulationRecord run_exhaustive(std::uint64_t seed) const {
        SimulationRecord r;
        r.seed = seed;
        detail::Rng rng(seed);
        struct Ind {
            double tau;
            std::uint32_t gen;
        };
        std::vector<Ind> born;
        detail::MinHeap<Entry> heap;
        std::uint64_t pop = 1;
        const bool bwd = spec_.direction == Direction::backward;
        auto spawn = [&](double tau, std::uint32_t gen) {
            double X = draw_x(rng);
            double I = 0, C = kInf;
            auto draw_ic = [&] {
                I = spec_.incubation.sample(rng.u());
                C = spec_.contagious.sample(rng.u());
                if (spec_.dependence == IcDependence::shifted) C = I + C;
            };
            if (!bwd) draw_ic();
            for (double k = 0; k < X; ++k) {
                double s = spec_.sigma.sample(rng.u());
                if (bwd) draw_ic();
                if (s < I || s > C || tau + s > opt_.horizon) continue;
                born.push_back({tau + s, gen + 1});
                heap.push({tau + s, born.size() - 1});
            }
        };
        spawn(0.0, 0);
        while (!heap.empty()) {
            Entry e = heap.top();
            heap.pop();
            ++r.events_processed;
            Ind ind = born[e.id];
            ++pop;
            record_birth(r, e.t, ind.gen);
            if (pop >= opt_.cap) {
                r.cap_hit = true;
                r.hit_time = e.t;
                break;
            }
            spawn(ind.tau, ind.gen);
        }
        r.population_at_horizon = pop;
        return r;
    }

    EpidemicSpec spec_;
    SimOptions opt_;
    bool backward_ = false, age_dep_ = false;
    detail::KnotLaw table_;
};

inline SimulationRecord simulate_once(const EpidemicSpec& spec, double horizon, std::uint64_t cap, std::uint64_t seed,
                                      bool exhaustive = false) {
    SimOptions o;
    o.horizon = horizon;
    o.cap = cap;
    o.exhaustive = exhaustive;
    return Simulator(spec, o).run(seed);
}

struct CdfEstimate {
    std::vector<double> t;
    std::vector<double> estimate;
    std::vector<double> ci_low, ci_high;
    std::vector<std::uint64_t> hits;
    std::uint64_t trials = 0;
    double half_width(std::size_t i) const { return 0.5 * (ci_high[i] - ci_low[i]); }
};

/// Per-trial records for seeds hash_seed(master, i), i < trials
inline std::vector<SimulationRecord> run_trials(const Simulator& sim, std::uint64_t trials, std::uint64_t master_seed,
                                                unsigned threads = 1) {
    std::vector<SimulationRecord> out(trials);
    parallel_for(trials, threads, [&](std::size_t i) { out[i] = sim.run(hash_seed(master_seed, i)); });
    return out;
}

/// Empirical P(cap reached by t) with Wilson 95% intervals
inline CdfEstimate estimate_cdf(const EpidemicSpec& spec, const std::vector<double>& t_grid, std::uint64_t cap,
                                std::uint64_t trials, std::uint64_t master_seed, unsigned threads = 1,
                                bool exhaustive = false) {
    if (trials < 1) throw std::invalid_argument("estimate_cdf: trials must be >= 1");
    if (t_grid.empty()) throw std::invalid_argument("estimate_cdf: empty time grid");
    SimOptions o;
    o.horizon = *std::max_element(t_grid.begin(), t_grid.end());
    o.cap = cap;
    o.tau_keep = 0;
    o.exhaustive = exhaustive;
    Simulator sim(spec, o);
    auto recs = run_trials(sim, trials, master_seed, threads);
    CdfEstimate est;
    est.trials = trials;
    for (double t : t_grid) {
        std::uint64_t h = 0;
        for (auto& r : recs)
            if (r.cap_hit && r.hit_time <= t) ++h;
        auto ci = wilson(h, trials);
        est.t.push_back(t);
        est.hits.push_back(h);
        est.estimate.push_back(double(h) / double(trials));
        est.ci_low.push_back(ci.lo);
        est.ci_high.push_back(ci.hi);
    }
    return est;
}

}  // namespace cmj
