#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dist.hpp"
#include "numeric.hpp"
#include "offspring.hpp"

namespace cmj {

enum class Direction { forward, backward };
enum class IcDependence { independent, shifted };

/// (h_X, F_sigma, F_I, F_C) plus direction.  With `shifted` dependence
/// the field `contagious` holds the law of Y and C = I + Y.
struct EpidemicSpec {
    OffspringDistribution offspring = OffspringDistribution::power_law(0.5);
    BirthTimeDistribution sigma = BirthTimeDistribution::exponential(1.0);
    BirthTimeDistribution incubation = BirthTimeDistribution::deterministic(0.0);
    BirthTimeDistribution contagious = BirthTimeDistribution::infinite();
    IcDependence dependence = IcDependence::independent;
    Direction direction = Direction::forward;

    bool no_incubation() const {
        return incubation.kind() == DistKind::deterministic && incubation.cdf(0.0) == 1.0;
    }
    bool no_contagious_end() const {
        return dependence == IcDependence::independent && contagious.kind() == DistKind::infinite;
    }
};

enum class ModelKind { age_dependent, contagious, incubation, general_forward, backward };

inline const char* to_string(ModelKind m) {
    switch (m) {
        case ModelKind::age_dependent: return "age_dependent";
        case ModelKind::contagious: return "contagious";
        case ModelKind::incubation: return "incubation";
        case ModelKind::general_forward: return "general_forward";
        case ModelKind::backward: return "backward";
    }
    return "?";
}

inline ModelKind model_kind(const EpidemicSpec& s) {
    bool noI = s.no_incubation(), noC = s.no_contagious_end();
    if (noI && noC) return ModelKind::age_dependent;
    if (s.direction == Direction::backward) return ModelKind::backward;
    if (noI && s.dependence == IcDependence::independent) return ModelKind::contagious;
    if (noC) return ModelKind::incubation;
    return ModelKind::general_forward;
}

/// Nonincreasing [0,1]-valued function on t_i = i t_max / n, i = 0..n
struct GridFunction {
    double t_max = 4.0;
    std::size_t n = 4096;
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(double tmax, std::size_t n_, double fill) : t_max(tmax), n(n_), values(n_ + 1, fill) {
        if (!(tmax > 0)) throw std::invalid_argument("grid: t_max must be > 0");
        if (n_ < 1) throw std::invalid_argument("grid: n must be >= 1");
    }
    double step() const { return t_max / double(n); }
    double t(std::size_t i) const { return t_max * double(i) / double(n); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    /// value at time t (right end of the containing cell)
    double at(double t) const {
        if (t <= 0) return values.front();
        double x = t / step();
        std::size_t i = std::size_t(std::ceil(x - 1e-9));
        return values[std::min(i, n)];
    }
    bool same_shape(const GridFunction& o) const { return n == o.n && t_max == o.t_max; }
};

inline void project_nonincreasing(std::vector<double>& v) {
    double m = 1.0;
    for (double& x : v) {
        x = std::clamp(x, 0.0, 1.0);
        m = std::min(m, x);
        x = m;
    }
}
inline void project_nondecreasing(std::vector<double>& v) {
    double m = 0.0;
    for (double& x : v) {
        x = std::clamp(x, 0.0, 1.0);
        m = std::max(m, x);
        x = m;
    }
}

template <class F>
void parallel_for(std::size_t n, unsigned threads, F f) {
    if (threads <= 1 || n < 256) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([=, &f] {
            for (std::size_t i = lo; i < hi; ++i) f(i);
        });
    }
    for (auto& th : pool) th.join();
}

/// Discretized T_xi on a fixed grid.  Birth cells (x_{j-1}, x_j] are read
/// at their right end, incubation is rounded up and the contagious end
/// rounded down, so the discrete operator is the exact one for a process
/// that is no faster than the true one.
class Operator {
public:
    /// `force` evaluates a more general recursion than the model needs, used to
    /// check that the general forms collapse onto the simpler ones.
    Operator(const EpidemicSpec& spec, double t_max, std::size_t n, unsigned threads = 1,
             std::optional<ModelKind> force = std::nullopt)
        : spec_(spec), model_(force.value_or(model_kind(spec))), tmax_(t_max), n_(n), threads_(threads) {
        if (!(t_max > 0) || n < 1) throw std::invalid_argument("operator: bad grid");
        const auto& S = spec.sigma;
        w_.assign(n + 1, 0.0);
        a_.assign(n + 1, 0.0);
        double prev = S.cdf(0.0);
        w_[0] = prev;
        a_[0] = prev;
        for (std::size_t j = 1; j <= n; ++j) {
            double x = t(j);
            double F = S.cdf(x);
            w_[j] = std::max(0.0, F - prev);
            a_[j] = std::min(w_[j], std::max(0.0, F - S.cdf_left(x)));
            prev = F;
        }
        // incubation rounded up: P(I^ = x_m), and P(I^ > x_i) = 1 - F_I(x_i)
        const auto& I = spec.incubation;
        pI_.assign(n + 1, 0.0);
        FI_.assign(n + 1, 0.0);
        prev = 0;
        for (std::size_t m = 0; m <= n; ++m) {
            double F = I.cdf(t(m));
            FI_[m] = F;
            pI_[m] = std::max(0.0, F - prev);
            prev = F;
        }
        // contagious end (or Y) rounded down: P(C^ = x_l) for l < n, lumped at n
        const auto& C = spec.contagious;
        pC_.assign(n + 1, 0.0);
        for (std::size_t l = 0; l < n; ++l) pC_[l] = std::max(0.0, C.cdf_left(t(l + 1)) - C.cdf_left(t(l)));
        pC_[n] = std::max(0.0, 1.0 - C.cdf_left(t(n)));
        for (std::size_t m = 0; m <= n; ++m)
            if (pI_[m] > 0) nzI_.push_back(m);
        for (std::size_t l = 0; l <= n; ++l)
            if (pC_[l] > 0) nzC_.push_back(l);
        sufC_.assign(nzC_.size(), 0.0);
        for (std::size_t k = nzC_.size(); k-- > 0;) sufC_[k] = pC_[nzC_[k]] + (k + 1 < nzC_.size() ? sufC_[k + 1] : 0.0);
        if (model_ == ModelKind::backward) build_backward_weights();
    }

    ModelKind model() const { return model_; }
    double t(std::size_t i) const { return tmax_ * double(i) / double(n_); }
    std::size_t n() const { return n_; }
    double t_max() const { return tmax_; }
    const std::vector<double>& cell_masses() const { return w_; }
    const std::vector<double>& backward_weights() const { return wb_; }

    GridFunction apply(const GridFunction& f) const { return run(f, false); }
    /// (Q f)(t) = 1 - (T(1-f))(t), evaluated directly through g = 1 - h(1-.)
    GridFunction apply_Q(const GridFunction& f) const { return run(f, true); }

private:
    void build_backward_weights() {
        // weight of cell j: Dw_j P(I^ <= x_{j-1}, C^ >= x_j) + a_j P(I^ = x_j, C^ >= x_j)
        wb_.assign(n_ + 1, 0.0);
        for (std::size_t j = 0; j <= n_; ++j) {
            double cont = 0, atom = 0;
            for (std::size_t m : nzI_) {
                if (m > j) break;
                double pc = prob_c_at_least(m, j);
                if (m + 1 <= j) cont += pI_[m] * pc;
                if (m == j) atom += pI_[m] * pc;
            }
            wb_[j] = w_[j] * cont + a_[j] * atom;
        }
    }
    // C^ lattice index given I^ = x_m: l for independent, l + (m-1)^+ for shifted
    std::size_t c_index(std::size_t m, std::size_t l) const {
        if (spec_.dependence == IcDependence::independent) return l;
        return l + (m > 0 ? m - 1 : 0);
    }
    double prob_c_at_least(std::size_t m, std::size_t j) const {
        double s = 0;
        for (std::size_t l : nzC_)
            if (c_index(m, l) >= j) s += pC_[l];
        return s;
    }

    GridFunction run(const GridFunction& f, bool q) const {
        if (f.n != n_ || std::fabs(f.t_max - tmax_) > 1e-12 * tmax_)
            throw std::invalid_argument("apply_T: grid function does not match the operator grid");
        GridFunction out(tmax_, n_, 0.0);
        const auto& X = spec_.offspring;
        const auto& fv = f.values;
        // u_k = 1 - f_k for T, f_k for Q; children contribute w_j u_{i-j}
        std::vector<double> u(n_ + 1);
        for (std::size_t k = 0; k <= n_; ++k) u[k] = q ? fv[k] : 1 - fv[k];
        // T uses 1 - g(s) rather than h(1 - s): g is not Lipschitz at 0 for heavy tails,
    // so the extra rounding in 1 - (1 - s) would cost ~1e-12
    auto outer = [&](double s) {
        double g = X.g(std::clamp(s, 0.0, 1.0));
        return q ? g : 1 - g;
    };
        const double empty = q ? 0.0 : 1.0;

        switch (model_) {
            case ModelKind::age_dependent:
            case ModelKind::backward: {
                const auto& w = model_ == ModelKind::backward ? wb_ : w_;
                parallel_for(n_ + 1, threads_, [&](std::size_t i) {
                    double s = 0;
                    for (std::size_t j = 0; j <= i; ++j) s += w[j] * u[i - j];
                    out[i] = outer(s);
                });
                break;
            }
            case ModelKind::contagious: {
                parallel_for(n_ + 1, threads_, [&](std::size_t i) {
                    double s = 0, v = 0, pc_before = 0;
                    // s after adding cell l is S(l, i)
                    std::size_t ci = 0;
                    for (std::size_t l = 0; l < i; ++l) {
                        s += w_[l] * u[i - l];
                        while (ci < nzC_.size() && nzC_[ci] < l) ++ci;
                        if (ci < nzC_.size() && nzC_[ci] == l) {
                            v += pC_[l] * outer(s);
                            pc_before += pC_[l];
                        }
                    }
                    s += w_[i] * u[0];
                    v += std::max(0.0, 1 - pc_before) * outer(s);
                    out[i] = v;
                });
                break;
            }
            case ModelKind::incubation: {
                parallel_for(n_ + 1, threads_, [&](std::size_t i) {
                    // suffix sums R(m) = sum_{j=m+1}^{i} w_j u_{i-j}
                    double v = 0;
                    double R = 0;
                    std::vector<double> suffix(i + 1, 0.0);
                    for (std::size_t j = i; j-- > 0;) {
                        R += w_[j + 1] * u[i - j - 1];
                        suffix[j] = R;
                    }
                    for (std::size_t m : nzI_) {
                        if (m > i) break;
                        double s = suffix[m] + a_[m] * u[i - m];
                        v += pI_[m] * outer(s);
                    }
                    v += (1 - FI_[i]) * empty;
                    out[i] = v;
                });
                break;
            }
            case ModelKind::general_forward: {
                parallel_for(n_ + 1, threads_, [&](std::size_t i) {
                    // prefix P(l) = sum_{j<=l} w_j u_{i-j}
                    std::vector<double> P(i + 1);
                    double acc = 0;
                    for (std::size_t j = 0; j <= i; ++j) {
                        acc += w_[j] * u[i - j];
                        P[j] = acc;
                    }
                    double v = 0;
                    for (std::size_t m : nzI_) {
                        if (m > i) break;
                        double base = P[m] - a_[m] * u[i - m];  // so S = P(l') - base
                        double inner = 0;
                        // c_index is nondecreasing in l; every end at or past i sees the same S
                        for (std::size_t k = 0; k < nzC_.size(); ++k) {
                            std::size_t l = nzC_[k];
                            std::size_t c = c_index(m, l);
                            if (c < m) {
                                inner += pC_[l] * empty;
                            } else if (c >= i) {
                                inner += sufC_[k] * outer(P[i] - base);
                                break;
                            } else {
                                inner += pC_[l] * outer(P[c] - base);
                            }
                        }
                        v += pI_[m] * inner;
                    }
                    v += (1 - FI_[i]) * empty;
                    out[i] = v;
                });
                break;
            }
        }
        if (q)
            project_nondecreasing(out.values);
        else
            project_nonincreasing(out.values);
        return out;
    }

    EpidemicSpec spec_;
    ModelKind model_;
    double tmax_;
    std::size_t n_;
    unsigned threads_;
    std::vector<double> w_, a_, pI_, FI_, pC_, sufC_, wb_;
    std::vector<std::size_t> nzI_, nzC_;
};

inline GridFunction apply_T(const EpidemicSpec& spec, const GridFunction& f) {
    return Operator(spec, f.t_max, f.n).apply(f);
}

struct IterationResult {
    GridFunction phi;
    std::size_t k_stop = 0;
    double residual = kInf;
    bool plateau = false;  // stopped on step stagnation rather than tol
    std::vector<double> steps;
};

/// phi_0 = 0, phi_k = T phi_{k-1}.  Stops when the sup-norm step drops
/// below tol, or once steps have stopped contracting while already small:
/// the discrete process is slightly slower than the true one, so late
/// iterates creep upward by about one cell per generation.
inline IterationResult iterate_phi(const Operator& op, std::size_t k_max = 200, double tol = 1e-10,
                                   bool stop_on_plateau = true) {
    if (k_max < 1) throw std::invalid_argument("iterate_phi: k_max must be >= 1");
    IterationResult r;
    GridFunction phi(op.t_max(), op.n(), 0.0);
    double prev_step = kInf;
    for (std::size_t k = 1; k <= k_max; ++k) {
        GridFunction next = op.apply(phi);
        double step = 0;
        for (std::size_t i = 0; i <= op.n(); ++i) step = std::max(step, std::fabs(next[i] - phi[i]));
        phi = std::move(next);
        r.steps.push_back(step);
        r.k_stop = k;
        r.residual = step;
        if (step < tol) break;
        if (stop_on_plateau && k >= 8 && step < 1e-3 && step > 0.7 * prev_step) {
            r.plateau = true;
            break;
        }
        prev_step = step;
    }
    r.phi = std::move(phi);
    return r;
}

inline IterationResult iterate_phi(const EpidemicSpec& spec, double t_max, std::size_t n, std::size_t k_max = 200,
                                   double tol = 1e-10, unsigned threads = 1) {
    return iterate_phi(Operator(spec, t_max, n, threads), k_max, tol);
}

/// 1 - phi
inline GridFunction explosion_time_cdf(const GridFunction& phi) {
    GridFunction out = phi;
    for (auto& v : out.values) v = 1 - v;
    project_nondecreasing(out.values);
    return out;
}

/// f >= T f on [0, t0] certifies explosivity (f must not be identically 1 there)
inline bool test_function_check(const Operator& op, const GridFunction& f, double t0) {
    bool all_one = true;
    for (std::size_t i = 0; i <= f.n && f.t(i) <= t0 + 1e-12; ++i)
        if (f[i] < 1) all_one = false;
    if (all_one) throw std::invalid_argument("test_function_check: f must not be identically 1 on [0,t0]");
    for (double v : f.values)
        if (!(v >= 0 && v <= 1)) throw std::invalid_argument("test_function_check: values must lie in [0,1]");
    GridFunction Tf = op.apply(f);
    for (std::size_t i = 0; i <= f.n && f.t(i) <= t0 + 1e-12; ++i)
        if (f[i] < Tf[i] - 1e-12) return false;
    return true;
}

inline bool test_function_check(const EpidemicSpec& spec, const GridFunction& f, double t0) {
    return test_function_check(Operator(spec, f.t_max, f.n), f, t0);
}

}  // namespace cmj
