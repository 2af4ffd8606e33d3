#pragma once

// Twelve acceptance checks shared by the `selftest` subcommand and the
// ctest-registered acceptance binary.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli_commands.hpp"
#include "cmj/cmj.hpp"

namespace cmj::acceptance {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Result {
    int id;
    std::string name;
    Outcome outcome;
    double seconds;
};

struct Options {
    unsigned threads = 1;
    std::string scratch_dir;  // criterion 12 writes here; empty means a temp dir
};

using D = BirthTimeDistribution;
using X = OffspringDistribution;

inline std::string vstr(const ExplosionVerdict& v) { return to_string(v.verdict); }

inline std::vector<std::pair<std::string, D>> sigma_fixtures() {
    return {{"exponential(1)", D::exponential(1)},   {"uniform(1)", D::uniform(1)},
            {"deterministic(1)", D::deterministic(1)}, {"power_at_origin(2)", D::power_at_origin(2)},
            {"steep_gamma(0.5)", D::steep_gamma(0.5)}, {"steep_gamma(1.5)", D::steep_gamma(1.5)},
            {"nu_beta(2)", D::nu_beta(2)},             {"nu_beta(3)", D::nu_beta(3)},
            {"cantor", D::cantor()},                   {"mu_c", D::mu_c()},
            {"omega(2,1.5)", D::omega(2, 1.5)},        {"slow_log", D::slow_log()}};
}

inline Outcome boundary_family() {
    const double gammas[] = {0.25, 0.5, 0.75, 1.0, 1.25};
    const Verdict want[] = {Verdict::explosive, Verdict::explosive, Verdict::explosive, Verdict::conservative,
                            Verdict::conservative};
    auto Xp = X::power_law(0.5);
    Outcome o{true, ""};
    for (int i = 0; i < 5; ++i) {
        auto s = D::steep_gamma(gammas[i]);
        auto m = criterion(s, Xp).verdict;
        auto g = integral_verdict(s, 1.0, 0.5).verdict;
        o.detail += (i ? " " : "") + std::string("g=") + cli::num17(gammas[i]).substr(0, 4) + ":" + to_string(m)[0] +
                    "/" + to_string(g)[0];
        if (m != want[i] || g != want[i]) o.pass = false;
    }
    return o;
}

inline Outcome discrete_family() {
    auto a = integral_verdict(D::nu_beta(2), 1.0, 0.5);
    auto b = integral_verdict(D::nu_beta(3), 1.0, 0.5);
    return {a.verdict == Verdict::explosive && b.verdict == Verdict::conservative,
            "nu_beta(2)=" + vstr(a) + " nu_beta(3)=" + vstr(b)};
}

inline Outcome singular_fixtures() {
    Outcome o{true, ""};
    for (auto [name, s] : {std::pair{"cantor", D::cantor()}, std::pair{"mu_c", D::mu_c()}})
        for (double al : {0.3, 0.5, 0.8}) {
            auto v = criterion(s, X::power_law(al));
            if (v.verdict != Verdict::explosive) {
                o.pass = false;
                o.detail += std::string(name) + "@" + cli::num17(al) + "=" + vstr(v) + " ";
            }
        }
    if (o.pass) o.detail = "6/6 explosive";
    return o;
}

inline Outcome criterion_equivalence() {
    int bad = 0, cells = 0;
    std::string d;
    for (auto& [name, s] : sigma_fixtures()) {
        auto g = integral_verdict(s, 1.0, 0.5).verdict;
        for (double al : {0.3, 0.8}) {
            auto m = criterion(s, X::power_law(al)).verdict;
            ++cells;
            if (m != g || m == Verdict::inconclusive) {
                ++bad;
                d += name + "@" + cli::num17(al) + ":" + to_string(m) + "/" + to_string(g) + " ";
            }
        }
    }
    return {bad == 0, std::to_string(cells - bad) + "/" + std::to_string(cells) + " agree " + d};
}

inline Outcome exponent_robustness() {
    int flips = 0;
    std::string d;
    for (auto& [name, s] : sigma_fixtures()) {
        auto v0 = criterion(s, X::power_law(0.3)).verdict;
        for (double al : {0.5, 0.8}) {
            auto v = criterion(s, X::power_law(al)).verdict;
            if (v != v0 || v == Verdict::inconclusive) {
                ++flips;
                d += name + "@" + cli::num17(al) + " ";
            }
        }
    }
    return {flips == 0, std::to_string(flips) + " flips " + d};
}

inline Outcome closure_suite() {
    auto Xp = X::power_law(0.5);
    auto a = D::steep_gamma(0.5), b = D::exponential(1), c = D::deterministic(1);
    struct Case {
        std::string name;
        D law;
        Verdict want;
    };
    std::vector<Case> cases{
        {"max", combine(CombineMode::max, a, b), Verdict::explosive},
        {"min", combine(CombineMode::min, a, b), Verdict::explosive},
        {"sum", combine(CombineMode::sum, a, b), Verdict::explosive},
        {"scale(3,sg)", combine(CombineMode::scale, a, std::nullopt, 3), Verdict::explosive},
        {"scale(3,exp)", combine(CombineMode::scale, b, std::nullopt, 3), Verdict::explosive},
        {"thin(.2,sg)", combine(CombineMode::thin, a, std::nullopt, 0.2), Verdict::explosive},
        {"thin(.2,exp)", combine(CombineMode::thin, b, std::nullopt, 0.2), Verdict::explosive},
        {"scale(3,det)", combine(CombineMode::scale, c, std::nullopt, 3), Verdict::conservative},
        {"thin(.2,det)", combine(CombineMode::thin, c, std::nullopt, 0.2), Verdict::conservative},
    };
    int bad = 0;
    std::string d;
    for (auto& k : cases) {
        auto m = criterion(k.law, Xp).verdict;
        auto g = integral_verdict(k.law, 1.0, 0.5).verdict;
        if (m != k.want || g != k.want) {
            ++bad;
            d += k.name + ":" + to_string(m) + "/" + to_string(g) + " ";
        }
    }
    return {bad == 0, std::to_string(bad) + " violations of " + std::to_string(cases.size()) + " " + d};
}

inline Outcome operator_vs_monte_carlo(unsigned threads) {
    EpidemicSpec s;
    s.offspring = X::power_law(0.5);
    s.sigma = D::exponential(1);
    auto r = iterate_phi(Operator(s, 2.0, 4096, threads));
    auto cdf = explosion_time_cdf(r.phi);
    std::vector<double> ts{0.5, 1.0, 2.0};
    auto est = estimate_cdf(s, ts, 100000, 10000, 20240601, threads);
    Outcome o{true, ""};
    for (std::size_t i = 0; i < ts.size(); ++i) {
        double op = cdf.at(ts[i]);
        double diff = std::fabs(op - est.estimate[i]);
        double tol = est.half_width(i) + 0.01;
        if (!(diff <= tol)) o.pass = false;
        char b[128];
        std::snprintf(b, sizeof b, "t=%g op=%.4f mc=%.4f |d|=%.4f<=%.4f ", ts[i], op, est.estimate[i], diff, tol);
        o.detail += b;
    }
    return o;
}

inline GridFunction random_monotone(std::mt19937_64& g, double t_max, std::size_t n) {
    std::uniform_real_distribution<double> U(0, 1);
    GridFunction f(t_max, n, 1.0);
    // nonincreasing from a random start through random multiplicative decrements
    double v = 0.05 + 0.95 * U(g);
    double rate = 4 * U(g);
    for (std::size_t i = 0; i <= n; ++i) {
        f.values[i] = v;
        if (U(g) < 0.3) v *= std::exp(-rate * U(g) * f.step());
        if (U(g) < 0.01) v *= U(g);
    }
    return f;
}

inline double max_abs_diff(const GridFunction& a, const GridFunction& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::fabs(a.values[i] - b.values[i]));
    return m;
}

inline Outcome operator_algebra() {
    const double tm = 2.0;
    const std::size_t n = 128;
    std::vector<EpidemicSpec> specs;
    EpidemicSpec base;
    base.sigma = D::exponential(1);
    specs.push_back(base);
    auto sc = base;
    sc.offspring = X::finite_table({0.1, 0.2, 0.3, 0.4});
    sc.sigma = D::uniform(1.5);
    sc.contagious = D::exponential(1);
    specs.push_back(sc);
    auto sp = base;
    sp.offspring = X::pareto_tail(0.7);
    sp.sigma = D::uniform(1);
    specs.push_back(sp);
    auto si = base;
    si.offspring = X::power_law(0.7);
    si.sigma = D::steep_gamma(0.5);
    si.incubation = D::uniform(0.4);
    specs.push_back(si);
    auto sg = si;
    sg.contagious = D::exponential(2);
    sg.dependence = IcDependence::shifted;
    specs.push_back(sg);
    auto sb = sg;
    sb.dependence = IcDependence::independent;
    sb.direction = Direction::backward;
    specs.push_back(sb);

    std::mt19937_64 g(424242);
    std::size_t checked = 0, order_bad = 0, dual_bad = 0, mono_bad = 0, degen_bad = 0;
    double dual_max = 0, degen_max = 0;
    std::vector<Operator> ops;
    for (auto& s : specs) ops.emplace_back(s, tm, n);
    // degeneracies: each general form evaluated with the trivial I and C
    std::vector<Operator> degen;
    for (std::size_t k = 0; k < 2; ++k) {
        EpidemicSpec d = k ? sc : base;
        d.contagious = D::infinite();
        d.incubation = D::deterministic(0);
        degen.emplace_back(d, tm, n);
        for (auto m : {ModelKind::contagious, ModelKind::incubation, ModelKind::general_forward, ModelKind::backward})
            degen.emplace_back(d, tm, n, 1, m);
    }
    // C = oo with the incubation kept: general reduces to the incubation model
    auto si_ref = Operator(si, tm, n);
    auto si_gen = Operator(si, tm, n, 1, ModelKind::general_forward);

    for (int trial = 0; trial < 120; ++trial) {
        auto f = random_monotone(g, tm, n);
        auto h = random_monotone(g, tm, n);
        auto hi = f;
        for (std::size_t i = 0; i <= n; ++i) hi.values[i] = std::max(f.values[i], h.values[i]);
        GridFunction one_minus(tm, n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) one_minus.values[i] = 1 - f.values[i];
        for (auto& op : ops) {
            auto tf = op.apply(f), th = op.apply(hi);
            for (std::size_t i = 0; i <= n; ++i)
                if (tf.values[i] > th.values[i] + 1e-15) {
                    ++order_bad;
                    break;
                }
            auto q = op.apply_Q(one_minus);
            double dm = 0;
            for (std::size_t i = 0; i <= n; ++i) dm = std::max(dm, std::fabs(q.values[i] - (1 - tf.values[i])));
            dual_max = std::max(dual_max, dm);
            if (dm > 1e-12) ++dual_bad;
        }
        for (std::size_t k = 0; k < 2; ++k) {
            auto ref = degen[5 * k].apply(f);
            for (std::size_t m = 1; m < 5; ++m) {
                double d = max_abs_diff(ref, degen[5 * k + m].apply(f));
                degen_max = std::max(degen_max, d);
                if (d > 1e-12) ++degen_bad;
            }
        }
        double d = max_abs_diff(si_ref.apply(f), si_gen.apply(f));
        degen_max = std::max(degen_max, d);
        if (d > 1e-12) ++degen_bad;
        ++checked;
    }
    // iterates from 0 increase pointwise
    for (auto& op : ops) {
        GridFunction cur(tm, n, 0.0);
        for (int k = 0; k < 25; ++k) {
            auto next = op.apply(cur);
            for (std::size_t i = 0; i <= n; ++i)
                if (next.values[i] < cur.values[i] - 1e-15) {
                    ++mono_bad;
                    break;
                }
            cur = next;
        }
    }
    char b[256];
    std::snprintf(b, sizeof b,
                  "%zu functions x %zu models: order %zu, monotone %zu, dual %zu (max %.1e), degenerate %zu (max %.1e)",
                  checked, ops.size(), order_bad, mono_bad, dual_bad, dual_max, degen_bad, degen_max);
    return {checked >= 100 && order_bad + mono_bad + dual_bad + degen_bad == 0, b};
}

inline Outcome thinning_algebra() {
    std::mt19937_64 g(99);
    std::uniform_real_distribution<double> U(0, 1);
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
        double al = 0.05 + 0.9 * U(g);
        std::size_t n = 1 + std::size_t(U(g) * 60);
        std::vector<double> lp(n);
        for (auto& x : lp) x = -3 * U(g);
        double ls = -5 * U(g);
        double a = wn_recursion_log(al, lp, n, ls), c = wn_closed_form_log(al, lp, n, ls);
        worst = std::max(worst, std::fabs(a - c) / std::max(std::fabs(c), 1e-300));
    }
    // the generating-function recursion itself; for power_law, g(s) = s^alpha
    for (int trial = 0; trial < 200; ++trial) {
        double al = 0.05 + 0.9 * U(g);
        auto Xa = X::power_law(al);
        std::size_t n = 1 + std::size_t(U(g) * 60);
        std::vector<double> p(n), lp(n);
        for (std::size_t i = 0; i < n; ++i) {
            lp[i] = -3 * U(g);
            p[i] = std::exp(lp[i]);
        }
        double s = std::exp(-5 * U(g));
        double a = wn_recursion(Xa, p, n, s);
        double c = std::exp(wn_closed_form_log(al, lp, n, std::log(s)));
        worst = std::max(worst, std::fabs(a - c) / c);
    }
    ThinningSchedule s;
    s.C = s.C_p = 1;
    s.alpha = 0.5;
    s.beta = 0.75;
    for (int j = 1; j <= 30; ++j) s.log_p_seq.push_back(-1.0 / std::pow(0.75, j));
    double sb = survival_bound(s);
    bool infeasible = false;
    try {
        auto d = build_schedule(D::deterministic(1), X::power_law(0.5), 1.0, 40);
        infeasible = !d.feasible();
    } catch (const ScheduleInfeasible&) {
        infeasible = true;
    }
    char b[200];
    std::snprintf(b, sizeof b, "max rel err %.1e, survival %.12f (e^-2 %.12f), det(1) %s", worst, sb, std::exp(-2.0),
                  infeasible ? "infeasible" : "FEASIBLE");
    return {worst <= 1e-12 && std::fabs(sb - std::exp(-2.0)) <= 1e-10 && infeasible, b};
}

inline Outcome epidemic_theorems(unsigned threads) {
    Outcome o{true, ""};
    auto Xp = X::power_law(0.5);
    // (i) a finite contagious period keeps explosion
    {
        EpidemicSpec s;
        s.offspring = Xp;
        s.sigma = D::exponential(1);
        s.contagious = D::exponential(1);
        auto e = estimate_cdf(s, {1.0}, 100000, 1000, 101, threads);
        o.pass &= e.hits[0] > 0;
        o.detail += "(i) " + std::to_string(e.hits[0]) + "/1000 hits; ";
    }
    // (ii) a deterministic incubation period stops it
    {
        std::uint64_t total = 0;
        for (auto dir : {Direction::forward, Direction::backward}) {
            EpidemicSpec s;
            s.offspring = Xp;
            s.sigma = D::exponential(1);
            s.incubation = D::deterministic(0.1);
            s.direction = dir;
            // only generation 1 fits before 0.15; a cap of 1e8 needs X of order 2e9
            auto e = estimate_cdf(s, {0.15}, 100000000, 10000, 11, threads);
            total += e.hits[0];
        }
        o.pass &= total == 0;
        o.detail += "(ii) " + std::to_string(total) + " hits in 2x10000; ";
    }
    // (iii) steep incubation on a steep birth law
    {
        auto sg = D::steep_gamma(0.5);
        auto v = criterion(backward_thinned(sg, sg), Xp);
        bool feas = false;
        double sb = 0;
        try {
            auto sch = forward_incubation_schedule(sg, sg, Xp, 0.5, 1.0, 40, 0.5);
            feas = sch.feasible();
            sb = feas ? survival_bound(sch) : 0;
        } catch (const ScheduleInfeasible&) {
        }
        o.pass &= v.verdict == Verdict::explosive && feas && sb > 0;
        char b[128];
        std::snprintf(b, sizeof b, "(iii) backward %s, forward schedule %s survival %.3g; ", to_string(v.verdict),
                      feas ? "feasible" : "infeasible", sb);
        o.detail += b;
    }
    // (iv) backward never loses to forward beyond sampling error
    {
        struct F {
            D sigma, inc, cont;
            IcDependence dep;
            double H;
        };
        std::vector<F> fx{
            {D::exponential(1), D::uniform(0.2), D::infinite(), IcDependence::independent, 1.0},
            {D::exponential(1), D::deterministic(0), D::exponential(1), IcDependence::independent, 1.0},
            {D::exponential(1), D::uniform(0.2), D::exponential(1), IcDependence::independent, 1.0},
            {D::exponential(1), D::uniform(0.2), D::exponential(1), IcDependence::shifted, 1.0},
            {D::steep_gamma(0.5), D::steep_gamma(0.5), D::infinite(), IcDependence::independent, 0.5},
            {D::uniform(1), D::uniform(0.3), D::uniform(2), IcDependence::shifted, 1.5},
        };
        int bad = 0;
        std::string d;
        for (std::size_t k = 0; k < fx.size(); ++k) {
            EpidemicSpec s;
            s.offspring = Xp;
            s.sigma = fx[k].sigma;
            s.incubation = fx[k].inc;
            s.contagious = fx[k].cont;
            s.dependence = fx[k].dep;
            auto fwd = estimate_cdf(s, {fx[k].H}, 10000, 2000, 300 + k, threads);
            s.direction = Direction::backward;
            auto bwd = estimate_cdf(s, {fx[k].H}, 10000, 2000, 400 + k, threads);
            double slack = fwd.half_width(0) + bwd.half_width(0);
            if (bwd.estimate[0] < fwd.estimate[0] - slack) ++bad;
            char b[64];
            std::snprintf(b, sizeof b, "%.3f>=%.3f ", bwd.estimate[0], fwd.estimate[0]);
            d += b;
        }
        o.pass &= bad == 0;
        o.detail += "(iv) " + d;
    }
    return o;
}

inline Outcome simulator_oracle() {
    auto unif4 = X::finite_table({0.25, 0.25, 0.25, 0.25});
    std::vector<std::pair<std::string, EpidemicSpec>> specs;
    EpidemicSpec s;
    s.offspring = unif4;
    s.sigma = D::exponential(1);
    specs.emplace_back("age", s);
    auto c = s;
    c.contagious = D::exponential(1);
    specs.emplace_back("contagious", c);
    auto i = s;
    i.incubation = D::uniform(0.5);
    specs.emplace_back("incubation", i);
    auto gf = i;
    gf.contagious = D::exponential(0.7);
    gf.dependence = IcDependence::shifted;
    specs.emplace_back("general", gf);
    auto bw = i;
    bw.contagious = D::exponential(1);
    bw.direction = Direction::backward;
    specs.emplace_back("backward", bw);
    auto d2 = s;
    d2.offspring = X::constant(2);
    d2.sigma = D::uniform(1);
    specs.emplace_back("binary", d2);

    Outcome o{true, ""};
    for (auto& [name, sp] : specs) {
        SimOptions opt;
        opt.horizon = 3;
        opt.cap = 100000;
        opt.tau_keep = 0;
        Simulator lazy(sp, opt);
        opt.exhaustive = true;
        Simulator ex(sp, opt);
        auto a = run_trials(lazy, 10000, 7), b = run_trials(ex, 10000, 8);
        std::vector<double> pa, pb;
        for (auto& r : a) pa.push_back(double(r.population_at_horizon));
        for (auto& r : b) pb.push_back(double(r.population_at_horizon));
        auto k = ks_two_sample(pa, pb);
        o.pass &= k.p_value > 0.01;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s p=%.3f ", name.c_str(), k.p_value);
        o.detail += buf;
    }
    return o;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<std::pair<std::string, std::string>> determinism_configs() {
    const std::string spec = R"("spec": {"offspring": {"kind": "power_law", "alpha": 0.5},
                                         "sigma": {"kind": "exponential", "rate": 1}})";
    return {
        {"criterion", "{\"command\": \"criterion\", " + spec + "}"},
        {"integral", "{\"command\": \"integral\", " + spec + ", \"params\": {\"C\": 1, \"eps\": 0.5}}"},
        {"iterate", "{\"command\": \"iterate\", " + spec + ", \"params\": {\"t_max\": 2, \"n\": 256}}"},
        {"simulate", "{\"command\": \"simulate\", \"seed\": 5, " + spec +
                         ", \"params\": {\"t_grid\": [0.5, 1], \"cap\": 1000, \"trials\": 200, \"per_trial\": true}}"},
        {"thin", R"({"command": "thin", "spec": {"offspring": {"kind": "power_law", "alpha": 0.5},
                     "sigma": {"kind": "steep_gamma", "gamma": 0.5}}, "params": {"C": 5, "delta": 0.5}})"},
        {"sweep", "{\"command\": \"sweep\", " + spec +
                      ", \"params\": {\"param\": \"gamma\", \"values\": [0.5, 1.25]}}"},
    };
}

inline Outcome determinism(const Options& opt) {
    namespace fs = std::filesystem;
    fs::path root = opt.scratch_dir.empty() ? fs::temp_directory_path() / ("cmj_determinism_" + std::to_string(::getpid()))
                                            : fs::path(opt.scratch_dir);
    Outcome o{true, ""};
    int files = 0;
    for (auto& [name, cfg] : determinism_configs()) {
        std::vector<std::map<std::string, std::string>> runs;
        for (int rep = 0; rep < 2; ++rep) {
            cli::RunOptions ro;
            ro.out_dir = (root / (name + "_" + std::to_string(rep))).string();
            ro.quiet = true;
            // the second run spreads the work over more threads; outputs must not change
            ro.threads = rep ? std::max(2u, opt.threads) : 1;
            fs::remove_all(ro.out_dir);
            cli::run_text(cfg, std::nullopt, ro);
            std::map<std::string, std::string> out;
            for (auto& e : fs::directory_iterator(ro.out_dir)) out[e.path().filename().string()] = slurp(e.path());
            runs.push_back(std::move(out));
        }
        if (runs[0] != runs[1] || runs[0].empty()) {
            o.pass = false;
            o.detail += name + " differs; ";
        }
        files += int(runs[0].size());
    }
    fs::remove_all(root);
    if (o.pass) o.detail = std::to_string(files) + " files identical across 6 subcommands";
    return o;
}

inline std::vector<Result> run_all(const Options& opt, const std::function<void(const Result&)>& report = {}) {
    struct Item {
        int id;
        const char* name;
        double limit_s;
        std::function<Outcome()> fn;
    };
    std::vector<Item> items{
        {1, "boundary family", 10, boundary_family},
        {2, "discrete family", 10, discrete_family},
        {3, "singular fixtures", 10, singular_fixtures},
        {4, "criterion equivalence", 0, criterion_equivalence},
        {5, "exponent robustness", 0, exponent_robustness},
        {6, "closure suite", 0, closure_suite},
        {7, "operator vs Monte Carlo", 300, [&] { return operator_vs_monte_carlo(std::max(1u, opt.threads)); }},
        {8, "operator algebra", 0, operator_algebra},
        {9, "thinning algebra", 0, thinning_algebra},
        {10, "epidemic theorems", 0, [&] { return epidemic_theorems(std::max(1u, opt.threads)); }},
        {11, "simulator oracle equivalence", 0, simulator_oracle},
        {12, "determinism", 0, [&] { return determinism(opt); }},
    };
    std::vector<Result> out;
    for (auto& it : items) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome oc;
        try {
            oc = it.fn();
        } catch (const std::exception& e) {
            oc = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (it.limit_s > 0 && secs > it.limit_s) {
            oc.pass = false;
            oc.detail += " [over " + cli::num17(it.limit_s) + " s budget]";
        }
        out.push_back({it.id, it.name, oc, secs});
        if (report) report(out.back());
    }
    return out;
}

inline std::string format_line(const Result& r) {
    char b[96];
    std::snprintf(b, sizeof b, "[%s] %2d %-30s %7.2fs  ", r.outcome.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                  r.seconds);
    return b + r.outcome.detail;
}

}  // namespace cmj::acceptance
