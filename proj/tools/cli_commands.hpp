#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "cmj/cmj.hpp"

namespace cmj::cli {

struct RunOptions {
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    bool quiet = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitInfeasible = 3;

inline std::string num17(double x) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", x);
    return b;
}

class Emitter {
public:
    Emitter(const RunOptions& o) : opt_(o) { std::filesystem::create_directories(o.out_dir); }
    void file(const std::string& name, const std::string& text) const {
        std::ofstream out(std::filesystem::path(opt_.out_dir) / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + name);
        out << text;
    }
    void json(const std::string& name, Json j) const {
        std::string s = j.dump(2) + "\n";
        file(name, s);
        if (!opt_.quiet) std::fputs(s.c_str(), stdout);
    }

private:
    const RunOptions& opt_;
};

inline Json header(Command c) { return Json{{"schema_version", "1"}, {"command", to_string(c)}}; }

inline Json verdict_json(const ExplosionVerdict& v) {
    Json j;
    j["verdict"] = to_string(v.verdict);
    j["tail_bound"] = std::isfinite(v.tail_bound) ? Json(v.tail_bound) : Json(nullptr);
    j["n_used"] = v.n_used;
    j["notes"] = v.notes;
    return j;
}

inline std::string partial_sums_csv(const ExplosionVerdict& v, const char* index_name) {
    std::string s = std::string(index_name) + ",partial_sum\n";
    for (std::size_t i = 0; i < v.partial_sums.size(); ++i) s += std::to_string(i) + "," + num17(v.partial_sums[i]) + "\n";
    return s;
}

struct Parsed {
    Command command;
    std::uint64_t seed = 1;
    std::optional<EpidemicSpec> spec;
    Json params = Json::object();
};

/// Validates the top-level document; `command` may come from the command line.
inline Parsed parse_config(const Json& doc, std::optional<Command> cmd_line) {
    Fields f(doc, "");
    Parsed p;
    if (f.has("schema_version") && f.str("schema_version") != "1")
        throw ConfigError("schema_version", "only version \"1\" is supported");
    std::optional<Command> cmd = cmd_line;
    if (f.has("command")) {
        auto c = parse_command(f.str("command"));
        if (!c) throw ConfigError("command", "unknown command");
        if (cmd && *cmd != *c) throw ConfigError("command", "does not match the subcommand on the command line");
        cmd = c;
    }
    if (!cmd) throw ConfigError("command", "missing required field");
    p.command = *cmd;
    p.seed = f.count("seed", 1, 0, UINT64_MAX);
    if (f.has("spec")) p.spec = parse_spec(f.raw("spec"), "spec");
    if (f.has("params")) {
        p.params = f.raw("params");
        if (!p.params.is_object()) throw ConfigError("params", "expected an object");
    }
    f.finish();
    if (!p.spec && p.command != Command::selftest) throw ConfigError("spec", "missing required field");
    return p;
}

inline int cmd_criterion(const Parsed& p, const RunOptions& o) {
    Fields f(p.params, "params");
    std::optional<double> x0;
    if (f.has("x0")) x0 = f.num("x0", std::nullopt, 1, kInf);
    bool cont = f.flag("continuous", true);
    f.finish();
    auto v = criterion(p.spec->sigma, p.spec->offspring, x0, cont);
    Json j = header(Command::criterion);
    j["sigma"] = p.spec->sigma.describe();
    j["offspring"] = p.spec->offspring.describe();
    j.update(verdict_json(v));
    Emitter e(o);
    e.file("criterion.csv", partial_sums_csv(v, "n"));
    e.json("criterion.json", j);
    return kExitOk;
}

inline int cmd_integral(const Parsed& p, const RunOptions& o) {
    Fields f(p.params, "params");
    double C = f.num("C", 1.0, 0, kInf);
    double eps = f.num("eps", 0.5, 0, 1);
    auto kmax = f.count("k_max", 1000, 11, 1000);
    f.finish();
    auto v = integral_verdict(p.spec->sigma, C, eps, kmax);
    Json j = header(Command::integral);
    j["sigma"] = p.spec->sigma.describe();
    j["C"] = C;
    j["eps"] = eps;
    j.update(verdict_json(v));
    Emitter e(o);
    e.file("integral.csv", partial_sums_csv(v, "block"));
    e.json("integral.json", j);
    return kExitOk;
}

inline int cmd_iterate(const Parsed& p, const RunOptions& o) {
    Fields f(p.params, "params");
    double t_max = f.num("t_max", 4.0, 1e-9, 1e9);
    auto n = f.count("n", 4096, 1, 1 << 16);
    auto k_max = f.count("k_max", 200, 1, 100000);
    double tol = f.num("tol", 1e-10, 0, 1);
    bool plateau = f.flag("stop_on_plateau", true);
    f.finish();
    Operator op(*p.spec, t_max, n, o.threads);
    auto r = iterate_phi(op, k_max, tol, plateau);
    auto cdf = explosion_time_cdf(r.phi);
    std::string csv = "t,phi,explosion_cdf\n";
    for (std::size_t i = 0; i <= n; ++i) csv += num17(r.phi.t(i)) + "," + num17(r.phi[i]) + "," + num17(cdf[i]) + "\n";
    Json j = header(Command::iterate);
    j["model"] = to_string(op.model());
    j["t_max"] = t_max;
    j["n"] = n;
    j["k_stop"] = r.k_stop;
    j["residual"] = r.residual;
    j["stopped_on_plateau"] = r.plateau;
    j["phi_at_tmax"] = r.phi.values.back();
    j["hint"] = r.phi.values.back() < 1 - 10 * std::max(tol, r.plateau ? r.residual : tol) ? "explosive_at_grid"
                                                                                            : "not_detected";
    Emitter e(o);
    e.file("iterate.csv", csv);
    e.json("iterate.json", j);
    return kExitOk;
}

inline int cmd_simulate(const Parsed& p, const RunOptions& o) {
    Fields f(p.params, "params");
    double horizon = f.num("horizon", 2.0, 1e-12, 1e9);
    auto grid = f.nums("t_grid", std::vector<double>{horizon});
    for (double t : grid)
        if (!(t > 0)) throw ConfigError("params.t_grid", "times must be > 0");
    auto cap = f.count("cap", 100000, 2, 100000000);
    auto trials = f.count("trials", 1000, 1, 100000000);
    bool per_trial = f.flag("per_trial", false);
    bool exhaustive = f.flag("exhaustive", false);
    f.finish();
    std::uint64_t seed = o.seed.value_or(p.seed);
    SimOptions so;
    so.horizon = *std::max_element(grid.begin(), grid.end());
    so.cap = cap;
    so.exhaustive = exhaustive;
    so.tau_keep = per_trial ? 16 : 0;
    Simulator sim(*p.spec, so);
    auto recs = run_trials(sim, trials, seed, o.threads);
    std::string csv = "t,estimate,ci_low,ci_high\n";
    Json rows = Json::array();
    for (double t : grid) {
        std::uint64_t h = 0;
        for (auto& r : recs)
            if (r.cap_hit && r.hit_time <= t) ++h;
        auto ci = wilson(h, trials);
        double est = double(h) / double(trials);
        csv += num17(t) + "," + num17(est) + "," + num17(ci.lo) + "," + num17(ci.hi) + "\n";
        rows.push_back(Json{{"t", t}, {"hits", h}, {"estimate", est}, {"ci_low", ci.lo}, {"ci_high", ci.hi}});
    }
    Emitter e(o);
    if (per_trial) {
        std::string lines;
        for (std::size_t i = 0; i < recs.size(); ++i) {
            const auto& r = recs[i];
            Json l{{"trial", i},
                   {"seed", r.seed},
                   {"cap_hit", r.cap_hit},
                   {"hit_time", r.cap_hit ? Json(r.hit_time) : Json(nullptr)},
                   {"population_at_horizon", r.population_at_horizon},
                   {"events_processed", r.events_processed},
                   {"tau_seq", r.tau_seq},
                   {"m_seq", r.m_seq},
                   {"coming_generation", r.coming_generation_available ? Json(r.coming_generation) : Json(nullptr)}};
            lines += l.dump() + "\n";
        }
        e.file("trials.jsonl", lines);
    }
    Json j = header(Command::simulate);
    j["seed"] = seed;
    j["cap"] = cap;
    j["trials"] = trials;
    j["horizon"] = so.horizon;
    j["exhaustive"] = exhaustive;
    j["rows"] = rows;
    e.file("simulate.csv", csv);
    e.json("simulate.json", j);
    return kExitOk;
}

inline int cmd_thin(const Parsed& p, const RunOptions& o) {
    Fields f(p.params, "params");
    std::string mode = f.str("mode", std::string("plain"));
    double C = f.num("C", 1.0, 0, kInf);
    auto n_max = f.count("n_max", 40, 1, 100000);
    std::optional<double> delta;
    if (f.has("delta")) delta = f.num("delta", std::nullopt, 0, 1);
    double a = f.num("a", 0.5, 0, 1);
    double t0 = f.num("t0", 0.25, 0, 1);
    std::optional<double> gamma;
    if (f.has("h_gamma")) gamma = f.num("h_gamma", std::nullopt, 0, kInf);
    f.finish();
    if (mode != "plain" && mode != "forward_incubation")
        throw ConfigError("params.mode", "expected 'plain' or 'forward_incubation'");
    Json j = header(Command::thin);
    Emitter e(o);
    BirthTimeDistribution sigma = gamma ? h_gamma_transform(p.spec->sigma, *gamma, t0) : p.spec->sigma;
    j["sigma"] = sigma.describe();
    j["mode"] = mode;
    try {
        ThinningSchedule s = mode == "plain"
                                 ? build_schedule(sigma, p.spec->offspring, C, n_max, delta)
                                 : forward_incubation_schedule(sigma, p.spec->incubation, p.spec->offspring, a, C, n_max,
                                                               delta, t0);
        std::string csv = "n,t_n,log_p_n\n";
        for (std::size_t i = 0; i < s.t_seq.size(); ++i)
            csv += std::to_string(i + 1) + "," + num17(s.t_seq[i]) + "," + num17(s.log_p_seq[i]) + "\n";
        double sb = s.feasible() ? survival_bound(s) : 0.0;
        j["feasible"] = s.feasible();
        j["status"] = s.feasible() ? "feasible" : "inconclusive";
        j["survival_bound"] = sb;
        j["total_T"] = std::isfinite(s.total_T) ? Json(s.total_T) : Json(nullptr);
        j["C_used"] = s.C;
        j["alpha"] = s.alpha;
        j["beta"] = s.beta;
        j["s0"] = s.s0;
        if (s.mode == ScheduleMode::forward_incubation) {
            j["a"] = s.a;
            j["q"] = s.q;
        }
        j["notes"] = s.notes;
        e.file("thin.csv", csv);
        e.json("thin.json", j);
        return s.feasible() ? kExitOk : kExitInfeasible;
    } catch (const ScheduleInfeasible& ex) {
        j["feasible"] = false;
        j["status"] = "infeasible";
        j["survival_bound"] = 0.0;
        j["total_T"] = nullptr;
        j["notes"] = ex.what();
        e.file("thin.csv", "n,t_n,log_p_n\n");
        e.json("thin.json", j);
        return kExitInfeasible;
    }
}

inline int cmd_sweep(const Parsed& p, const RunOptions& o) {
    Fields f(p.params, "params");
    std::string param = f.str("param");
    auto values = f.nums("values");
    double C = f.num("C", 1.0, 0, kInf);
    double eps = f.num("eps", 0.5, 0, 1);
    f.finish();
    if (param != "gamma" && param != "beta" && param != "alpha")
        throw ConfigError("params.param", "expected 'gamma', 'beta' or 'alpha'");
    struct Cell {
        std::string minsum, integral, sigma, offspring;
    };
    std::vector<Cell> cells(values.size());
    parallel_for(values.size(), o.threads, [&](std::size_t i) {
        double v = values[i];
        BirthTimeDistribution s = p.spec->sigma;
        OffspringDistribution X = p.spec->offspring;
        if (param == "gamma") s = BirthTimeDistribution::steep_gamma(v);
        if (param == "beta") s = BirthTimeDistribution::nu_beta(v);
        if (param == "alpha") X = OffspringDistribution::power_law(v);
        cells[i] = {to_string(criterion(s, X).verdict), to_string(integral_verdict(s, C, eps).verdict), s.describe(),
                    X.describe()};
    });
    std::string csv = "index," + param + ",minsum,integral\n";
    Json arr = Json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        csv += std::to_string(i) + "," + num17(values[i]) + "," + cells[i].minsum + "," + cells[i].integral + "\n";
        arr.push_back(Json{{"index", i},
                           {param, values[i]},
                           {"sigma", cells[i].sigma},
                           {"offspring", cells[i].offspring},
                           {"minsum", cells[i].minsum},
                           {"integral", cells[i].integral}});
    }
    Json j = header(Command::sweep);
    j["param"] = param;
    j["cells"] = arr;
    Emitter e(o);
    e.file("sweep.csv", csv);
    e.json("sweep.json", j);
    return kExitOk;
}

/// Everything except selftest, which lives with the acceptance suite.
inline int run_parsed(const Parsed& p, const RunOptions& o) {
    switch (p.command) {
        case Command::criterion: return cmd_criterion(p, o);
        case Command::integral: return cmd_integral(p, o);
        case Command::iterate: return cmd_iterate(p, o);
        case Command::simulate: return cmd_simulate(p, o);
        case Command::thin: return cmd_thin(p, o);
        case Command::sweep: return cmd_sweep(p, o);
        case Command::selftest: break;
    }
    throw std::logic_error("selftest is dispatched by the front end");
}

inline int run_text(const std::string& text, std::optional<Command> cmd, const RunOptions& o) {
    return run_parsed(parse_config(parse_json_text(text), cmd), o);
}

}  // namespace cmj::cli
