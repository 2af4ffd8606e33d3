#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dist.hpp"
#include "offspring.hpp"
#include "operator.hpp"

namespace cmj {

using Json = nlohmann::json;

struct ConfigError : std::invalid_argument {
    ConfigError(const std::string& path, const std::string& msg)
        : std::invalid_argument((path.empty() ? std::string("config") : path) + ": " + msg) {}
};

enum class Command { criterion, integral, iterate, simulate, thin, sweep, selftest };

inline const char* to_string(Command c) {
    switch (c) {
        case Command::criterion: return "criterion";
        case Command::integral: return "integral";
        case Command::iterate: return "iterate";
        case Command::simulate: return "simulate";
        case Command::thin: return "thin";
        case Command::sweep: return "sweep";
        case Command::selftest: return "selftest";
    }
    return "?";
}

inline std::optional<Command> parse_command(const std::string& s) {
    static const std::map<std::string, Command> m{{"criterion", Command::criterion}, {"integral", Command::integral},
                                                  {"iterate", Command::iterate},     {"simulate", Command::simulate},
                                                  {"thin", Command::thin},           {"sweep", Command::sweep},
                                                  {"selftest", Command::selftest}};
    auto it = m.find(s);
    if (it == m.end()) return std::nullopt;
    return it->second;
}

/// Reads typed fields from one JSON object and rejects keys nobody asked for.
class Fields {
public:
    Fields(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(path_, "expected an object");
    }

    bool has(const std::string& k) {
        used_.insert(k);
        return j_.contains(k);
    }
    const Json& raw(const std::string& k) {
        used_.insert(k);
        if (!j_.contains(k)) throw ConfigError(sub(k), "missing required field");
        return j_.at(k);
    }
    double num(const std::string& k, std::optional<double> def = std::nullopt, double lo = -kInf, double hi = kInf) {
        used_.insert(k);
        if (!j_.contains(k)) {
            if (def) return *def;
            throw ConfigError(sub(k), "missing required field");
        }
        const Json& v = j_.at(k);
        if (!v.is_number()) throw ConfigError(sub(k), "expected a number");
        double x = v.get<double>();
        if (!(x >= lo && x <= hi))
            throw ConfigError(sub(k), "value " + fmt(x) + " outside [" + fmt(lo) + ", " + fmt(hi) + "]");
        return x;
    }
    std::uint64_t count(const std::string& k, std::optional<std::uint64_t> def, std::uint64_t lo, std::uint64_t hi) {
        used_.insert(k);
        if (!j_.contains(k)) {
            if (def) return *def;
            throw ConfigError(sub(k), "missing required field");
        }
        const Json& v = j_.at(k);
        if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0 && !v.is_number_unsigned()))
            throw ConfigError(sub(k), "expected a nonnegative integer");
        std::uint64_t x = v.get<std::uint64_t>();
        if (x < lo || x > hi)
            throw ConfigError(sub(k), "value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                                          std::to_string(hi) + "]");
        return x;
    }
    bool flag(const std::string& k, bool def) {
        used_.insert(k);
        if (!j_.contains(k)) return def;
        if (!j_.at(k).is_boolean()) throw ConfigError(sub(k), "expected true or false");
        return j_.at(k).get<bool>();
    }
    std::string str(const std::string& k, std::optional<std::string> def = std::nullopt) {
        used_.insert(k);
        if (!j_.contains(k)) {
            if (def) return *def;
            throw ConfigError(sub(k), "missing required field");
        }
        if (!j_.at(k).is_string()) throw ConfigError(sub(k), "expected a string");
        return j_.at(k).get<std::string>();
    }
    std::vector<double> nums(const std::string& k, std::optional<std::vector<double>> def = std::nullopt) {
        used_.insert(k);
        if (!j_.contains(k)) {
            if (def) return *def;
            throw ConfigError(sub(k), "missing required field");
        }
        const Json& v = j_.at(k);
        if (!v.is_array() || v.empty()) throw ConfigError(sub(k), "expected a nonempty array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ConfigError(sub(k) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }
    /// throws on any key not read so far
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ConfigError(sub(it.key()), "unknown key");
    }
    std::string sub(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    static std::string fmt(double x) {
        char b[32];
        std::snprintf(b, sizeof b, "%g", x);
        return b;
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> used_;
};

inline BirthTimeDistribution parse_dist(const Json& j, const std::string& path) {
    Fields f(j, path);
    std::string kind = f.str("kind");
    auto sub_dist = [&](const std::string& k) { return parse_dist(f.raw(k), f.sub(k)); };
    std::optional<BirthTimeDistribution> d;
    try {
        if (kind == "exponential")
            d = BirthTimeDistribution::exponential(f.num("rate", 1.0, 0, kInf));
        else if (kind == "uniform")
            d = BirthTimeDistribution::uniform(f.num("b", 1.0, 0, kInf));
        else if (kind == "deterministic")
            d = BirthTimeDistribution::deterministic(f.num("value", std::nullopt, 0, kInf));
        else if (kind == "power_at_origin")
            d = BirthTimeDistribution::power_at_origin(f.num("beta", std::nullopt, 0, kInf));
        else if (kind == "steep_gamma")
            d = BirthTimeDistribution::steep_gamma(f.num("gamma", std::nullopt, 0, kInf));
        else if (kind == "nu_beta")
            d = BirthTimeDistribution::nu_beta(f.num("beta", std::nullopt, 1, kInf));
        else if (kind == "cantor")
            d = BirthTimeDistribution::cantor();
        else if (kind == "mu_c")
            d = BirthTimeDistribution::mu_c();
        else if (kind == "omega")
            d = BirthTimeDistribution::omega(f.num("beta", 2.0), f.num("gamma", 1.5));
        else if (kind == "slow_log")
            d = BirthTimeDistribution::slow_log();
        else if (kind == "infinite")
            d = BirthTimeDistribution::infinite();
        else if (kind == "table") {
            const Json& pts = f.raw("points");
            if (!pts.is_array()) throw ConfigError(f.sub("points"), "expected an array of [t, F] pairs");
            std::vector<Atom> v;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const Json& p = pts[i];
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                    throw ConfigError(f.sub("points") + "[" + std::to_string(i) + "]", "expected [t, F]");
                v.push_back({p[0].get<double>(), p[1].get<double>()});
            }
            d = BirthTimeDistribution::table(std::move(v));
        } else if (kind == "max" || kind == "min" || kind == "sum") {
            const Json& of = f.raw("of");
            if (!of.is_array() || of.size() != 2) throw ConfigError(f.sub("of"), "expected two laws");
            auto a = parse_dist(of[0], f.sub("of") + "[0]"), b = parse_dist(of[1], f.sub("of") + "[1]");
            CombineMode m = kind == "max" ? CombineMode::max : kind == "min" ? CombineMode::min : CombineMode::sum;
            d = combine(m, a, b, 1.0, int(f.count("grid_n", 1024, 16, 1 << 20)));
        } else if (kind == "scale") {
            auto a = sub_dist("of");
            d = combine(CombineMode::scale, a, std::nullopt, f.num("factor", std::nullopt, 0, kInf));
        } else if (kind == "thin") {
            auto a = sub_dist("of");
            d = combine(CombineMode::thin, a, std::nullopt, f.num("p", std::nullopt, 0, 1));
        } else if (kind == "h_gamma") {
            auto a = sub_dist("of");
            d = h_gamma_law(a, f.num("gamma", std::nullopt, 0, kInf), f.num("t0", 0.25, 0, 1));
        } else if (kind == "backward_thinned") {
            auto s = sub_dist("sigma");
            auto i = sub_dist("incubation");
            d = backward_thinned(s, i, int(f.count("grid_n", 2048, 16, 1 << 20)));
        } else {
            throw ConfigError(f.sub("kind"), "unknown birth-time law '" + kind + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    f.finish();
    return *d;
}

inline OffspringDistribution parse_offspring(const Json& j, const std::string& path) {
    Fields f(j, path);
    std::string kind = f.str("kind");
    std::optional<OffspringDistribution> d;
    try {
        if (kind == "power_law")
            d = OffspringDistribution::power_law(f.num("alpha", std::nullopt, 0, 1), f.num("x0", 2.0, 1, kInf));
        else if (kind == "pareto_tail")
            d = OffspringDistribution::pareto_tail(f.num("alpha", std::nullopt, 0, 1), f.num("c", 1.0, 0, kInf));
        else if (kind == "log_tail")
            d = OffspringDistribution::log_tail(f.num("c", 1.0, 0, kInf));
        else if (kind == "constant")
            d = OffspringDistribution::constant(long(f.count("k", std::nullopt, 0, 1000000)));
        else if (kind == "finite_table")
            d = OffspringDistribution::finite_table(f.nums("pmf"));
        else if (kind == "tail_sandwich")
            d = OffspringDistribution::tail_sandwich(f.num("alpha_low", std::nullopt, 0, 1),
                                                     f.num("alpha_high", std::nullopt, 0, 1));
        else
            throw ConfigError(f.sub("kind"), "unknown offspring law '" + kind + "'");
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    f.finish();
    return *d;
}

inline EpidemicSpec parse_spec(const Json& j, const std::string& path) {
    Fields f(j, path);
    EpidemicSpec s;
    s.offspring = parse_offspring(f.raw("offspring"), f.sub("offspring"));
    s.sigma = parse_dist(f.raw("sigma"), f.sub("sigma"));
    if (f.has("incubation")) s.incubation = parse_dist(f.raw("incubation"), f.sub("incubation"));
    if (f.has("contagious")) s.contagious = parse_dist(f.raw("contagious"), f.sub("contagious"));
    std::string dep = f.str("dependence", std::string("independent"));
    if (dep == "independent")
        s.dependence = IcDependence::independent;
    else if (dep == "shifted")
        s.dependence = IcDependence::shifted;
    else
        throw ConfigError(f.sub("dependence"), "expected 'independent' or 'shifted'");
    std::string dir = f.str("direction", std::string("forward"));
    if (dir == "forward")
        s.direction = Direction::forward;
    else if (dir == "backward")
        s.direction = Direction::backward;
    else
        throw ConfigError(f.sub("direction"), "expected 'forward' or 'backward'");
    f.finish();
    return s;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Parses text, reporting line and column of syntax errors.
inline Json parse_json_text(const std::string& text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ConfigError("", "empty config");
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("", "syntax error at line " + std::to_string(line) + ", column " + std::to_string(col));
    }
}

/// Grid function as two-column CSV with a header line.
inline std::string grid_csv(const GridFunction& f, const std::string& name) {
    std::string out = "t," + name + "\n";
    char b[80];
    for (std::size_t i = 0; i <= f.n; ++i) {
        std::snprintf(b, sizeof b, "%.17g,%.17g\n", f.t(i), f[i]);
        out += b;
    }
    return out;
}

}  // namespace cmj
