#include <catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "cli_commands.hpp"
#include "cmj/io.hpp"

using namespace cmj;
using Catch::Approx;

namespace {

const char* kSpec = R"({"offspring": {"kind": "power_law", "alpha": 0.5}, "sigma": {"kind": "exponential", "rate": 2}})";

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string msg_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("spec parsing", "[io]") {
    auto s = parse_spec(Json::parse(kSpec), "spec");
    CHECK(s.sigma.cdf(0.5) == Approx(1 - std::exp(-1.0)));
    CHECK(s.offspring.kind() == OffspringKind::power_law);
    CHECK(model_kind(s) == ModelKind::age_dependent);

    auto nested = parse_dist(Json::parse(R"({"kind": "max", "of": [{"kind": "uniform", "b": 1},
                                                                    {"kind": "exponential"}]})"),
                             "sigma");
    CHECK(nested.cdf(0.5) == Approx(0.5 * (1 - std::exp(-0.5))));
    auto tab = parse_dist(Json::parse(R"({"kind": "table", "points": [[0, 0], [1, 0.5], [2, 1]]})"), "sigma");
    CHECK(tab.cdf(1.5) == Approx(0.75));
}

TEST_CASE("config errors name the offending path", "[io]") {
    CHECK(msg_of([] { parse_spec(Json::parse(R"({"offspring": {"kind": "power_law", "alpha": 0.5},
        "sigma": {"kind": "exponential", "rat": 1}})"), "spec"); }) == "spec.sigma.rat: unknown key");
    CHECK(msg_of([] { parse_spec(Json::parse(R"({"offspring": {"kind": "power_law", "alpha": 1.5},
        "sigma": {"kind": "exponential"}})"), "spec"); }).rfind("spec.offspring.alpha: value 1.5 outside", 0) == 0);
    CHECK(msg_of([] { parse_dist(Json::parse(R"({"kind": "gamma"})"), "sigma"); }).find("sigma.kind") == 0);
    CHECK(msg_of([] { parse_json_text("   \n"); }) == "config: empty config");
    CHECK(msg_of([] { parse_json_text("{\n  \"a\": ,\n}"); }).find("line 2") != std::string::npos);
}

TEST_CASE("top-level config contract", "[io]") {
    auto doc = Json::parse(std::string(R"({"command": "criterion", "spec": )") + kSpec + "}");
    auto p = cli::parse_config(doc, std::nullopt);
    CHECK(p.command == Command::criterion);
    CHECK(p.seed == 1);
    CHECK_THROWS_AS(cli::parse_config(doc, Command::iterate), ConfigError);
    doc["extra"] = 1;
    CHECK_THROWS_AS(cli::parse_config(doc, std::nullopt), ConfigError);
    CHECK_THROWS_AS(cli::parse_config(Json::parse("{}"), std::nullopt), ConfigError);
}

TEST_CASE("command outputs", "[io]") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "cmj_io_test";
    fs::remove_all(dir);
    cli::RunOptions ro;
    ro.out_dir = dir.string();
    ro.quiet = true;
    std::string spec = kSpec;

    CHECK(cli::run_text(R"({"command": "criterion", "spec": )" + spec + "}", std::nullopt, ro) == 0);
    auto j = Json::parse(slurp(dir / "criterion.json"));
    CHECK(j["schema_version"] == "1");
    CHECK(j["verdict"] == "explosive");

    CHECK(cli::run_text(R"({"spec": )" + spec + R"(, "params": {"t_max": 1, "n": 64}})", Command::iterate, ro) == 0);
    auto csv = slurp(dir / "iterate.csv");
    CHECK(csv.rfind("t,phi,explosion_cdf\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 66);

    std::string thin_spec = R"({"offspring": {"kind": "power_law", "alpha": 0.5}, "sigma": {"kind": "deterministic", "value": 1}})";
    CHECK(cli::run_text(R"({"command": "thin", "spec": )" + thin_spec + "}", std::nullopt, ro) == cli::kExitInfeasible);
    auto t = Json::parse(slurp(dir / "thin.json"));
    CHECK(t["feasible"] == false);

    CHECK_THROWS_AS(cli::run_text(R"({"command": "sweep", "spec": )" + spec + R"(, "params": {"param": "zeta", "values": [1]}})",
                                  std::nullopt, ro),
                    ConfigError);
    fs::remove_all(dir);
}
