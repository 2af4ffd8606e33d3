#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "acceptance_suite.hpp"
#include "cli_commands.hpp"

namespace {

int selftest(const cmj::cli::RunOptions& ro) {
    cmj::acceptance::Options opt;
    opt.threads = ro.threads;
    int failed = 0;
    cmj::acceptance::run_all(opt, [&](const cmj::acceptance::Result& r) {
        std::printf("%s\n", cmj::acceptance::format_line(r).c_str());
        std::fflush(stdout);
        failed += !r.outcome.pass;
    });
    std::printf("%d of 12 criteria failed\n", failed);
    return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Explosion diagnostics for Crump-Mode-Jagers branching processes"};
    app.require_subcommand(1);
    std::string config, out_dir = ".";
    std::uint64_t seed = 0;
    unsigned threads = 1;
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "overrides the config seed");

    const char* help[] = {"min-summability verdict",     "integral-test verdict",       "fixed-point iteration of T",
                          "Monte Carlo explosion times", "thinning schedule",           "verdict table over a parameter",
                          "run the acceptance fixtures"};
    std::vector<CLI::App*> subs;
    for (int c = 0; c <= int(cmj::Command::selftest); ++c) {
        auto cmd = cmj::Command(c);
        auto* s = app.add_subcommand(cmj::to_string(cmd), help[c]);
        if (cmd != cmj::Command::selftest) s->add_option("--config", config, "JSON config file")->required();
        subs.push_back(s);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : cmj::cli::kExitValidation;
    }

    cmj::cli::RunOptions ro;
    ro.out_dir = out_dir;
    ro.threads = threads;
    if (*seed_opt) ro.seed = seed;

    cmj::Command cmd{};
    for (std::size_t i = 0; i < subs.size(); ++i)
        if (subs[i]->parsed()) cmd = cmj::Command(i);

    try {
        if (cmd == cmj::Command::selftest) return selftest(ro);
        return cmj::cli::run_text(cmj::read_file(config), cmd, ro);
    } catch (const cmj::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return cmj::cli::kExitValidation;
    } catch (const cmj::ScheduleInfeasible& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return cmj::cli::kExitInfeasible;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return cmj::cli::kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return cmj::cli::kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
