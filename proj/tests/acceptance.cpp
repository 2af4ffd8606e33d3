#include <cstdio>
#include <thread>

#include "acceptance_suite.hpp"

int main() {
    cmj::acceptance::Options opt;
    opt.threads = std::max(1u, std::thread::hardware_concurrency());
    int failed = 0;
    cmj::acceptance::run_all(opt, [&](const cmj::acceptance::Result& r) {
        std::printf("%s\n", cmj::acceptance::format_line(r).c_str());
        std::fflush(stdout);
        failed += !r.outcome.pass;
    });
    std::printf("%d of 12 criteria failed\n", failed);
    return failed ? 1 : 0;
}
