// Runs the acceptance criteria and prints one line per criterion.
// Usage: neckforge_accept [--criterion K]... [--verbose] [--seed S] [--threads T]

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "neckforge/acceptance.hpp"

int main(int argc, char** argv) {
    CLI::App app{"neckforge acceptance suite"};
    std::vector<int> ids;
    bool verbose = false;
    unsigned long seed = 20240601;
    int threads = 0;
    app.add_option("--criterion", ids, "criterion number (repeatable)")->check(CLI::Range(1, 10));
    app.add_flag("--verbose", verbose, "print per-criterion details");
    app.add_option("--seed", seed, "seed for randomized checks");
    app.add_option("--threads", threads, "worker threads")->check(CLI::NonNegativeNumber);
    CLI11_PARSE(app, argc, argv);
    if (ids.empty()) ids = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    neckforge::acceptance::Options opt;
    opt.seed = seed;
    try {
        opt.threads = neckforge::parallel::resolve_threads(threads);
    } catch (const neckforge::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    bool all = true;
    for (int id : ids) {
        const auto r = neckforge::acceptance::run_one(id, opt);
        std::cout << r.line() << "\n";
        if (verbose || !r.pass) {
            for (const auto& d : r.details) std::cout << "    " << d << "\n";
        }
        std::cout.flush();
        all = all && r.pass;
    }
    return all ? 0 : 4;
}
