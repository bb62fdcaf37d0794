#pragma once

#include <cstdint>
#include <iostream>
#include <limits>
#include <string>

namespace leakbound {

// Parsed command line. Fields left at their defaults mean "not provided";
// eps and eps_stop use NaN for that purpose.
struct RunConfig {
    std::string input;
    std::string command;
    double eps = std::numeric_limits<double>::quiet_NaN();
    double eps_start = 0.0;
    double eps_stop = std::numeric_limits<double>::quiet_NaN();
    int eps_count = 50;
    std::string criterion = "both";  // "1", "2", or "both"
    std::string base = "bits";       // "bits" or "nats"
    std::uint64_t seed = 12345;
    std::string out;        // write primary output here instead of stdout
    std::string dump_lp;    // mechanism/lp only: LP text dump path
    std::string dump_omega; // mechanism/lp only: support-set dump path
    std::string method = "lp";  // mechanism only: lp | frl | efrl
    double slack = 0.02;        // oracle-verify lower-bound allowance
    long long budget = 20'000'000;  // oracle evaluation budget
    int threads = 0;
};

// Executes one command. Writes the primary result to `out_stream` (or the
// --out file), renders any failure as a one-line JSON object on `err_stream`,
// and returns the process exit code: 0 on success, 2 when a feasibility
// region or validity regime is empty, 1 for every other failure.
int run(const RunConfig& config, std::ostream& out_stream = std::cout,
        std::ostream& err_stream = std::cerr);

}  // namespace leakbound
