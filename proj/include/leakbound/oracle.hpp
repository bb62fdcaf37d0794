#pragma once

#include <string>
#include <vector>

#include "leakbound/core.hpp"

namespace leakbound {

// Brute-force reference maximizer for the observation-restricted problems:
// maximize I(U;Y) over markov kernels P_{U|Y} with |U| = |Y| subject to the
// chosen per-letter privacy criterion. It is used to certify the LP pipeline
// from below (every reported value is the exact utility of an exactly
// feasible kernel) and to exercise converse bounds from above.
struct OracleOptions {
    long long budget = 20'000'000;      // kernel evaluations per call
    std::uint64_t seed = 12345;         // ascent restarts only
    int threads = 0;                    // 0 = hardware default, capped at 8
    int grid_resolution = 20;           // mass levels per column in grid mode
    int restarts = 200;                 // random starts in ascent mode
    long long polish_budget = 100'000;  // local refinement per budget point
};

struct OracleResult {
    double utility = 0.0;
    Mechanism mechanism;       // markov kernel realizing `utility`
    bool exhausted = false;    // grid fully swept / every restart completed
    long long evaluations = 0;
    std::string method;        // "grid" (|Y| <= 3) or "ascent"
};

OracleResult oracle_g(const JointDistribution& joint, double eps, int criterion,
                      const OracleOptions& opts = {});

// Shared-pass variant: one grid sweep serves every eps in the list (results
// are returned sorted by eps ascending). In ascent mode each eps runs its own
// restart set.
std::vector<OracleResult> oracle_g_multi(const JointDistribution& joint,
                                         std::vector<double> eps_list,
                                         int criterion,
                                         const OracleOptions& opts = {});

// Three-way consistency check at each eps: the LP design's certified value
// must sit at most `slack` below the oracle, and the oracle must stay under
// every converse bound that is valid at that eps.
struct SandwichRow {
    double eps = 0.0;
    double lp_lower = 0.0;
    double oracle = 0.0;
    double min_valid_upper = 0.0;
    bool lower_ok = false;
    bool upper_ok = false;
};

struct SandwichReport {
    std::vector<SandwichRow> rows;  // sorted by eps ascending
    int criterion = 0;
    bool all_pass = false;
};

struct SandwichOptions {
    double slack = 0.02;      // allowance for oracle discretization
    double upper_tol = 1e-6;  // numerical allowance over converse bounds
    OracleOptions oracle;
};

SandwichReport sandwich_check(const JointDistribution& joint,
                              std::vector<double> eps_list, int criterion,
                              const SandwichOptions& opts = {});

std::string sandwich_csv(const SandwichReport& report);

}  // namespace leakbound
