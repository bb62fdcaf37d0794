#pragma once

#include <string>
#include <vector>

#include "leakbound/geometry.hpp"

namespace leakbound {

// min cost . x  subject to  a_eq x = b_eq,  a_ub x <= b_ub,  x >= 0.
struct LPProblem {
    Eigen::MatrixXd a_eq;
    Eigen::VectorXd b_eq;
    Eigen::MatrixXd a_ub;
    Eigen::VectorXd b_ub;
    Eigen::VectorXd cost;
    std::vector<std::string> var_names;
    std::vector<std::string> eq_names;
    std::vector<std::string> ub_names;

    int n_vars() const { return static_cast<int>(cost.size()); }
};

enum class LPStatus { optimal, infeasible, unbounded };

struct LPSolution {
    LPStatus status;
    Eigen::VectorXd x;
    double objective;
    Eigen::VectorXd dual_eq;
    Eigen::VectorXd dual_ub;        // <= 0 for a minimization with <= rows
    bool dual_certified;            // primal residual, dual feasibility and
                                    // strong duality all verified
    double primal_residual;
    double dual_violation;
    double duality_gap;
    long iterations;
};

// Dense two-phase simplex with Bland's rule. Deterministic; throws
// CycleLimitExceeded if the pivot cap is hit. infeasible/unbounded are
// reported in the status, not thrown.
LPSolution solve_lp(const LPProblem& problem, long max_iterations = 200000);

// CPLEX LP text rendering for external inspection.
std::string lp_to_text(const LPProblem& problem, const std::string& name);

// Linearized mechanism-design program over per-letter support blocks. Each
// admissible support set contributes one candidate output letter with a
// weight variable p and a split perturbation direction j+ - j-; the letter's
// conditional distribution is eta / p with
//   eta = p * base_point + eps * H (j+ - j-)
// laid out per block as [p, j+(0..|X|-1), j-(0..|X|-1)].
struct DesignContext {
    std::vector<OmegaSet> omega1;
    std::vector<EntropyLinearization> lins;
    int criterion;
    double eps;
    int x_size;
    int y_size;
    LogBase log_base;
    double h_y;                      // entropy of P_Y in log_base

    int block_stride() const { return 1 + 2 * x_size; }
};

struct DesignProblem {
    LPProblem lp;
    DesignContext ctx;
};

DesignProblem build_lp(const JointDistribution& joint,
                       const std::vector<OmegaSet>& omega1, double eps,
                       int criterion);
DesignProblem build_lp(const JointDistribution& joint, double eps,
                       int criterion);

// Output of the design pipeline: an exactly feasible disclosure kernel plus
// the quantities needed to audit it.
struct DesignedMechanism {
    Mechanism mechanism;                      // markov, |U| x |Y|
    Eigen::VectorXd p_u;                      // letter weights, all > 1e-12
    std::vector<Eigen::VectorXd> j_vectors;   // joint-scale directions, per letter
    std::vector<std::vector<int>> supports;   // support columns per letter
    std::vector<Eigen::VectorXd> conditionals;  // P_{Y|U=u}, full length
    double achieved_utility;                  // exact I(U;Y)
    double approx_utility;                    // H(Y) - linearized optimum
    double linearized_cond_entropy;           // the LP objective value
    int criterion;
    double eps;
};

// Rebuilds the mechanism from an optimal LP solution and re-derives the
// perturbation directions from the letter distributions alone, as a
// consistency check against the solver's split variables. Verifies exact
// per-letter feasibility, marginal consistency, and the |U| <= |Y| cap;
// violations throw ReconstructionMismatch.
DesignedMechanism recover_mechanism(const DesignProblem& design,
                                    const LPSolution& solution,
                                    const JointDistribution& joint);

// Full pipeline: geometry, LP, recovery. The achieved utility is a certified
// lower bound on the corresponding design problem's optimum.
DesignedMechanism lower_bound_g(const JointDistribution& joint, double eps,
                                int criterion);

}  // namespace leakbound
