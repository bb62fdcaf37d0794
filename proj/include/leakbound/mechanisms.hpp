#pragma once

#include <vector>

#include "leakbound/core.hpp"

namespace leakbound {

// Exact decomposition of the channel P_{Y|X} into deterministic maps:
// P(y|x) = sum_u weights[u] * [maps[u][x] == y]. Every letter u fixes one
// output per input, the weights are a distribution over letters, and the
// letter count never exceeds |X| (|Y| - 1) + 1.
struct FrlDecomposition {
    int u_size = 0;
    std::vector<double> weights;
    std::vector<std::vector<int>> maps;  // maps[u][x] = y
    Mechanism mechanism;                 // joint_access kernel
};

FrlDecomposition frl_construct(const JointDistribution& joint);

struct EfrlDiagnostics {
    double i_ux = 0.0;         // in the joint's configured base
    double i_ux_nats = 0.0;
    double i_uy = 0.0;
    double h_y_given_xu = 0.0;
    Eigen::VectorXd joint_scaled_distance;  // per-letter privacy values
    double max_joint_scaled = 0.0;
};

// Functional-representation mechanism with an embedded identity component of
// weight alpha = (eps^2 / 2) / H(X) (both in nats), so that
// I(U;X) = alpha * H(X) = eps^2 / 2 nats exactly while H(Y|X,U) stays zero.
// Requires eps < sqrt(2 I(X;Y) nats); otherwise throws RegimeViolation.
struct EfrlResult {
    Mechanism mechanism;  // joint_access kernel
    double alpha = 0.0;
    int frl_letters = 0;
    int embed_letters = 0;
    EfrlDiagnostics diagnostics;
};

EfrlResult efrl_construct(const JointDistribution& joint, double eps);

// Independent re-check of an arbitrary mechanism against a privacy budget.
// criterion 1 bounds the joint-scaled per-letter distance, criterion 2 the
// conditional one. markov_residual measures how far a joint_access kernel is
// from depending on y alone (zero for markov kernels by construction).
struct VerificationReport {
    int criterion = 0;
    double eps = 0.0;
    Eigen::VectorXd per_u;
    double max_value = 0.0;
    int zero_letters = 0;
    double i_uy = 0.0;
    double i_ux = 0.0;
    double h_y_given_xu = 0.0;
    double markov_residual = 0.0;
    bool pass = false;
};

VerificationReport verify_mechanism(const JointDistribution& joint,
                                    const Mechanism& mech, double eps,
                                    int criterion);

// Joint distribution P(u, x, y) induced by a mechanism, flattened to a
// |U| x (|X| * |Y|) matrix with column x * |Y| + y.
Eigen::MatrixXd mechanism_triple_joint(const JointDistribution& joint,
                                       const Mechanism& mech);

}  // namespace leakbound
