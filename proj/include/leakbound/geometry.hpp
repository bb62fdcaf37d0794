#pragma once

#include <vector>

#include "leakbound/core.hpp"

namespace leakbound {

// Orthonormal row basis M of the row space of P_{X|Y}, with the columns of
// P_{X|Y} reordered so the leading |X| columns form a well-conditioned square
// block. Everything downstream works in the original column order; the
// permutation is internal to the factorization.
struct MMatrix {
    Eigen::MatrixXd m;                 // |X| x |Y|, columns in original y order
    Eigen::MatrixXd m_first;           // M restricted to the pivot block columns
    Eigen::MatrixXd p_xy1;             // pivot block of P_{X|Y} (|X| x |X|)
    std::vector<int> pivot_cols;       // original y indices of the pivot block
    Eigen::VectorXd p_x;
    Eigen::VectorXd p_y;
    Eigen::VectorXd m_p_y;             // M * P_Y
    int x_size;
    int y_size;
    LogBase log_base;
};

// Throws RankDeficient when P_{X|Y} lacks full row rank (including |X| > |Y|)
// or when the factorization fails its orthonormality / row-space checks.
MMatrix compute_m(const JointDistribution& joint);

// One admissible support set: an |X|-subset of columns whose square system
// M_Omega c = M P_Y has a strictly positive solution. The solution c is the
// conditional distribution over the support that reproduces P_X exactly,
// i.e. P_{X|Y}[:, cols] * c = P_X.
struct OmegaSet {
    std::vector<int> cols;             // original y indices, ascending
    int y_size;                        // full alphabet size, for scattering
    Eigen::MatrixXd m_omega;           // |X| x |X|
    Eigen::VectorXd base_point;        // c = M_Omega^{-1} M P_Y, all > 0
    Eigen::MatrixXd h;                 // M_Omega^{-1} M_first P_{X|Y1}^{-1}
    double h_sigma_max;                // largest singular value of h
    double cond;                       // condition number of M_Omega
};

// All admissible |X|-subsets in lexicographic order of their column sets.
// Subsets with cond(M_Omega) >= 1e12 or a base-point entry <= 1e-12 are
// dropped; throws EmptyOmega1 when none survive.
std::vector<OmegaSet> enumerate_omega1(const MMatrix& mm);

// First-order expansion of the entropy of a distribution on the support near
// the base point: H(c + t) ~ -(b + l . t) with l_i = log c_i, b = l . c, and
// along the parametrized directions t = s H j the slope is a . j with a = l H.
struct EntropyLinearization {
    Eigen::VectorXd l;
    double b;
    Eigen::RowVectorXd a;
};

EntropyLinearization linearize_entropy(const OmegaSet& omega, LogBase base);

// Vertex of the per-letter feasible set: the distribution on the support
// c + (eps / weight) H j, scattered to full length. For criterion 1 the
// direction must satisfy ||j||_1 <= 1, for criterion 2 ||j||_1 <= weight;
// 1^T j = 0 always. Infeasible (negative) results throw InfeasiblePoint
// unless allow_infeasible is set, which returns them flagged instead.
struct ExtremePoint {
    std::vector<int> support;
    Eigen::VectorXd on_support;
    Eigen::VectorXd full;
    bool feasible;
};

ExtremePoint extreme_point(const OmegaSet& omega, const Eigen::VectorXd& j,
                           double eps, double weight, int criterion,
                           bool allow_infeasible = false);

}  // namespace leakbound
