#pragma once

#include <vector>

#include "leakbound/core.hpp"

namespace leakbound {

// Random distribution of length n with every entry >= min_entry, drawn by
// normalizing exponentials (Dirichlet(1)) and rejecting.
Eigen::VectorXd sample_distribution(Rng& rng, int n, double min_entry,
                                    int max_tries = 100000);

// Random joint with min cell mass and full row rank of P_{X|Y}; rejection
// sampled, throws BadInput when max_tries is exhausted.
JointDistribution sample_joint(Rng& rng, int x_size, int y_size, double min_cell,
                               LogBase base = LogBase::bits, int max_tries = 100000);

// Random column-stochastic |U| x cols kernel.
Eigen::MatrixXd sample_kernel(Rng& rng, int u_size, int cols);

// Joint in which X = f(Y) deterministically: P(x, y) = p_y(y) [f[y] == x].
// f must be onto {0, ..., x_size-1} or validation rejects a zero row.
JointDistribution function_joint(const Eigen::VectorXd& p_y,
                                 const std::vector<int>& f, int x_size,
                                 LogBase base = LogBase::bits);

}  // namespace leakbound
