#include "leakbound/sampling.hpp"

namespace leakbound {

Eigen::VectorXd sample_distribution(Rng& rng, int n, double min_entry,
                                    int max_tries) {
    if (n < 1 || min_entry * n >= 1.0) {
        throw Error(ErrorCode::BadInput, "unsatisfiable distribution shape");
    }
    for (int attempt = 0; attempt < max_tries; ++attempt) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v(i) = rng.exponential();
        v /= v.sum();
        if (v.minCoeff() >= min_entry) return v;
    }
    throw Error(ErrorCode::BadInput, "rejection sampling exhausted");
}

JointDistribution sample_joint(Rng& rng, int x_size, int y_size, double min_cell,
                               LogBase base, int max_tries) {
    if (min_cell * x_size * y_size >= 1.0) {
        throw Error(ErrorCode::BadInput, "min_cell too large for shape");
    }
    for (int attempt = 0; attempt < max_tries; ++attempt) {
        Eigen::MatrixXd m(x_size, y_size);
        for (int i = 0; i < x_size; ++i) {
            for (int j = 0; j < y_size; ++j) m(i, j) = rng.exponential();
        }
        m /= m.sum();
        if (m.minCoeff() < min_cell) continue;
        JointDistribution joint(m, base);
        if (x_size <= y_size && !joint.full_row_rank()) continue;
        return joint;
    }
    throw Error(ErrorCode::BadInput, "rejection sampling exhausted");
}

Eigen::MatrixXd sample_kernel(Rng& rng, int u_size, int cols) {
    Eigen::MatrixXd k(u_size, cols);
    for (int j = 0; j < cols; ++j) {
        for (int u = 0; u < u_size; ++u) k(u, j) = rng.exponential();
        k.col(j) /= k.col(j).sum();
    }
    return k;
}

JointDistribution function_joint(const Eigen::VectorXd& p_y,
                                 const std::vector<int>& f, int x_size,
                                 LogBase base) {
    if (static_cast<int>(f.size()) != p_y.size()) {
        throw Error(ErrorCode::LengthMismatch, "f must map every y");
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(x_size, p_y.size());
    for (int y = 0; y < p_y.size(); ++y) {
        if (f[y] < 0 || f[y] >= x_size) {
            throw Error(ErrorCode::BadInput, "f out of range");
        }
        m(f[y], y) = p_y(y);
    }
    return JointDistribution(m, base);
}

}  // namespace leakbound
