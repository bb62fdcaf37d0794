#include "leakbound/geometry.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <limits>

namespace leakbound {

namespace {

// Greedy column-pivoted Gram-Schmidt: repeatedly take the column with the
// largest residual norm (ties to the lowest index). Gives a deterministic,
// well-conditioned leading block without depending on the tie-breaking of a
// library QR.
std::vector<int> pivot_columns(const Eigen::MatrixXd& w) {
    int x = static_cast<int>(w.rows());
    int y = static_cast<int>(w.cols());
    Eigen::MatrixXd residual = w;
    std::vector<bool> used(y, false);
    std::vector<int> pivots;
    for (int k = 0; k < x; ++k) {
        int best = -1;
        double best_norm = -1.0;
        for (int j = 0; j < y; ++j) {
            if (used[j]) continue;
            double n = residual.col(j).squaredNorm();
            if (n > best_norm) {
                best_norm = n;
                best = j;
            }
        }
        if (best < 0 || best_norm <= 0.0) {
            throw Error(ErrorCode::RankDeficient, "no usable pivot column");
        }
        used[best] = true;
        pivots.push_back(best);
        Eigen::VectorXd q = residual.col(best) / residual.col(best).norm();
        for (int j = 0; j < y; ++j) {
            if (!used[j]) residual.col(j) -= q * q.dot(residual.col(j));
        }
    }
    return pivots;
}

double condition_number(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    double smin = sv(sv.size() - 1);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

}  // namespace

MMatrix compute_m(const JointDistribution& joint) {
    const Eigen::MatrixXd& w = joint.p_x_given_y();
    int x = joint.x_size();
    int y = joint.y_size();
    if (x > y) {
        throw Error(ErrorCode::RankDeficient,
                    "|X| > |Y|: row space cannot have full dimension");
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        w, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 1e-12 * sv(0))) {
        throw Error(ErrorCode::RankDeficient,
                    "P_{X|Y} is rank deficient (sigma_min/sigma_max = " +
                        format_double(sv(sv.size() - 1) / sv(0)) + ")");
    }

    MMatrix mm;
    mm.x_size = x;
    mm.y_size = y;
    mm.log_base = joint.log_base();
    mm.p_x = joint.p_x();
    mm.p_y = joint.p_y();
    mm.m = svd.matrixV().leftCols(x).transpose();

    // Canonical row signs: the largest-magnitude entry of each row is made
    // positive (first occurrence wins ties).
    for (int i = 0; i < x; ++i) {
        int arg = 0;
        double best = -1.0;
        for (int j = 0; j < y; ++j) {
            double a = std::abs(mm.m(i, j));
            if (a > best) {
                best = a;
                arg = j;
            }
        }
        if (mm.m(i, arg) < 0.0) mm.m.row(i) = -mm.m.row(i);
    }

    Eigen::MatrixXd gram = mm.m * mm.m.transpose();
    if ((gram - Eigen::MatrixXd::Identity(x, x)).cwiseAbs().maxCoeff() >
        kOrthonormalityTol) {
        throw Error(ErrorCode::RankDeficient, "basis rows lost orthonormality");
    }
    // Rows of P_{X|Y} must lie in the span of the basis rows.
    Eigen::MatrixXd projected = w * mm.m.transpose() * mm.m;
    if ((w - projected).cwiseAbs().maxCoeff() > kOrthonormalityTol) {
        throw Error(ErrorCode::RankDeficient, "row space projection failed");
    }

    mm.pivot_cols = pivot_columns(w);
    mm.p_xy1.resize(x, x);
    mm.m_first.resize(x, x);
    for (int k = 0; k < x; ++k) {
        mm.p_xy1.col(k) = w.col(mm.pivot_cols[k]);
        mm.m_first.col(k) = mm.m.col(mm.pivot_cols[k]);
    }
    if (condition_number(mm.p_xy1) >= kConditionLimit) {
        throw Error(ErrorCode::RankDeficient, "pivot block badly conditioned");
    }
    mm.m_p_y = mm.m * mm.p_y;
    return mm;
}

std::vector<OmegaSet> enumerate_omega1(const MMatrix& mm) {
    int x = mm.x_size;
    int y = mm.y_size;
    Eigen::MatrixXd p_xy1_inv = Eigen::PartialPivLU<Eigen::MatrixXd>(mm.p_xy1).inverse();

    std::vector<OmegaSet> kept;
    std::vector<int> idx(x);
    for (int i = 0; i < x; ++i) idx[i] = i;

    while (true) {
        OmegaSet cand;
        cand.cols = idx;
        cand.y_size = y;
        cand.m_omega.resize(x, x);
        for (int k = 0; k < x; ++k) cand.m_omega.col(k) = mm.m.col(idx[k]);

        cand.cond = condition_number(cand.m_omega);
        if (cand.cond < kConditionLimit) {
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(cand.m_omega);
            cand.base_point = lu.solve(mm.m_p_y);
            if (cand.base_point.minCoeff() > kPositivityTol) {
                cand.h = lu.solve(mm.m_first) * p_xy1_inv;
                Eigen::JacobiSVD<Eigen::MatrixXd> hsvd(cand.h);
                cand.h_sigma_max = hsvd.singularValues()(0);
                kept.push_back(std::move(cand));
            }
        }

        // next |X|-combination of {0..y-1} in lexicographic order
        int i = x - 1;
        while (i >= 0 && idx[i] == y - x + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int k = i + 1; k < x; ++k) idx[k] = idx[k - 1] + 1;
    }

    if (kept.empty()) {
        throw Error(ErrorCode::EmptyOmega1, "no support set has positive weights");
    }
    return kept;
}

EntropyLinearization linearize_entropy(const OmegaSet& omega, LogBase base) {
    EntropyLinearization lin;
    int n = static_cast<int>(omega.base_point.size());
    lin.l.resize(n);
    for (int i = 0; i < n; ++i) {
        lin.l(i) = log_in_base(omega.base_point(i), base);
    }
    lin.b = lin.l.dot(omega.base_point);
    lin.a = lin.l.transpose() * omega.h;
    return lin;
}

ExtremePoint extreme_point(const OmegaSet& omega, const Eigen::VectorXd& j,
                           double eps, double weight, int criterion,
                           bool allow_infeasible) {
    int x = static_cast<int>(omega.base_point.size());
    if (j.size() != x) {
        throw Error(ErrorCode::LengthMismatch,
                    "direction has length " + std::to_string(j.size()));
    }
    if (criterion != 1 && criterion != 2) {
        throw Error(ErrorCode::BadInput, "criterion must be 1 or 2");
    }
    if (eps < 0.0) {
        throw Error(ErrorCode::BadInput, "eps must be nonnegative");
    }
    if (weight <= 0.0) {
        throw Error(ErrorCode::ZeroWeightU, "letter weight must be positive");
    }
    if (std::abs(j.sum()) > kInequalityTol) {
        throw Error(ErrorCode::InfeasiblePoint,
                    "direction components must sum to zero");
    }
    double budget = criterion == 1 ? 1.0 : weight;
    if (j.cwiseAbs().sum() > budget + kInequalityTol) {
        throw Error(ErrorCode::InfeasiblePoint,
                    "l1 budget exceeded: " + format_double(j.cwiseAbs().sum()));
    }

    ExtremePoint pt;
    pt.support = omega.cols;
    pt.on_support = omega.base_point + (eps / weight) * (omega.h * j);
    pt.feasible = pt.on_support.minCoeff() >= -kPositivityTol;
    if (!pt.feasible && !allow_infeasible) {
        throw Error(ErrorCode::InfeasiblePoint,
                    "support entry " + format_double(pt.on_support.minCoeff()));
    }
    pt.full = Eigen::VectorXd::Zero(omega.y_size);
    for (int i = 0; i < x; ++i) pt.full(omega.cols[i]) = pt.on_support(i);
    return pt;
}

}  // namespace leakbound
