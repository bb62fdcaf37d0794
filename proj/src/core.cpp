#include "leakbound/core.hpp"

#include <Eigen/SVD>
#include <cstdio>

namespace leakbound {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::NegativeEntry: return "NegativeEntry";
        case ErrorCode::NotNormalized: return "NotNormalized";
        case ErrorCode::ZeroMarginal: return "ZeroMarginal";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::ZeroWeightU: return "ZeroWeightU";
        case ErrorCode::SupportViolation: return "SupportViolation";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::EmptyOmega1: return "EmptyOmega1";
        case ErrorCode::InfeasiblePoint: return "InfeasiblePoint";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::Unbounded: return "Unbounded";
        case ErrorCode::CycleLimitExceeded: return "CycleLimitExceeded";
        case ErrorCode::ReconstructionMismatch: return "ReconstructionMismatch";
        case ErrorCode::RegimeViolation: return "RegimeViolation";
        case ErrorCode::BisectionFailure: return "BisectionFailure";
        case ErrorCode::NoFeasiblePoint: return "NoFeasiblePoint";
        case ErrorCode::BadInput: return "BadInput";
    }
    return "UnknownError";
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyOmega1:
        case ErrorCode::InfeasiblePoint:
        case ErrorCode::Infeasible:
        case ErrorCode::RegimeViolation:
        case ErrorCode::NoFeasiblePoint:
            return 2;
        default:
            return 1;
    }
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
}

namespace {

void check_probability_entries(const Eigen::VectorXd& p) {
    for (int i = 0; i < p.size(); ++i) {
        if (!(p(i) >= 0.0)) {
            throw Error(ErrorCode::NegativeEntry,
                        "entry " + std::to_string(i) + " is " + format_double(p(i)));
        }
    }
    double s = p.sum();
    if (std::abs(s - 1.0) > kNormalizationTol) {
        throw Error(ErrorCode::NotNormalized, "mass sums to " + format_double(s));
    }
}

}  // namespace

DistributionVector DistributionVector::validated(const Eigen::VectorXd& p) {
    if (p.size() == 0) {
        throw Error(ErrorCode::LengthMismatch, "empty distribution");
    }
    check_probability_entries(p);
    return DistributionVector{p};
}

JointDistribution::JointDistribution(const Eigen::MatrixXd& p_xy, LogBase base)
    : p_xy_(p_xy), base_(base) {
    if (p_xy_.rows() < 1 || p_xy_.cols() < 1) {
        throw Error(ErrorCode::LengthMismatch, "empty joint matrix");
    }
    for (int i = 0; i < p_xy_.rows(); ++i) {
        for (int j = 0; j < p_xy_.cols(); ++j) {
            if (!(p_xy_(i, j) >= 0.0)) {
                throw Error(ErrorCode::NegativeEntry,
                            "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                ") is " + format_double(p_xy_(i, j)));
            }
        }
    }
    double s = p_xy_.sum();
    if (std::abs(s - 1.0) > kNormalizationTol) {
        throw Error(ErrorCode::NotNormalized, "mass sums to " + format_double(s));
    }
    p_x_ = p_xy_.rowwise().sum();
    p_y_ = p_xy_.colwise().sum().transpose();
    for (int i = 0; i < p_x_.size(); ++i) {
        if (p_x_(i) <= 0.0) {
            throw Error(ErrorCode::ZeroMarginal, "P_X(" + std::to_string(i) + ") = 0");
        }
    }
    for (int j = 0; j < p_y_.size(); ++j) {
        if (p_y_(j) <= 0.0) {
            throw Error(ErrorCode::ZeroMarginal, "P_Y(" + std::to_string(j) + ") = 0");
        }
    }
    p_x_given_y_ = p_xy_.array().rowwise() / p_y_.transpose().array();
    if (p_xy_.rows() > p_xy_.cols()) {
        full_row_rank_ = false;
    } else {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(p_x_given_y_);
        const auto& sv = svd.singularValues();
        full_row_rank_ = sv(sv.size() - 1) > 1e-12 * sv(0);
    }
}

Eigen::MatrixXd JointDistribution::p_y_given_x() const {
    Eigen::MatrixXd t = p_xy_.transpose();
    return t.array().rowwise() / p_x_.transpose().array();
}

JointDistribution JointDistribution::with_log_base(LogBase base) const {
    JointDistribution copy = *this;
    copy.base_ = base;
    return copy;
}

double entropy(const Eigen::VectorXd& p, LogBase base) {
    double h = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        if (p(i) > 0.0) h -= p(i) * log_in_base(p(i), base);
    }
    return h;
}

double entropy_of_matrix(const Eigen::MatrixXd& p, LogBase base) {
    double h = 0.0;
    for (int i = 0; i < p.rows(); ++i) {
        for (int j = 0; j < p.cols(); ++j) {
            if (p(i, j) > 0.0) h -= p(i, j) * log_in_base(p(i, j), base);
        }
    }
    return h;
}

double conditional_entropy(const JointDistribution& joint, CondDirection dir) {
    double joint_h = entropy_of_matrix(joint.matrix(), joint.log_base());
    if (dir == CondDirection::y_given_x) {
        return joint_h - entropy(joint.p_x(), joint.log_base());
    }
    return joint_h - entropy(joint.p_y(), joint.log_base());
}

double mutual_information(const JointDistribution& joint) {
    return entropy(joint.p_y(), joint.log_base()) -
           conditional_entropy(joint, CondDirection::y_given_x);
}

double mutual_information_of_matrix(const Eigen::MatrixXd& p, LogBase base) {
    Eigen::VectorXd pr = p.rowwise().sum();
    Eigen::VectorXd pc = p.colwise().sum().transpose();
    return entropy(pr, base) + entropy(pc, base) - entropy_of_matrix(p, base);
}

double l1_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    return (a - b).cwiseAbs().sum();
}

double tv_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return 0.5 * l1_distance(a, b);
}

double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                     LogBase base) {
    if (p.size() != q.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(p.size()) + " vs " + std::to_string(q.size()));
    }
    double d = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        if (p(i) > 0.0) {
            if (q(i) <= 0.0) {
                throw Error(ErrorCode::SupportViolation,
                            "p(" + std::to_string(i) + ") > 0 but q is 0");
            }
            d += p(i) * log_in_base(p(i) / q(i), base);
        }
    }
    return d;
}

LeakageReport leakage_measures(const Eigen::MatrixXd& p_xu,
                               bool allow_zero_letters) {
    int u_size = static_cast<int>(p_xu.cols());
    LeakageReport rep;
    rep.p_u = p_xu.colwise().sum().transpose();
    rep.conditional = Eigen::VectorXd::Zero(u_size);
    rep.joint_scaled = Eigen::VectorXd::Zero(u_size);
    Eigen::VectorXd p_x = p_xu.rowwise().sum();
    for (int u = 0; u < u_size; ++u) {
        double pu = rep.p_u(u);
        if (pu <= 0.0) {
            if (!allow_zero_letters) {
                throw Error(ErrorCode::ZeroWeightU,
                            "letter " + std::to_string(u) + " has zero mass");
            }
            rep.zero_letters.push_back(u);
            continue;
        }
        rep.joint_scaled(u) = (p_xu.col(u) - p_x * pu).cwiseAbs().sum();
        rep.conditional(u) = rep.joint_scaled(u) / pu;
    }
    rep.max_conditional = rep.conditional.size() ? rep.conditional.maxCoeff() : 0.0;
    rep.max_joint_scaled = rep.joint_scaled.size() ? rep.joint_scaled.maxCoeff() : 0.0;
    rep.avg_conditional = rep.p_u.dot(rep.conditional);
    rep.avg_joint_scaled = rep.joint_scaled.sum();
    return rep;
}

}  // namespace leakbound
