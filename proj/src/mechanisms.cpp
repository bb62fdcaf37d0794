#include "leakbound/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace leakbound {

namespace {

constexpr double kPeelStopTol = 1e-12;
constexpr double kAlphaFloor = 1e-15;

// Entropy helpers over the flattened triple joint.
double triple_h_uxy(const Eigen::MatrixXd& triple, LogBase base) {
    return entropy_of_matrix(triple, base);
}

double triple_h_ux(const Eigen::MatrixXd& triple, int x_size, int y_size,
                   LogBase base) {
    Eigen::MatrixXd p_ux(triple.rows(), x_size);
    for (int x = 0; x < x_size; ++x) {
        p_ux.col(x) =
            triple.middleCols(x * y_size, y_size).rowwise().sum();
    }
    return entropy_of_matrix(p_ux, base);
}

Eigen::MatrixXd triple_p_xu(const Eigen::MatrixXd& triple, int x_size,
                            int y_size) {
    Eigen::MatrixXd p_xu(x_size, triple.rows());
    for (int x = 0; x < x_size; ++x) {
        p_xu.row(x) = triple.middleCols(x * y_size, y_size)
                          .rowwise()
                          .sum()
                          .transpose();
    }
    return p_xu;
}

Eigen::MatrixXd triple_p_uy(const Eigen::MatrixXd& triple, int x_size,
                            int y_size) {
    Eigen::MatrixXd p_uy = Eigen::MatrixXd::Zero(triple.rows(), y_size);
    for (int x = 0; x < x_size; ++x) {
        p_uy += triple.middleCols(x * y_size, y_size);
    }
    return p_uy;
}

}  // namespace

FrlDecomposition frl_construct(const JointDistribution& joint) {
    const int x_size = joint.x_size();
    const int y_size = joint.y_size();
    // Residual channel, rows indexed by x; all row totals stay equal as mass
    // is peeled off one deterministic map at a time.
    Eigen::MatrixXd residual = joint.p_y_given_x().transpose();  // |X| x |Y|

    const int letter_cap = x_size * (y_size - 1) + 1;
    FrlDecomposition out;
    while (residual.row(0).sum() > kPeelStopTol) {
        if (out.u_size >= letter_cap) {
            throw Error(ErrorCode::ReconstructionMismatch,
                        "deterministic peel exceeded its letter cap at " +
                            std::to_string(out.u_size));
        }
        std::vector<int> map(x_size, 0);
        double weight = std::numeric_limits<double>::infinity();
        for (int x = 0; x < x_size; ++x) {
            int best = 0;
            for (int y = 1; y < y_size; ++y) {
                if (residual(x, y) > residual(x, best)) best = y;
            }
            map[x] = best;
            weight = std::min(weight, residual(x, best));
        }
        for (int x = 0; x < x_size; ++x) {
            residual(x, map[x]) -= weight;
        }
        out.maps.push_back(std::move(map));
        out.weights.push_back(weight);
        ++out.u_size;
    }
    if (out.u_size == 0) {
        throw Error(ErrorCode::ReconstructionMismatch,
                    "deterministic peel produced no letters");
    }
    double total = 0.0;
    for (double w : out.weights) total += w;
    for (double& w : out.weights) w /= total;

    // Posterior kernel P(u | x, y) over the joint alphabet.
    const Eigen::MatrixXd channel = joint.p_y_given_x().transpose();
    Eigen::MatrixXd kernel =
        Eigen::MatrixXd::Zero(out.u_size, x_size * y_size);
    for (int x = 0; x < x_size; ++x) {
        for (int y = 0; y < y_size; ++y) {
            const int col = x * y_size + y;
            if (channel(x, y) <= 0.0) {
                kernel.col(col).setConstant(1.0 / out.u_size);
                continue;
            }
            for (int u = 0; u < out.u_size; ++u) {
                if (out.maps[u][x] == y) {
                    kernel(u, col) = out.weights[u] / channel(x, y);
                }
            }
            kernel.col(col) /= kernel.col(col).sum();
        }
    }
    out.mechanism = Mechanism{MechanismKind::joint_access, out.u_size, kernel};
    return out;
}

EfrlResult efrl_construct(const JointDistribution& joint, double eps) {
    if (eps < 0.0) {
        throw Error(ErrorCode::BadInput, "eps must be nonnegative");
    }
    const JointDistribution nats = joint.with_log_base(LogBase::nats);
    const double i_xy_nats = mutual_information(nats);
    const double radius = std::sqrt(2.0 * std::max(i_xy_nats, 0.0));
    if (eps >= radius) {
        throw Error(ErrorCode::RegimeViolation,
                    "eps = " + format_double(eps) +
                        " is not below sqrt(2 I(X;Y)) = " +
                        format_double(radius));
    }
    const double h_x_nats = entropy(joint.p_x(), LogBase::nats);

    EfrlResult out;
    out.alpha = (eps * eps / 2.0) / h_x_nats;

    FrlDecomposition frl = frl_construct(joint);
    out.frl_letters = frl.u_size;

    const int x_size = joint.x_size();
    const int y_size = joint.y_size();
    std::vector<int> embed_cells;
    if (out.alpha >= kAlphaFloor) {
        for (int x = 0; x < x_size; ++x) {
            for (int y = 0; y < y_size; ++y) {
                if (joint.matrix()(x, y) > 0.0) {
                    embed_cells.push_back(x * y_size + y);
                }
            }
        }
    }
    out.embed_letters = static_cast<int>(embed_cells.size());

    const int u_size = frl.u_size + out.embed_letters;
    Eigen::MatrixXd kernel =
        Eigen::MatrixXd::Zero(u_size, x_size * y_size);
    kernel.topRows(frl.u_size) = (1.0 - out.alpha) * frl.mechanism.kernel;
    for (int e = 0; e < out.embed_letters; ++e) {
        kernel(frl.u_size + e, embed_cells[e]) = out.alpha;
    }
    for (int col = 0; col < kernel.cols(); ++col) {
        kernel.col(col) /= kernel.col(col).sum();
    }
    out.mechanism = Mechanism{MechanismKind::joint_access, u_size, kernel};

    const Eigen::MatrixXd triple = mechanism_triple_joint(joint, out.mechanism);
    const LogBase base = joint.log_base();
    out.diagnostics.i_ux = mutual_information_of_matrix(
        triple_p_xu(triple, x_size, y_size), base);
    out.diagnostics.i_ux_nats = to_nats(out.diagnostics.i_ux, base);
    out.diagnostics.i_uy = mutual_information_of_matrix(
        triple_p_uy(triple, x_size, y_size), base);
    out.diagnostics.h_y_given_xu =
        triple_h_uxy(triple, base) - triple_h_ux(triple, x_size, y_size, base);
    LeakageReport leak =
        leakage_measures(triple_p_xu(triple, x_size, y_size), true);
    out.diagnostics.joint_scaled_distance = leak.joint_scaled;
    out.diagnostics.max_joint_scaled = leak.max_joint_scaled;
    return out;
}

Eigen::MatrixXd mechanism_triple_joint(const JointDistribution& joint,
                                       const Mechanism& mech) {
    const int x_size = joint.x_size();
    const int y_size = joint.y_size();
    if (mech.u_size <= 0 || mech.kernel.rows() != mech.u_size) {
        throw Error(ErrorCode::LengthMismatch,
                    "kernel row count does not match u_size");
    }
    const int expected_cols =
        mech.kind == MechanismKind::markov ? y_size : x_size * y_size;
    if (mech.kernel.cols() != expected_cols) {
        throw Error(ErrorCode::LengthMismatch,
                    "kernel has " + std::to_string(mech.kernel.cols()) +
                        " columns, expected " +
                        std::to_string(expected_cols));
    }
    if (mech.kernel.minCoeff() < -kPositivityTol) {
        throw Error(ErrorCode::NegativeEntry, "kernel entry below zero");
    }
    for (int col = 0; col < mech.kernel.cols(); ++col) {
        if (std::abs(mech.kernel.col(col).sum() - 1.0) > kInequalityTol) {
            throw Error(ErrorCode::NotNormalized,
                        "kernel column " + std::to_string(col) +
                            " does not sum to one");
        }
    }

    Eigen::MatrixXd triple(mech.u_size, x_size * y_size);
    for (int x = 0; x < x_size; ++x) {
        for (int y = 0; y < y_size; ++y) {
            const int col = x * y_size + y;
            const int kcol = mech.kind == MechanismKind::markov ? y : col;
            triple.col(col) = joint.matrix()(x, y) * mech.kernel.col(kcol);
        }
    }
    return triple;
}

VerificationReport verify_mechanism(const JointDistribution& joint,
                                    const Mechanism& mech, double eps,
                                    int criterion) {
    if (criterion != 1 && criterion != 2) {
        throw Error(ErrorCode::BadInput, "criterion must be 1 or 2");
    }
    if (eps < 0.0) {
        throw Error(ErrorCode::BadInput, "eps must be nonnegative");
    }
    const int x_size = joint.x_size();
    const int y_size = joint.y_size();
    const Eigen::MatrixXd triple = mechanism_triple_joint(joint, mech);

    VerificationReport report;
    report.criterion = criterion;
    report.eps = eps;

    const Eigen::MatrixXd p_xu = triple_p_xu(triple, x_size, y_size);
    LeakageReport leak = leakage_measures(p_xu, true);
    report.per_u = criterion == 1 ? leak.joint_scaled : leak.conditional;
    report.max_value =
        criterion == 1 ? leak.max_joint_scaled : leak.max_conditional;
    report.zero_letters = static_cast<int>(leak.zero_letters.size());

    const LogBase base = joint.log_base();
    const Eigen::MatrixXd p_uy = triple_p_uy(triple, x_size, y_size);
    report.i_uy = mutual_information_of_matrix(p_uy, base);
    report.i_ux = mutual_information_of_matrix(p_xu, base);
    report.h_y_given_xu =
        triple_h_uxy(triple, base) - triple_h_ux(triple, x_size, y_size, base);

    if (mech.kind == MechanismKind::markov) {
        report.markov_residual = 0.0;
    } else {
        double residual = 0.0;
        for (int y = 0; y < y_size; ++y) {
            const Eigen::VectorXd p_u_given_y = p_uy.col(y) / joint.p_y()(y);
            for (int x = 0; x < x_size; ++x) {
                if (joint.matrix()(x, y) <= 0.0) continue;
                residual = std::max(
                    residual, (mech.kernel.col(x * y_size + y) - p_u_given_y)
                                  .cwiseAbs()
                                  .maxCoeff());
            }
        }
        report.markov_residual = residual;
    }
    report.pass = report.max_value <= eps + kInequalityTol;
    return report;
}

}  // namespace leakbound
