#include "leakbound/lp.hpp"

#include <Eigen/LU>

namespace leakbound {

namespace {

std::string block_tag(const std::vector<int>& cols) {
    std::string tag;
    for (size_t i = 0; i < cols.size(); ++i) {
        if (i) tag += "_";
        tag += std::to_string(cols[i]);
    }
    return tag;
}

// Threshold below which the perturbation is treated as switched off: the
// recovery division by eps is skipped and directions are reported as zero.
constexpr double kEpsFloor = 1e-8;

}  // namespace

DesignProblem build_lp(const JointDistribution& joint,
                       const std::vector<OmegaSet>& omega1, double eps,
                       int criterion) {
    if (criterion != 1 && criterion != 2) {
        throw Error(ErrorCode::BadInput, "criterion must be 1 or 2");
    }
    if (eps < 0.0) {
        throw Error(ErrorCode::BadInput, "eps must be nonnegative");
    }
    if (omega1.empty()) {
        throw Error(ErrorCode::EmptyOmega1, "no candidate support sets");
    }

    int x = joint.x_size();
    int y = joint.y_size();
    int blocks = static_cast<int>(omega1.size());
    int stride = 1 + 2 * x;
    int n = blocks * stride;

    DesignProblem dp;
    dp.ctx.omega1 = omega1;
    dp.ctx.criterion = criterion;
    dp.ctx.eps = eps;
    dp.ctx.x_size = x;
    dp.ctx.y_size = y;
    dp.ctx.log_base = joint.log_base();
    dp.ctx.h_y = entropy(joint.p_y(), joint.log_base());
    for (const auto& omega : omega1) {
        dp.ctx.lins.push_back(linearize_entropy(omega, joint.log_base()));
    }

    LPProblem& lp = dp.lp;
    int eq_rows = y + x + blocks;
    int ub_rows = blocks * (1 + x);
    lp.a_eq = Eigen::MatrixXd::Zero(eq_rows, n);
    lp.b_eq = Eigen::VectorXd::Zero(eq_rows);
    lp.a_ub = Eigen::MatrixXd::Zero(ub_rows, n);
    lp.b_ub = Eigen::VectorXd::Zero(ub_rows);
    lp.cost = Eigen::VectorXd::Zero(n);

    lp.var_names.resize(n);
    for (int k = 0; k < blocks; ++k) {
        std::string tag = block_tag(omega1[k].cols);
        lp.var_names[k * stride] = "p_" + tag;
        for (int m = 0; m < x; ++m) {
            lp.var_names[k * stride + 1 + m] = "jp_" + tag + "_" + std::to_string(m);
            lp.var_names[k * stride + 1 + x + m] = "jm_" + tag + "_" + std::to_string(m);
        }
    }

    // Mass rows: the weighted letter distributions must add back to P_Y.
    for (int yy = 0; yy < y; ++yy) {
        lp.eq_names.push_back("mass_y" + std::to_string(yy));
        lp.b_eq(yy) = joint.p_y()(yy);
    }
    for (int k = 0; k < blocks; ++k) {
        const OmegaSet& om = omega1[k];
        int base = k * stride;
        for (int i = 0; i < x; ++i) {
            int row = om.cols[i];
            lp.a_eq(row, base) += om.base_point(i);
            for (int m = 0; m < x; ++m) {
                lp.a_eq(row, base + 1 + m) += eps * om.h(i, m);
                lp.a_eq(row, base + 1 + x + m) -= eps * om.h(i, m);
            }
        }
    }

    // Family rows: perturbations across letters cancel in every secret
    // coordinate, so the X-marginal stays put.
    for (int m = 0; m < x; ++m) {
        int row = y + m;
        lp.eq_names.push_back("family_x" + std::to_string(m));
        for (int k = 0; k < blocks; ++k) {
            lp.a_eq(row, k * stride + 1 + m) = 1.0;
            lp.a_eq(row, k * stride + 1 + x + m) = -1.0;
        }
    }

    // Balance rows: each direction has zero total mass, which pins the
    // weight variable to the letter probability.
    for (int k = 0; k < blocks; ++k) {
        int row = y + x + k;
        lp.eq_names.push_back("balance_" + block_tag(omega1[k].cols));
        for (int m = 0; m < x; ++m) {
            lp.a_eq(row, k * stride + 1 + m) = 1.0;
            lp.a_eq(row, k * stride + 1 + x + m) = -1.0;
        }
    }

    // Budget rows: per-letter l1 privacy budget, absolute for criterion 1 and
    // proportional to the letter weight for criterion 2.
    for (int k = 0; k < blocks; ++k) {
        lp.ub_names.push_back("budget_" + block_tag(omega1[k].cols));
        for (int m = 0; m < 2 * x; ++m) {
            lp.a_ub(k, k * stride + 1 + m) = 1.0;
        }
        if (criterion == 1) {
            lp.b_ub(k) = 1.0;
        } else {
            lp.a_ub(k, k * stride) = -1.0;
        }
    }

    // Support rows: the perturbed letter distribution stays nonnegative.
    for (int k = 0; k < blocks; ++k) {
        const OmegaSet& om = omega1[k];
        std::string tag = block_tag(om.cols);
        int base = k * stride;
        for (int i = 0; i < x; ++i) {
            int row = blocks + k * x + i;
            lp.ub_names.push_back("support_" + tag + "_" + std::to_string(i));
            lp.a_ub(row, base) = -om.base_point(i);
            for (int m = 0; m < x; ++m) {
                lp.a_ub(row, base + 1 + m) = -eps * om.h(i, m);
                lp.a_ub(row, base + 1 + x + m) = eps * om.h(i, m);
            }
        }
    }

    // Linearized conditional entropy of the disclosure: sum of
    // -(b_k p_k + eps a_k (j+ - j-)) over blocks, to be minimized.
    for (int k = 0; k < blocks; ++k) {
        const EntropyLinearization& lin = dp.ctx.lins[k];
        int base = k * stride;
        lp.cost(base) = -lin.b;
        for (int m = 0; m < x; ++m) {
            lp.cost(base + 1 + m) = -eps * lin.a(m);
            lp.cost(base + 1 + x + m) = eps * lin.a(m);
        }
    }

    return dp;
}

DesignProblem build_lp(const JointDistribution& joint, double eps,
                       int criterion) {
    MMatrix mm = compute_m(joint);
    return build_lp(joint, enumerate_omega1(mm), eps, criterion);
}

DesignedMechanism recover_mechanism(const DesignProblem& design,
                                    const LPSolution& solution,
                                    const JointDistribution& joint) {
    if (solution.status != LPStatus::optimal) {
        throw Error(ErrorCode::BadInput, "solution is not optimal");
    }
    const DesignContext& ctx = design.ctx;
    int x = ctx.x_size;
    int y = ctx.y_size;
    int stride = ctx.block_stride();
    int blocks = static_cast<int>(ctx.omega1.size());

    DesignedMechanism out;
    out.criterion = ctx.criterion;
    out.eps = ctx.eps;
    out.linearized_cond_entropy = solution.objective;
    out.approx_utility = ctx.h_y - solution.objective;

    std::vector<Eigen::VectorXd> etas;
    std::vector<double> weights;
    for (int k = 0; k < blocks; ++k) {
        const OmegaSet& om = ctx.omega1[k];
        int base = k * stride;
        double p = solution.x(base);
        if (p <= 1e-12) continue;
        Eigen::VectorXd split =
            solution.x.segment(base + 1, x) - solution.x.segment(base + 1 + x, x);
        Eigen::VectorXd eta_support = p * om.base_point + ctx.eps * (om.h * split);
        if (eta_support.minCoeff() < -kInequalityTol) {
            throw Error(ErrorCode::ReconstructionMismatch,
                        "negative letter mass " +
                            format_double(eta_support.minCoeff()));
        }

        // Re-derive the direction from the letter distribution alone and
        // compare with the solver's split variables.
        Eigen::VectorXd direction = Eigen::VectorXd::Zero(x);
        if (ctx.eps >= kEpsFloor) {
            Eigen::VectorXd rhs = eta_support - eta_support.sum() * om.base_point;
            direction =
                Eigen::FullPivLU<Eigen::MatrixXd>(om.h).solve(rhs) / ctx.eps;
            if ((direction - split).cwiseAbs().maxCoeff() > 1e-7) {
                throw Error(ErrorCode::ReconstructionMismatch,
                            "direction recovery drifted by " +
                                format_double(
                                    (direction - split).cwiseAbs().maxCoeff()));
            }
        }

        Eigen::VectorXd eta_full = Eigen::VectorXd::Zero(y);
        for (int i = 0; i < x; ++i) {
            eta_full(om.cols[i]) = std::max(eta_support(i), 0.0);
        }
        if (std::abs(eta_full.sum() - p) > kInequalityTol) {
            throw Error(ErrorCode::ReconstructionMismatch,
                        "letter mass mismatch " +
                            format_double(eta_full.sum() - p));
        }

        etas.push_back(eta_full);
        weights.push_back(p);
        out.j_vectors.push_back(direction);
        out.supports.push_back(om.cols);
    }

    int u_size = static_cast<int>(etas.size());
    if (u_size == 0) {
        throw Error(ErrorCode::ReconstructionMismatch, "no active letters");
    }
    if (u_size > y) {
        throw Error(ErrorCode::ReconstructionMismatch,
                    std::to_string(u_size) + " active letters for " +
                        std::to_string(y) + " observations");
    }

    // The weighted letters must tile P_Y.
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(y);
    for (const auto& eta : etas) mass += eta;
    if ((mass - joint.p_y()).cwiseAbs().maxCoeff() > kInequalityTol) {
        throw Error(ErrorCode::ReconstructionMismatch,
                    "letters do not reassemble P_Y, residual " +
                        format_double((mass - joint.p_y()).cwiseAbs().maxCoeff()));
    }

    out.p_u = Eigen::VectorXd(u_size);
    out.mechanism.kind = MechanismKind::markov;
    out.mechanism.u_size = u_size;
    out.mechanism.kernel = Eigen::MatrixXd(u_size, y);
    for (int u = 0; u < u_size; ++u) {
        out.p_u(u) = weights[u];
        out.conditionals.push_back(etas[u] / weights[u]);
        for (int yy = 0; yy < y; ++yy) {
            out.mechanism.kernel(u, yy) = etas[u](yy) / joint.p_y()(yy);
        }
    }
    for (int yy = 0; yy < y; ++yy) {
        out.mechanism.kernel.col(yy) /= out.mechanism.kernel.col(yy).sum();
    }

    // Exact feasibility of the realized disclosure, not of the LP model.
    Eigen::MatrixXd p_xu = joint.matrix() * out.mechanism.kernel.transpose();
    LeakageReport leak = leakage_measures(p_xu, true);
    double worst = ctx.criterion == 1 ? leak.max_joint_scaled : leak.max_conditional;
    if (worst > ctx.eps + kInequalityTol) {
        throw Error(ErrorCode::ReconstructionMismatch,
                    "privacy constraint violated by " +
                        format_double(worst - ctx.eps));
    }

    Eigen::MatrixXd p_uy =
        out.mechanism.kernel * Eigen::MatrixXd(joint.p_y().asDiagonal());
    out.achieved_utility = mutual_information_of_matrix(p_uy, ctx.log_base);
    return out;
}

DesignedMechanism lower_bound_g(const JointDistribution& joint, double eps,
                                int criterion) {
    DesignProblem dp = build_lp(joint, eps, criterion);
    LPSolution sol = solve_lp(dp.lp);
    if (sol.status == LPStatus::infeasible) {
        throw Error(ErrorCode::Infeasible, "design program has no solution");
    }
    if (sol.status == LPStatus::unbounded) {
        throw Error(ErrorCode::Unbounded, "design program is unbounded");
    }
    return recover_mechanism(dp, sol, joint);
}

}  // namespace leakbound
