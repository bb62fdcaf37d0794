#include "leakbound/lp.hpp"

#include <Eigen/LU>
#include <limits>
#include <sstream>

namespace leakbound {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kReducedCostTol = 1e-10;
constexpr double kPhase1Tol = 1e-9;

struct Tableau {
    Eigen::MatrixXd t;            // m x (width + 1), last column is b
    std::vector<int> basis;       // basis[i] = column basic in row i
    int m;
    int width;                    // number of variable columns
    long iterations = 0;
    long max_iterations;

    double& b(int i) { return t(i, width); }

    void pivot(int row, int col) {
        t.row(row) /= t(row, col);
        for (int i = 0; i < m; ++i) {
            if (i == row) continue;
            double f = t(i, col);
            if (f != 0.0) {
                t.row(i) -= f * t.row(row);
                t(i, col) = 0.0;
            }
        }
        t(row, col) = 1.0;
        basis[row] = col;
        // guard against drift below zero on degenerate steps
        for (int i = 0; i < m; ++i) {
            if (b(i) < 0.0 && b(i) > -kPhase1Tol) b(i) = 0.0;
        }
    }

    // Bland's rule: enter at the lowest-index improving column, leave at the
    // minimum ratio with ties broken by the lowest basic variable index.
    // Deterministic and cycle-free.
    LPStatus iterate(const Eigen::VectorXd& cost, int priced_cols) {
        while (true) {
            Eigen::VectorXd c_b(m);
            for (int i = 0; i < m; ++i) {
                c_b(i) = basis[i] < cost.size() ? cost(basis[i]) : 0.0;
            }
            int entering = -1;
            for (int j = 0; j < priced_cols; ++j) {
                double r = (j < cost.size() ? cost(j) : 0.0) - c_b.dot(t.col(j));
                if (r < -kReducedCostTol) {
                    entering = j;
                    break;
                }
            }
            if (entering < 0) return LPStatus::optimal;

            int leaving = -1;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i) {
                double aij = t(i, entering);
                if (aij > kPivotTol) {
                    double ratio = b(i) / aij;
                    if (ratio < best_ratio ||
                        (ratio == best_ratio &&
                         (leaving < 0 || basis[i] < basis[leaving]))) {
                        best_ratio = ratio;
                        leaving = i;
                    }
                }
            }
            if (leaving < 0) return LPStatus::unbounded;

            pivot(leaving, entering);
            if (++iterations > max_iterations) {
                throw Error(ErrorCode::CycleLimitExceeded,
                            "pivot cap " + std::to_string(max_iterations) +
                                " reached");
            }
        }
    }
};

}  // namespace

LPSolution solve_lp(const LPProblem& problem, long max_iterations) {
    int n = problem.n_vars();
    int m_eq = static_cast<int>(problem.b_eq.size());
    int m_ub = static_cast<int>(problem.b_ub.size());
    int m = m_eq + m_ub;
    if ((m_eq > 0 && problem.a_eq.cols() != n) ||
        (m_ub > 0 && problem.a_ub.cols() != n) ||
        (m_eq > 0 && problem.a_eq.rows() != m_eq) ||
        (m_ub > 0 && problem.a_ub.rows() != m_ub)) {
        throw Error(ErrorCode::LengthMismatch, "inconsistent program shapes");
    }
    if (n == 0 || m == 0) {
        throw Error(ErrorCode::BadInput, "empty program");
    }

    // Standard form with slacks on the <= rows; rows with negative right-hand
    // side are negated so phase 1 can start from b >= 0.
    int n_total = n + m_ub;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, n_total);
    Eigen::VectorXd b(m);
    if (m_eq > 0) {
        a.topLeftCorner(m_eq, n) = problem.a_eq;
        b.head(m_eq) = problem.b_eq;
    }
    if (m_ub > 0) {
        a.block(m_eq, 0, m_ub, n) = problem.a_ub;
        b.tail(m_ub) = problem.b_ub;
        for (int i = 0; i < m_ub; ++i) a(m_eq + i, n + i) = 1.0;
    }
    std::vector<double> row_sign(m, 1.0);
    for (int i = 0; i < m; ++i) {
        if (b(i) < 0.0) {
            b(i) = -b(i);
            a.row(i) = -a.row(i);
            row_sign[i] = -1.0;
        }
    }

    // Start basis: the slack where its column is +e_i, an artificial
    // elsewhere.
    std::vector<int> art_rows;
    std::vector<int> start_basis(m, -1);
    for (int i = 0; i < m; ++i) {
        if (i >= m_eq && row_sign[i] > 0.0) {
            start_basis[i] = n + (i - m_eq);
        } else {
            art_rows.push_back(i);
        }
    }
    int n_art = static_cast<int>(art_rows.size());

    Tableau tab;
    tab.m = m;
    tab.width = n_total + n_art;
    tab.max_iterations = max_iterations;
    tab.t = Eigen::MatrixXd::Zero(m, tab.width + 1);
    tab.t.leftCols(n_total) = a;
    tab.basis = start_basis;
    for (int k = 0; k < n_art; ++k) {
        tab.t(art_rows[k], n_total + k) = 1.0;
        tab.basis[art_rows[k]] = n_total + k;
    }
    tab.t.col(tab.width) = b;

    LPSolution sol;
    sol.x = Eigen::VectorXd::Zero(n);
    sol.objective = 0.0;
    sol.dual_eq = Eigen::VectorXd::Zero(m_eq);
    sol.dual_ub = Eigen::VectorXd::Zero(m_ub);
    sol.dual_certified = false;
    sol.primal_residual = 0.0;
    sol.dual_violation = 0.0;
    sol.duality_gap = 0.0;

    if (n_art > 0) {
        Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(tab.width);
        phase1_cost.tail(n_art).setOnes();
        LPStatus st = tab.iterate(phase1_cost, tab.width);
        if (st != LPStatus::optimal) {
            throw Error(ErrorCode::Infeasible, "phase 1 lost its direction");
        }
        double infeas = 0.0;
        for (int i = 0; i < m; ++i) {
            if (tab.basis[i] >= n_total) infeas += tab.b(i);
        }
        if (infeas > kPhase1Tol) {
            sol.status = LPStatus::infeasible;
            sol.iterations = tab.iterations;
            return sol;
        }
        // Drive artificials that linger in the basis at level zero out onto
        // structural columns; rows admitting no pivot are redundant and keep
        // their artificial as a zero-level placeholder.
        for (int i = 0; i < m; ++i) {
            if (tab.basis[i] < n_total) continue;
            for (int j = 0; j < n_total; ++j) {
                if (std::abs(tab.t(i, j)) > kPivotTol) {
                    tab.pivot(i, j);
                    break;
                }
            }
        }
    }

    Eigen::VectorXd phase2_cost = Eigen::VectorXd::Zero(n_total);
    phase2_cost.head(n) = problem.cost;
    LPStatus st = tab.iterate(phase2_cost, n_total);
    sol.iterations = tab.iterations;
    if (st == LPStatus::unbounded) {
        sol.status = LPStatus::unbounded;
        return sol;
    }

    sol.status = LPStatus::optimal;
    for (int i = 0; i < m; ++i) {
        if (tab.basis[i] < n) sol.x(tab.basis[i]) = tab.b(i);
    }
    for (int i = 0; i < n; ++i) {
        if (sol.x(i) < 0.0 && sol.x(i) > -kPhase1Tol) sol.x(i) = 0.0;
    }
    sol.objective = problem.cost.dot(sol.x);

    // Duals from the final basis against the unpivoted constraint matrix:
    // solve B^T u = c_B, then undo the row negations.
    Eigen::MatrixXd basis_cols(m, m);
    Eigen::VectorXd c_basis(m);
    for (int i = 0; i < m; ++i) {
        int col = tab.basis[i];
        if (col < n_total) {
            basis_cols.col(i) = a.col(col);
            c_basis(i) = col < n ? problem.cost(col) : 0.0;
        } else {
            basis_cols.col(i) = Eigen::VectorXd::Unit(m, art_rows[col - n_total]);
            c_basis(i) = 0.0;
        }
    }
    Eigen::VectorXd u =
        Eigen::FullPivLU<Eigen::MatrixXd>(basis_cols.transpose()).solve(c_basis);

    double worst_reduced = 0.0;
    for (int j = 0; j < n_total; ++j) {
        double cj = j < n ? problem.cost(j) : 0.0;
        double r = cj - u.dot(a.col(j));
        worst_reduced = std::min(worst_reduced, r);
    }
    sol.dual_violation = -worst_reduced;

    for (int i = 0; i < m_eq; ++i) sol.dual_eq(i) = row_sign[i] * u(i);
    for (int i = 0; i < m_ub; ++i) sol.dual_ub(i) = row_sign[m_eq + i] * u(m_eq + i);

    double resid = 0.0;
    if (m_eq > 0) {
        resid = (problem.a_eq * sol.x - problem.b_eq).cwiseAbs().maxCoeff();
    }
    if (m_ub > 0) {
        Eigen::VectorXd over = problem.a_ub * sol.x - problem.b_ub;
        resid = std::max(resid, over.maxCoeff());
    }
    resid = std::max(resid, std::max(0.0, -sol.x.minCoeff()));
    sol.primal_residual = std::max(resid, 0.0);

    double dual_obj = sol.dual_eq.dot(problem.b_eq) + sol.dual_ub.dot(problem.b_ub);
    sol.duality_gap = std::abs(sol.objective - dual_obj);

    double scale = 1.0 + std::abs(sol.objective);
    sol.dual_certified = sol.primal_residual <= kInequalityTol &&
                         sol.dual_violation <= kInequalityTol &&
                         sol.duality_gap <= kInequalityTol * scale;
    return sol;
}

namespace {

void append_terms(std::ostringstream& out, const Eigen::MatrixXd& a, int row,
                  const std::vector<std::string>& names) {
    bool first = true;
    for (int j = 0; j < a.cols(); ++j) {
        double v = a(row, j);
        if (v == 0.0) continue;
        if (first) {
            if (v < 0.0) out << "- ";
            first = false;
        } else {
            out << (v < 0.0 ? " - " : " + ");
        }
        out << format_double(std::abs(v)) << " " << names[j];
    }
    if (first) out << "0 " << names[0];
}

}  // namespace

std::string lp_to_text(const LPProblem& problem, const std::string& name) {
    std::ostringstream out;
    out << "\\ " << name << "\n";
    out << "Minimize\n obj: ";
    Eigen::MatrixXd cost_row = problem.cost.transpose();
    append_terms(out, cost_row, 0, problem.var_names);
    out << "\nSubject To\n";
    for (int i = 0; i < problem.b_eq.size(); ++i) {
        out << " " << problem.eq_names[i] << ": ";
        append_terms(out, problem.a_eq, i, problem.var_names);
        out << " = " << format_double(problem.b_eq(i)) << "\n";
    }
    for (int i = 0; i < problem.b_ub.size(); ++i) {
        out << " " << problem.ub_names[i] << ": ";
        append_terms(out, problem.a_ub, i, problem.var_names);
        out << " <= " << format_double(problem.b_ub(i)) << "\n";
    }
    out << "End\n";
    return out.str();
}

}  // namespace leakbound
