#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "leakbound/lp.hpp"
#include "leakbound/sampling.hpp"

using namespace leakbound;

namespace {

Eigen::MatrixXd example1() {
    Eigen::MatrixXd m(2, 4);
    m << 0.693, 0.027, 0.108, 0.072,
         0.006, 0.085, 0.004, 0.005;
    return m;
}

Eigen::MatrixXd example2() {
    Eigen::MatrixXd m(2, 4);
    m << 0.350, 0.025, 0.085, 0.040,
         0.025, 0.425, 0.035, 0.015;
    return m;
}

LPProblem named(LPProblem p) {
    p.var_names.resize(p.n_vars());
    for (int i = 0; i < p.n_vars(); ++i) p.var_names[i] = "x" + std::to_string(i);
    p.eq_names.resize(p.b_eq.size());
    for (int i = 0; i < p.b_eq.size(); ++i) p.eq_names[i] = "e" + std::to_string(i);
    p.ub_names.resize(p.b_ub.size());
    for (int i = 0; i < p.b_ub.size(); ++i) p.ub_names[i] = "u" + std::to_string(i);
    return p;
}

}  // namespace

TEST_CASE("simplex solves textbook programs") {
    // min -2x - 3y st x + 2y <= 4, 3x + y <= 6
    LPProblem p;
    p.a_eq = Eigen::MatrixXd(0, 2);
    p.b_eq = Eigen::VectorXd(0);
    p.a_ub = Eigen::MatrixXd(2, 2);
    p.a_ub << 1, 2, 3, 1;
    p.b_ub = Eigen::VectorXd(2);
    p.b_ub << 4, 6;
    p.cost = Eigen::VectorXd(2);
    p.cost << -2, -3;
    LPSolution s = solve_lp(named(p));
    REQUIRE(s.status == LPStatus::optimal);
    CHECK(s.x(0) == doctest::Approx(1.6).epsilon(1e-10));
    CHECK(s.x(1) == doctest::Approx(1.2).epsilon(1e-10));
    CHECK(s.objective == doctest::Approx(-6.8).epsilon(1e-10));
    CHECK(s.dual_certified);
    CHECK(s.dual_ub.maxCoeff() <= 1e-9);  // <= rows price nonpositive

    // equality-only program with a known dual
    LPProblem q;
    q.a_eq = Eigen::MatrixXd(1, 2);
    q.a_eq << 1, 1;
    q.b_eq = Eigen::VectorXd(1);
    q.b_eq << 1;
    q.a_ub = Eigen::MatrixXd(0, 2);
    q.b_ub = Eigen::VectorXd(0);
    q.cost = Eigen::VectorXd(2);
    q.cost << 1, 2;
    LPSolution sq = solve_lp(named(q));
    REQUIRE(sq.status == LPStatus::optimal);
    CHECK(sq.objective == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(sq.dual_eq(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sq.dual_certified);
}

TEST_CASE("simplex flags infeasible and unbounded programs") {
    LPProblem p;
    p.a_eq = Eigen::MatrixXd(2, 2);
    p.a_eq << 1, 1, 1, 1;
    p.b_eq = Eigen::VectorXd(2);
    p.b_eq << 1, 2;  // contradictory copies of the same row
    p.a_ub = Eigen::MatrixXd(0, 2);
    p.b_ub = Eigen::VectorXd(0);
    p.cost = Eigen::VectorXd::Zero(2);
    CHECK(solve_lp(named(p)).status == LPStatus::infeasible);

    LPProblem r;
    r.a_eq = Eigen::MatrixXd(0, 2);
    r.b_eq = Eigen::VectorXd(0);
    r.a_ub = Eigen::MatrixXd(1, 2);
    r.a_ub << 0, 1;
    r.b_ub = Eigen::VectorXd(1);
    r.b_ub << 1;
    r.cost = Eigen::VectorXd(2);
    r.cost << -1, 0;  // x0 is free to grow
    CHECK(solve_lp(named(r)).status == LPStatus::unbounded);

    // negative right-hand side forces the row-flip path
    LPProblem f;
    f.a_eq = Eigen::MatrixXd(0, 2);
    f.b_eq = Eigen::VectorXd(0);
    f.a_ub = Eigen::MatrixXd(2, 2);
    f.a_ub << -1, 0, 1, 1;
    f.b_ub = Eigen::VectorXd(2);
    f.b_ub << -2, 5;  // x0 >= 2
    f.cost = Eigen::VectorXd(2);
    f.cost << 1, 1;
    LPSolution sf = solve_lp(named(f));
    REQUIRE(sf.status == LPStatus::optimal);
    CHECK(sf.x(0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(sf.objective == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(sf.dual_certified);
}

TEST_CASE("degenerate pivoting terminates") {
    // Beale's example cycles under naive largest-coefficient pivoting.
    LPProblem p;
    p.a_eq = Eigen::MatrixXd(0, 4);
    p.b_eq = Eigen::VectorXd(0);
    p.a_ub = Eigen::MatrixXd(3, 4);
    p.a_ub << 0.25, -60.0, -1.0 / 25.0, 9.0,
              0.5, -90.0, -1.0 / 50.0, 3.0,
              0.0, 0.0, 1.0, 0.0;
    p.b_ub = Eigen::VectorXd(3);
    p.b_ub << 0, 0, 1;
    p.cost = Eigen::VectorXd(4);
    p.cost << -0.75, 150.0, -0.02, 6.0;
    LPSolution s = solve_lp(named(p));
    REQUIRE(s.status == LPStatus::optimal);
    CHECK(s.objective == doctest::Approx(-0.05).epsilon(1e-9));
    CHECK(s.dual_certified);

    CHECK_THROWS_WITH_AS(solve_lp(named(p), 1),
                         doctest::Contains("CycleLimitExceeded"), Error);
}

TEST_CASE("random programs are solved with a certificate") {
    Rng rng(424242);
    int optimal_seen = 0;
    for (int trial = 0; trial < 300; ++trial) {
        int n = 2 + rng.below(5);
        int m_eq = rng.below(3);
        int m_ub = 1 + rng.below(4);
        Eigen::VectorXd x0(n);
        for (int i = 0; i < n; ++i) {
            x0(i) = rng.below(3) == 0 ? 0.0 : rng.uniform();
        }
        LPProblem p;
        p.a_eq = Eigen::MatrixXd(m_eq, n);
        for (int i = 0; i < m_eq; ++i)
            for (int j = 0; j < n; ++j) p.a_eq(i, j) = 2.0 * rng.uniform() - 1.0;
        p.b_eq = p.a_eq * x0;
        p.a_ub = Eigen::MatrixXd(m_ub, n);
        for (int i = 0; i < m_ub; ++i)
            for (int j = 0; j < n; ++j) p.a_ub(i, j) = 2.0 * rng.uniform() - 1.0;
        p.b_ub = p.a_ub * x0;
        for (int i = 0; i < m_ub; ++i) p.b_ub(i) += 0.5 * rng.uniform();
        p.cost = Eigen::VectorXd(n);
        for (int j = 0; j < n; ++j) p.cost(j) = 2.0 * rng.uniform() - 1.0;

        LPSolution s = solve_lp(named(p));
        REQUIRE(s.status != LPStatus::infeasible);  // x0 is feasible
        if (s.status == LPStatus::optimal) {
            ++optimal_seen;
            CHECK(s.dual_certified);
            // a minimum can never exceed the value of a known feasible point
            CHECK(s.objective <= p.cost.dot(x0) + 1e-9);
            CHECK(s.x.minCoeff() >= -1e-9);
        }
    }
    CHECK(optimal_seen > 100);
}

TEST_CASE("solver is deterministic") {
    JointDistribution joint(example2());
    DesignProblem dp = build_lp(joint, 0.05, 2);
    LPSolution a = solve_lp(dp.lp);
    LPSolution b = solve_lp(dp.lp);
    REQUIRE(a.status == LPStatus::optimal);
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.objective == b.objective);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("design program has the documented shape") {
    JointDistribution joint(example1());
    for (int criterion : {1, 2}) {
        DesignProblem dp = build_lp(joint, 0.01, criterion);
        int blocks = static_cast<int>(dp.ctx.omega1.size());
        REQUIRE(blocks == 3);
        // one weight plus split directions per block
        CHECK(dp.lp.n_vars() == blocks * (1 + 2 * 2));
        // mass + family + balance rows
        CHECK(dp.lp.b_eq.size() == 4 + 2 + blocks);
        // budget + nonnegativity rows
        CHECK(dp.lp.b_ub.size() == blocks * (1 + 2));
        CHECK((dp.lp.b_eq.head(4) - joint.p_y()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(dp.lp.b_eq.tail(2 + blocks).cwiseAbs().maxCoeff() == 0.0);
        // weight costs are base-point entropies, strictly positive here
        for (int k = 0; k < blocks; ++k) {
            CHECK(dp.lp.cost(k * 5) ==
                  doctest::Approx(entropy(dp.ctx.omega1[k].base_point,
                                          LogBase::bits))
                      .epsilon(1e-12));
        }
        // budget right-hand side: absolute for criterion 1, tied to the
        // weight variable for criterion 2
        if (criterion == 1) {
            CHECK(dp.lp.b_ub(0) == 1.0);
            CHECK(dp.lp.a_ub(0, 0) == 0.0);
        } else {
            CHECK(dp.lp.b_ub(0) == 0.0);
            CHECK(dp.lp.a_ub(0, 0) == -1.0);
        }
    }
}

TEST_CASE("perfect-privacy designs on the bundled examples") {
    // at eps = 0 the letter weights are the unique barycentric combination,
    // the linearization is exact, and the disclosure leaks nothing
    JointDistribution j1(example1());
    DesignedMechanism m1 = lower_bound_g(j1, 0.0, 2);
    CHECK(m1.approx_utility == doctest::Approx(0.851343).epsilon(6e-4));
    CHECK(std::abs(m1.achieved_utility - m1.approx_utility) < 1e-9);
    CHECK(m1.p_u.size() == 3);
    CHECK(m1.p_u(0) == doctest::Approx(0.795982).epsilon(1e-4));
    CHECK(m1.p_u(1) == doctest::Approx(0.122927).epsilon(1e-3));
    CHECK(m1.p_u(2) == doctest::Approx(0.081097).epsilon(1e-3));

    Eigen::MatrixXd p_xu = j1.matrix() * m1.mechanism.kernel.transpose();
    LeakageReport leak = leakage_measures(p_xu, true);
    CHECK(leak.max_conditional < 1e-9);

    JointDistribution j2(example2());
    DesignedMechanism m2 = lower_bound_g(j2, 0.0, 2);
    CHECK(m2.approx_utility == doctest::Approx(0.6697032).epsilon(6e-4));
    CHECK(m2.p_u(0) == doctest::Approx(0.740625).epsilon(1e-4));
    CHECK(m2.p_u(1) == doctest::Approx(0.17625).epsilon(1e-3));
    CHECK(m2.p_u(2) == doctest::Approx(0.083125).epsilon(1e-3));

    // both criteria coincide at eps = 0
    DesignedMechanism m1c1 = lower_bound_g(j1, 0.0, 1);
    CHECK(std::abs(m1c1.approx_utility - m1.approx_utility) < 1e-9);
}

TEST_CASE("utility approximation grows with the privacy budget") {
    JointDistribution joint(example2());
    for (int criterion : {1, 2}) {
        double prev = -1.0;
        for (double eps : {0.0, 0.01, 0.02, 0.05, 0.1}) {
            DesignedMechanism m = lower_bound_g(joint, eps, criterion);
            CHECK(m.approx_utility >= prev - 1e-9);
            prev = m.approx_utility;
        }
    }
}

TEST_CASE("initial growth rate of the relaxed design") {
    // regression for the marginal value of budget at eps = 0 on the second
    // example, criterion 2 (hand-derived from the block slopes)
    JointDistribution joint(example2());
    double a0 = lower_bound_g(joint, 0.0, 2).approx_utility;
    double a1 = lower_bound_g(joint, 0.001, 2).approx_utility;
    CHECK((a1 - a0) / 0.001 == doctest::Approx(0.1757).epsilon(0.15));
}

TEST_CASE("recovered designs satisfy every published invariant") {
    Rng rng(90210);
    for (int trial = 0; trial < 60; ++trial) {
        int y = 3 + trial % 2;
        JointDistribution joint = sample_joint(rng, 2, y, 0.02);
        for (int criterion : {1, 2}) {
            for (double eps : {0.0, 0.01, 0.05}) {
                DesignedMechanism m = lower_bound_g(joint, eps, criterion);
                // kernel columns are conditional distributions
                for (int yy = 0; yy < y; ++yy) {
                    CHECK(m.mechanism.kernel.col(yy).sum() ==
                          doctest::Approx(1.0).epsilon(1e-12));
                    CHECK(m.mechanism.kernel.col(yy).minCoeff() >= -1e-12);
                }
                CHECK(m.p_u.sum() == doctest::Approx(1.0).epsilon(1e-9));
                CHECK(m.p_u.size() <= y);
                CHECK(m.achieved_utility >= -1e-12);
                CHECK(m.achieved_utility <=
                      entropy(joint.p_y(), LogBase::bits) + 1e-9);

                // independent re-check of the privacy constraint
                Eigen::MatrixXd p_xu =
                    joint.matrix() * m.mechanism.kernel.transpose();
                LeakageReport leak = leakage_measures(p_xu, true);
                double worst = criterion == 1 ? leak.max_joint_scaled
                                              : leak.max_conditional;
                CHECK(worst <= eps + 1e-9);

                // directions respect their budgets
                for (size_t u = 0; u < m.j_vectors.size(); ++u) {
                    double budget = criterion == 1 ? 1.0 : m.p_u(u);
                    CHECK(m.j_vectors[u].cwiseAbs().sum() <= budget + 1e-6);
                    CHECK(std::abs(m.j_vectors[u].sum()) <= 1e-6);
                }
            }
        }
    }
}

TEST_CASE("design programs certify their duals") {
    for (const Eigen::MatrixXd& m : {example1(), example2()}) {
        JointDistribution joint(m);
        for (int criterion : {1, 2}) {
            for (double eps : {0.0, 0.02}) {
                DesignProblem dp = build_lp(joint, eps, criterion);
                LPSolution s = solve_lp(dp.lp);
                REQUIRE(s.status == LPStatus::optimal);
                CHECK(s.dual_certified);
            }
        }
    }
}

TEST_CASE("text rendering is stable and complete") {
    JointDistribution joint(example1());
    DesignProblem dp = build_lp(joint, 0.01, 2);
    std::string text = lp_to_text(dp.lp, "design");
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("Subject To") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
    CHECK(text.find("p_0_1") != std::string::npos);
    CHECK(text.find("jp_1_3_0") != std::string::npos);
    CHECK(text.find("mass_y0") != std::string::npos);
    CHECK(text.find("= 0.699") != std::string::npos);
    CHECK(text == lp_to_text(dp.lp, "design"));

    CHECK_THROWS_AS(build_lp(joint, -0.5, 1), Error);
    CHECK_THROWS_AS(build_lp(joint, 0.1, 7), Error);
}
