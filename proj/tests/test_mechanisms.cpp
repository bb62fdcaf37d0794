#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "leakbound/bounds.hpp"
#include "leakbound/mechanisms.hpp"
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

// sum_u weights[u] [maps[u][x] == y] must rebuild P(y|x) exactly.
double reassembly_error(const JointDistribution& joint,
                        const FrlDecomposition& frl) {
    Eigen::MatrixXd rebuilt =
        Eigen::MatrixXd::Zero(joint.x_size(), joint.y_size());
    for (int u = 0; u < frl.u_size; ++u) {
        for (int x = 0; x < joint.x_size(); ++x) {
            rebuilt(x, frl.maps[u][x]) += frl.weights[u];
        }
    }
    Eigen::MatrixXd channel = joint.p_y_given_x().transpose();
    return (rebuilt - channel).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("deterministic peel rebuilds the channel") {
    for (const auto& m : {example1(), example2()}) {
        JointDistribution joint(m);
        FrlDecomposition frl = frl_construct(joint);
        CHECK(frl.u_size >= 1);
        CHECK(frl.u_size <= joint.x_size() * (joint.y_size() - 1) + 1);
        CHECK(reassembly_error(joint, frl) < 1e-11);
        double total = 0.0;
        for (double w : frl.weights) {
            CHECK(w > 0.0);
            total += w;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("peeled representation hides the secret and determines the output") {
    Rng rng(31415);
    for (int trial = 0; trial < 200; ++trial) {
        int x = 2 + static_cast<int>(rng.below(2));
        int y = x + static_cast<int>(rng.below(3));
        JointDistribution joint = sample_joint(rng, x, y, 0.004);
        FrlDecomposition frl = frl_construct(joint);
        CHECK(reassembly_error(joint, frl) < 1e-10);

        VerificationReport rep =
            verify_mechanism(joint, frl.mechanism, 0.0, 1);
        CHECK(rep.pass);
        CHECK(rep.max_value < 1e-11);      // U independent of X
        CHECK(rep.i_ux < 1e-10);
        CHECK(std::abs(rep.h_y_given_xu) < 1e-9);  // (X, U) pins down Y
        CHECK(rep.i_uy >= -1e-12);
    }
}

TEST_CASE("maximal-leakage mechanism hits its information target exactly") {
    JointDistribution joint(example2());
    double radius = leakage_radius_nats(joint);
    for (double frac : {0.05, 0.1, 0.2, 0.6}) {
        double eps = frac * radius;
        EfrlResult r = efrl_construct(joint, eps);
        CHECK(std::abs(r.diagnostics.i_ux_nats - eps * eps / 2.0) < 1e-11);
        CHECK(std::abs(r.diagnostics.h_y_given_xu) < 1e-9);
        CHECK(r.frl_letters <= joint.x_size() * (joint.y_size() - 1) + 1);
        CHECK(r.embed_letters <= joint.x_size() * joint.y_size());
        CHECK(r.mechanism.u_size == r.frl_letters + r.embed_letters);

        double h_x_nats = entropy(joint.p_x(), LogBase::nats);
        CHECK(r.alpha == doctest::Approx((eps * eps / 2.0) / h_x_nats)
                             .epsilon(1e-12));
    }
}

TEST_CASE("embedded letters carry the predicted privacy cost") {
    JointDistribution joint(example1());
    double eps = 0.3 * leakage_radius_nats(joint);
    EfrlResult r = efrl_construct(joint, eps);
    REQUIRE(r.embed_letters == joint.x_size() * joint.y_size());

    // Letters from the hidden component leak nothing; each embedded letter
    // u = (x, y) has joint-scaled distance 2 alpha P_XY(x, y) (1 - P_X(x)).
    const auto& d = r.diagnostics.joint_scaled_distance;
    for (int u = 0; u < r.frl_letters; ++u) {
        CHECK(std::abs(d(u)) < 1e-12);
    }
    for (int e = 0; e < r.embed_letters; ++e) {
        int x = e / joint.y_size();
        int y = e % joint.y_size();
        double expected =
            2.0 * r.alpha * joint.matrix()(x, y) * (1.0 - joint.p_x()(x));
        CHECK(d(r.frl_letters + e) == doctest::Approx(expected).epsilon(1e-9));
    }
    VerificationReport rep = verify_mechanism(joint, r.mechanism, eps, 1);
    CHECK(rep.pass);
}

TEST_CASE("information target is refused outside its regime") {
    JointDistribution joint(example1());
    double radius = leakage_radius_nats(joint);
    CHECK_THROWS_WITH_AS(efrl_construct(joint, radius),
                         doctest::Contains("RegimeViolation"), Error);
    CHECK_THROWS_WITH_AS(efrl_construct(joint, radius * 2),
                         doctest::Contains("RegimeViolation"), Error);
    CHECK_THROWS_AS(efrl_construct(joint, -0.1), Error);

    // independent pair: the admissible-budget interval collapses to nothing
    Eigen::VectorXd px(2), py(3);
    px << 0.4, 0.6;
    py << 0.2, 0.5, 0.3;
    JointDistribution indep(px * py.transpose());
    double tiny = leakage_radius_nats(indep);
    CHECK(tiny < 1e-6);
    CHECK_THROWS_WITH_AS(efrl_construct(indep, tiny),
                         doctest::Contains("RegimeViolation"), Error);
}

TEST_CASE("tiny budgets degrade to the pure hidden representation") {
    JointDistribution joint(example2());
    EfrlResult r = efrl_construct(joint, 1e-9);
    CHECK(r.embed_letters == 0);
    CHECK(r.mechanism.u_size == r.frl_letters);
    CHECK(r.diagnostics.i_ux < 1e-10);
}

TEST_CASE("re-check accepts and rejects hand-built kernels") {
    JointDistribution joint(example1());

    // U = Y verbatim: maximal utility, leakage = conditional distance per y
    Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(4, 4);
    Mechanism copy{MechanismKind::markov, 4, identity};
    VerificationReport tight = verify_mechanism(joint, copy, 2.0, 2);
    CHECK(tight.pass);
    CHECK(tight.markov_residual == 0.0);
    CHECK(tight.i_uy ==
          doctest::Approx(entropy(joint.p_y(), LogBase::bits)).epsilon(1e-9));
    CHECK(tight.i_ux ==
          doctest::Approx(mutual_information(joint)).epsilon(1e-9));
    for (int y = 0; y < 4; ++y) {
        double dist =
            l1_distance(joint.p_x_given_y().col(y), joint.p_x());
        CHECK(tight.per_u(y) == doctest::Approx(dist).epsilon(1e-12));
    }
    VerificationReport fail = verify_mechanism(joint, copy, 0.01, 2);
    CHECK_FALSE(fail.pass);

    // constant U: zero utility, zero leakage, passes at eps = 0
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(1, 4);
    Mechanism constant{MechanismKind::markov, 1, ones};
    VerificationReport quiet = verify_mechanism(joint, constant, 0.0, 2);
    CHECK(quiet.pass);
    CHECK(quiet.max_value < 1e-12);
    CHECK(quiet.i_uy < 1e-12);

    // criterion numbering: joint-scaled values are P_U-weighted conditionals
    VerificationReport c1 = verify_mechanism(joint, copy, 2.0, 1);
    for (int y = 0; y < 4; ++y) {
        CHECK(c1.per_u(y) ==
              doctest::Approx(tight.per_u(y) * joint.p_y()(y)).epsilon(1e-12));
    }
}

TEST_CASE("malformed kernels are rejected with typed errors") {
    JointDistribution joint(example1());
    Eigen::MatrixXd bad_cols = Eigen::MatrixXd::Ones(2, 3);
    CHECK_THROWS_WITH_AS(
        verify_mechanism(joint, {MechanismKind::markov, 2, bad_cols}, 1, 1),
        doctest::Contains("LengthMismatch"), Error);

    Eigen::MatrixXd not_stochastic = Eigen::MatrixXd::Constant(2, 4, 0.3);
    CHECK_THROWS_WITH_AS(
        verify_mechanism(joint, {MechanismKind::markov, 2, not_stochastic}, 1,
                         1),
        doctest::Contains("NotNormalized"), Error);

    Eigen::MatrixXd negative(2, 4);
    negative << 1.2, 0.5, 0.5, 0.5, -0.2, 0.5, 0.5, 0.5;
    CHECK_THROWS_WITH_AS(
        verify_mechanism(joint, {MechanismKind::markov, 2, negative}, 1, 1),
        doctest::Contains("NegativeEntry"), Error);

    Eigen::MatrixXd fine = Eigen::MatrixXd::Constant(2, 4, 0.5);
    CHECK_THROWS_AS(
        verify_mechanism(joint, {MechanismKind::markov, 2, fine}, 1, 3),
        Error);
    CHECK_THROWS_AS(
        verify_mechanism(joint, {MechanismKind::markov, 2, fine}, -1, 1),
        Error);
}

TEST_CASE("markov residual detects joint-access kernels that use x") {
    JointDistribution joint(example2());
    FrlDecomposition frl = frl_construct(joint);
    VerificationReport rep = verify_mechanism(joint, frl.mechanism, 0.0, 1);
    // the peel genuinely consults x, so it is far from any y-only channel
    CHECK(rep.markov_residual > 0.01);

    // a y-only kernel lifted to joint-access has zero residual
    Eigen::MatrixXd lifted(2, 8);
    Eigen::MatrixXd base_kernel(2, 4);
    base_kernel << 0.9, 0.2, 0.5, 0.7,
                   0.1, 0.8, 0.5, 0.3;
    for (int x = 0; x < 2; ++x) {
        lifted.middleCols(x * 4, 4) = base_kernel;
    }
    VerificationReport lifted_rep = verify_mechanism(
        joint, {MechanismKind::joint_access, 2, lifted}, 2.0, 1);
    CHECK(lifted_rep.markov_residual < 1e-12);
    VerificationReport markov_rep = verify_mechanism(
        joint, {MechanismKind::markov, 2, base_kernel}, 2.0, 1);
    CHECK(lifted_rep.i_uy == doctest::Approx(markov_rep.i_uy).epsilon(1e-12));
    CHECK(lifted_rep.i_ux == doctest::Approx(markov_rep.i_ux).epsilon(1e-12));
}

TEST_CASE("achievability chain under random instances") {
    Rng rng(600613);
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        JointDistribution joint = sample_joint(rng, 2, 3, 0.02);
        double radius = leakage_radius_nats(joint);
        if (radius < 1e-3) continue;
        for (double frac : {0.05, 0.1, 0.2}) {
            double eps = frac * radius;
            EfrlResult r = efrl_construct(joint, eps);
            CHECK(std::abs(r.diagnostics.i_ux_nats - eps * eps / 2.0) < 1e-11);
            CHECK(std::abs(r.diagnostics.h_y_given_xu) < 1e-9);
            VerificationReport rep =
                verify_mechanism(joint, r.mechanism, eps, 1);
            CHECK(rep.pass);
            // H(Y|X,U) = 0 and I(U;X) = eps^2/2 imply
            // I(U;Y) >= H(Y|X) - H(X|Y) + eps^2/2, i.e. the mechanism
            // certifies the closed-form achievability value
            LowerH1 lh = lower_h1(joint, eps);
            REQUIRE(lh.l1.valid);
            CHECK(rep.i_uy >= lh.l1.value - 1e-6);
            CHECK(rep.i_uy <= entropy(joint.p_y(), LogBase::bits) + 1e-9);
            ++checked;
        }
    }
    CHECK(checked >= 90);
}

TEST_CASE("construction is bitwise deterministic") {
    JointDistribution joint(example2());
    EfrlResult a = efrl_construct(joint, 0.1);
    EfrlResult b = efrl_construct(joint, 0.1);
    CHECK(a.mechanism.kernel == b.mechanism.kernel);
    CHECK(a.alpha == b.alpha);
    FrlDecomposition fa = frl_construct(joint);
    FrlDecomposition fb = frl_construct(joint);
    CHECK(fa.mechanism.kernel == fb.mechanism.kernel);
    CHECK(fa.weights == fb.weights);
}
