#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "leakbound/bounds.hpp"
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

}  // namespace

TEST_CASE("safe perturbation radius of the bundled examples") {
    Epsilon2Data e1 = epsilon2(JointDistribution(example1()));
    CHECK(e1.epsilon2 == doctest::Approx(0.034106).epsilon(1e-3));
    CHECK(e1.argmin_cols == std::vector<int>{1, 3});
    CHECK(e1.argmax_cols == std::vector<int>{1, 3});
    CHECK(e1.min_base_entry == doctest::Approx(0.050526).epsilon(1e-3));
    CHECK(e1.max_h_sigma == doctest::Approx(1.481420).epsilon(1e-4));

    Epsilon2Data e2 = epsilon2(JointDistribution(example2()));
    CHECK(e2.epsilon2 == doctest::Approx(0.199415).epsilon(1e-3));
    CHECK(e2.min_base_entry == doctest::Approx(15.0 / 47.0).epsilon(1e-9));
    CHECK(e2.argmin_cols == std::vector<int>{1, 2});
    CHECK(e2.max_h_sigma == doctest::Approx(1.600428).epsilon(1e-4));
}

TEST_CASE("regime thresholds") {
    Thresholds t1 = compute_thresholds(JointDistribution(example1()));
    REQUIRE(t1.geometry_ok);
    CHECK(t1.eps2_half == doctest::Approx(0.0171).epsilon(2e-2));
    CHECK(t1.eps2_over_2sqrt_x == doctest::Approx(0.0121).epsilon(2e-2));

    Thresholds t2 = compute_thresholds(JointDistribution(example2()));
    REQUIRE(t2.geometry_ok);
    CHECK(t2.eps2_half == doctest::Approx(0.0997).epsilon(2e-2));
    CHECK(t2.eps2_over_2sqrt_x == doctest::Approx(0.0705).epsilon(2e-2));

    JointDistribution j2(example2());
    CHECK(t2.radius_nats ==
          doctest::Approx(std::sqrt(2.0 * mutual_information(
                                              j2.with_log_base(LogBase::nats))))
              .epsilon(1e-12));
    CHECK(t2.radius_nats == doctest::Approx(0.8945).epsilon(2e-3));

    // rank-one instance: no geometry, but the radius still exists
    Eigen::VectorXd px(2), py(3);
    px << 0.4, 0.6;
    py << 0.2, 0.5, 0.3;
    Thresholds flat = compute_thresholds(JointDistribution(px * py.transpose()));
    CHECK_FALSE(flat.geometry_ok);
    CHECK(std::isnan(flat.eps2));
    CHECK(flat.radius_nats == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("approximation-error constants") {
    CHECK(error_bound(2, ErrorRegime::half_threshold) == 0.75);
    CHECK(error_bound(5, ErrorRegime::half_threshold) == 0.75);
    CHECK(error_bound(2, ErrorRegime::half_threshold_over_sqrt_x) ==
          doctest::Approx(0.274560).epsilon(1e-5));
    CHECK(error_bound(4, ErrorRegime::half_threshold_over_sqrt_x) ==
          doctest::Approx(1.0 / 18.0 + 1.0 / 16.0).epsilon(1e-12));
    CHECK_THROWS_AS(error_bound(0, ErrorRegime::half_threshold), Error);
}

TEST_CASE("closed-form bounds on the first example") {
    JointDistribution joint(example1());
    double h_y_x = conditional_entropy(joint, CondDirection::y_given_x);
    CHECK(h_y_x == doctest::Approx(1.075244).epsilon(1e-4));

    CHECK(upper_h2(joint, 0.0) == doctest::Approx(h_y_x).epsilon(1e-12));
    CHECK(upper_h2(joint, 0.1) ==
          doctest::Approx(h_y_x + 0.01 / 0.1).epsilon(1e-9));

    UpperG1 g1 = upper_g1(joint, 0.0);
    CHECK(g1.value == doctest::Approx(h_y_x).epsilon(1e-12));
    UpperG1 g1b = upper_g1(joint, 0.05);
    // slope |Y| |X| / min P_X = 4 * 2 / 0.1 = 80
    CHECK(g1b.value == doctest::Approx(h_y_x + 0.05 * 80.0).epsilon(1e-9));
    CHECK(g1b.capped == doctest::Approx(entropy(joint.p_y(), LogBase::bits))
                            .epsilon(1e-12));

    LowerH1 lh = lower_h1(joint, 0.0);
    double h_x_y = conditional_entropy(joint, CondDirection::x_given_y);
    CHECK(lh.l1.value == doctest::Approx(h_y_x - h_x_y).epsilon(1e-12));
    CHECK(lh.l1.value == doctest::Approx(0.884434).epsilon(3e-3));
    CHECK(lh.l1.valid);
    CHECK(lh.l2.valid);
    CHECK(lh.l2.value < lh.l1.value);

    // outside the perturbative regime both achievability entries go invalid
    double radius = leakage_radius_nats(joint);
    LowerH1 out = lower_h1(joint, radius + 0.01);
    CHECK_FALSE(out.l1.valid);
    CHECK_FALSE(out.l2.valid);
    CHECK(out.l1.reason.find("sqrt") != std::string::npos);

    CHECK_THROWS_AS(lower_h1(joint, -0.1), Error);
    CHECK_THROWS_AS(upper_g1(joint, -0.1), Error);
    CHECK_THROWS_AS(upper_h2(joint, -0.1), Error);
}

TEST_CASE("degenerate-secret entry goes invalid") {
    // |X| = 1: H(X) = 0, so the traded-budget achievability entry is undefined
    Eigen::MatrixXd row(1, 3);
    row << 0.2, 0.5, 0.3;
    JointDistribution joint(row);
    LowerH1 lh = lower_h1(joint, 0.0);
    CHECK_FALSE(lh.l2.valid);
    CHECK(lh.l2.reason == "H(X) = 0");
    CHECK(std::isnan(lh.l2.value));
}

TEST_CASE("design-based converse validity flips at the regime boundary") {
    JointDistribution joint(example2());
    Epsilon2Data e2 = epsilon2(joint);
    DesignedMechanism m = lower_bound_g(joint, 0.01, 2);

    UpperG2 inside = upper_g2(joint, 0.4 * e2.epsilon2, m.approx_utility,
                              e2.epsilon2);
    CHECK(inside.u1.valid);
    CHECK_FALSE(inside.u2.valid);  // 0.4 > 1/(2 sqrt 2) ~ 0.3536

    UpperG2 narrow = upper_g2(joint, 0.3 * e2.epsilon2, m.approx_utility,
                              e2.epsilon2);
    CHECK(narrow.u1.valid);
    CHECK(narrow.u2.valid);
    CHECK(narrow.u2.value < narrow.u1.value);
    CHECK(narrow.u1.value == doctest::Approx(m.approx_utility + 0.75)
                                 .epsilon(1e-12));

    UpperG2 outside = upper_g2(joint, 0.6 * e2.epsilon2, m.approx_utility,
                               e2.epsilon2);
    CHECK_FALSE(outside.u1.valid);
    CHECK_FALSE(outside.u2.valid);
    CHECK(outside.u1.reason.find("eps2/2") != std::string::npos);
}

TEST_CASE("full report on the bundled examples") {
    JointDistribution joint(example2());
    std::vector<double> grid = {0.0, 0.02, 0.05, 0.08, 0.12, 0.25};
    std::vector<BoundReport> rows = bound_report(joint, grid, 1);
    REQUIRE(rows.size() == grid.size());

    for (const auto& r : rows) {
        CHECK(r.u_g1.valid);
        CHECK(r.u_h2.valid);
        CHECK(r.l_g1.valid);
        CHECK(r.l_g2.valid);
        CHECK_FALSE(r.deterministic_x);
        // certified design lower bounds sit under every valid converse
        CHECK(r.l_g2.value <= r.u_h2.value + 1e-9);
        if (r.u_g2_2.valid) {
            CHECK(r.l_g2.value <= r.u_g2_2.value + 1e-9);
        }
        CHECK(r.l_g1.value <= r.u_g1.value + 1e-9);
    }
    // validity of the narrow-regime converse ends before the coarse one
    CHECK(rows[2].u_g2_2.valid);       // 0.05 < 0.0705
    CHECK(rows[3].u_g2_1.valid);       // 0.08 < 0.0997
    CHECK_FALSE(rows[3].u_g2_2.valid);  // 0.08 is past 0.0705
    CHECK_FALSE(rows[4].u_g2_1.valid);  // 0.12 is past 0.0997
    CHECK_FALSE(rows[5].u_g2_1.valid);

    // threading does not change a single byte of the rendering
    std::string serial = bound_report_csv(bound_report(joint, grid, 1));
    std::string parallel = bound_report_csv(bound_report(joint, grid, 4));
    CHECK(serial == parallel);
}

TEST_CASE("report rows survive missing geometry") {
    Eigen::VectorXd px(2), py(3);
    px << 0.4, 0.6;
    py << 0.2, 0.5, 0.3;
    JointDistribution indep(px * py.transpose());
    std::vector<BoundReport> rows = bound_report(indep, {0.0, 0.05}, 1);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.u_g1.valid);
        CHECK(r.u_h2.valid);
        CHECK_FALSE(r.l_g1.valid);
        CHECK_FALSE(r.l_g2.valid);
        CHECK_FALSE(r.u_g2_1.valid);
        CHECK(r.l_g1.reason.find("RankDeficient") != std::string::npos);
        CHECK(std::isnan(r.l_g1.value));
    }
    std::string csv = bound_report_csv(rows);
    CHECK(csv.find("nan") != std::string::npos);
}

TEST_CASE("csv layout is fixed") {
    JointDistribution joint(example1());
    std::vector<BoundReport> rows = bound_report(joint, {0.005}, 1);
    std::string csv = bound_report_csv(rows);
    std::istringstream in(csv);
    std::string header, data;
    std::getline(in, header);
    std::getline(in, data);
    CHECK(header ==
          "eps,l_h1_1,l_h1_1_valid,l_h1_2,l_h1_2_valid,l_g1,l_g1_valid,"
          "l_g2,l_g2_valid,u_g1,u_g1_valid,u_g1_cap,u_h2,u_h2_valid,"
          "u_g2_1,u_g2_1_valid,u_g2_2,u_g2_2_valid,deterministic_x");
    int commas = 0;
    for (char c : data) {
        if (c == ',') ++commas;
    }
    CHECK(commas == 18);
    CHECK(data.substr(0, 6) == "0.005,");
}

TEST_CASE("deterministic-secret instances pair achievability with the converse") {
    Eigen::VectorXd py(3);
    py << 0.45, 0.3, 0.25;
    JointDistribution joint = function_joint(py, {0, 0, 1}, 2);
    std::vector<BoundReport> rows = bound_report(joint, {0.0, 0.01}, 1);
    for (const auto& r : rows) {
        CHECK(r.deterministic_x);
        if (r.l_h1_1.valid) {
            CHECK(r.l_h1_1.value <= r.u_g1.value + 1e-9);
        }
    }
}
