#include "leakbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace leakbound {

double leakage_radius_nats(const JointDistribution& joint) {
    double i_nats = mutual_information(joint.with_log_base(LogBase::nats));
    return std::sqrt(2.0 * std::max(i_nats, 0.0));
}

LowerH1 lower_h1(const JointDistribution& joint, double eps) {
    if (eps < 0.0) {
        throw Error(ErrorCode::BadInput, "eps must be nonnegative");
    }
    LogBase base = joint.log_base();
    double h_y_x = conditional_entropy(joint, CondDirection::y_given_x);
    double h_x_y = conditional_entropy(joint, CondDirection::x_given_y);
    double h_x = entropy(joint.p_x(), base);
    double i_xy = mutual_information(joint);
    double radius = leakage_radius_nats(joint);
    bool in_regime = eps < radius;
    std::string regime_reason =
        in_regime ? "" : "eps >= sqrt(2 I(X;Y)) nats = " + format_double(radius);

    LowerH1 out;
    out.l1.value = h_y_x - h_x_y + 0.5 * eps * eps;
    out.l1.valid = in_regime;
    out.l1.reason = regime_reason;

    if (h_x <= 0.0) {
        out.l2.value = std::numeric_limits<double>::quiet_NaN();
        out.l2.valid = false;
        out.l2.reason = "H(X) = 0";
    } else {
        double alpha = eps * eps / (2.0 * h_x);
        out.l2.value = h_y_x - alpha * h_x_y + 0.5 * eps * eps -
                       (1.0 - alpha) * (log_in_base(i_xy + 1.0, base) + 4.0);
        out.l2.valid = in_regime;
        out.l2.reason = regime_reason;
    }
    return out;
}

UpperG1 upper_g1(const JointDistribution& joint, double eps) {
    if (eps < 0.0) {
        throw Error(ErrorCode::BadInput, "eps must be nonnegative");
    }
    double h_y_x = conditional_entropy(joint, CondDirection::y_given_x);
    UpperG1 out;
    out.value = eps * joint.y_size() * joint.x_size() / joint.p_x().minCoeff() +
                h_y_x;
    out.capped = std::min(out.value, entropy(joint.p_y(), joint.log_base()));
    return out;
}

double upper_h2(const JointDistribution& joint, double eps) {
    if (eps < 0.0) {
        throw Error(ErrorCode::BadInput, "eps must be nonnegative");
    }
    return eps * eps / joint.p_x().minCoeff() +
           conditional_entropy(joint, CondDirection::y_given_x);
}

double error_bound(int x_size, ErrorRegime regime) {
    if (x_size < 1) {
        throw Error(ErrorCode::BadInput, "alphabet must be nonempty");
    }
    if (regime == ErrorRegime::half_threshold) {
        return 0.75;
    }
    double root = 2.0 * std::sqrt(static_cast<double>(x_size)) - 1.0;
    return 1.0 / (2.0 * root * root) + 1.0 / (4.0 * x_size);
}

Epsilon2Data epsilon2(const std::vector<OmegaSet>& omega1) {
    if (omega1.empty()) {
        throw Error(ErrorCode::EmptyOmega1, "no support sets");
    }
    Epsilon2Data data;
    data.min_base_entry = std::numeric_limits<double>::infinity();
    data.max_h_sigma = 0.0;
    for (const auto& om : omega1) {
        for (int i = 0; i < om.base_point.size(); ++i) {
            if (om.base_point(i) < data.min_base_entry) {
                data.min_base_entry = om.base_point(i);
                data.argmin_cols = om.cols;
                data.argmin_index = i;
            }
        }
        if (om.h_sigma_max > data.max_h_sigma) {
            data.max_h_sigma = om.h_sigma_max;
            data.argmax_cols = om.cols;
        }
    }
    data.epsilon2 = data.min_base_entry / data.max_h_sigma;
    return data;
}

Epsilon2Data epsilon2(const JointDistribution& joint) {
    return epsilon2(enumerate_omega1(compute_m(joint)));
}

UpperG2 upper_g2(const JointDistribution& joint, double eps,
                 double approx_utility, double eps2) {
    UpperG2 out;
    out.u1.value = approx_utility + error_bound(joint.x_size(),
                                                ErrorRegime::half_threshold);
    out.u1.valid = eps < 0.5 * eps2;
    if (!out.u1.valid) {
        out.u1.reason = "eps >= eps2/2 = " + format_double(0.5 * eps2);
    }
    double narrow = 0.5 * eps2 / std::sqrt(static_cast<double>(joint.x_size()));
    out.u2.value =
        approx_utility +
        error_bound(joint.x_size(), ErrorRegime::half_threshold_over_sqrt_x);
    out.u2.valid = eps < narrow;
    if (!out.u2.valid) {
        out.u2.reason = "eps >= eps2/(2 sqrt(|X|)) = " + format_double(narrow);
    }
    return out;
}

namespace {

void enforce_orderings(const BoundReport& r) {
    auto fail = [&](const std::string& what) {
        throw Error(ErrorCode::ReconstructionMismatch,
                    "bound ordering violated at eps " + format_double(r.eps) +
                        ": " + what);
    };
    if (r.l_g1.valid && r.u_g1.valid &&
        r.l_g1.value > r.u_g1.value + kInequalityTol) {
        fail("l_g1 > u_g1");
    }
    if (r.l_g2.valid) {
        if (r.u_h2.valid && r.l_g2.value > r.u_h2.value + kInequalityTol) {
            fail("l_g2 > u_h2");
        }
        if (r.u_g2_1.valid && r.l_g2.value > r.u_g2_1.value + kInequalityTol) {
            fail("l_g2 > u_g2_1");
        }
        if (r.u_g2_2.valid && r.l_g2.value > r.u_g2_2.value + kInequalityTol) {
            fail("l_g2 > u_g2_2");
        }
    }
    if (r.deterministic_x && r.u_g1.valid) {
        if (r.l_h1_1.valid && r.l_h1_1.value > r.u_g1.value + kInequalityTol) {
            fail("l_h1_1 > u_g1 with deterministic X");
        }
        if (r.l_h1_2.valid && r.l_h1_2.value > r.u_g1.value + kInequalityTol) {
            fail("l_h1_2 > u_g1 with deterministic X");
        }
    }
}

}  // namespace

std::vector<BoundReport> bound_report(const JointDistribution& joint,
                                      const std::vector<double>& eps_grid,
                                      int threads) {
    bool geometry_ok = true;
    std::string geometry_reason;
    std::vector<OmegaSet> omega1;
    double eps2 = std::numeric_limits<double>::quiet_NaN();
    try {
        omega1 = enumerate_omega1(compute_m(joint));
        eps2 = epsilon2(omega1).epsilon2;
    } catch (const Error& e) {
        geometry_ok = false;
        geometry_reason = e.what();
    }
    bool det_x = conditional_entropy(joint, CondDirection::x_given_y) < 1e-9;

    std::vector<BoundReport> rows(eps_grid.size());
    auto worker = [&](size_t begin, size_t step) {
        for (size_t i = begin; i < eps_grid.size(); i += step) {
            double eps = eps_grid[i];
            BoundReport r;
            r.eps = eps;
            r.deterministic_x = det_x;

            LowerH1 lh = lower_h1(joint, eps);
            r.l_h1_1 = lh.l1;
            r.l_h1_2 = lh.l2;
            UpperG1 ug1 = upper_g1(joint, eps);
            r.u_g1 = BoundEntry{ug1.value, true, ""};
            r.u_g1_cap = ug1.capped;
            r.u_h2 = BoundEntry{upper_h2(joint, eps), true, ""};

            if (!geometry_ok) {
                BoundEntry na{std::numeric_limits<double>::quiet_NaN(), false,
                              geometry_reason};
                r.l_g1 = na;
                r.l_g2 = na;
                r.u_g2_1 = na;
                r.u_g2_2 = na;
            } else {
                try {
                    DesignProblem d1 = build_lp(joint, omega1, eps, 1);
                    LPSolution s1 = solve_lp(d1.lp);
                    if (s1.status != LPStatus::optimal) {
                        throw Error(ErrorCode::Infeasible,
                                    "criterion-1 design not optimal");
                    }
                    DesignedMechanism m1 = recover_mechanism(d1, s1, joint);
                    r.l_g1 = BoundEntry{m1.achieved_utility, true, ""};
                } catch (const Error& e) {
                    r.l_g1 = BoundEntry{std::numeric_limits<double>::quiet_NaN(),
                                        false, e.what()};
                }
                try {
                    DesignProblem d2 = build_lp(joint, omega1, eps, 2);
                    LPSolution s2 = solve_lp(d2.lp);
                    if (s2.status != LPStatus::optimal) {
                        throw Error(ErrorCode::Infeasible,
                                    "criterion-2 design not optimal");
                    }
                    DesignedMechanism m2 = recover_mechanism(d2, s2, joint);
                    r.l_g2 = BoundEntry{m2.achieved_utility, true, ""};
                    UpperG2 ug2 = upper_g2(joint, eps, m2.approx_utility, eps2);
                    r.u_g2_1 = ug2.u1;
                    r.u_g2_2 = ug2.u2;
                } catch (const Error& e) {
                    BoundEntry na{std::numeric_limits<double>::quiet_NaN(), false,
                                  e.what()};
                    r.l_g2 = na;
                    r.u_g2_1 = na;
                    r.u_g2_2 = na;
                }
            }
            enforce_orderings(r);
            rows[i] = r;
        }
    };

    int n_threads = threads > 0
                        ? threads
                        : static_cast<int>(std::min<unsigned>(
                              std::max(1u, std::thread::hardware_concurrency()), 8));
    n_threads = std::min<int>(n_threads, static_cast<int>(eps_grid.size()));
    if (n_threads <= 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker, static_cast<size_t>(t),
                              static_cast<size_t>(n_threads));
        }
        for (auto& th : pool) th.join();
    }
    return rows;
}

std::string bound_report_csv(const std::vector<BoundReport>& rows) {
    std::ostringstream out;
    out << "eps,l_h1_1,l_h1_1_valid,l_h1_2,l_h1_2_valid,l_g1,l_g1_valid,"
           "l_g2,l_g2_valid,u_g1,u_g1_valid,u_g1_cap,u_h2,u_h2_valid,"
           "u_g2_1,u_g2_1_valid,u_g2_2,u_g2_2_valid,deterministic_x\n";
    auto cell = [&](const BoundEntry& e) {
        out << format_double(e.value) << "," << (e.valid ? 1 : 0) << ",";
    };
    for (const auto& r : rows) {
        out << format_double(r.eps) << ",";
        cell(r.l_h1_1);
        cell(r.l_h1_2);
        cell(r.l_g1);
        cell(r.l_g2);
        cell(r.u_g1);
        out << format_double(r.u_g1_cap) << ",";
        cell(r.u_h2);
        cell(r.u_g2_1);
        cell(r.u_g2_2);
        out << (r.deterministic_x ? 1 : 0) << "\n";
    }
    return out.str();
}

Thresholds compute_thresholds(const JointDistribution& joint) {
    Thresholds t;
    t.radius_nats = leakage_radius_nats(joint);
    try {
        Epsilon2Data data = epsilon2(joint);
        t.geometry_ok = true;
        t.eps2 = data.epsilon2;
        t.eps2_half = 0.5 * data.epsilon2;
        t.eps2_over_2sqrt_x =
            0.5 * data.epsilon2 / std::sqrt(static_cast<double>(joint.x_size()));
    } catch (const Error&) {
        t.geometry_ok = false;
        t.eps2 = std::numeric_limits<double>::quiet_NaN();
        t.eps2_half = t.eps2;
        t.eps2_over_2sqrt_x = t.eps2;
    }
    return t;
}

}  // namespace leakbound
