#pragma once

#include <string>
#include <vector>

#include "leakbound/lp.hpp"

namespace leakbound {

// A bound value together with its applicability. Values are computed
// unconditionally where finite so sweeps can plot them; `valid` states
// whether the inequality is actually in force at this eps.
struct BoundEntry {
    double value;
    bool valid;
    std::string reason;  // empty when valid
};

// Radius of the perturbative regime: sqrt(2 I(X;Y)) measured in nats
// regardless of the display base.
double leakage_radius_nats(const JointDistribution& joint);

// Achievability bounds for the informed-agent problem under the per-letter
// distance criteria. l1 uses the full leftover-entropy budget; l2 trades a
// fraction of it against a covering penalty and needs H(X) > 0.
struct LowerH1 {
    BoundEntry l1;
    BoundEntry l2;
};
LowerH1 lower_h1(const JointDistribution& joint, double eps);

// Converse bound for the observation-restricted problem under the
// joint-weighted criterion, valid at every eps >= 0, plus its cap at H(Y).
struct UpperG1 {
    double value;
    double capped;
};
UpperG1 upper_g1(const JointDistribution& joint, double eps);

// Converse bound under the conditional criterion for the informed agent,
// valid at every eps >= 0; it also dominates the observation-restricted
// problem.
double upper_h2(const JointDistribution& joint, double eps);

enum class ErrorRegime { half_threshold, half_threshold_over_sqrt_x };

// Additive gap between the linearized design optimum and the true optimum:
// 3/4 inside the coarse regime, and the sharper constant
// 1/(2 (2 sqrt(|X|) - 1)^2) + 1/(4 |X|) inside the narrow regime.
double error_bound(int x_size, ErrorRegime regime);

// Largest eps for which the per-letter polytopes are guaranteed to stay
// inside the simplex across all support sets.
struct Epsilon2Data {
    double epsilon2;
    double min_base_entry;
    std::vector<int> argmin_cols;
    int argmin_index;              // position within the argmin support set
    double max_h_sigma;
    std::vector<int> argmax_cols;
};
Epsilon2Data epsilon2(const std::vector<OmegaSet>& omega1);
Epsilon2Data epsilon2(const JointDistribution& joint);

// Converse bounds for the observation-restricted conditional-criterion
// problem: linearized optimum plus the regime-dependent error constant.
struct UpperG2 {
    BoundEntry u1;  // valid while eps < epsilon2 / 2
    BoundEntry u2;  // valid while eps < epsilon2 / (2 sqrt(|X|))
};
UpperG2 upper_g2(const JointDistribution& joint, double eps,
                 double approx_utility, double eps2);

// Everything at one eps. Closed-form entries never require full row rank;
// the design-dependent entries are invalid (with a reason) when the
// geometry is unavailable.
struct BoundReport {
    double eps;
    BoundEntry l_h1_1, l_h1_2;
    BoundEntry l_g1, l_g2;
    BoundEntry u_g1;
    double u_g1_cap;
    BoundEntry u_h2;
    BoundEntry u_g2_1, u_g2_2;
    bool deterministic_x;
};

std::vector<BoundReport> bound_report(const JointDistribution& joint,
                                      const std::vector<double>& eps_grid,
                                      int threads = 0);

// CSV rendering with a fixed, documented column order.
std::string bound_report_csv(const std::vector<BoundReport>& rows);

// Regime boundaries used by sweeps and plots.
struct Thresholds {
    bool geometry_ok;
    double eps2;
    double eps2_half;
    double eps2_over_2sqrt_x;
    double radius_nats;
};
Thresholds compute_thresholds(const JointDistribution& joint);

}  // namespace leakbound
