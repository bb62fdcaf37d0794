#pragma once

#include <Eigen/Dense>
#include <vector>

#include "leakbound/common.hpp"

namespace leakbound {

// Probability vector, validated on construction.
struct DistributionVector {
    Eigen::VectorXd probs;

    static DistributionVector validated(const Eigen::VectorXd& p);

    int size() const { return static_cast<int>(probs.size()); }
    double operator()(int i) const { return probs(i); }
    double min_entry() const { return probs.minCoeff(); }
};

enum class CondDirection { y_given_x, x_given_y };

// Joint distribution of (X, Y) stored as an |X| x |Y| matrix with every row
// and column marginal strictly positive.
class JointDistribution {
public:
    explicit JointDistribution(const Eigen::MatrixXd& p_xy,
                               LogBase base = LogBase::bits);

    const Eigen::MatrixXd& matrix() const { return p_xy_; }
    int x_size() const { return static_cast<int>(p_xy_.rows()); }
    int y_size() const { return static_cast<int>(p_xy_.cols()); }
    LogBase log_base() const { return base_; }

    const Eigen::VectorXd& p_x() const { return p_x_; }
    const Eigen::VectorXd& p_y() const { return p_y_; }

    // |X| x |Y|, column j is the distribution of X given Y = j.
    const Eigen::MatrixXd& p_x_given_y() const { return p_x_given_y_; }
    // |Y| x |X|, column i is the distribution of Y given X = i.
    Eigen::MatrixXd p_y_given_x() const;

    // Whether p_x_given_y has full row rank (sigma_min / sigma_max > 1e-12).
    bool full_row_rank() const { return full_row_rank_; }

    JointDistribution with_log_base(LogBase base) const;

private:
    Eigen::MatrixXd p_xy_;
    Eigen::MatrixXd p_x_given_y_;
    Eigen::VectorXd p_x_;
    Eigen::VectorXd p_y_;
    LogBase base_;
    bool full_row_rank_;
};

// Shannon entropy with the 0 log 0 = 0 convention. The raw overload does not
// validate; callers pass slices of already validated objects.
double entropy(const Eigen::VectorXd& p, LogBase base);
double entropy_of_matrix(const Eigen::MatrixXd& p, LogBase base);

double conditional_entropy(const JointDistribution& joint, CondDirection dir);
double mutual_information(const JointDistribution& joint);
// Mutual information between the row index and column index of an arbitrary
// nonnegative matrix summing to one.
double mutual_information_of_matrix(const Eigen::MatrixXd& p, LogBase base);

double l1_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double tv_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                     LogBase base);

// Per-letter leakage of a joint |X| x |U| matrix. "conditional" is
// ||P_{X|U=u} - P_X||_1, "joint_scaled" is ||P_{X,U}(.,u) - P_X P_U(u)||_1;
// the two differ exactly by the factor P_U(u).
struct LeakageReport {
    Eigen::VectorXd p_u;
    Eigen::VectorXd conditional;
    Eigen::VectorXd joint_scaled;
    double max_conditional;
    double max_joint_scaled;
    double avg_conditional;    // sum_u P_U(u) * conditional(u)
    double avg_joint_scaled;   // sum_u joint_scaled(u)
    std::vector<int> zero_letters;
};

// Throws ZeroWeightU on a zero-mass letter unless allow_zero_letters is set,
// in which case such letters contribute zero and are listed in zero_letters.
LeakageReport leakage_measures(const Eigen::MatrixXd& p_xu,
                               bool allow_zero_letters = false);

enum class MechanismKind { markov, joint_access };

// Disclosure channel producing U. A markov kernel is |U| x |Y| (column y is
// the distribution of U given Y = y); a joint_access kernel is
// |U| x (|X| * |Y|) with column x * |Y| + y.
struct Mechanism {
    MechanismKind kind;
    int u_size;
    Eigen::MatrixXd kernel;
};

}  // namespace leakbound
