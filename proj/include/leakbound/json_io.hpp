#pragma once

#include <string>
#include <vector>

#include "leakbound/core.hpp"

namespace leakbound {

// Joint distribution plus display labels. Labels default to x0..., y0...
// when the file does not provide them.
struct NamedJoint {
    JointDistribution joint;
    std::vector<std::string> labels_x;
    std::vector<std::string> labels_y;
};

// Reads {"p_xy": [[...], ...], "labels_x": [...], "labels_y": [...]}.
// Parse problems, IO failures, and shape mismatches throw BadInput; the
// probability content is validated by the JointDistribution constructor.
NamedJoint read_joint_json(const std::string& path, LogBase base);

std::string joint_to_json(const JointDistribution& joint,
                          const std::vector<std::string>& labels_x,
                          const std::vector<std::string>& labels_y);

// {"kind": "markov" | "joint_access", "u_size": n, "kernel": [[...], ...]}
Mechanism read_mechanism_json(const std::string& path);
std::string mechanism_to_json(const Mechanism& mech);

// Whole-file helpers; failures throw BadInput.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace leakbound
