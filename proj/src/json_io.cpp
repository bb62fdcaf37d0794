#include "leakbound/json_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace leakbound {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::BadInput, "cannot open " + path);
    }
    try {
        return ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw Error(ErrorCode::BadInput,
                    "failed to parse " + path + ": " + e.what());
    }
}

Eigen::MatrixXd matrix_from_json(const ordered_json& rows,
                                 const std::string& what) {
    if (!rows.is_array() || rows.empty()) {
        throw Error(ErrorCode::BadInput, what + " must be a non-empty array");
    }
    const size_t n_rows = rows.size();
    size_t n_cols = 0;
    Eigen::MatrixXd m;
    for (size_t i = 0; i < n_rows; ++i) {
        const auto& row = rows[i];
        if (!row.is_array() || row.empty()) {
            throw Error(ErrorCode::BadInput,
                        what + " row " + std::to_string(i) +
                            " must be a non-empty array");
        }
        if (i == 0) {
            n_cols = row.size();
            m.resize(static_cast<Eigen::Index>(n_rows),
                     static_cast<Eigen::Index>(n_cols));
        } else if (row.size() != n_cols) {
            throw Error(ErrorCode::BadInput,
                        what + " rows have inconsistent lengths");
        }
        for (size_t j = 0; j < n_cols; ++j) {
            if (!row[j].is_number()) {
                throw Error(ErrorCode::BadInput,
                            what + " entry (" + std::to_string(i) + "," +
                                std::to_string(j) + ") is not a number");
            }
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                row[j].get<double>();
        }
    }
    return m;
}

std::vector<std::string> labels_from_json(const ordered_json& doc,
                                          const std::string& key, int expected,
                                          char prefix) {
    std::vector<std::string> labels;
    if (doc.contains(key)) {
        const auto& arr = doc[key];
        if (!arr.is_array() || static_cast<int>(arr.size()) != expected) {
            throw Error(ErrorCode::BadInput,
                        key + " must list exactly " + std::to_string(expected) +
                            " strings");
        }
        for (const auto& v : arr) {
            if (!v.is_string()) {
                throw Error(ErrorCode::BadInput, key + " entries must be strings");
            }
            labels.push_back(v.get<std::string>());
        }
        return labels;
    }
    for (int i = 0; i < expected; ++i) {
        labels.push_back(std::string(1, prefix) + std::to_string(i));
    }
    return labels;
}

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

NamedJoint read_joint_json(const std::string& path, LogBase base) {
    ordered_json doc = parse_file(path);
    if (!doc.is_object() || !doc.contains("p_xy")) {
        throw Error(ErrorCode::BadInput,
                    path + " must be an object with a p_xy matrix");
    }
    Eigen::MatrixXd p_xy = matrix_from_json(doc["p_xy"], "p_xy");
    JointDistribution joint(p_xy, base);
    return NamedJoint{
        joint,
        labels_from_json(doc, "labels_x", joint.x_size(), 'x'),
        labels_from_json(doc, "labels_y", joint.y_size(), 'y')};
}

std::string joint_to_json(const JointDistribution& joint,
                          const std::vector<std::string>& labels_x,
                          const std::vector<std::string>& labels_y) {
    ordered_json doc;
    doc["p_xy"] = matrix_to_json(joint.matrix());
    doc["labels_x"] = labels_x;
    doc["labels_y"] = labels_y;
    return doc.dump(2) + "\n";
}

Mechanism read_mechanism_json(const std::string& path) {
    ordered_json doc = parse_file(path);
    if (!doc.is_object() || !doc.contains("kind") || !doc.contains("u_size") ||
        !doc.contains("kernel")) {
        throw Error(ErrorCode::BadInput,
                    path + " must provide kind, u_size, and kernel");
    }
    Mechanism mech;
    const std::string kind = doc["kind"].is_string()
                                 ? doc["kind"].get<std::string>()
                                 : std::string();
    if (kind == "markov") {
        mech.kind = MechanismKind::markov;
    } else if (kind == "joint_access") {
        mech.kind = MechanismKind::joint_access;
    } else {
        throw Error(ErrorCode::BadInput,
                    "kind must be markov or joint_access");
    }
    if (!doc["u_size"].is_number_integer()) {
        throw Error(ErrorCode::BadInput, "u_size must be an integer");
    }
    mech.u_size = doc["u_size"].get<int>();
    mech.kernel = matrix_from_json(doc["kernel"], "kernel");
    if (mech.u_size != mech.kernel.rows()) {
        throw Error(ErrorCode::BadInput,
                    "u_size does not match the kernel row count");
    }
    return mech;
}

std::string mechanism_to_json(const Mechanism& mech) {
    ordered_json doc;
    doc["kind"] =
        mech.kind == MechanismKind::markov ? "markov" : "joint_access";
    doc["u_size"] = mech.u_size;
    doc["kernel"] = matrix_to_json(mech.kernel);
    return doc.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::BadInput, "cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::BadInput, "cannot write " + path);
    }
    out << content;
    if (!out) {
        throw Error(ErrorCode::BadInput, "short write to " + path);
    }
}

}  // namespace leakbound
