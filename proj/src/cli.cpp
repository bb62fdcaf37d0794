#include "leakbound/cli.hpp"

#include <cmath>
#include <vector>

#include "json.hpp"
#include "leakbound/bounds.hpp"
#include "leakbound/json_io.hpp"
#include "leakbound/lp.hpp"
#include "leakbound/mechanisms.hpp"
#include "leakbound/oracle.hpp"

namespace leakbound {

namespace {

using ordered_json = nlohmann::ordered_json;

LogBase parse_base(const std::string& s) {
    if (s == "bits") return LogBase::bits;
    if (s == "nats") return LogBase::nats;
    throw Error(ErrorCode::BadInput, "base must be bits or nats");
}

// 0 means "both"; commands that need a single criterion reject 0 themselves.
int parse_criterion(const std::string& s) {
    if (s == "1") return 1;
    if (s == "2") return 2;
    if (s == "both") return 0;
    throw Error(ErrorCode::BadInput, "criterion must be 1, 2, or both");
}

double require_eps(const RunConfig& config) {
    if (std::isnan(config.eps)) {
        throw Error(ErrorCode::BadInput,
                    "--eps is required for this command");
    }
    if (config.eps < 0.0 || !std::isfinite(config.eps)) {
        throw Error(ErrorCode::BadInput, "eps must be finite and >= 0");
    }
    return config.eps;
}

std::vector<double> eps_grid(const RunConfig& config,
                             const JointDistribution& joint) {
    if (!std::isnan(config.eps)) {
        if (config.eps < 0.0 || !std::isfinite(config.eps)) {
            throw Error(ErrorCode::BadInput, "eps must be finite and >= 0");
        }
        return {config.eps};
    }
    double start = config.eps_start;
    double stop = config.eps_stop;
    if (std::isnan(stop)) {
        Thresholds t = compute_thresholds(joint);
        stop = t.geometry_ok ? 1.2 * t.eps2 : 0.05;
    }
    if (start < 0.0 || stop < start || !std::isfinite(stop)) {
        throw Error(ErrorCode::BadInput, "invalid eps range");
    }
    int count = config.eps_count;
    if (count < 1) {
        throw Error(ErrorCode::BadInput, "eps count must be at least 1");
    }
    std::vector<double> grid;
    grid.reserve(count);
    if (count == 1) {
        grid.push_back(start);
        return grid;
    }
    for (int i = 0; i < count; ++i) {
        grid.push_back(start + (stop - start) * i / (count - 1));
    }
    return grid;
}

void emit(const RunConfig& config, std::ostream& out_stream,
          const std::string& content) {
    if (config.out.empty()) {
        out_stream << content;
    } else {
        write_text_file(config.out, content);
    }
}

ordered_json vec_to_json(const Eigen::VectorXd& v) {
    ordered_json arr = ordered_json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

ordered_json matrix_rows_json(const Eigen::MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < m.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

ordered_json entry_to_json(const BoundEntry& e) {
    ordered_json j;
    j["value"] = e.value;  // NaN serializes as null
    j["valid"] = e.valid;
    j["reason"] = e.reason;
    return j;
}

ordered_json thresholds_to_json(const Thresholds& t) {
    ordered_json j;
    j["geometry_ok"] = t.geometry_ok;
    j["eps2"] = t.eps2;
    j["eps2_half"] = t.eps2_half;
    j["eps2_over_2sqrt_x"] = t.eps2_over_2sqrt_x;
    j["radius_nats"] = t.radius_nats;
    return j;
}

ordered_json mechanism_json_object(const Mechanism& mech) {
    ordered_json j;
    j["kind"] = mech.kind == MechanismKind::markov ? "markov" : "joint_access";
    j["u_size"] = mech.u_size;
    j["kernel"] = matrix_rows_json(mech.kernel);
    return j;
}

ordered_json verification_json(const VerificationReport& rep) {
    ordered_json j;
    j["criterion"] = rep.criterion;
    j["eps"] = rep.eps;
    j["per_u"] = vec_to_json(rep.per_u);
    j["max_value"] = rep.max_value;
    j["zero_letters"] = rep.zero_letters;
    j["i_uy"] = rep.i_uy;
    j["i_ux"] = rep.i_ux;
    j["h_y_given_xu"] = rep.h_y_given_xu;
    j["markov_residual"] = rep.markov_residual;
    j["pass"] = rep.pass;
    return j;
}

void reject_dumps(const RunConfig& config) {
    if (!config.dump_lp.empty() || !config.dump_omega.empty()) {
        throw Error(ErrorCode::BadInput,
                    "--dump-lp and --dump-omega apply only to "
                    "--command mechanism --method lp");
    }
}

int cmd_validate(const RunConfig& config, std::ostream& out_stream,
                 const NamedJoint& named) {
    reject_dumps(config);
    const JointDistribution& joint = named.joint;
    ordered_json j;
    j["x_size"] = joint.x_size();
    j["y_size"] = joint.y_size();
    j["base"] = config.base;
    j["labels_x"] = named.labels_x;
    j["labels_y"] = named.labels_y;
    j["p_x"] = vec_to_json(joint.p_x());
    j["p_y"] = vec_to_json(joint.p_y());
    j["full_row_rank"] = joint.full_row_rank();
    emit(config, out_stream, j.dump(2) + "\n");
    return 0;
}

int cmd_measures(const RunConfig& config, std::ostream& out_stream,
                 const NamedJoint& named) {
    reject_dumps(config);
    const JointDistribution& joint = named.joint;
    ordered_json j;
    j["base"] = config.base;
    j["h_x"] = entropy(joint.p_x(), joint.log_base());
    j["h_y"] = entropy(joint.p_y(), joint.log_base());
    j["h_x_given_y"] = conditional_entropy(joint, CondDirection::x_given_y);
    j["h_y_given_x"] = conditional_entropy(joint, CondDirection::y_given_x);
    j["i_xy"] = mutual_information(joint);
    j["deterministic_x"] =
        conditional_entropy(joint, CondDirection::x_given_y) < 1e-9;
    j["thresholds"] = thresholds_to_json(compute_thresholds(joint));
    emit(config, out_stream, j.dump(2) + "\n");
    return 0;
}

ordered_json report_row_json(const BoundReport& r) {
    ordered_json j;
    j["eps"] = r.eps;
    j["l_h1_1"] = entry_to_json(r.l_h1_1);
    j["l_h1_2"] = entry_to_json(r.l_h1_2);
    j["l_g1"] = entry_to_json(r.l_g1);
    j["l_g2"] = entry_to_json(r.l_g2);
    j["u_g1"] = entry_to_json(r.u_g1);
    j["u_g1_cap"] = r.u_g1_cap;
    j["u_h2"] = entry_to_json(r.u_h2);
    j["u_g2_1"] = entry_to_json(r.u_g2_1);
    j["u_g2_2"] = entry_to_json(r.u_g2_2);
    j["deterministic_x"] = r.deterministic_x;
    return j;
}

int cmd_bounds(const RunConfig& config, std::ostream& out_stream,
               const NamedJoint& named) {
    reject_dumps(config);
    double eps = require_eps(config);
    std::vector<BoundReport> rows =
        bound_report(named.joint, {eps}, config.threads);
    emit(config, out_stream, report_row_json(rows.front()).dump(2) + "\n");
    return 0;
}

int cmd_sweep(const RunConfig& config, std::ostream& out_stream,
              const NamedJoint& named) {
    reject_dumps(config);
    std::vector<double> grid = eps_grid(config, named.joint);
    std::vector<BoundReport> rows =
        bound_report(named.joint, grid, config.threads);
    emit(config, out_stream, bound_report_csv(rows));
    if (!config.out.empty()) {
        Thresholds t = compute_thresholds(named.joint);
        ordered_json side = thresholds_to_json(t);
        side["eps_grid_start"] = grid.front();
        side["eps_grid_stop"] = grid.back();
        side["eps_grid_count"] = static_cast<int>(grid.size());
        write_text_file(config.out + ".thresholds.json", side.dump(2) + "\n");
    }
    return 0;
}

ordered_json omega_to_json(const std::vector<OmegaSet>& omega1) {
    ordered_json sets = ordered_json::array();
    for (const auto& om : omega1) {
        ordered_json s;
        s["cols"] = om.cols;
        s["base_point"] = vec_to_json(om.base_point);
        s["h_sigma_max"] = om.h_sigma_max;
        s["condition"] = om.cond;
        sets.push_back(s);
    }
    ordered_json j;
    j["sets"] = sets;
    return j;
}

int cmd_mechanism(const RunConfig& config, std::ostream& out_stream,
                  const NamedJoint& named) {
    const JointDistribution& joint = named.joint;
    ordered_json j;
    if (config.method == "lp") {
        int criterion = parse_criterion(config.criterion);
        if (criterion == 0) {
            throw Error(ErrorCode::BadInput,
                        "--method lp needs --criterion 1 or 2");
        }
        double eps = require_eps(config);
        DesignProblem problem = build_lp(joint, eps, criterion);
        if (!config.dump_lp.empty()) {
            write_text_file(config.dump_lp, lp_to_text(problem.lp, "design"));
        }
        if (!config.dump_omega.empty()) {
            write_text_file(config.dump_omega,
                            omega_to_json(problem.ctx.omega1).dump(2) + "\n");
        }
        LPSolution sol = solve_lp(problem.lp);
        if (sol.status == LPStatus::infeasible) {
            throw Error(ErrorCode::Infeasible, "design LP is infeasible");
        }
        if (sol.status == LPStatus::unbounded) {
            throw Error(ErrorCode::Unbounded, "design LP is unbounded");
        }
        DesignedMechanism design = recover_mechanism(problem, sol, joint);
        j["mechanism"] = mechanism_json_object(design.mechanism);
        ordered_json d;
        d["criterion"] = design.criterion;
        d["eps"] = design.eps;
        d["achieved_utility"] = design.achieved_utility;
        d["approx_utility"] = design.approx_utility;
        d["linearized_cond_entropy"] = design.linearized_cond_entropy;
        d["p_u"] = vec_to_json(design.p_u);
        d["supports"] = design.supports;
        d["dual_certified"] = sol.dual_certified;
        j["design"] = d;
        j["verification"] = verification_json(
            verify_mechanism(joint, design.mechanism, eps, criterion));
    } else if (config.method == "frl") {
        reject_dumps(config);
        FrlDecomposition frl = frl_construct(joint);
        j["mechanism"] = mechanism_json_object(frl.mechanism);
        ordered_json d;
        d["u_size"] = frl.u_size;
        d["weights"] = frl.weights;
        d["maps"] = frl.maps;
        j["frl"] = d;
        double eps = std::isnan(config.eps) ? 0.0 : require_eps(config);
        int criterion = parse_criterion(config.criterion);
        j["verification"] = verification_json(verify_mechanism(
            joint, frl.mechanism, eps, criterion == 0 ? 1 : criterion));
    } else if (config.method == "efrl") {
        reject_dumps(config);
        int criterion = parse_criterion(config.criterion);
        if (criterion == 2) {
            throw Error(ErrorCode::BadInput,
                        "--method efrl verifies under criterion 1");
        }
        double eps = require_eps(config);
        EfrlResult r = efrl_construct(joint, eps);
        j["mechanism"] = mechanism_json_object(r.mechanism);
        ordered_json d;
        d["alpha"] = r.alpha;
        d["frl_letters"] = r.frl_letters;
        d["embed_letters"] = r.embed_letters;
        d["i_ux"] = r.diagnostics.i_ux;
        d["i_ux_nats"] = r.diagnostics.i_ux_nats;
        d["i_uy"] = r.diagnostics.i_uy;
        d["h_y_given_xu"] = r.diagnostics.h_y_given_xu;
        d["max_joint_scaled"] = r.diagnostics.max_joint_scaled;
        j["efrl"] = d;
        j["verification"] = verification_json(
            verify_mechanism(joint, r.mechanism, eps, 1));
    } else {
        throw Error(ErrorCode::BadInput, "method must be lp, frl, or efrl");
    }
    emit(config, out_stream, j.dump(2) + "\n");
    return 0;
}

int cmd_oracle_verify(const RunConfig& config, std::ostream& out_stream,
                      const NamedJoint& named) {
    reject_dumps(config);
    int criterion = parse_criterion(config.criterion);
    if (criterion == 0) {
        throw Error(ErrorCode::BadInput,
                    "oracle-verify needs --criterion 1 or 2");
    }
    SandwichOptions opts;
    opts.slack = config.slack;
    opts.oracle.budget = config.budget;
    opts.oracle.seed = config.seed;
    opts.oracle.threads = config.threads;
    SandwichReport report = sandwich_check(
        named.joint, eps_grid(config, named.joint), criterion, opts);
    ordered_json j;
    j["criterion"] = report.criterion;
    j["all_pass"] = report.all_pass;
    ordered_json rows = ordered_json::array();
    for (const auto& r : report.rows) {
        ordered_json row;
        row["eps"] = r.eps;
        row["lp_lower"] = r.lp_lower;
        row["oracle"] = r.oracle;
        row["min_valid_upper"] = r.min_valid_upper;
        row["lower_ok"] = r.lower_ok;
        row["upper_ok"] = r.upper_ok;
        rows.push_back(row);
    }
    j["rows"] = rows;
    emit(config, out_stream, j.dump(2) + "\n");
    return 0;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out_stream,
        std::ostream& err_stream) {
    try {
        LogBase base = parse_base(config.base);
        if (config.input.empty()) {
            throw Error(ErrorCode::BadInput, "--input is required");
        }
        NamedJoint named = read_joint_json(config.input, base);
        if (config.command == "validate") {
            return cmd_validate(config, out_stream, named);
        }
        if (config.command == "measures") {
            return cmd_measures(config, out_stream, named);
        }
        if (config.command == "bounds") {
            return cmd_bounds(config, out_stream, named);
        }
        if (config.command == "sweep") {
            return cmd_sweep(config, out_stream, named);
        }
        if (config.command == "mechanism") {
            return cmd_mechanism(config, out_stream, named);
        }
        if (config.command == "oracle-verify") {
            return cmd_oracle_verify(config, out_stream, named);
        }
        throw Error(ErrorCode::BadInput,
                    "unknown command: " + config.command);
    } catch (const Error& e) {
        ordered_json err;
        err["error"] = error_code_name(e.code());
        err["message"] = e.what();
        err_stream << err.dump() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        ordered_json err;
        err["error"] = "Internal";
        err["message"] = e.what();
        err_stream << err.dump() << "\n";
        return 1;
    }
}

}  // namespace leakbound
