#include "leakbound/oracle.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <thread>

#include "leakbound/bounds.hpp"
#include "leakbound/lp.hpp"
#include "leakbound/mechanisms.hpp"
#include "leakbound/sampling.hpp"

namespace leakbound {

namespace {

// The oracle accepts kernels on a slightly tighter margin than the public
// verifier so that a kernel accepted here can never flip to infeasible when
// re-checked with the shared tolerance.
constexpr double kOracleFeasTol = 5e-10;
constexpr double kImproveTol = 1e-12;
constexpr double kMinStep = 1e-7;

// Restart seed tied to the privacy budget itself (not its position in a
// list), so a shared multi-budget pass and a standalone call draw identical
// random starts for the same eps.
std::uint64_t mix_seed_with_eps(std::uint64_t seed, double eps) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &eps, sizeof bits);
    std::uint64_t z = seed ^ (bits + 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

int resolve_threads(int requested, int work_items) {
    int n = requested > 0 ? requested
                          : static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 4;
    n = std::min(n, 8);
    n = std::min(n, std::max(1, work_items));
    return n;
}

// Exact utility and per-letter privacy values of a markov kernel, with the
// same zero-letter convention as leakage_measures: a letter of exactly zero
// mass contributes nothing.
struct Evaluator {
    const Eigen::MatrixXd& p_xy;
    const Eigen::VectorXd& p_x;
    const Eigen::VectorXd& p_y;
    LogBase base;
    Eigen::VectorXd pu;
    Eigen::MatrixXd pxu;

    explicit Evaluator(const JointDistribution& joint)
        : p_xy(joint.matrix()),
          p_x(joint.p_x()),
          p_y(joint.p_y()),
          base(joint.log_base()),
          pu(joint.y_size()),
          pxu(joint.x_size(), joint.y_size()) {}

    void eval(const Eigen::MatrixXd& kernel, double& utility, double& c1max,
              double& c2max) {
        pu.noalias() = kernel * p_y;
        pxu.noalias() = p_xy * kernel.transpose();
        double h_u = 0.0;
        double h_u_given_y = 0.0;
        for (int y = 0; y < kernel.cols(); ++y) {
            double col_h = 0.0;
            for (int u = 0; u < kernel.rows(); ++u) {
                double v = kernel(u, y);
                if (v > 0.0) col_h -= v * log_in_base(v, base);
            }
            h_u_given_y += p_y(y) * col_h;
        }
        c1max = 0.0;
        c2max = 0.0;
        for (int u = 0; u < pu.size(); ++u) {
            double w = pu(u);
            if (w > 0.0) h_u -= w * log_in_base(w, base);
            if (w <= 0.0) continue;
            double d1 = 0.0;
            for (int x = 0; x < p_x.size(); ++x) {
                d1 += std::abs(pxu(x, u) - p_x(x) * w);
            }
            c1max = std::max(c1max, d1);
            c2max = std::max(c2max, d1 / w);
        }
        utility = h_u - h_u_given_y;
    }

    double distance(const Eigen::MatrixXd& kernel, int criterion) {
        double utility, c1, c2;
        eval(kernel, utility, c1, c2);
        return criterion == 1 ? c1 : c2;
    }
};

// Largest-step-first pairwise mass moves within columns; every accepted move
// is exactly feasible and strictly improving, so the walk is deterministic
// and the result a certified lower bound.
double ascent_sweep(const JointDistribution& joint, Eigen::MatrixXd& kernel,
                    double eps, int criterion, long long eval_cap,
                    long long& evaluations, Evaluator& ev) {
    double best, c1, c2;
    ev.eval(kernel, best, c1, c2);
    const int u_size = static_cast<int>(kernel.rows());
    const int y_size = static_cast<int>(kernel.cols());
    const Eigen::VectorXd& p_y = joint.p_y();
    bool improved = true;
    while (improved && evaluations < eval_cap) {
        improved = false;
        // single moves: shift mass between letters within one column
        for (int y = 0; y < y_size && evaluations < eval_cap; ++y) {
            for (int to = 0; to < u_size && evaluations < eval_cap; ++to) {
                for (int from = 0; from < u_size && evaluations < eval_cap;
                     ++from) {
                    if (from == to) continue;
                    const double avail = kernel(from, y);
                    if (avail <= 1e-12) continue;
                    const double old_to = kernel(to, y);
                    for (double t = avail; t >= kMinStep && evaluations < eval_cap;
                         t *= 0.5) {
                        kernel(to, y) = old_to + t;
                        kernel(from, y) = (t == avail) ? 0.0 : avail - t;
                        double value, d1, d2;
                        ev.eval(kernel, value, d1, d2);
                        ++evaluations;
                        double d = criterion == 1 ? d1 : d2;
                        if (d <= eps + kOracleFeasTol &&
                            value > best + kImproveTol) {
                            best = value;
                            improved = true;
                            break;
                        }
                        kernel(to, y) = old_to;
                        kernel(from, y) = avail;
                    }
                }
            }
        }
        // exchange moves: shift mass from letter b to letter a in column y1
        // and compensate in column y2 so both letter masses stay fixed;
        // these stay tangent to the budget constraints where single moves
        // stall on the feasibility boundary
        for (int y1 = 0; y1 < y_size && evaluations < eval_cap; ++y1) {
            for (int y2 = y1 + 1; y2 < y_size && evaluations < eval_cap;
                 ++y2) {
                const double ratio = p_y(y1) / p_y(y2);
                for (int a = 0; a < u_size && evaluations < eval_cap; ++a) {
                    for (int b = 0; b < u_size && evaluations < eval_cap;
                         ++b) {
                        if (a == b) continue;
                        const double old_a1 = kernel(a, y1);
                        const double old_b1 = kernel(b, y1);
                        const double old_a2 = kernel(a, y2);
                        const double old_b2 = kernel(b, y2);
                        const double t_max =
                            std::min(old_b1, old_a2 / ratio);
                        if (t_max <= 1e-12) continue;
                        for (double t = t_max;
                             t >= kMinStep && evaluations < eval_cap;
                             t *= 0.5) {
                            const double s = std::min(t * ratio, old_a2);
                            kernel(a, y1) = old_a1 + t;
                            kernel(b, y1) = (t == old_b1) ? 0.0 : old_b1 - t;
                            kernel(a, y2) = (s == old_a2) ? 0.0 : old_a2 - s;
                            kernel(b, y2) = old_b2 + s;
                            double value, d1, d2;
                            ev.eval(kernel, value, d1, d2);
                            ++evaluations;
                            double d = criterion == 1 ? d1 : d2;
                            if (d <= eps + kOracleFeasTol &&
                                value > best + kImproveTol) {
                                best = value;
                                improved = true;
                                break;
                            }
                            kernel(a, y1) = old_a1;
                            kernel(b, y1) = old_b1;
                            kernel(a, y2) = old_a2;
                            kernel(b, y2) = old_b2;
                        }
                    }
                }
            }
        }
    }
    return best;
}

// All compositions of `total` into `parts` nonnegative integers, in
// lexicographic order of the part vector.
void enumerate_compositions(int total, int parts, std::vector<int>& current,
                            std::vector<std::vector<int>>& out) {
    if (parts == 1) {
        current.push_back(total);
        out.push_back(current);
        current.pop_back();
        return;
    }
    for (int head = 0; head <= total; ++head) {
        current.push_back(head);
        enumerate_compositions(total - head, parts - 1, current, out);
        current.pop_back();
    }
}

struct GridBest {
    double value = -1.0;
    std::array<int, 3> idx = {0, 0, 0};
};

// The handful of best grid kernels per budget, kept sorted by value. The
// runners-up matter: winners are later polished by local ascent, and the
// second-best grid point often sits in a better basin than the first.
constexpr int kTopK = 8;

struct BucketTop {
    std::array<GridBest, kTopK> entries{};

    void insert(double value, const std::array<int, 3>& idx) {
        if (value <= entries.back().value) return;
        for (const auto& e : entries) {
            if (e.value == value && e.idx == idx) return;
        }
        int pos = kTopK - 1;
        while (pos > 0 && value > entries[pos - 1].value) {
            entries[pos] = entries[pos - 1];
            --pos;
        }
        entries[pos] = GridBest{value, idx};
    }

    // deterministic: callers merge shards in fixed index order, and ties
    // keep the earlier insertion
    void merge(const BucketTop& other) {
        for (const auto& e : other.entries) {
            if (e.value < -0.5) break;
            insert(e.value, e.idx);
        }
    }
};

struct GridOutcome {
    std::vector<BucketTop> best;  // one slot per eps bucket
    long long evaluations = 0;
    bool exhausted = true;
};

// Exhaustive sweep over kernels whose columns are compositions of
// `grid_resolution`; a single pass serves every eps in sorted_eps.
GridOutcome grid_sweep(const JointDistribution& joint,
                       const std::vector<double>& sorted_eps, int criterion,
                       const OracleOptions& opts,
                       const std::vector<Eigen::VectorXd>& cols) {
    const int y_size = joint.y_size();
    const int u_size = y_size;
    const int x_size = joint.x_size();
    const int n_c = static_cast<int>(cols.size());
    const int m = static_cast<int>(sorted_eps.size());
    const LogBase base = joint.log_base();
    const Eigen::VectorXd& p_x = joint.p_x();
    const Eigen::VectorXd& p_y = joint.p_y();

    // Per-column precomputation: conditional entropy contribution and the
    // joint slice P_XY(:, y) c^T for every (y, composition) pair.
    std::vector<double> h_cols(n_c);
    for (int i = 0; i < n_c; ++i) h_cols[i] = entropy(cols[i], base);
    // pre_u[y][i] = P_Y(y) * cols[i]; pre_xu[y][i] = P_XY(:,y) * cols[i]^T
    std::vector<std::vector<Eigen::VectorXd>> pre_u(y_size);
    std::vector<std::vector<Eigen::MatrixXd>> pre_xu(y_size);
    for (int y = 0; y < y_size; ++y) {
        pre_u[y].resize(n_c);
        pre_xu[y].resize(n_c);
        for (int i = 0; i < n_c; ++i) {
            pre_u[y][i] = p_y(y) * cols[i];
            pre_xu[y][i] = joint.matrix().col(y) * cols[i].transpose();
        }
    }

    const long long shard_quota =
        opts.budget / std::max(1, n_c);  // identical for every thread count
    std::vector<GridOutcome> shard_results(n_c);
    std::atomic<int> next_shard{0};

    auto run_shard = [&](int i0) {
        GridOutcome& out = shard_results[i0];
        out.best.assign(m, BucketTop{});
        long long remaining = shard_quota;
        Eigen::VectorXd pu1(u_size), pu2(u_size), pu3(u_size);
        Eigen::MatrixXd xu1(x_size, u_size), xu2(x_size, u_size),
            xu3(x_size, u_size);

        auto evaluate = [&](const Eigen::VectorXd& pu,
                            const Eigen::MatrixXd& pxu, double huy,
                            std::array<int, 3> idx) {
            double h_u = 0.0;
            double c1 = 0.0, c2 = 0.0;
            for (int u = 0; u < u_size; ++u) {
                double w = pu(u);
                if (w > 0.0) h_u -= w * log_in_base(w, base);
                if (w <= 0.0) continue;
                double d1 = 0.0;
                for (int x = 0; x < x_size; ++x) {
                    d1 += std::abs(pxu(x, u) - p_x(x) * w);
                }
                if (d1 > c1) c1 = d1;
                if (d1 / w > c2) c2 = d1 / w;
            }
            const double d = criterion == 1 ? c1 : c2;
            const double utility = h_u - huy;
            // record the kernel in every bucket whose budget admits it, so
            // each bucket's leaders are exactly what a standalone pass with
            // that budget alone would have collected (same ties, same order)
            int b = static_cast<int>(
                std::lower_bound(sorted_eps.begin(), sorted_eps.end(),
                                 d - kOracleFeasTol) -
                sorted_eps.begin());
            for (; b < m; ++b) out.best[b].insert(utility, idx);
        };

        pu1 = pre_u[0][i0];
        xu1 = pre_xu[0][i0];
        const double huy1 = p_y(0) * h_cols[i0];
        if (y_size == 1) {
            if (remaining <= 0) {
                out.exhausted = false;
                return;
            }
            evaluate(pu1, xu1, huy1, {i0, 0, 0});
            --remaining;
            ++out.evaluations;
            return;
        }
        for (int i1 = 0; i1 < n_c; ++i1) {
            pu2 = pu1 + pre_u[1][i1];
            xu2 = xu1 + pre_xu[1][i1];
            const double huy2 = huy1 + p_y(1) * h_cols[i1];
            if (y_size == 2) {
                if (remaining <= 0) {
                    out.exhausted = false;
                    return;
                }
                evaluate(pu2, xu2, huy2, {i0, i1, 0});
                --remaining;
                ++out.evaluations;
                continue;
            }
            for (int i2 = 0; i2 < n_c; ++i2) {
                if (remaining <= 0) {
                    out.exhausted = false;
                    return;
                }
                pu3 = pu2 + pre_u[2][i2];
                xu3 = xu2 + pre_xu[2][i2];
                evaluate(pu3, xu3, huy2 + p_y(2) * h_cols[i2], {i0, i1, i2});
                --remaining;
                ++out.evaluations;
            }
        }
    };

    const int n_threads = resolve_threads(opts.threads, n_c);
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        workers.emplace_back([&] {
            while (true) {
                int shard = next_shard.fetch_add(1);
                if (shard >= n_c) break;
                run_shard(shard);
            }
        });
    }
    for (auto& w : workers) w.join();

    GridOutcome merged;
    merged.best.assign(m, BucketTop{});
    for (int s = 0; s < n_c; ++s) {
        merged.evaluations += shard_results[s].evaluations;
        merged.exhausted = merged.exhausted && shard_results[s].exhausted;
        for (int b = 0; b < m; ++b) {
            merged.best[b].merge(shard_results[s].best[b]);
        }
    }
    return merged;
}

Eigen::MatrixXd kernel_from_indices(const std::vector<Eigen::VectorXd>& cols,
                                    const std::array<int, 3>& idx, int u_size,
                                    int y_size) {
    Eigen::MatrixXd k(u_size, y_size);
    for (int y = 0; y < y_size; ++y) k.col(y) = cols[idx[static_cast<size_t>(y)]];
    return k;
}

// Deterministic start: scale a (typically high-information) kernel toward
// the flat kernel with the same letter marginal until the budget is met.
// Fails (returns false) only when even the smallest blend stays over
// budget, e.g. at eps = 0.
bool scaled_start(const JointDistribution& joint, Eigen::MatrixXd k,
                  double eps, int criterion, Evaluator& ev,
                  long long& evaluations, Eigen::MatrixXd& out) {
    const int y_size = joint.y_size();
    const Eigen::VectorXd q = k * joint.p_y();
    Eigen::MatrixXd constant(k.rows(), y_size);
    for (int y = 0; y < y_size; ++y) constant.col(y) = q;
    for (int iter = 0; iter <= 50; ++iter) {
        ++evaluations;
        if (ev.distance(k, criterion) <= eps + kOracleFeasTol) {
            out = k;
            return true;
        }
        k = 0.5 * (k + constant);
    }
    return false;
}

bool scaled_identity_start(const JointDistribution& joint, double eps,
                           int criterion, Evaluator& ev,
                           long long& evaluations, Eigen::MatrixXd& out) {
    const int n = joint.y_size();
    return scaled_start(joint, Eigen::MatrixXd::Identity(n, n), eps,
                        criterion, ev, evaluations, out);
}

// Anchored-pair start: letter 0 takes all of column `anchor` plus the
// fraction of column `companion` that minimizes the privacy statistic
// (deviations of opposite sign cancel, so a distinctive low-mass column
// can be fully revealed); letter 1 takes the rest. Fails when even the
// best fraction is over budget.
bool anchored_pair_start(const JointDistribution& joint, int anchor,
                         int companion, double eps, int criterion,
                         Evaluator& ev, long long& evaluations,
                         Eigen::MatrixXd& out) {
    const int n = joint.y_size();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (int y = 0; y < n; ++y) {
        if (y == anchor) {
            k(0, y) = 1.0;
        } else {
            k(1, y) = 1.0;
        }
    }
    auto set_fraction = [&](double f) {
        k(0, companion) = f;
        k(1, companion) = 1.0 - f;
    };
    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < 48; ++iter) {
        const double f1 = lo + (hi - lo) / 3.0;
        const double f2 = hi - (hi - lo) / 3.0;
        set_fraction(f1);
        const double d1 = ev.distance(k, criterion);
        set_fraction(f2);
        const double d2 = ev.distance(k, criterion);
        evaluations += 2;
        if (d1 <= d2) {
            hi = f2;
        } else {
            lo = f1;
        }
    }
    set_fraction(0.5 * (lo + hi));
    ++evaluations;
    if (ev.distance(k, criterion) <= eps + kOracleFeasTol) {
        out = k;
        return true;
    }
    return false;
}

// Feasible ascent start: shrink a random kernel toward the constant kernel
// with the same letter marginal until the privacy check passes.
Eigen::MatrixXd feasible_start(const JointDistribution& joint, Rng& rng,
                               double eps, int criterion, Evaluator& ev,
                               long long& evaluations) {
    const int u_size = joint.y_size();
    const int y_size = joint.y_size();
    Eigen::MatrixXd k = sample_kernel(rng, u_size, y_size);
    Eigen::VectorXd q = k * joint.p_y();
    Eigen::MatrixXd constant(u_size, y_size);
    for (int y = 0; y < y_size; ++y) constant.col(y) = q;
    for (int iter = 0; iter <= 50; ++iter) {
        ++evaluations;
        if (ev.distance(k, criterion) <= eps + kOracleFeasTol) return k;
        k = 0.5 * (k + constant);
    }
    throw Error(ErrorCode::BisectionFailure,
                "could not reach the privacy region from a random start");
}

OracleResult finalize_result(const JointDistribution& joint,
                             const Eigen::MatrixXd& kernel, double eps,
                             int criterion, long long evaluations,
                             bool exhausted, const std::string& method) {
    OracleResult result;
    result.mechanism =
        Mechanism{MechanismKind::markov, static_cast<int>(kernel.rows()), kernel};
    VerificationReport rep =
        verify_mechanism(joint, result.mechanism, eps, criterion);
    if (!rep.pass) {
        throw Error(ErrorCode::ReconstructionMismatch,
                    "oracle produced an infeasible kernel: " +
                        format_double(rep.max_value) + " > " +
                        format_double(eps));
    }
    result.utility = rep.i_uy;
    result.evaluations = evaluations;
    result.exhausted = exhausted;
    result.method = method;
    return result;
}

std::vector<OracleResult> oracle_grid(const JointDistribution& joint,
                                      const std::vector<double>& sorted_eps,
                                      int criterion,
                                      const OracleOptions& opts) {
    const int y_size = joint.y_size();
    std::vector<std::vector<int>> comps;
    std::vector<int> scratch;
    enumerate_compositions(opts.grid_resolution, y_size, scratch, comps);
    std::vector<Eigen::VectorXd> cols(comps.size());
    for (size_t i = 0; i < comps.size(); ++i) {
        Eigen::VectorXd c(y_size);
        for (int u = 0; u < y_size; ++u) {
            c(u) = static_cast<double>(comps[i][u]) / opts.grid_resolution;
        }
        cols[i] = c;
    }

    GridOutcome sweep = grid_sweep(joint, sorted_eps, criterion, opts, cols);

    std::vector<OracleResult> results;
    results.reserve(sorted_eps.size());
    Evaluator ev(joint);
    long long polish_total = 0;
    // Winners are polished from several starts: the leading grid kernels
    // plus a portfolio of structured and random starts. The extra basins
    // matter because optimal kernels hug the budget boundary, where the
    // nearest grid points can all fall on the infeasible side. Every start
    // depends only on the joint, the budget value, and the seed — never on
    // the other budgets in the list — so each row is bit-identical to a
    // standalone call with that budget.
    for (size_t b = 0; b < sorted_eps.size(); ++b) {
        if (sweep.best[b].entries[0].value < -0.5) {
            throw Error(ErrorCode::NoFeasiblePoint,
                        "no grid kernel satisfies eps = " +
                            format_double(sorted_eps[b]));
        }
        std::vector<Eigen::MatrixXd> starts;
        for (const auto& e : sweep.best[b].entries) {
            if (e.value < -0.5) break;
            starts.push_back(
                kernel_from_indices(cols, e.idx, y_size, y_size));
        }
        Eigen::MatrixXd scaled;
        if (scaled_identity_start(joint, sorted_eps[b], criterion, ev,
                                  polish_total, scaled)) {
            starts.push_back(scaled);
        }
        // every two-block partition of the observation alphabet, revealed
        // deterministically and scaled into the budget; optimal kernels are
        // often small perturbations of such partitions
        for (int mask = 1; mask < (1 << (y_size - 1)); ++mask) {
            Eigen::MatrixXd part = Eigen::MatrixXd::Zero(y_size, y_size);
            for (int y = 0; y < y_size; ++y) {
                part((mask >> y) & 1, y) = 1.0;
            }
            if (scaled_start(joint, part, sorted_eps[b], criterion, ev,
                             polish_total, scaled)) {
                starts.push_back(scaled);
            }
        }
        // cancellation starts: fully reveal one column inside a letter that
        // blends in just enough of another column to stay on budget
        for (int anchor = 0; anchor < y_size; ++anchor) {
            for (int companion = 0; companion < y_size; ++companion) {
                if (companion == anchor) continue;
                if (anchored_pair_start(joint, anchor, companion,
                                        sorted_eps[b], criterion, ev,
                                        polish_total, scaled)) {
                    starts.push_back(scaled);
                }
            }
        }
        // seeded random restarts diversify the polish basins; the seed
        // depends only on the budget value, never the thread count or the
        // budget's position in the list
        {
            Rng rng(mix_seed_with_eps(opts.seed, sorted_eps[b]));
            for (int r = 0; r < 16; ++r) {
                long long evals = 0;
                try {
                    Eigen::MatrixXd k = feasible_start(
                        joint, rng, sorted_eps[b], criterion, ev, evals);
                    starts.push_back(std::move(k));
                } catch (const Error&) {
                    // unreachable privacy region from this start (eps = 0)
                }
                polish_total += evals;
            }
        }
        double best_value = -1.0;
        int best_start = 0;
        for (size_t s = 0; s < starts.size(); ++s) {
            long long polish_evals = 0;
            double v = ascent_sweep(joint, starts[s], sorted_eps[b], criterion,
                                    opts.polish_budget, polish_evals, ev);
            polish_total += polish_evals;
            if (v > best_value) {
                best_value = v;
                best_start = static_cast<int>(s);
            }
        }
        results.push_back(finalize_result(
            joint, starts[static_cast<size_t>(best_start)], sorted_eps[b],
            criterion, 0, sweep.exhausted, "grid"));
    }
    // evaluation counts are shared across the pass; report the total on
    // every row so callers can audit the budget
    for (auto& r : results) r.evaluations = sweep.evaluations + polish_total;
    return results;
}

OracleResult oracle_ascent(const JointDistribution& joint, double eps,
                           int criterion, const OracleOptions& opts) {
    const int restarts = std::max(1, opts.restarts);
    const long long per_restart =
        std::max<long long>(1000, opts.budget / restarts);

    struct Candidate {
        double value = -1.0;
        Eigen::MatrixXd kernel;
        long long evaluations = 0;
        bool completed = false;
    };
    // deterministic candidates (scaled full disclosure plus the anchored
    // column pairs) come first; the rest are seeded random restarts
    const int y_size = joint.y_size();
    const int n_det = 1 + y_size * (y_size - 1);
    std::vector<Candidate> cands(n_det + restarts);
    std::atomic<int> next{0};

    auto run_restart = [&](int r) {
        Candidate& cand = cands[n_det + r];
        Rng rng(opts.seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(r) + 1));
        Evaluator ev(joint);
        long long evals = 0;
        Eigen::MatrixXd k =
            feasible_start(joint, rng, eps, criterion, ev, evals);
        cand.value = ascent_sweep(joint, k, eps, criterion, per_restart, evals, ev);
        cand.kernel = std::move(k);
        cand.evaluations = evals;
        cand.completed = evals < per_restart;
    };

    {
        Evaluator ev(joint);
        int slot = 0;
        auto polish_candidate = [&](Eigen::MatrixXd k, long long setup_evals) {
            Candidate& cand = cands[slot++];
            long long evals = setup_evals;
            cand.value =
                ascent_sweep(joint, k, eps, criterion, per_restart, evals, ev);
            cand.kernel = std::move(k);
            cand.evaluations = evals;
            cand.completed = evals < per_restart;
        };
        long long evals = 0;
        Eigen::MatrixXd k;
        if (scaled_identity_start(joint, eps, criterion, ev, evals, k)) {
            polish_candidate(std::move(k), evals);
        } else {
            cands[slot].evaluations = evals;
            ++slot;
        }
        for (int anchor = 0; anchor < y_size; ++anchor) {
            for (int companion = 0; companion < y_size; ++companion) {
                if (companion == anchor) continue;
                evals = 0;
                if (anchored_pair_start(joint, anchor, companion, eps,
                                        criterion, ev, evals, k)) {
                    polish_candidate(k, evals);
                } else {
                    cands[slot].evaluations = evals;
                    ++slot;
                }
            }
        }
    }

    const int n_threads = resolve_threads(opts.threads, restarts);
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        workers.emplace_back([&] {
            while (true) {
                int r = next.fetch_add(1);
                if (r >= restarts) break;
                run_restart(r);
            }
        });
    }
    for (auto& w : workers) w.join();

    int winner = 0;
    long long total_evals = 0;
    bool all_completed = true;
    for (int r = 0; r < static_cast<int>(cands.size()); ++r) {
        total_evals += cands[r].evaluations;
        all_completed = all_completed && cands[r].completed;
        if (cands[r].value > cands[winner].value) winner = r;
    }
    if (cands[winner].value < 0.0) {
        throw Error(ErrorCode::NoFeasiblePoint,
                    "no ascent start satisfied eps = " + format_double(eps));
    }
    return finalize_result(joint, cands[winner].kernel, eps, criterion,
                           total_evals, all_completed, "ascent");
}

}  // namespace

std::vector<OracleResult> oracle_g_multi(const JointDistribution& joint,
                                         std::vector<double> eps_list,
                                         int criterion,
                                         const OracleOptions& opts) {
    if (criterion != 1 && criterion != 2) {
        throw Error(ErrorCode::BadInput, "criterion must be 1 or 2");
    }
    if (eps_list.empty()) {
        throw Error(ErrorCode::BadInput, "need at least one eps");
    }
    for (double e : eps_list) {
        if (e < 0.0 || !std::isfinite(e)) {
            throw Error(ErrorCode::BadInput, "eps must be finite and >= 0");
        }
    }
    if (opts.budget <= 0 || opts.grid_resolution < 1 || opts.restarts < 1) {
        throw Error(ErrorCode::BadInput, "oracle options must be positive");
    }
    std::sort(eps_list.begin(), eps_list.end());
    if (joint.y_size() <= 3) {
        return oracle_grid(joint, eps_list, criterion, opts);
    }
    std::vector<OracleResult> results;
    results.reserve(eps_list.size());
    for (double e : eps_list) {
        results.push_back(oracle_ascent(joint, e, criterion, opts));
    }
    return results;
}

OracleResult oracle_g(const JointDistribution& joint, double eps, int criterion,
                      const OracleOptions& opts) {
    return oracle_g_multi(joint, {eps}, criterion, opts).front();
}

SandwichReport sandwich_check(const JointDistribution& joint,
                              std::vector<double> eps_list, int criterion,
                              const SandwichOptions& opts) {
    std::sort(eps_list.begin(), eps_list.end());
    std::vector<OracleResult> oracle =
        oracle_g_multi(joint, eps_list, criterion, opts.oracle);

    Epsilon2Data e2 = epsilon2(joint);
    SandwichReport report;
    report.criterion = criterion;
    report.all_pass = true;
    for (size_t i = 0; i < eps_list.size(); ++i) {
        const double eps = eps_list[i];
        DesignedMechanism design = lower_bound_g(joint, eps, criterion);

        double upper = upper_g1(joint, eps).capped;
        if (criterion == 2) {
            upper = std::min(upper, upper_h2(joint, eps));
            UpperG2 g2 =
                upper_g2(joint, eps, design.approx_utility, e2.epsilon2);
            if (g2.u1.valid) upper = std::min(upper, g2.u1.value);
            if (g2.u2.valid) upper = std::min(upper, g2.u2.value);
        }

        SandwichRow row;
        row.eps = eps;
        row.lp_lower = design.achieved_utility;
        row.oracle = oracle[i].utility;
        row.min_valid_upper = upper;
        row.lower_ok = row.lp_lower <= row.oracle + opts.slack;
        row.upper_ok = row.oracle <= row.min_valid_upper + opts.upper_tol;
        report.all_pass = report.all_pass && row.lower_ok && row.upper_ok;
        report.rows.push_back(row);
    }
    return report;
}

std::string sandwich_csv(const SandwichReport& report) {
    std::string out = "eps,lp_lower,oracle,min_valid_upper,lower_ok,upper_ok\n";
    for (const auto& r : report.rows) {
        out += format_double(r.eps) + "," + format_double(r.lp_lower) + "," +
               format_double(r.oracle) + "," + format_double(r.min_valid_upper) +
               "," + (r.lower_ok ? "1" : "0") + "," + (r.upper_ok ? "1" : "0") +
               "\n";
    }
    return out;
}

}  // namespace leakbound
