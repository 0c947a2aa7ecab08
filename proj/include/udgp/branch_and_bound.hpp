#ifndef UDGP_BRANCH_AND_BOUND_HPP
#define UDGP_BRANCH_AND_BOUND_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <queue>
#include <vector>

#include "udgp/common.hpp"
#include "udgp/milp.hpp"
#include "udgp/simplex.hpp"

namespace udgp {

struct SolveLimits {
    double time_limit_s = 0.0;  // 0 = unlimited
    long node_limit = 0;        // 0 = unlimited
    // Stop once an incumbent has gone this many nodes without improving
    // (0 = never). Lets callers use the search as a proposal engine on models
    // whose relaxation bound cannot close the gap.
    long stall_node_limit = 0;
    // Dense-tableau cell budget; models whose LP would exceed it are handled
    // by the jump heuristic alone (primal solutions, trivial dual bound).
    std::size_t lp_cell_cap = 64'000'000;
    int fj_pass_limit = 200;
    std::function<void(long nodes, double bound, double incumbent, bool has_incumbent)> on_progress;
};

struct FjResult {
    bool feasible = false;
    std::vector<double> values;
    double objective = kInf;
    int passes = 0;
};

// LP-free primal heuristic in the feasibility-jump style: greedy single
// variable moves against weighted constraint violations, with weight bumps
// when a full sweep makes no progress. Deterministic; integer variables stay
// integral throughout.
inline FjResult feasibility_jump(const MilpModel& model, int pass_limit = 200) {
    const int nv = model.num_vars();
    const int nr = model.num_rows();

    // Column-wise adjacency (transpose of the row storage).
    std::vector<std::int64_t> col_start(nv + 1, 0);
    for (int r = 0; r < nr; ++r)
        for (auto c : model.row(r).cols) ++col_start[c + 1];
    for (int j = 0; j < nv; ++j) col_start[j + 1] += col_start[j];
    std::vector<std::int32_t> col_row(model.num_nonzeros());
    std::vector<double> col_coef(model.num_nonzeros());
    {
        std::vector<std::int64_t> fill(col_start.begin(), col_start.end() - 1);
        for (int r = 0; r < nr; ++r) {
            const auto view = model.row(r);
            for (size_t t = 0; t < view.cols.size(); ++t) {
                const auto pos = fill[view.cols[t]]++;
                col_row[pos] = r;
                col_coef[pos] = view.coefs[t];
            }
        }
    }

    std::vector<double> x(nv);
    for (int j = 0; j < nv; ++j) {
        const double lo = model.lb(j), hi = model.ub(j);
        double v = 0.0;
        if (lo > 0.0) v = lo;
        else if (hi < 0.0) v = hi;
        if (model.is_integer(j)) v = std::round(v);
        x[j] = v;
    }

    std::vector<double> activity(nr, 0.0);
    for (int r = 0; r < nr; ++r) activity[r] = model.row_activity(r, x);
    std::vector<double> weight(nr, 1.0);

    auto raw_violation = [&](int r, double act) {
        switch (model.relation(r)) {
            case Relation::LessEqual: return std::max(0.0, act - model.rhs(r));
            case Relation::GreaterEqual: return std::max(0.0, model.rhs(r) - act);
            case Relation::Equal: return std::abs(act - model.rhs(r));
        }
        return 0.0;
    };
    auto satisfied = [&](int r) {
        return raw_violation(r, activity[r]) <= tol::feasibility * (1.0 + std::abs(model.rhs(r)));
    };

    auto all_satisfied = [&]() {
        for (int r = 0; r < nr; ++r)
            if (!satisfied(r)) return false;
        return true;
    };

    FjResult out;
    for (int pass = 0; pass < pass_limit; ++pass) {
        out.passes = pass + 1;
        bool moved = false;
        for (int j = 0; j < nv; ++j) {
            const auto begin = col_start[j], end = col_start[j + 1];
            bool touches_violated = false;
            for (auto t = begin; t < end && !touches_violated; ++t)
                touches_violated = !satisfied(col_row[t]);
            if (!touches_violated) continue;

            double cands[8];
            int ncand = 0;
            const double lo = model.lb(j), hi = model.ub(j);
            if (model.is_integer(j)) {
                if (lo == 0.0 && hi == 1.0) cands[ncand++] = 1.0 - x[j];
                else {
                    if (x[j] + 1.0 <= hi) cands[ncand++] = x[j] + 1.0;
                    if (x[j] - 1.0 >= lo) cands[ncand++] = x[j] - 1.0;
                }
            } else {
                for (auto t = begin; t < end && ncand < 6; ++t) {
                    const int r = col_row[t];
                    if (satisfied(r)) continue;
                    const double target = x[j] + (model.rhs(r) - activity[r]) / col_coef[t];
                    cands[ncand++] = std::clamp(target, lo == -kInf ? target : lo,
                                                hi == kInf ? target : hi);
                }
            }

            double best_delta = -1e-12;
            double best_value = x[j];
            for (int c = 0; c < ncand; ++c) {
                const double v = cands[c];
                if (v == x[j] || !std::isfinite(v)) continue;
                double delta = 0.0;
                for (auto t = begin; t < end; ++t) {
                    const int r = col_row[t];
                    const double na = activity[r] + col_coef[t] * (v - x[j]);
                    delta += weight[r] * (raw_violation(r, na) - raw_violation(r, activity[r]));
                }
                if (delta < best_delta) {
                    best_delta = delta;
                    best_value = v;
                }
            }
            if (best_value != x[j]) {
                for (auto t = begin; t < end; ++t)
                    activity[col_row[t]] += col_coef[t] * (best_value - x[j]);
                x[j] = best_value;
                moved = true;
            }
        }
        if (all_satisfied()) {
            out.feasible = true;
            out.values = std::move(x);
            out.objective = model.objective_value(out.values);
            return out;
        }
        if (!moved) {
            for (int r = 0; r < nr; ++r)
                if (!satisfied(r)) weight[r] += 1.0;
        }
    }
    return out;
}

namespace detail {

inline double trivial_bound(const MilpModel& model) {
    double bound = 0.0;
    for (int j = 0; j < model.num_vars(); ++j) {
        const double c = model.objective_coef(j);
        if (c == 0.0) continue;
        const double lo = model.lb(j), hi = model.ub(j);
        double contrib;
        if (c > 0.0) contrib = (lo == -kInf) ? -kInf : c * lo;
        else contrib = (hi == kInf) ? -kInf : c * hi;
        if (contrib == -kInf) return -kInf;
        bound += contrib;
    }
    return bound;
}

struct BnbNode {
    double bound = -kInf;
    long seq = 0;
    // var, new lower, new upper; applied on top of the model bounds
    std::vector<std::tuple<int, double, double>> changes;
};

struct BnbNodeOrder {
    bool operator()(const BnbNode& a, const BnbNode& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
        return a.seq < b.seq;  // equal bounds: newest first (depth-first)
    }
};

}  // namespace detail

// Branch-and-bound over the simplex relaxation: best-bound node selection
// with depth-first plunging after each branching, most-fractional branching
// variable (lowest index on ties). Deterministic for fixed inputs and limits.
inline MilpSolution solve(const MilpModel& model, const SolveLimits& limits = {}) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    model.validate();

    MilpSolution out;
    out.best_bound = detail::trivial_bound(model);

    const auto deadline =
        t0 + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(
                 limits.time_limit_s > 0.0 ? limits.time_limit_s : 1e9));
    auto elapsed = [&]() { return std::chrono::duration<double>(clock::now() - t0).count(); };
    auto gap_closed = [&](double incumbent, double bound) {
        return incumbent - bound <= tol::mip_gap * (1.0 + std::abs(incumbent));
    };
    auto report = [&]() {
        if (limits.on_progress)
            limits.on_progress(out.nodes, out.best_bound, out.objective, out.has_incumbent);
    };

    const std::size_t cells =
        static_cast<std::size_t>(model.num_rows()) *
        (static_cast<std::size_t>(model.num_vars()) + 2 * static_cast<std::size_t>(model.num_rows()) + 1);
    if (model.num_rows() > 0 && cells > limits.lp_cell_cap) {
        log_info(strfmt("milp: %d rows x %d vars exceeds tableau budget, jump heuristic only",
                        model.num_rows(), model.num_vars()));
        FjResult fj = feasibility_jump(model, limits.fj_pass_limit);
        if (fj.feasible && model.is_feasible(fj.values, tol::feasibility)) {
            out.has_incumbent = true;
            out.values = std::move(fj.values);
            out.objective = fj.objective;
            out.status = gap_closed(out.objective, out.best_bound) ? MilpStatus::Optimal
                                                                   : MilpStatus::FeasibleLimit;
        } else {
            out.status = MilpStatus::FeasibleLimit;
        }
        out.seconds = elapsed();
        report();
        return out;
    }

    std::priority_queue<detail::BnbNode, std::vector<detail::BnbNode>, detail::BnbNodeOrder> open;
    long seq = 0;
    std::optional<detail::BnbNode> current = detail::BnbNode{out.best_bound, seq++, {}};
    std::vector<double> lb(model.num_vars()), ub(model.num_vars());
    bool hit_limit = false;
    long last_improvement_node = 0;

    auto cutoff = [&]() {
        return out.has_incumbent ? out.objective - 1e-12 : kInf;
    };
    auto refresh_bound = [&]() {
        // Valid global lower bound: open-node bounds capped by the incumbent.
        double lo = kInf;
        if (current) lo = std::min(lo, current->bound);
        if (!open.empty()) lo = std::min(lo, open.top().bound);
        if (out.has_incumbent) lo = std::min(lo, out.objective);
        if (lo != kInf && lo > out.best_bound) out.best_bound = lo;
    };

    while (current || !open.empty()) {
        if (clock::now() > deadline ||
            (limits.node_limit > 0 && out.nodes >= limits.node_limit) ||
            (limits.stall_node_limit > 0 && out.has_incumbent &&
             out.nodes - last_improvement_node >= limits.stall_node_limit)) {
            hit_limit = true;
            break;
        }
        if (!current) {
            current = open.top();
            open.pop();
            if (current->bound >= cutoff()) {
                current.reset();
                continue;
            }
        }
        if (out.has_incumbent && gap_closed(out.objective, out.best_bound)) break;

        for (int j = 0; j < model.num_vars(); ++j) {
            lb[j] = model.lb(j);
            ub[j] = model.ub(j);
        }
        for (const auto& [var, nlo, nhi] : current->changes) {
            lb[var] = std::max(lb[var], nlo);
            ub[var] = std::min(ub[var], nhi);
        }

        SimplexOptions lp_options;
        lp_options.has_deadline = limits.time_limit_s > 0.0;
        lp_options.deadline = deadline;
        const LpSolution lp = solve_lp(model, lb, ub, lp_options);
        ++out.nodes;

        if (lp.status == LpStatus::Limit) {
            hit_limit = true;
            break;
        }
        if (lp.status == LpStatus::Unbounded) {
            out.status = MilpStatus::UnboundedRelaxation;
            out.best_bound = -kInf;
            out.seconds = elapsed();
            report();
            return out;
        }
        if (lp.status == LpStatus::Infeasible) {
            current.reset();
            refresh_bound();
            report();
            continue;
        }

        const double node_bound = std::max(current->bound, lp.objective);
        if (node_bound >= cutoff()) {
            current.reset();
            refresh_bound();
            report();
            continue;
        }

        int branch_var = -1;
        double branch_value = 0.0;
        double most_fractional = tol::integrality;
        for (int j = 0; j < model.num_vars(); ++j) {
            if (!model.is_integer(j)) continue;
            const double v = lp.values[j];
            const double frac = v - std::floor(v);
            const double dist = std::min(frac, 1.0 - frac);
            if (dist > most_fractional) {
                most_fractional = dist;
                branch_var = j;
                branch_value = v;
            }
        }

        if (branch_var < 0) {
            // Integral relaxation optimum: candidate incumbent.
            if (model.is_feasible(lp.values, tol::feasibility) &&
                lp.objective < out.objective - 1e-12) {
                out.has_incumbent = true;
                out.values = lp.values;
                out.objective = lp.objective;
                last_improvement_node = out.nodes;
            }
            current.reset();
            refresh_bound();
            report();
            continue;
        }

        const double floor_v = std::floor(branch_value);
        detail::BnbNode down{node_bound, seq++, current->changes};
        down.changes.emplace_back(branch_var, -kInf, floor_v);
        detail::BnbNode up{node_bound, seq++, current->changes};
        up.changes.emplace_back(branch_var, floor_v + 1.0, kInf);
        // Binaries plunge toward 1 whenever the relaxation puts real mass on
        // them: in partitioning-style models a 0-fix barely changes the
        // relaxation, so rounded dives can wander for thousands of nodes
        // without ever reaching an integral point.
        const double frac = branch_value - floor_v;
        const bool binary = model.is_integer(branch_var) && model.lb(branch_var) == 0.0 &&
                            model.ub(branch_var) == 1.0;
        const bool up_first = frac >= (binary ? 0.05 : 0.5);
        current = up_first ? std::move(up) : std::move(down);
        open.push(up_first ? std::move(down) : std::move(up));
        refresh_bound();
        report();
    }

    if (hit_limit) {
        out.status = MilpStatus::FeasibleLimit;
    } else if (out.has_incumbent) {
        out.status = MilpStatus::Optimal;
        out.best_bound = std::max(out.best_bound, out.objective);
    } else {
        out.status = MilpStatus::Infeasible;
        out.best_bound = kInf;
    }
    if (out.has_incumbent && out.status == MilpStatus::FeasibleLimit &&
        gap_closed(out.objective, out.best_bound))
        out.status = MilpStatus::Optimal;
    out.seconds = elapsed();
    report();
    return out;
}

}  // namespace udgp

#endif
