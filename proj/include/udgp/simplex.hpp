#ifndef UDGP_SIMPLEX_HPP
#define UDGP_SIMPLEX_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>

#include "udgp/common.hpp"
#include "udgp/milp.hpp"

namespace udgp {

struct SimplexOptions {
    long iter_limit = 0;  // 0 = pick from problem size
    bool has_deadline = false;
    std::chrono::steady_clock::time_point deadline{};
};

namespace detail {

// Bounded-variable primal simplex on a dense tableau, two phases with
// artificial variables. Dantzig pricing with a Bland fallback once pivots
// stall; reduced-cost rows and basic values are refreshed periodically to
// contain round-off drift.
class Simplex {
  public:
    Simplex(const MilpModel& model, std::span<const double> lb_over,
            std::span<const double> ub_over, const SimplexOptions& options)
        : model_(model), options_(options) {
        ns_ = model.num_vars();
        nr_ = model.num_rows();
        ncap_ = ns_ + 2 * nr_;  // structural + slacks + room for artificials
        lb_.assign(lb_over.begin(), lb_over.end());
        ub_.assign(ub_over.begin(), ub_over.end());
        lb_.resize(ncap_);
        ub_.resize(ncap_);
    }

    LpSolution run() {
        for (int j = 0; j < ns_; ++j)
            if (lb_[j] > ub_[j]) return {LpStatus::Infeasible, {}, kInf, 0};
        if (nr_ == 0) return solve_unconstrained();

        build_tableau();
        const long cap = options_.iter_limit > 0
                             ? options_.iter_limit
                             : 20000 + 100L * (nr_ + ns_);

        // Phase 1: minimize total artificial value.
        refresh_duals(phase1_cost_);
        const RunOutcome first = iterate(cap);
        if (first == RunOutcome::Limit) return limited();
        if (first == RunOutcome::Unbounded)
            throw Error("simplex: phase-1 objective unbounded");
        double infeas = 0.0;
        for (int r = 0; r < nr_; ++r)
            if (basis_[r] >= ns_ + nr_) infeas += xb_[r];
        if (infeas > tol::feasibility * std::max(1.0, rhs_scale_))
            return {LpStatus::Infeasible, {}, kInf, iterations_};

        drive_out_artificials();
        for (int j = ns_ + nr_; j < ns_ + nr_ + nart_; ++j) lb_[j] = ub_[j] = 0.0;

        // Phase 2: the real objective.
        refresh_duals(phase2_cost_);
        const RunOutcome second = iterate(cap);
        if (second == RunOutcome::Limit) return limited();
        if (second == RunOutcome::Unbounded)
            return {LpStatus::Unbounded, {}, -kInf, iterations_};

        LpSolution out;
        out.status = LpStatus::Optimal;
        out.values = extract_values();
        out.objective = model_.objective_value(out.values);
        out.iterations = iterations_;
        return out;
    }

  private:
    enum class State : std::uint8_t { Basic, AtLower, AtUpper, FreeNB };
    enum class RunOutcome { OptimalPhase, Unbounded, Limit };

    const MilpModel& model_;
    SimplexOptions options_;
    int ns_ = 0, nr_ = 0, ncap_ = 0, nart_ = 0;
    long iterations_ = 0;
    double rhs_scale_ = 1.0;
    std::vector<double> tab_;   // nr x (ncap + 1), last column carries the rhs
    std::vector<double> lb_, ub_;
    std::vector<double> xb_;
    std::vector<int> basis_;
    std::vector<State> state_;
    std::vector<double> dual_;
    std::vector<double> phase1_cost_, phase2_cost_;
    bool bland_ = false;
    int stalled_ = 0;

    double* row(int r) { return tab_.data() + static_cast<size_t>(r) * (ncap_ + 1); }
    double value_of(int j) const {
        switch (state_[j]) {
            case State::AtLower: return lb_[j];
            case State::AtUpper: return ub_[j];
            default: return 0.0;
        }
    }

    LpSolution solve_unconstrained() {
        std::vector<double> values(ns_, 0.0);
        for (int j = 0; j < ns_; ++j) {
            const double c = model_.objective_coef(j);
            if (c > 0.0) {
                if (lb_[j] == -kInf) return {LpStatus::Unbounded, {}, -kInf, 0};
                values[j] = lb_[j];
            } else if (c < 0.0) {
                if (ub_[j] == kInf) return {LpStatus::Unbounded, {}, -kInf, 0};
                values[j] = ub_[j];
            } else {
                values[j] = std::isfinite(lb_[j]) ? lb_[j]
                          : std::isfinite(ub_[j]) ? ub_[j]
                                                  : 0.0;
            }
        }
        return {LpStatus::Optimal, values, model_.objective_value(values), 0};
    }

    void build_tableau() {
        tab_.assign(static_cast<size_t>(nr_) * (ncap_ + 1), 0.0);
        xb_.assign(nr_, 0.0);
        basis_.assign(nr_, -1);
        state_.assign(ncap_, State::AtLower);
        for (int j = 0; j < ns_; ++j) {
            if (std::isfinite(lb_[j])) state_[j] = State::AtLower;
            else if (std::isfinite(ub_[j])) state_[j] = State::AtUpper;
            else state_[j] = State::FreeNB;
        }
        for (int r = 0; r < nr_; ++r) {
            const auto view = model_.row(r);
            double* tr = row(r);
            for (size_t t = 0; t < view.cols.size(); ++t) tr[view.cols[t]] += view.coefs[t];
            tr[ncap_] = model_.rhs(r);
            rhs_scale_ = std::max(rhs_scale_, std::abs(model_.rhs(r)));
            const int slack = ns_ + r;
            tr[slack] = 1.0;
            switch (model_.relation(r)) {
                case Relation::LessEqual: lb_[slack] = 0.0; ub_[slack] = kInf; break;
                case Relation::GreaterEqual: lb_[slack] = -kInf; ub_[slack] = 0.0; break;
                case Relation::Equal: lb_[slack] = 0.0; ub_[slack] = 0.0; break;
            }
            double residual = model_.rhs(r);
            for (size_t t = 0; t < view.cols.size(); ++t)
                residual -= view.coefs[t] * value_of(view.cols[t]);
            const double clamped = std::clamp(residual, lb_[slack], ub_[slack]);
            if (clamped == residual) {
                basis_[r] = slack;
                state_[slack] = State::Basic;
                xb_[r] = residual;
            } else {
                state_[slack] = (clamped == lb_[slack]) ? State::AtLower : State::AtUpper;
                const double rem = residual - clamped;
                // Keep the basis column at +1: flip the whole row when the
                // artificial would otherwise need a -1 coefficient.
                if (rem < 0.0)
                    for (int j = 0; j <= ncap_; ++j) tr[j] = -tr[j];
                const int art = ns_ + nr_ + nart_++;
                tr[art] = 1.0;
                lb_[art] = 0.0;
                ub_[art] = kInf;
                basis_[r] = art;
                state_[art] = State::Basic;
                xb_[r] = std::abs(rem);
            }
        }
        phase1_cost_.assign(ncap_, 0.0);
        for (int a = 0; a < nart_; ++a) phase1_cost_[ns_ + nr_ + a] = 1.0;
        phase2_cost_.assign(ncap_, 0.0);
        for (int j = 0; j < ns_; ++j) phase2_cost_[j] = model_.objective_coef(j);
        active_cost_ = &phase1_cost_;
    }

    const std::vector<double>* active_cost_ = nullptr;

    void refresh_duals(const std::vector<double>& cost) {
        active_cost_ = &cost;
        dual_.assign(ncap_, 0.0);
        const int ntot = ns_ + nr_ + nart_;
        for (int j = 0; j < ntot; ++j) dual_[j] = cost[j];
        for (int r = 0; r < nr_; ++r) {
            const double cb = cost[basis_[r]];
            if (cb == 0.0) continue;
            const double* tr = row(r);
            for (int j = 0; j < ntot; ++j) dual_[j] -= cb * tr[j];
        }
        refresh_basics();
    }

    void refresh_basics() {
        const int ntot = ns_ + nr_ + nart_;
        for (int r = 0; r < nr_; ++r) {
            const double* tr = row(r);
            double v = tr[ncap_];
            for (int j = 0; j < ntot; ++j) {
                if (state_[j] == State::Basic) continue;
                const double xj = value_of(j);
                if (xj != 0.0) v -= tr[j] * xj;
            }
            xb_[r] = v;
        }
    }

    // Entering-variable choice: returns column and direction, or -1 when the
    // current point is optimal for the active cost.
    int price(int& direction) const {
        constexpr double dtol = 1e-9;
        const int ntot = ns_ + nr_ + nart_;
        int best = -1;
        double best_score = dtol;
        for (int j = 0; j < ntot; ++j) {
            if (state_[j] == State::Basic) continue;
            if (j >= ns_ + nr_) continue;       // artificials never re-enter
            if (lb_[j] == ub_[j]) continue;     // pinned
            const double d = dual_[j];
            double score = 0.0;
            int dir = 0;
            if (state_[j] == State::AtLower && d < -dtol) { score = -d; dir = +1; }
            else if (state_[j] == State::AtUpper && d > dtol) { score = d; dir = -1; }
            else if (state_[j] == State::FreeNB && std::abs(d) > dtol) {
                score = std::abs(d);
                dir = d < 0.0 ? +1 : -1;
            }
            if (dir == 0) continue;
            if (bland_) { direction = dir; return j; }
            if (score > best_score) {
                best_score = score;
                best = j;
                direction = dir;
            }
        }
        return best;
    }

    RunOutcome iterate(long cap) {
        while (true) {
            if (iterations_ >= cap) return RunOutcome::Limit;
            if (options_.has_deadline && (iterations_ & 127) == 0 &&
                std::chrono::steady_clock::now() > options_.deadline)
                return RunOutcome::Limit;
            if ((iterations_ & 255) == 255) refresh_duals(*active_cost_);

            int dir = 0;
            const int enter = price(dir);
            if (enter < 0) return RunOutcome::OptimalPhase;
            ++iterations_;

            constexpr double ptol = 1e-9;
            double limit = kInf;  // max step along the chosen direction
            int leave_row = -1;
            double leave_pivot = 0.0;
            bool leave_at_lower = true;
            for (int r = 0; r < nr_; ++r) {
                const double alpha = row(r)[enter];
                if (std::abs(alpha) <= ptol) continue;
                const double rate = -dir * alpha;  // d(xb_r)/dt
                const int b = basis_[r];
                double t;
                bool at_lower;
                if (rate < 0.0) {
                    if (lb_[b] == -kInf) continue;
                    t = (xb_[r] - lb_[b]) / (-rate);
                    at_lower = true;
                } else {
                    if (ub_[b] == kInf) continue;
                    t = (ub_[b] - xb_[r]) / rate;
                    at_lower = false;
                }
                t = std::max(t, 0.0);
                const bool better =
                    t < limit - 1e-10 ||
                    (t < limit + 1e-10 &&
                     (bland_ ? (leave_row < 0 || b < basis_[leave_row])
                             : std::abs(alpha) > std::abs(leave_pivot)));
                if (better) {
                    limit = t;
                    leave_row = r;
                    leave_pivot = alpha;
                    leave_at_lower = at_lower;
                }
            }
            const double range = (lb_[enter] == -kInf || ub_[enter] == kInf)
                                     ? kInf
                                     : ub_[enter] - lb_[enter];
            if (range < limit) {
                // Bound flip: the entering variable crosses to its other bound.
                const double t = range;
                apply_step(enter, dir, t);
                state_[enter] = (state_[enter] == State::AtLower) ? State::AtUpper : State::AtLower;
                note_progress(t);
                continue;
            }
            if (leave_row < 0) return RunOutcome::Unbounded;

            const double t = limit;
            apply_step(enter, dir, t);
            const double enter_value = value_of(enter) + dir * t;
            const int leave = basis_[leave_row];
            state_[leave] = leave_at_lower ? State::AtLower : State::AtUpper;
            pivot(leave_row, enter);
            basis_[leave_row] = enter;
            state_[enter] = State::Basic;
            xb_[leave_row] = enter_value;
            note_progress(t);
        }
    }

    void apply_step(int enter, int dir, double t) {
        if (t == 0.0) return;
        for (int r = 0; r < nr_; ++r) {
            const double alpha = row(r)[enter];
            if (alpha != 0.0) xb_[r] -= dir * alpha * t;
        }
    }

    void note_progress(double t) {
        if (t > 1e-9) {
            stalled_ = 0;
            bland_ = false;
        } else if (++stalled_ > 300) {
            bland_ = true;
        }
    }

    void pivot(int prow, int pcol) {
        double* pr = row(prow);
        const double inv = 1.0 / pr[pcol];
        const int width = ncap_ + 1;
        for (int j = 0; j < width; ++j) pr[j] *= inv;
        pr[pcol] = 1.0;
        for (int r = 0; r < nr_; ++r) {
            if (r == prow) continue;
            double* tr = row(r);
            const double factor = tr[pcol];
            if (factor == 0.0) continue;
            for (int j = 0; j < width; ++j) tr[j] -= factor * pr[j];
            tr[pcol] = 0.0;
        }
        const double dfactor = dual_[pcol];
        if (dfactor != 0.0) {
            for (int j = 0; j < ncap_; ++j) dual_[j] -= dfactor * pr[j];
            dual_[pcol] = 0.0;
        }
    }

    // Degenerate pivots that swap still-basic artificials for structural or
    // slack columns; rows with no such column are redundant and keep their
    // artificial pinned at zero.
    void drive_out_artificials() {
        for (int r = 0; r < nr_; ++r) {
            if (basis_[r] < ns_ + nr_) continue;
            const double* tr = row(r);
            int pick = -1;
            double best = 1e-7;
            for (int j = 0; j < ns_ + nr_; ++j) {
                if (state_[j] == State::Basic) continue;
                if (std::abs(tr[j]) > best) {
                    best = std::abs(tr[j]);
                    pick = j;
                }
            }
            if (pick < 0) continue;
            const int art = basis_[r];
            state_[art] = State::AtLower;
            const double keep = value_of(pick);
            pivot(r, pick);
            basis_[r] = pick;
            state_[pick] = State::Basic;
            xb_[r] = keep;
        }
    }

    std::vector<double> extract_values() {
        std::vector<double> values(ns_);
        for (int j = 0; j < ns_; ++j) values[j] = value_of(j);
        for (int r = 0; r < nr_; ++r)
            if (basis_[r] < ns_) values[basis_[r]] = xb_[r];
        for (int j = 0; j < ns_; ++j) {
            if (lb_[j] != -kInf) values[j] = std::max(values[j], lb_[j]);
            if (ub_[j] != kInf) values[j] = std::min(values[j], ub_[j]);
        }
        return values;
    }

    LpSolution limited() {
        LpSolution out;
        out.status = LpStatus::Limit;
        out.values = extract_values();
        out.objective = model_.objective_value(out.values);
        out.iterations = iterations_;
        return out;
    }
};

}  // namespace detail

// Solves the continuous relaxation (integrality markers are ignored) with the
// given working bounds in place of the model's own.
inline LpSolution solve_lp(const MilpModel& model, std::span<const double> lb,
                           std::span<const double> ub, const SimplexOptions& options = {}) {
    detail::Simplex solver(model, lb, ub, options);
    return solver.run();
}

inline LpSolution solve_lp(const MilpModel& model, const SimplexOptions& options = {}) {
    std::vector<double> lb(model.num_vars()), ub(model.num_vars());
    for (int j = 0; j < model.num_vars(); ++j) {
        lb[j] = model.lb(j);
        ub[j] = model.ub(j);
    }
    return solve_lp(model, lb, ub, options);
}

}  // namespace udgp

#endif
