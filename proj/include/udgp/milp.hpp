#ifndef UDGP_MILP_HPP
#define UDGP_MILP_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "udgp/common.hpp"
#include "udgp/io.hpp"

namespace udgp {


enum class Relation : std::uint8_t { LessEqual, Equal, GreaterEqual };

// Sparse minimization model with bounded continuous and integer variables.
// Rows are stored CSR-style so multi-million-row encodings stay compact;
// variable names are optional and synthesized as x<j> when absent.
class MilpModel {
  public:
    int add_var(double lb, double ub, bool integer, std::string name = {}) {
        lb_.push_back(lb);
        ub_.push_back(ub);
        integer_.push_back(integer ? 1 : 0);
        obj_.push_back(0.0);
        if (!name.empty()) {
            names_.resize(lb_.size());
            names_.back() = std::move(name);
        } else if (!names_.empty()) {
            names_.resize(lb_.size());
        }
        return static_cast<int>(lb_.size()) - 1;
    }

    int add_binary(std::string name = {}) { return add_var(0.0, 1.0, true, std::move(name)); }

    void set_objective(int var, double coef) { obj_[var] = coef; }

    int add_row(Relation rel, double rhs, std::span<const std::pair<int, double>> terms) {
        for (const auto& [var, coef] : terms) {
            col_.push_back(var);
            coef_.push_back(coef);
        }
        row_start_.push_back(static_cast<std::int64_t>(col_.size()));
        relation_.push_back(rel);
        rhs_.push_back(rhs);
        return num_rows() - 1;
    }

    int add_row(Relation rel, double rhs, std::initializer_list<std::pair<int, double>> terms) {
        return add_row(rel, rhs, std::span<const std::pair<int, double>>(terms.begin(), terms.size()));
    }

    int num_vars() const { return static_cast<int>(lb_.size()); }
    int num_rows() const { return static_cast<int>(rhs_.size()); }
    std::int64_t num_nonzeros() const { return static_cast<std::int64_t>(col_.size()); }

    double lb(int var) const { return lb_[var]; }
    double ub(int var) const { return ub_[var]; }
    bool is_integer(int var) const { return integer_[var] != 0; }
    double objective_coef(int var) const { return obj_[var]; }
    Relation relation(int row) const { return relation_[row]; }
    double rhs(int row) const { return rhs_[row]; }

    std::string var_name(int var) const {
        if (var < static_cast<int>(names_.size()) && !names_[var].empty()) return names_[var];
        return "x" + std::to_string(var);
    }

    struct RowView {
        std::span<const std::int32_t> cols;
        std::span<const double> coefs;
    };

    RowView row(int r) const {
        const auto begin = static_cast<size_t>(row_start_[r]);
        const auto end = static_cast<size_t>(row_start_[r + 1]);
        return {std::span(col_).subspan(begin, end - begin),
                std::span(coef_).subspan(begin, end - begin)};
    }

    double objective_value(std::span<const double> values) const {
        double sum = 0.0;
        for (int j = 0; j < num_vars(); ++j) sum += obj_[j] * values[j];
        return sum;
    }

    double row_activity(int r, std::span<const double> values) const {
        const RowView view = row(r);
        double sum = 0.0;
        for (size_t t = 0; t < view.cols.size(); ++t) sum += view.coefs[t] * values[view.cols[t]];
        return sum;
    }

    // Largest constraint violation, scaled by 1 + |rhs| per row (bound
    // violations scaled the same way). Direct evaluation, independent of any
    // solver machinery.
    double max_violation(std::span<const double> values) const {
        double worst = 0.0;
        for (int j = 0; j < num_vars(); ++j) {
            const double scale = 1.0 + std::max(std::abs(lb_[j]), std::abs(ub_[j]) == kInf ? 0.0 : std::abs(ub_[j]));
            if (values[j] < lb_[j]) worst = std::max(worst, (lb_[j] - values[j]) / scale);
            if (values[j] > ub_[j]) worst = std::max(worst, (values[j] - ub_[j]) / scale);
        }
        for (int r = 0; r < num_rows(); ++r) {
            const double activity = row_activity(r, values);
            const double scale = 1.0 + std::abs(rhs_[r]);
            double viol = 0.0;
            switch (relation_[r]) {
                case Relation::LessEqual: viol = activity - rhs_[r]; break;
                case Relation::GreaterEqual: viol = rhs_[r] - activity; break;
                case Relation::Equal: viol = std::abs(activity - rhs_[r]); break;
            }
            if (viol > 0.0) worst = std::max(worst, viol / scale);
        }
        return worst;
    }

    bool is_feasible(std::span<const double> values, double tol) const {
        return max_violation(values) <= tol;
    }

    double max_integrality_violation(std::span<const double> values) const {
        double worst = 0.0;
        for (int j = 0; j < num_vars(); ++j)
            if (integer_[j]) {
                const double frac = std::abs(values[j] - std::round(values[j]));
                worst = std::max(worst, frac);
            }
        return worst;
    }

    void validate() const {
        for (int j = 0; j < num_vars(); ++j) {
            if (std::isnan(lb_[j]) || std::isnan(ub_[j]) || lb_[j] > ub_[j])
                throw Error(strfmt("MilpModel: bad bounds on variable %d", j));
            if (integer_[j] && (!std::isfinite(lb_[j]) || !std::isfinite(ub_[j])))
                throw Error(strfmt("MilpModel: integer variable %d needs finite bounds", j));
            if (!std::isfinite(obj_[j]))
                throw Error(strfmt("MilpModel: non-finite objective coefficient on %d", j));
        }
        for (double c : coef_)
            if (!std::isfinite(c)) throw Error("MilpModel: non-finite constraint coefficient");
        for (double b : rhs_)
            if (!std::isfinite(b)) throw Error("MilpModel: non-finite right-hand side");
    }

  private:
    std::vector<double> lb_, ub_, obj_;
    std::vector<std::uint8_t> integer_;
    std::vector<std::string> names_;
    std::vector<std::int64_t> row_start_{0};
    std::vector<std::int32_t> col_;
    std::vector<double> coef_;
    std::vector<Relation> relation_;
    std::vector<double> rhs_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, Limit };

struct LpSolution {
    LpStatus status = LpStatus::Limit;
    std::vector<double> values;
    double objective = kInf;
    long iterations = 0;
};

enum class MilpStatus { Optimal, FeasibleLimit, Infeasible, UnboundedRelaxation };

inline const char* to_string(MilpStatus status) {
    switch (status) {
        case MilpStatus::Optimal: return "Optimal";
        case MilpStatus::FeasibleLimit: return "FeasibleLimit";
        case MilpStatus::Infeasible: return "Infeasible";
        case MilpStatus::UnboundedRelaxation: return "UnboundedRelaxation";
    }
    return "?";
}

struct MilpSolution {
    MilpStatus status = MilpStatus::FeasibleLimit;
    bool has_incumbent = false;
    std::vector<double> values;   // empty when no incumbent was found
    double objective = kInf;
    double best_bound = -kInf;
    long nodes = 0;
    double seconds = 0.0;
};

// LP-style text export for cross-checking against external solvers.
// Layout: Minimize / Subject To / Bounds / Binaries / Generals / End, one
// constraint per line, coefficients printed with 17 significant digits.
inline void write_lp(const std::string& path, const MilpModel& model) {
    std::ostringstream out;
    auto term = [](double coef, const std::string& name, bool lead) {
        std::string s;
        if (coef >= 0.0) s = lead ? "" : "+ ";
        else {
            s = "- ";
            coef = -coef;
        }
        return s + detail::format_value(coef) + " " + name;
    };

    out << "Minimize\n obj:";
    {
        bool lead = true;
        for (int j = 0; j < model.num_vars(); ++j) {
            if (model.objective_coef(j) == 0.0) continue;
            out << ' ' << term(model.objective_coef(j), model.var_name(j), lead);
            lead = false;
        }
        if (lead) out << " 0 " << (model.num_vars() > 0 ? model.var_name(0) : "x0");
    }
    out << "\nSubject To\n";
    for (int r = 0; r < model.num_rows(); ++r) {
        const auto view = model.row(r);
        out << " c" << r << ':';
        bool lead = true;
        for (size_t t = 0; t < view.cols.size(); ++t) {
            out << ' ' << term(view.coefs[t], model.var_name(view.cols[t]), lead);
            lead = false;
        }
        switch (model.relation(r)) {
            case Relation::LessEqual: out << " <= "; break;
            case Relation::Equal: out << " = "; break;
            case Relation::GreaterEqual: out << " >= "; break;
        }
        out << detail::format_value(model.rhs(r)) << '\n';
    }
    out << "Bounds\n";
    for (int j = 0; j < model.num_vars(); ++j) {
        const double lo = model.lb(j);
        const double hi = model.ub(j);
        if (model.is_integer(j) && lo == 0.0 && hi == 1.0) continue;
        out << ' ';
        if (lo == -kInf && hi == kInf) {
            out << model.var_name(j) << " free\n";
            continue;
        }
        if (lo != -kInf) out << detail::format_value(lo) << " <= ";
        out << model.var_name(j);
        if (hi != kInf) out << " <= " << detail::format_value(hi);
        out << '\n';
    }
    bool any_binary = false, any_general = false;
    for (int j = 0; j < model.num_vars(); ++j)
        if (model.is_integer(j)) {
            (model.lb(j) == 0.0 && model.ub(j) == 1.0 ? any_binary : any_general) = true;
        }
    if (any_binary) {
        out << "Binaries\n";
        for (int j = 0; j < model.num_vars(); ++j)
            if (model.is_integer(j) && model.lb(j) == 0.0 && model.ub(j) == 1.0)
                out << ' ' << model.var_name(j) << '\n';
    }
    if (any_general) {
        out << "Generals\n";
        for (int j = 0; j < model.num_vars(); ++j)
            if (model.is_integer(j) && !(model.lb(j) == 0.0 && model.ub(j) == 1.0))
                out << ' ' << model.var_name(j) << '\n';
    }
    out << "End\n";
    detail::write_file_atomic(path, out.str());
}

}  // namespace udgp

#endif
