#ifndef UDGP_MIDDP_HPP
#define UDGP_MIDDP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "udgp/common.hpp"
#include "udgp/instance.hpp"
#include "udgp/linalg.hpp"
#include "udgp/milp.hpp"
#include "udgp/simplex.hpp"

namespace udgp {

enum class BigMVariant {
    SquaredSum,  // (sum of distances)^2; CLI token "prop22"
    SumSquares,  // sum of squared distances; CLI token "experimental" (default)
};

inline double big_m(const DistanceList& delta, BigMVariant variant) {
    double sum = 0.0, sum_sq = 0.0;
    for (double d : delta.values) {
        sum += d;
        sum_sq += d * d;
    }
    return variant == BigMVariant::SquaredSum ? sum * sum : sum_sq;
}

struct MiddpCounts {
    std::int64_t x_vars = 0, t_vars = 0, binaries = 0, slack_vars = 0;
    std::int64_t sandwich_rows = 0, assignment_rows = 0, pair_rows = 0, dd_rows = 0,
                 envelope_rows = 0;
    std::int64_t nonzeros = 0;
    std::int64_t continuous_vars() const { return x_vars + t_vars + slack_vars; }
    std::int64_t vars() const { return continuous_vars() + binaries; }
    std::int64_t rows() const {
        return sandwich_rows + assignment_rows + pair_rows + dd_rows + envelope_rows;
    }
};

// Closed-form model dimensions; pass the distinct-group count as m to size a
// multiplicity-grouped encoding.
inline MiddpCounts middp_counts(int n, std::int64_t m) {
    const std::int64_t N = static_cast<std::int64_t>(n) * (n - 1) / 2;
    MiddpCounts c;
    c.x_vars = static_cast<std::int64_t>(n) * (n + 1) / 2;
    c.t_vars = N;
    c.binaries = N * m;
    c.slack_vars = 2 * N * m;
    c.sandwich_rows = 2 * N * m;
    c.assignment_rows = m;
    c.pair_rows = N;
    c.dd_rows = n;
    c.envelope_rows = 2 * N;
    c.nonzeros = 12 * N * m + static_cast<std::int64_t>(n) * n + 4 * N;
    return c;
}

struct MiddpOptions {
    bool group_multiplicities = false;
    bool sym_break = false;
};

// Indicator-constraint encoding of the assignment problem over the
// diagonally-dominant cone: squared pair distances tracked by a linearized
// Gram block X with envelope |X_ij| <= T_ij, sandwich rows active only for
// the pair a distance is assigned to, slack pair z+/z- absorbing the misfit.
class MiddpEncoding {
  public:
    MilpModel model;
    int n = 0;
    std::int64_t m = 0;         // original distance count
    std::int64_t groups = 0;    // assignment columns (== m unless grouped)
    double big_m_value = 0.0;
    bool grouped = false;
    std::vector<double> group_value;
    std::vector<std::int64_t> group_mult;
    std::vector<std::int64_t> group_of;  // per original distance index
    std::vector<double> delta;           // original sorted values

    std::int64_t pair_count() const { return static_cast<std::int64_t>(n) * (n - 1) / 2; }
    std::int64_t pair_index(int i, int j) const {
        return static_cast<std::int64_t>(i) * (2 * n - i - 1) / 2 + (j - i - 1);
    }
    std::pair<int, int> pair_of(std::int64_t p) const {
        int i = 0;
        std::int64_t rest = p;
        while (rest >= n - 1 - i) {
            rest -= n - 1 - i;
            ++i;
        }
        return {i, static_cast<int>(i + 1 + rest)};
    }
    std::int64_t xvar(int i, int j) const {
        if (i > j) std::swap(i, j);
        return static_cast<std::int64_t>(i) * n - static_cast<std::int64_t>(i) * (i - 1) / 2 +
               (j - i);
    }
    std::int64_t tvar(std::int64_t p) const { return off_t_ + p; }
    std::int64_t yvar(std::int64_t p, std::int64_t g) const { return off_y_ + p * groups + g; }
    std::int64_t zplus(std::int64_t p, std::int64_t g) const { return off_zp_ + p * groups + g; }
    std::int64_t zminus(std::int64_t p, std::int64_t g) const { return off_zm_ + p * groups + g; }

    std::string name_of(std::int64_t var) const {
        auto pair_tag = [&](std::int64_t p) {
            const auto [i, j] = pair_of(p);
            return std::to_string(i + 1) + "_" + std::to_string(j + 1);
        };
        if (var < off_t_) {
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j)
                    if (xvar(i, j) == var)
                        return "X_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
        }
        if (var < off_y_) return "T_" + pair_tag(var - off_t_);
        const char* role = "y_";
        std::int64_t base = off_y_;
        if (var >= off_zm_) {
            role = "zm_";
            base = off_zm_;
        } else if (var >= off_zp_) {
            role = "zp_";
            base = off_zp_;
        }
        const std::int64_t p = (var - base) / groups;
        const std::int64_t g = (var - base) % groups;
        const std::string tag = grouped ? "g" + std::to_string(g + 1) : std::to_string(g + 1);
        return role + pair_tag(p) + "_" + tag;
    }

    friend MiddpEncoding build_middp(const DistanceList&, double, const MiddpOptions&);

  private:
    std::int64_t off_t_ = 0, off_y_ = 0, off_zp_ = 0, off_zm_ = 0;
};

namespace detail {
// Relative spread below which two sorted distance values count as equal for
// grouping and symmetry-breaking.
inline constexpr double kGroupTol = 1e-9;

inline bool same_value(double a, double b) {
    return std::abs(b - a) <= kGroupTol * std::max(1.0, std::abs(a));
}
}  // namespace detail

inline MiddpEncoding build_middp(const DistanceList& delta, double M,
                                 const MiddpOptions& options = {}) {
    if (!(M > 0.0) || !std::isfinite(M)) throw Error("build_middp: M must be positive");
    MiddpEncoding enc;
    enc.n = delta.n;
    enc.m = delta.m();
    enc.big_m_value = M;
    enc.grouped = options.group_multiplicities;
    enc.delta = delta.values;

    const int n = delta.n;
    const std::int64_t N = enc.pair_count();

    enc.group_of.resize(enc.m);
    if (enc.grouped) {
        for (std::int64_t l = 0; l < enc.m; ++l) {
            if (l == 0 || !detail::same_value(enc.group_value.back(), delta.values[l])) {
                enc.group_value.push_back(delta.values[l]);
                enc.group_mult.push_back(0);
            }
            enc.group_of[l] = static_cast<std::int64_t>(enc.group_value.size()) - 1;
            ++enc.group_mult.back();
        }
    } else {
        enc.group_value = delta.values;
        enc.group_mult.assign(enc.m, 1);
        for (std::int64_t l = 0; l < enc.m; ++l) enc.group_of[l] = l;
    }
    const std::int64_t G = static_cast<std::int64_t>(enc.group_value.size());
    enc.groups = G;
    enc.off_t_ = static_cast<std::int64_t>(n) * (n + 1) / 2;
    enc.off_y_ = enc.off_t_ + N;
    enc.off_zp_ = enc.off_y_ + N * G;
    enc.off_zm_ = enc.off_zp_ + N * G;

    MilpModel& mdl = enc.model;
    // Readable names only while they stay cheap; large encodings fall back to
    // synthesized x<j> names (name_of still decodes roles either way).
    const bool with_names = middp_counts(n, G).vars() <= 100000;
    auto named = [&](std::int64_t var) { return with_names ? enc.name_of(var) : std::string{}; };

    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            mdl.add_var(i == j ? 0.0 : -M, M, false, named(enc.xvar(i, j)));
    for (std::int64_t p = 0; p < N; ++p) mdl.add_var(0.0, M, false, named(enc.tvar(p)));
    for (std::int64_t p = 0; p < N; ++p)
        for (std::int64_t g = 0; g < G; ++g) mdl.add_var(0.0, 1.0, true, named(enc.yvar(p, g)));
    for (std::int64_t p = 0; p < N; ++p)
        for (std::int64_t g = 0; g < G; ++g) {
            mdl.add_var(0.0, kInf, false, named(enc.zplus(p, g)));
            mdl.set_objective(mdl.num_vars() - 1, 1.0);
        }
    for (std::int64_t p = 0; p < N; ++p)
        for (std::int64_t g = 0; g < G; ++g) {
            mdl.add_var(0.0, kInf, false, named(enc.zminus(p, g)));
            mdl.set_objective(mdl.num_vars() - 1, 1.0);
        }

    // Sandwich rows: for assigned (y=1) pairs the squared distance
    // q_ij = X_ii + X_jj - 2 X_ij must sit within [delta^2 - z-, delta^2 + z+].
    std::vector<std::pair<int, double>> terms;
    for (std::int64_t p = 0; p < N; ++p) {
        const auto [i, j] = enc.pair_of(p);
        for (std::int64_t g = 0; g < G; ++g) {
            const double d2 = enc.group_value[g] * enc.group_value[g];
            terms = {{static_cast<int>(enc.xvar(i, i)), 1.0},
                     {static_cast<int>(enc.xvar(j, j)), 1.0},
                     {static_cast<int>(enc.xvar(i, j)), -2.0},
                     {static_cast<int>(enc.zplus(p, g)), -1.0},
                     {static_cast<int>(enc.yvar(p, g)), M}};
            mdl.add_row(Relation::LessEqual, d2 + M, terms);
        }
    }
    for (std::int64_t p = 0; p < N; ++p) {
        const auto [i, j] = enc.pair_of(p);
        for (std::int64_t g = 0; g < G; ++g) {
            const double d2 = enc.group_value[g] * enc.group_value[g];
            terms = {{static_cast<int>(enc.xvar(i, i)), 1.0},
                     {static_cast<int>(enc.xvar(j, j)), 1.0},
                     {static_cast<int>(enc.xvar(i, j)), -2.0},
                     {static_cast<int>(enc.zminus(p, g)), 1.0},
                     {static_cast<int>(enc.yvar(p, g)), -M}};
            mdl.add_row(Relation::GreaterEqual, d2 - M, terms);
        }
    }
    for (std::int64_t g = 0; g < G; ++g) {
        terms.clear();
        for (std::int64_t p = 0; p < N; ++p)
            terms.emplace_back(static_cast<int>(enc.yvar(p, g)), 1.0);
        mdl.add_row(Relation::Equal, static_cast<double>(enc.group_mult[g]), terms);
    }
    for (std::int64_t p = 0; p < N; ++p) {
        terms.clear();
        for (std::int64_t g = 0; g < G; ++g)
            terms.emplace_back(static_cast<int>(enc.yvar(p, g)), 1.0);
        mdl.add_row(Relation::LessEqual, 1.0, terms);
    }
    for (int i = 0; i < n; ++i) {
        terms = {{static_cast<int>(enc.xvar(i, i)), 1.0}};
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const std::int64_t p = enc.pair_index(std::min(i, j), std::max(i, j));
            terms.emplace_back(static_cast<int>(enc.tvar(p)), -1.0);
        }
        mdl.add_row(Relation::GreaterEqual, 0.0, terms);
    }
    for (std::int64_t p = 0; p < N; ++p) {
        const auto [i, j] = enc.pair_of(p);
        mdl.add_row(Relation::LessEqual, 0.0,
                    {{static_cast<int>(enc.xvar(i, j)), 1.0},
                     {static_cast<int>(enc.tvar(p)), -1.0}});
        mdl.add_row(Relation::LessEqual, 0.0,
                    {{static_cast<int>(enc.xvar(i, j)), -1.0},
                     {static_cast<int>(enc.tvar(p)), -1.0}});
    }

    // Optional ordering of equal consecutive values: the pair chosen for the
    // later index must not precede the pair chosen for the earlier one.
    if (options.sym_break) {
        for (std::int64_t g = 0; g + 1 < G; ++g) {
            if (!detail::same_value(enc.group_value[g], enc.group_value[g + 1])) continue;
            for (std::int64_t p = 0; p < N; ++p) {
                terms.clear();
                for (std::int64_t q = 0; q <= p; ++q) {
                    terms.emplace_back(static_cast<int>(enc.yvar(q, g)), 1.0);
                    terms.emplace_back(static_cast<int>(enc.yvar(q, g + 1)), -1.0);
                }
                mdl.add_row(Relation::GreaterEqual, 0.0, terms);
            }
        }
    }
    return enc;
}

inline Assignment extract_assignment(const MiddpEncoding& enc, const MilpSolution& sol) {
    if (!sol.has_incumbent) throw Error("extract_assignment: solution has no incumbent");
    const std::vector<double>& v = sol.values;
    const std::int64_t N = enc.pair_count();
    for (std::int64_t p = 0; p < N; ++p)
        for (std::int64_t g = 0; g < enc.groups; ++g) {
            const double y = v[enc.yvar(p, g)];
            if (std::abs(y - std::round(y)) > tol::integrality)
                throw Error(strfmt("extract_assignment: y for pair %lld group %lld = %.12g "
                                   "violates integrality",
                                   static_cast<long long>(p), static_cast<long long>(g), y));
        }

    Assignment out;
    out.n = enc.n;
    out.pairs.resize(enc.m, {-1, -1});
    std::vector<char> pair_used(N, 0);
    for (std::int64_t g = 0; g < enc.groups; ++g) {
        std::vector<std::int64_t> chosen;
        for (std::int64_t p = 0; p < N; ++p)
            if (v[enc.yvar(p, g)] > 0.5) chosen.push_back(p);
        if (static_cast<std::int64_t>(chosen.size()) != enc.group_mult[g])
            throw Error(strfmt("extract_assignment: group %lld selects %zu pairs, expected %lld",
                               static_cast<long long>(g), chosen.size(),
                               static_cast<long long>(enc.group_mult[g])));
        std::int64_t next = 0;
        for (std::int64_t l = 0; l < enc.m; ++l) {
            if (enc.group_of[l] != g) continue;
            const std::int64_t p = chosen[next++];
            if (pair_used[p]) throw Error("extract_assignment: pair assigned twice");
            pair_used[p] = 1;
            const auto [i, j] = enc.pair_of(p);
            out.pairs[l] = {i, j};
        }
    }
    for (const auto& [i, j] : out.pairs)
        if (i < 0) throw Error("extract_assignment: unassigned distance index");
    return out;
}

// Cuts the incumbent's exact binary support out of the model: of the y's it
// set to 1, at most all-but-one may be 1 together afterwards. The solve
// pipeline uses this to request a different assignment when the coordinate
// stage rejects one the model considered exact.
inline void append_exclusion_row(MiddpEncoding& enc, const std::vector<double>& incumbent) {
    std::vector<std::pair<int, double>> terms;
    const std::int64_t N = enc.pair_count();
    for (std::int64_t p = 0; p < N; ++p)
        for (std::int64_t g = 0; g < enc.groups; ++g)
            if (incumbent[enc.yvar(p, g)] > 0.5)
                terms.emplace_back(static_cast<int>(enc.yvar(p, g)), 1.0);
    if (terms.empty()) throw Error("append_exclusion_row: incumbent selects no binaries");
    enc.model.add_row(Relation::LessEqual, static_cast<double>(terms.size()) - 1.0, terms);
}

inline WeightedGraph assignment_to_graph(const Assignment& alpha, const DistanceList& delta) {
    if (static_cast<std::int64_t>(alpha.pairs.size()) != delta.m())
        throw Error("assignment_to_graph: assignment and distance list sizes differ");
    std::vector<Edge> edges;
    edges.reserve(alpha.pairs.size());
    for (size_t l = 0; l < alpha.pairs.size(); ++l) {
        const auto [i, j] = alpha.pairs[l];
        edges.push_back({i, j, delta.values[l]});
    }
    return WeightedGraph(alpha.n, std::move(edges));
}

// Optimal re-matching of a complete value list onto the pair distances of a
// fixed layout: for a sum of per-pair squared errors the sorted-against-sorted
// pairing is optimal, so the l-th smallest value goes to the pair with the
// l-th smallest fitted distance.
inline Assignment match_sorted_distances(const Realization& x, const DistanceList& delta) {
    if (!delta.complete() || x.n != delta.n)
        throw Error("match_sorted_distances: complete list over the same points required");
    struct Entry {
        double d;
        int i, j;
    };
    std::vector<Entry> fitted;
    fitted.reserve(delta.m());
    for (int i = 0; i < x.n; ++i)
        for (int j = i + 1; j < x.n; ++j) fitted.push_back({x.distance(i, j), i, j});
    std::stable_sort(fitted.begin(), fitted.end(),
                     [](const Entry& a, const Entry& b) { return a.d < b.d; });
    Assignment a;
    a.n = x.n;
    a.pairs.resize(delta.m());
    for (std::int64_t l = 0; l < delta.m(); ++l) a.pairs[l] = {fitted[l].i, fitted[l].j};
    return a;
}

inline double evaluate_minlp_objective(const Realization& x, const Assignment& alpha,
                                       const DistanceList& delta) {
    double sum = 0.0;
    for (size_t l = 0; l < alpha.pairs.size(); ++l) {
        const auto [i, j] = alpha.pairs[l];
        const double r = x.squared_distance(i, j) - delta.values[l] * delta.values[l];
        sum += r * r;
    }
    return sum;
}

struct SandwichResiduals {
    std::vector<double> z_minus, z_plus;
    double total() const {
        double s = 0.0;
        for (double v : z_minus) s += v;
        for (double v : z_plus) s += v;
        return s;
    }
};

inline SandwichResiduals evaluate_sandwich_residuals(const Realization& x, const Assignment& alpha,
                                                     const DistanceList& delta) {
    SandwichResiduals out;
    out.z_minus.resize(alpha.pairs.size());
    out.z_plus.resize(alpha.pairs.size());
    for (size_t l = 0; l < alpha.pairs.size(); ++l) {
        const auto [i, j] = alpha.pairs[l];
        const double gap = x.squared_distance(i, j) - delta.values[l] * delta.values[l];
        out.z_plus[l] = std::max(0.0, gap);
        out.z_minus[l] = std::max(0.0, -gap);
    }
    return out;
}

// Checks that every sandwich row can be deactivated at the centered
// ground-truth Gram point, i.e. |q_ij - delta_l^2| <= M for all pairs and
// values. Run on generated instances before trusting a big-M choice.
inline bool validate_big_m(const Realization& centered, const DistanceList& delta, double M) {
    double worst = 0.0;
    for (int i = 0; i < centered.n; ++i)
        for (int j = i + 1; j < centered.n; ++j) {
            const double q = centered.squared_distance(i, j);
            for (double d : delta.values) worst = std::max(worst, std::abs(q - d * d));
        }
    return worst <= M;
}

// Searches the distance-preserving family X_ij = G_ij + v_i + v_j for a
// diagonally dominant member via a small LP; returns it when the minimal
// dominance deficit is zero. Testing device only.
inline std::optional<SymMatrix> dd_shifted_gram(const Realization& x) {
    const int n = x.n;
    const SymMatrix gram = gram_from_realization(x);
    MilpModel lp;
    // v_i free, t_p >= |G_ij + v_i + v_j|, s_i >= dominance deficit of row i
    const int off_v = 0;
    for (int i = 0; i < n; ++i) lp.add_var(-kInf, kInf, false);
    const int off_t = lp.num_vars();
    const std::int64_t N = static_cast<std::int64_t>(n) * (n - 1) / 2;
    for (std::int64_t p = 0; p < N; ++p) lp.add_var(0.0, kInf, false);
    const int off_s = lp.num_vars();
    for (int i = 0; i < n; ++i) {
        lp.add_var(0.0, kInf, false);
        lp.set_objective(off_s + i, 1.0);
    }
    std::int64_t p = 0;
    std::vector<std::vector<int>> pair_of_row(n);
    for (int i = 0; i < n; ++i) pair_of_row[i].resize(n, -1);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++p) {
            pair_of_row[i][j] = pair_of_row[j][i] = static_cast<int>(p);
            // t_p - v_i - v_j >= G_ij and t_p + v_i + v_j >= -G_ij
            lp.add_row(Relation::GreaterEqual, gram(i, j),
                       {{off_t + static_cast<int>(p), 1.0}, {off_v + i, -1.0}, {off_v + j, -1.0}});
            lp.add_row(Relation::GreaterEqual, -gram(i, j),
                       {{off_t + static_cast<int>(p), 1.0}, {off_v + i, 1.0}, {off_v + j, 1.0}});
        }
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<int, double>> terms{{off_v + i, 2.0}, {off_s + i, 1.0}};
        for (int j = 0; j < n; ++j)
            if (j != i) terms.emplace_back(off_t + pair_of_row[i][j], -1.0);
        lp.add_row(Relation::GreaterEqual, -gram(i, i), terms);
    }
    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal || sol.objective > 1e-7) return std::nullopt;
    SymMatrix shifted(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v_i = sol.values[off_v + i];
            const double v_j = sol.values[off_v + j];
            shifted.set(i, j, gram(i, j) + v_i + v_j);
        }
    return shifted;
}

// Full variable vector for the encoding from a known realization and
// assignment: X from the (optionally dominance-shifted) Gram matrix, T as the
// off-diagonal envelope, y as the assignment indicator, slacks minimal.
inline std::vector<double> middp_point(const MiddpEncoding& enc, const SymMatrix& x_block,
                                       const Assignment& alpha) {
    std::vector<double> v(enc.model.num_vars(), 0.0);
    const int n = enc.n;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) v[enc.xvar(i, j)] = x_block(i, j);
    for (std::int64_t p = 0; p < enc.pair_count(); ++p) {
        const auto [i, j] = enc.pair_of(p);
        v[enc.tvar(p)] = std::abs(x_block(i, j));
    }
    for (size_t l = 0; l < alpha.pairs.size(); ++l) {
        const auto [i, j] = alpha.pairs[l];
        const std::int64_t p = enc.pair_index(i, j);
        const std::int64_t g = enc.group_of[l];
        v[enc.yvar(p, g)] = 1.0;
        const double q = x_block(i, i) + x_block(j, j) - 2.0 * x_block(i, j);
        const double gap = q - enc.group_value[g] * enc.group_value[g];
        v[enc.zplus(p, g)] = std::max(0.0, gap);
        v[enc.zminus(p, g)] = std::max(0.0, -gap);
    }
    return v;
}

struct BruteForceResult {
    Assignment assignment;
    Realization realization;
    double objective = kInf;
    std::int64_t leaves = 0;
};

namespace detail {

// Classical-scaling realizability probe for a fully assigned distance matrix:
// double-center the squared distances, decompose, and accept when at most K
// eigenvalues are materially positive and none materially negative.
inline std::optional<Realization> complete_embedding(int n, int k,
                                                     const std::vector<double>& dist, double tol) {
    SymMatrix d2(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double d = dist[static_cast<size_t>(i) * n + j];
            d2.set(i, j, d * d);
        }
    std::vector<double> row_mean(n, 0.0);
    double grand = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) row_mean[i] += d2(i, j);
        row_mean[i] /= n;
        grand += row_mean[i];
    }
    grand /= n;
    SymMatrix gram(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            gram.set(i, j, -0.5 * (d2(i, j) - row_mean[i] - row_mean[j] + grand));
    const SpectralDecomposition eig = spectral_decompose(gram);
    const double scale = std::max(1.0, std::abs(eig.eigenvalues.front()));
    if (eig.eigenvalues.back() < -tol * scale) return std::nullopt;
    for (size_t r = k; r < eig.eigenvalues.size(); ++r)
        if (eig.eigenvalues[r] > tol * scale) return std::nullopt;
    return pca_realization(gram, k, tol);
}

}  // namespace detail

// Exhaustive oracle for tiny instances. A first pass enumerates only
// triangle-consistent assignments looking for an exact-fit certificate (the
// objective cannot go below zero, so any such hit is globally optimal). Only
// when that fails does the full enumeration with a local solve per leaf run;
// that path carries the hard size guard.
template <typename DgpSolver>
BruteForceResult brute_force_udgp(const DistanceList& delta, DgpSolver&& solve_dgp) {
    const int n = delta.n;
    const std::int64_t m = delta.m();
    const std::int64_t N = delta.pair_count();
    if (n > 5 || m > 10 || (m > 8 && !delta.complete()))
        throw Error("brute_force_udgp: instance too large for oracle");

    constexpr double cert_tol = 1e-12;
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    const double scale = std::max(1.0, delta.values.back());
    std::vector<double> dist(static_cast<size_t>(n) * n, -1.0);
    std::vector<char> used(N, 0);
    std::vector<int> choice(m, -1);
    BruteForceResult best;
    best.assignment.n = n;
    best.assignment.pairs.assign(m, {-1, -1});

    auto triangle_ok = [&](int i, int j, double d) {
        for (int k2 = 0; k2 < n; ++k2) {
            if (k2 == i || k2 == j) continue;
            const double a = dist[static_cast<size_t>(i) * n + k2];
            const double b = dist[static_cast<size_t>(j) * n + k2];
            if (a < 0.0 || b < 0.0) continue;
            if (d > a + b + 1e-9 * scale || d < std::abs(a - b) - 1e-9 * scale) return false;
        }
        return true;
    };
    auto current_assignment = [&]() {
        Assignment a;
        a.n = n;
        a.pairs.resize(m);
        for (std::int64_t l = 0; l < m; ++l) a.pairs[l] = pairs[choice[l]];
        return a;
    };
    auto leaf_objective = [&](bool certificate_only) -> std::pair<double, Realization> {
        if (certificate_only && delta.complete()) {
            // Classical scaling settles complete leaves without a local solve.
            auto embedded = detail::complete_embedding(n, delta.k, dist, 1e-9);
            if (!embedded) return {kInf, Realization{}};
            return {evaluate_minlp_objective(*embedded, current_assignment(), delta), *embedded};
        }
        const Assignment alpha = current_assignment();
        const WeightedGraph graph = assignment_to_graph(alpha, delta);
        auto [x, obj] = solve_dgp(graph);
        return {obj, x};
    };

    // Pass 1: certificate search over triangle-consistent assignments.
    bool certified = false;
    auto search_exact = [&](auto&& self, std::int64_t l) -> void {
        if (certified) return;
        if (l == m) {
            ++best.leaves;
            auto [obj, x] = leaf_objective(true);
            if (obj <= cert_tol) {
                best.objective = obj;
                best.assignment = current_assignment();
                best.realization = x;
                certified = true;
            }
            return;
        }
        for (std::int64_t p = 0; p < N && !certified; ++p) {
            if (used[p]) continue;
            const auto [i, j] = pairs[p];
            const double d = delta.values[l];
            if (!triangle_ok(i, j, d)) continue;
            used[p] = 1;
            dist[static_cast<size_t>(i) * n + j] = dist[static_cast<size_t>(j) * n + i] = d;
            choice[l] = static_cast<int>(p);
            self(self, l + 1);
            used[p] = 0;
            dist[static_cast<size_t>(i) * n + j] = dist[static_cast<size_t>(j) * n + i] = -1.0;
            choice[l] = -1;
        }
    };
    search_exact(search_exact, 0);
    if (certified) return best;

    // Pass 2: unpruned enumeration with a local solve per assignment.
    if (m > 8) throw Error("brute_force_udgp: instance too large for oracle");
    best.leaves = 0;
    auto search_all = [&](auto&& self, std::int64_t l) -> void {
        if (best.objective <= cert_tol) return;
        if (l == m) {
            ++best.leaves;
            auto [obj, x] = leaf_objective(false);
            if (obj < best.objective - 1e-15) {
                best.objective = obj;
                best.assignment = current_assignment();
                best.realization = x;
            }
            return;
        }
        for (std::int64_t p = 0; p < N; ++p) {
            if (used[p]) continue;
            const auto [i, j] = pairs[p];
            used[p] = 1;
            dist[static_cast<size_t>(i) * n + j] = dist[static_cast<size_t>(j) * n + i] =
                delta.values[l];
            choice[l] = static_cast<int>(p);
            self(self, l + 1);
            used[p] = 0;
            dist[static_cast<size_t>(i) * n + j] = dist[static_cast<size_t>(j) * n + i] = -1.0;
            choice[l] = -1;
            if (best.objective <= cert_tol) return;
        }
    };
    search_all(search_all, 0);
    return best;
}

struct EmbeddingSearchResult {
    bool found = false;
    Assignment assignment;
    Realization x;
    std::int64_t nodes = 0;  // trilateration attempts
    int deepest = 0;         // most points simultaneously placed
};

// Depth-first construction of a K-dimensional placement realizing a complete
// distance list exactly: points are placed one at a time, each new point
// drawing the values for its pairs from the unused pool. Only the first
// K+1 pair values of a point are branched on -- enough to pin its position --
// after which every remaining pair distance is already determined and just
// consumes a matching unused value. Candidate values die early on triangle
// checks against already-placed points, full selections on the sphere-system
// residual, and equal values are tried once per slot, so only geometrically
// consistent prefixes survive. As soon as the placed points span all K axes,
// the remaining points are drawn from a precomputed site list anchored to
// them, which collapses the rest of the tree to a subsequence selection. The
// first exact completion wins; the node cap bounds the worst case, after
// which found stays false.
inline EmbeddingSearchResult search_complete_embedding(const DistanceList& delta, int k,
                                                       std::int64_t node_cap = 2'000'000) {
    if (!delta.complete()) throw Error("search_complete_embedding: list must be complete");
    if (k < 1) throw Error("search_complete_embedding: K must be at least 1");
    const int n = delta.n;
    const std::int64_t m = delta.m();

    EmbeddingSearchResult out;
    const double len = delta.values.empty() ? 1.0 : delta.values.back();
    const double scale = std::max(1.0, len * len);
    const double keep = 1e-6 * scale;  // loose: false keeps only cost time

    std::vector<double> d2(m);
    for (std::int64_t l = 0; l < m; ++l) d2[l] = delta.values[l] * delta.values[l];

    // Runs of equal values form groups; the anchored stage below books by
    // group count and assigns concrete value indices only on success.
    std::vector<double> gd2;
    std::vector<std::int64_t> gfirst;
    std::vector<int> gtotal, gid(m);
    for (std::int64_t l = 0; l < m; ++l) {
        if (l == 0 || !detail::same_value(delta.values[l - 1], delta.values[l])) {
            gd2.push_back(d2[l]);
            gfirst.push_back(l);
            gtotal.push_back(0);
        }
        gid[l] = static_cast<int>(gd2.size()) - 1;
        ++gtotal.back();
    }
    const int ngroups = static_cast<int>(gd2.size());
    std::vector<int> gcount(ngroups);
    std::vector<double> gr(ngroups);
    for (int g = 0; g < ngroups; ++g) gr[g] = std::sqrt(gd2[g]);
    auto group_of = [&](double dist2) -> int {
        const int g =
            static_cast<int>(std::lower_bound(gd2.begin(), gd2.end(), dist2) - gd2.begin());
        if (g < ngroups && std::abs(gd2[g] - dist2) <= keep) return g;
        if (g > 0 && std::abs(gd2[g - 1] - dist2) <= keep) return g - 1;
        return -1;
    };

    // Gauge: point 0 at the origin, each new axis first used with a positive
    // coordinate; coordinates beyond `rank` stay zero.
    std::vector<double> pos(static_cast<size_t>(n) * k, 0.0);
    std::vector<char> used(m, 0);
    std::vector<std::pair<int, int>> pair_of_value(m, {-1, -1});
    std::vector<std::vector<std::int64_t>> picked(n, std::vector<std::int64_t>(n, -1));

    auto sqd = [&](int a, int b) {
        double s = 0.0;
        for (int d = 0; d < k; ++d) {
            const double diff = pos[static_cast<size_t>(a) * k + d] -
                                pos[static_cast<size_t>(b) * k + d];
            s += diff * diff;
        }
        return s;
    };

    bool aborted = false;
    std::vector<double> p(k), G(static_cast<size_t>(k) * k), h(k);

    // Solve the sphere system for point t over the first cnt chosen values;
    // returns the new rank on success, -1 on a geometric contradiction, -2
    // when the anchors are too degenerate to pin the position.
    auto trilaterate = [&](int t, int rank, int cnt) -> int {
        const auto& pick = picked[t];
        const double c0 = d2[pick[0]];
        std::fill(p.begin(), p.end(), 0.0);
        if (rank > 0) {
            std::fill(G.begin(), G.begin() + rank * rank, 0.0);
            std::fill(h.begin(), h.begin() + rank, 0.0);
            for (int i = 1; i < cnt; ++i) {
                const double* xi = &pos[static_cast<size_t>(i) * k];
                const double bi = 0.5 * (sqd(0, i) + c0 - d2[pick[i]]);
                for (int a = 0; a < rank; ++a) {
                    h[a] += xi[a] * bi;
                    for (int b = 0; b < rank; ++b) G[a * rank + b] += xi[a] * xi[b];
                }
            }
            // Gaussian elimination with partial pivoting on the normal system.
            for (int col = 0; col < rank; ++col) {
                int piv = col;
                for (int r2 = col + 1; r2 < rank; ++r2)
                    if (std::abs(G[r2 * rank + col]) > std::abs(G[piv * rank + col])) piv = r2;
                if (std::abs(G[piv * rank + col]) < 1e-12 * scale * scale) return -2;
                if (piv != col) {
                    for (int b = 0; b < rank; ++b) std::swap(G[piv * rank + b], G[col * rank + b]);
                    std::swap(h[piv], h[col]);
                }
                for (int r2 = col + 1; r2 < rank; ++r2) {
                    const double f = G[r2 * rank + col] / G[col * rank + col];
                    if (f == 0.0) continue;
                    for (int b = col; b < rank; ++b) G[r2 * rank + b] -= f * G[col * rank + b];
                    h[r2] -= f * h[col];
                }
            }
            for (int a = rank - 1; a >= 0; --a) {
                double s = h[a];
                for (int b = a + 1; b < rank; ++b) s -= G[a * rank + b] * p[b];
                p[a] = s / G[a * rank + a];
            }
        }
        double norm2 = 0.0;
        for (int a = 0; a < rank; ++a) norm2 += p[a] * p[a];
        const double h2 = c0 - norm2;
        if (h2 < -keep) return -1;
        int new_rank = rank;
        if (h2 > keep) {
            if (rank == k) return -1;
            p[rank] = std::sqrt(h2);
            new_rank = rank + 1;
        }
        // Full sphere verification covers the overdetermined part as well.
        double* xt = &pos[static_cast<size_t>(t) * k];
        for (int d = 0; d < k; ++d) xt[d] = d < new_rank ? p[d] : 0.0;
        for (int i = 0; i < cnt; ++i)
            if (std::abs(sqd(i, t) - d2[pick[i]]) > keep) return -1;
        return new_rank;
    };

    // First unused value whose squared length matches dist2, -1 if none.
    auto match_value = [&](double dist2) -> std::int64_t {
        const double lo = std::sqrt(std::max(0.0, dist2 - keep));
        for (auto l = static_cast<std::int64_t>(
                 std::lower_bound(delta.values.begin(), delta.values.end(), lo) -
                 delta.values.begin());
             l < m && d2[l] <= dist2 + keep; ++l)
            if (!used[l]) return l;
        return -1;
    };

    // At full rank, k spheres -- around point 0 with radius sqrt(sd2[0]) and
    // around the k-1 row anchors rowpts[j] with radii sqrt(sd2[1 + j]) --
    // leave a one-parameter family; intersecting it with sphere 0 yields at
    // most two candidate positions, written to cbuf. Returns the candidate
    // count, or -1 when the anchor geometry cannot pin the family (a property
    // of the anchor positions alone).
    std::vector<double> u(k), sph(k);
    std::vector<int> pivcol(k);
    std::vector<char> colused(k);
    auto tworoot = [&](const double* sd2, double* cbuf, const int* rowpts) -> int {
        const double c0 = sd2[0];
        const int rows = k - 1, cols = k, stride = k + 1;
        for (int i = 1; i < k; ++i) {
            const int pt = rowpts[i - 1];
            const double* xi = &pos[static_cast<size_t>(pt) * k];
            double* row = &G[static_cast<size_t>(i - 1) * stride];
            for (int a = 0; a < cols; ++a) row[a] = xi[a];
            row[cols] = 0.5 * (sqd(0, pt) + c0 - sd2[i]);
        }
        std::fill(colused.begin(), colused.begin() + cols, 0);
        for (int r2 = 0; r2 < rows; ++r2) {
            int pr = -1, pc = -1;
            double best = 1e-9 * std::max(1.0, len);
            for (int rr = r2; rr < rows; ++rr)
                for (int cc = 0; cc < cols; ++cc)
                    if (!colused[cc] && std::abs(G[rr * stride + cc]) > best) {
                        best = std::abs(G[rr * stride + cc]);
                        pr = rr;
                        pc = cc;
                    }
            if (pr < 0) return -1;
            if (pr != r2)
                for (int cc = 0; cc <= cols; ++cc)
                    std::swap(G[pr * stride + cc], G[r2 * stride + cc]);
            colused[pc] = 1;
            pivcol[r2] = pc;
            for (int rr = r2 + 1; rr < rows; ++rr) {
                const double f = G[rr * stride + pc] / G[r2 * stride + pc];
                if (f == 0.0) continue;
                for (int cc = 0; cc <= cols; ++cc) G[rr * stride + cc] -= f * G[r2 * stride + cc];
            }
        }
        int fc = -1;
        for (int cc = 0; cc < cols; ++cc)
            if (!colused[cc]) fc = cc;
        for (int a = 0; a < cols; ++a) {
            p[a] = 0.0;
            u[a] = 0.0;
        }
        u[fc] = 1.0;
        for (int r2 = rows - 1; r2 >= 0; --r2) {
            const double* row = &G[static_cast<size_t>(r2) * stride];
            double sp = row[cols], su = 0.0;
            for (int cc = 0; cc < cols; ++cc)
                if (cc != pivcol[r2]) {
                    sp -= row[cc] * p[cc];
                    su -= row[cc] * u[cc];
                }
            p[pivcol[r2]] = sp / row[pivcol[r2]];
            u[pivcol[r2]] = su / row[pivcol[r2]];
        }
        double un = 0.0;
        for (int a = 0; a < cols; ++a) un += u[a] * u[a];
        un = std::sqrt(un);
        if (!(un > 1e-12)) return -1;
        for (int a = 0; a < cols; ++a) u[a] /= un;
        double beta = 0.0, gamma = -c0;
        for (int a = 0; a < cols; ++a) {
            beta += p[a] * u[a];
            gamma += p[a] * p[a];
        }
        const double disc = beta * beta - gamma;
        int nc = 0;
        double s[2];
        if (disc >= 0.0) {
            const double rd = std::sqrt(disc);
            s[nc++] = -beta + rd;
            if (rd > 1e-9 * std::max(1.0, len)) s[nc++] = -beta - rd;
        } else if (disc > -keep) {
            s[nc++] = -beta;
        } else {
            return 0;
        }
        for (int c = 0; c < nc; ++c)
            for (int a = 0; a < k; ++a)
                cbuf[static_cast<size_t>(c) * k + a] = a < cols ? p[a] + s[c] * u[a] : 0.0;
        return nc;
    };
    std::vector<std::vector<double>> cands(n, std::vector<double>(2 * static_cast<size_t>(k)));
    std::vector<int> idrows(std::max(0, k - 1));
    for (int j = 0; j + 1 < k; ++j) idrows[j] = j + 1;

    // Once the placed points span all k axes, every further point must occupy
    // one of finitely many sites: a sphere tuple around point 0 and k-1
    // well-conditioned row anchors intersects in at most two positions, and a
    // position survives only if its distance to every placed point matches a
    // group with remaining values. The leftover points then form a strictly
    // increasing subsequence of the sorted site list (any solution can be
    // relabeled into one), chosen under per-group value counts with a
    // reachability lookahead; concrete value indices are assigned on success.
    // Returns 1 on success, 0 when this core has no completion, -1 when no
    // usable row anchors exist (caller keeps the slot-wise search).
    auto anchored = [&](int t0) -> int {
        // Greedy pivoted selection of k-1 row anchors among points 1..t0-1.
        std::vector<int> rowsel;
        if (k > 1) {
            std::vector<double> amat(static_cast<size_t>(t0 - 1) * k);
            std::vector<int> rowpt(t0 - 1);
            for (int q = 1; q < t0; ++q) {
                rowpt[q - 1] = q;
                for (int d = 0; d < k; ++d)
                    amat[static_cast<size_t>(q - 1) * k + d] = pos[static_cast<size_t>(q) * k + d];
            }
            const int arows = t0 - 1;
            std::fill(colused.begin(), colused.begin() + k, 0);
            for (int step = 0; step < k - 1; ++step) {
                int pr = -1, pc = -1;
                double best = 1e-9 * std::max(1.0, len);
                for (int rr = step; rr < arows; ++rr)
                    for (int cc = 0; cc < k; ++cc)
                        if (!colused[cc] &&
                            std::abs(amat[static_cast<size_t>(rr) * k + cc]) > best) {
                            best = std::abs(amat[static_cast<size_t>(rr) * k + cc]);
                            pr = rr;
                            pc = cc;
                        }
                if (pr < 0) return -1;
                if (pr != step) {
                    for (int cc = 0; cc < k; ++cc)
                        std::swap(amat[static_cast<size_t>(pr) * k + cc],
                                  amat[static_cast<size_t>(step) * k + cc]);
                    std::swap(rowpt[pr], rowpt[step]);
                }
                colused[pc] = 1;
                rowsel.push_back(rowpt[step]);
                for (int rr = step + 1; rr < arows; ++rr) {
                    const double f = amat[static_cast<size_t>(rr) * k + pc] /
                                     amat[static_cast<size_t>(step) * k + pc];
                    if (f == 0.0) continue;
                    for (int cc = 0; cc < k; ++cc)
                        amat[static_cast<size_t>(rr) * k + cc] -=
                            f * amat[static_cast<size_t>(step) * k + cc];
                }
            }
        }
        std::vector<int> apt(k);
        apt[0] = 0;
        for (int j = 1; j < k; ++j) apt[j] = rowsel[j - 1];
        std::vector<char> is_anchor(t0, 0);
        for (int j = 0; j < k; ++j) is_anchor[apt[j]] = 1;

        // Anchor geometry is fixed for the whole enumeration, so the sphere
        // system is factored once: row permutation, multipliers, echelon
        // coefficients and the rhs-independent null direction all persist,
        // leaving an O(k^2) back-substitution per tuple.
        const int frows = k - 1;
        std::vector<double> fE(static_cast<size_t>(std::max(1, frows)) * k);
        std::vector<double> fmul(static_cast<size_t>(std::max(1, frows)) * frows, 0.0);
        std::vector<int> fslot(frows), fpivcol(frows);
        std::vector<double> sq0(k, 0.0);
        for (int j = 1; j < k; ++j) sq0[j] = sqd(0, apt[j]);
        {
            for (int i = 0; i < frows; ++i) {
                fslot[i] = i + 1;
                const double* xi = &pos[static_cast<size_t>(apt[i + 1]) * k];
                for (int a = 0; a < k; ++a) fE[static_cast<size_t>(i) * k + a] = xi[a];
            }
            std::fill(colused.begin(), colused.begin() + k, 0);
            for (int r2 = 0; r2 < frows; ++r2) {
                int pr = -1, pc = -1;
                double best = 1e-9 * std::max(1.0, len);
                for (int rr = r2; rr < frows; ++rr)
                    for (int cc = 0; cc < k; ++cc)
                        if (!colused[cc] && std::abs(fE[static_cast<size_t>(rr) * k + cc]) > best) {
                            best = std::abs(fE[static_cast<size_t>(rr) * k + cc]);
                            pr = rr;
                            pc = cc;
                        }
                if (pr < 0) return -1;
                if (pr != r2) {
                    for (int cc = 0; cc < k; ++cc)
                        std::swap(fE[static_cast<size_t>(pr) * k + cc],
                                  fE[static_cast<size_t>(r2) * k + cc]);
                    std::swap(fslot[pr], fslot[r2]);
                    for (int s2 = 0; s2 < r2; ++s2)
                        std::swap(fmul[static_cast<size_t>(s2) * frows + pr],
                                  fmul[static_cast<size_t>(s2) * frows + r2]);
                }
                colused[pc] = 1;
                fpivcol[r2] = pc;
                for (int rr = r2 + 1; rr < frows; ++rr) {
                    const double f = fE[static_cast<size_t>(rr) * k + pc] /
                                     fE[static_cast<size_t>(r2) * k + pc];
                    fmul[static_cast<size_t>(r2) * frows + rr] = f;
                    if (f == 0.0) continue;
                    for (int cc = 0; cc < k; ++cc)
                        fE[static_cast<size_t>(rr) * k + cc] -=
                            f * fE[static_cast<size_t>(r2) * k + cc];
                }
            }
        }
        int ffc = -1;
        for (int cc = 0; cc < k; ++cc)
            if (!colused[cc]) ffc = cc;
        std::fill(u.begin(), u.end(), 0.0);
        u[ffc] = 1.0;
        for (int r2 = frows - 1; r2 >= 0; --r2) {
            const double* row = &fE[static_cast<size_t>(r2) * k];
            double su = 0.0;
            for (int cc = 0; cc < k; ++cc)
                if (cc != fpivcol[r2]) su -= row[cc] * u[cc];
            u[fpivcol[r2]] = su / row[fpivcol[r2]];
        }
        double un = 0.0;
        for (int a = 0; a < k; ++a) un += u[a] * u[a];
        un = std::sqrt(un);
        if (!(un > 1e-12)) return -1;
        for (int a = 0; a < k; ++a) u[a] /= un;
        std::vector<double> fb(std::max(1, frows));
        std::vector<double> adist(static_cast<size_t>(k) * k, 0.0);
        for (int b2 = 0; b2 < k; ++b2)
            for (int a2 = b2 + 1; a2 < k; ++a2)
                adist[static_cast<size_t>(b2) * k + a2] = std::sqrt(sqd(apt[b2], apt[a2]));

        for (int g = 0; g < ngroups; ++g) gcount[g] = gtotal[g];
        for (std::int64_t l = 0; l < m; ++l)
            if (used[l]) --gcount[gid[l]];

        double* cand = cands[t0].data();
        std::vector<int> tg(k);
        std::vector<double> site_pos;
        std::vector<int> site_g, srow(t0);
        bool enum_ok = true;
        auto enum_tuples = [&](auto&& eself, int a) -> void {
            if (!enum_ok) return;
            if (a == k) {
                if (++out.nodes > node_cap) {
                    aborted = true;
                    enum_ok = false;
                    return;
                }
                const double c0 = gd2[tg[0]];
                for (int i = 0; i < frows; ++i)
                    fb[i] = 0.5 * (sq0[fslot[i]] + c0 - gd2[tg[fslot[i]]]);
                for (int r2 = 0; r2 < frows; ++r2)
                    for (int rr = r2 + 1; rr < frows; ++rr)
                        fb[rr] -= fmul[static_cast<size_t>(r2) * frows + rr] * fb[r2];
                for (int a2 = 0; a2 < k; ++a2) p[a2] = 0.0;
                for (int r2 = frows - 1; r2 >= 0; --r2) {
                    const double* row = &fE[static_cast<size_t>(r2) * k];
                    double sp2 = fb[r2];
                    for (int cc = 0; cc < k; ++cc)
                        if (cc != fpivcol[r2]) sp2 -= row[cc] * p[cc];
                    p[fpivcol[r2]] = sp2 / row[fpivcol[r2]];
                }
                double beta = 0.0, gamma = -c0;
                for (int a2 = 0; a2 < k; ++a2) {
                    beta += p[a2] * u[a2];
                    gamma += p[a2] * p[a2];
                }
                const double disc = beta * beta - gamma;
                int nc = 0;
                double sroot[2];
                if (disc >= 0.0) {
                    const double rd = std::sqrt(disc);
                    sroot[nc++] = -beta + rd;
                    if (rd > 1e-9 * std::max(1.0, len)) sroot[nc++] = -beta - rd;
                } else if (disc > -keep) {
                    sroot[nc++] = -beta;
                } else {
                    return;
                }
                for (int c = 0; c < nc; ++c)
                    for (int a2 = 0; a2 < k; ++a2)
                        cand[static_cast<size_t>(c) * k + a2] = p[a2] + sroot[c] * u[a2];
                for (int c = 0; c < nc; ++c) {
                    const double* sp = &cand[static_cast<size_t>(c) * k];
                    for (int j = 0; j < k; ++j) srow[apt[j]] = tg[j];
                    // The tuple already holds the anchor groups; the other
                    // placed points vet the candidate on top of that, with
                    // exact multiplicity against the remaining pool.
                    int vheld = 0;
                    bool vok = true;
                    for (int q = 0; q < t0 && vok; ++q) {
                        if (is_anchor[q]) continue;
                        double s = 0.0;
                        for (int d = 0; d < k; ++d) {
                            const double diff = sp[d] - pos[static_cast<size_t>(q) * k + d];
                            s += diff * diff;
                        }
                        srow[q] = group_of(s);
                        vok = srow[q] >= 0 && gcount[srow[q]] > 0;
                        if (vok) {
                            --gcount[srow[q]];
                            ++vheld;
                        }
                    }
                    for (int q = 0; q < t0 && vheld > 0; ++q) {
                        if (is_anchor[q]) continue;
                        ++gcount[srow[q]];
                        --vheld;
                    }
                    if (!vok) continue;
                    for (int d = 0; d < k; ++d) site_pos.push_back(sp[d]);
                    site_g.insert(site_g.end(), srow.begin(), srow.end());
                }
                return;
            }
            for (int g = 0; g < ngroups; ++g) {
                if (gcount[g] == 0) continue;
                const double v = gr[g];
                bool ok = true;
                for (int b = 0; b < a && ok; ++b) {
                    const double vb = gr[tg[b]];
                    const double ab = adist[static_cast<size_t>(b) * k + a];
                    ok = ab <= vb + v + 1e-7 * len && ab >= std::abs(vb - v) - 1e-7 * len;
                }
                if (!ok) continue;
                --gcount[g];
                tg[a] = g;
                eself(eself, a + 1);
                ++gcount[g];
                if (!enum_ok) return;
            }
        };
        enum_tuples(enum_tuples, 0);
        if (aborted) return 0;

        const int L = static_cast<int>(site_g.size()) / t0;
        if (L < n - t0) return 0;
        std::vector<int> order(L);
        for (int i = 0; i < L; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const int* ga = &site_g[static_cast<size_t>(a) * t0];
            const int* gb = &site_g[static_cast<size_t>(b) * t0];
            for (int j = 0; j < t0; ++j)
                if (ga[j] != gb[j]) return ga[j] < gb[j];
            const double* pa = &site_pos[static_cast<size_t>(a) * k];
            const double* pb = &site_pos[static_cast<size_t>(b) * k];
            for (int d = 0; d < k; ++d)
                if (pa[d] != pb[d]) return pa[d] < pb[d];
            return false;
        });
        std::vector<char> dead(L, 0);

        auto pick_site = [&](auto&& sself, int t, int smin) -> bool {
            if (t > out.deepest) out.deepest = t;
            if (t == n) {
                std::vector<std::int64_t> taken;
                bool built = true;
                for (int t2 = t0; t2 < n && built; ++t2)
                    for (int q = 0; q < t2; ++q) {
                        const int g = group_of(sqd(q, t2));
                        std::int64_t l = -1;
                        if (g >= 0)
                            for (std::int64_t c = gfirst[g]; c < gfirst[g] + gtotal[g]; ++c)
                                if (!used[c]) {
                                    l = c;
                                    break;
                                }
                        if (l < 0) {
                            built = false;
                            break;
                        }
                        used[l] = 1;
                        pair_of_value[l] = {q, t2};
                        taken.push_back(l);
                    }
                if (built) {
                    Assignment a;
                    a.n = n;
                    a.pairs.assign(pair_of_value.begin(), pair_of_value.end());
                    Realization x(n, k);
                    for (int i = 0; i < n; ++i)
                        for (int d = 0; d < k; ++d) x.at(i, d) = pos[static_cast<size_t>(i) * k + d];
                    if (evaluate_minlp_objective(x, a, delta) <= 1e-8 * scale * scale) {
                        out.found = true;
                        out.assignment = std::move(a);
                        out.x = std::move(x);
                        return true;
                    }
                }
                for (std::int64_t l : taken) used[l] = 0;
                return false;
            }
            const int need = n - t;
            for (int si = smin; si + need <= L; ++si) {
                if (dead[si]) continue;
                const int s = order[si];
                const int* sg = &site_g[static_cast<size_t>(s) * t0];
                bool ok = true;
                int booked = 0;
                for (int j = 0; j < t0 && ok; ++j) {
                    if (gcount[sg[j]] == 0) {
                        ok = false;
                        break;
                    }
                    --gcount[sg[j]];
                    booked = j + 1;
                }
                std::vector<int> extra;
                if (ok) {
                    double* xt = &pos[static_cast<size_t>(t) * k];
                    const double* sp = &site_pos[static_cast<size_t>(s) * k];
                    for (int d = 0; d < k; ++d) xt[d] = sp[d];
                    for (int q = t0; q < t && ok; ++q) {
                        const int g = group_of(sqd(q, t));
                        if (g < 0 || gcount[g] == 0) {
                            ok = false;
                            break;
                        }
                        --gcount[g];
                        extra.push_back(g);
                    }
                }
                std::vector<int> killed;
                if (ok) {
                    // Sites that no longer fit the pool or the new point
                    // cannot serve deeper levels; prune when too few remain.
                    int alive = 0;
                    for (int si2 = si + 1; si2 < L; ++si2) {
                        if (dead[si2]) continue;
                        const int s2 = order[si2];
                        const int* sg2 = &site_g[static_cast<size_t>(s2) * t0];
                        bool ok2 = true;
                        for (int j = 0; j < t0 && ok2; ++j) ok2 = gcount[sg2[j]] > 0;
                        if (ok2) {
                            const double* p2 = &site_pos[static_cast<size_t>(s2) * k];
                            double sdist = 0.0;
                            for (int d = 0; d < k; ++d) {
                                const double diff =
                                    p2[d] - pos[static_cast<size_t>(t) * k + d];
                                sdist += diff * diff;
                            }
                            const int g2 = group_of(sdist);
                            ok2 = g2 >= 0 && gcount[g2] > 0;
                        }
                        if (ok2) {
                            ++alive;
                        } else {
                            dead[si2] = 1;
                            killed.push_back(si2);
                        }
                    }
                    ok = alive >= need - 1;
                }
                if (ok) {
                    if (++out.nodes > node_cap) aborted = true;
                    if (!aborted && sself(sself, t + 1, si + 1)) return true;
                }
                for (int si2 : killed) dead[si2] = 0;
                for (int g : extra) ++gcount[g];
                for (int j = 0; j < booked; ++j) ++gcount[sg[j]];
                if (aborted) return false;
            }
            return false;
        };
        return pick_site(pick_site, t0, 0) ? 1 : 0;
    };

    auto place = [&](auto&& self, int t, int rank) -> bool {
        if (t > out.deepest) out.deepest = t;
        if (t == n) {
            Assignment a;
            a.n = n;
            a.pairs.assign(pair_of_value.begin(), pair_of_value.end());
            Realization x(n, k);
            for (int i = 0; i < n; ++i)
                for (int d = 0; d < k; ++d) x.at(i, d) = pos[static_cast<size_t>(i) * k + d];
            if (evaluate_minlp_objective(x, a, delta) > 1e-8 * scale * scale) return false;
            out.found = true;
            out.assignment = std::move(a);
            out.x = std::move(x);
            return true;
        }
        if (rank == k && t >= k + 1) {
            const int ar = anchored(t);
            if (ar >= 0) return ar == 1;
            // degenerate anchor geometry: keep the slot-wise search
        }
        auto& pick = picked[t];
        const auto& prev = picked[t - 1];
        double* cand = cands[t].data();
        int branch = rank == k ? k : std::min(t, k + 1);
        auto choose = [&](auto&& cself, int i) -> bool {
            if (aborted) return false;
            if (i == branch) {
                if (++out.nodes > node_cap) {
                    aborted = true;
                    return false;
                }
                double* xt = &pos[static_cast<size_t>(t) * k];
                int ncand, cand_rank = rank;
                if (branch == rank && rank == k) {
                    for (int a = 0; a < k; ++a) sph[a] = d2[pick[a]];
                    ncand = tworoot(sph.data(), cand, idrows.data());
                } else {
                    const int new_rank = trilaterate(t, rank, branch);
                    if (new_rank >= 0) {
                        cand_rank = new_rank;
                        for (int a = 0; a < k; ++a) cand[a] = xt[a];
                        ncand = 1;
                    } else {
                        ncand = new_rank;  // forward contradiction / degeneracy
                    }
                }
                if (ncand == -2 || ncand == -1) {
                    if (ncand == -2 && branch < t) {
                        ++branch;  // degenerate anchors: branch one more value
                        return cself(cself, i);
                    }
                    if (branch == rank && rank == k && branch < t) {
                        ++branch;  // same escape for a deficient sphere family
                        return cself(cself, i);
                    }
                    return false;
                }
                for (int c = 0; c < ncand; ++c) {
                    for (int a = 0; a < k; ++a) xt[a] = cand[static_cast<size_t>(c) * k + a];
                    bool ok = true;
                    for (int q = 0; q < branch && ok; ++q)
                        ok = std::abs(sqd(q, t) - d2[pick[q]]) <= keep;
                    // The placement fixes every remaining pair distance; each
                    // one just consumes a matching value from the pool.
                    int matched = branch;
                    for (int q = branch; q < t && ok; ++q) {
                        const std::int64_t l = match_value(sqd(q, t));
                        if (l < 0) {
                            ok = false;
                            break;
                        }
                        pick[q] = l;
                        used[l] = 1;
                        pair_of_value[l] = {q, t};
                        matched = q + 1;
                    }
                    if (ok && self(self, t + 1, cand_rank)) return true;
                    for (int q = branch; q < matched; ++q) {
                        used[pick[q]] = 0;
                        pick[q] = -1;
                    }
                    if (aborted) return false;
                }
                return false;
            }
            // Point labels are arbitrary, so solutions can be sought in a
            // canonical form: pair (0,1) carries the smallest value, and the
            // pair-value vectors of points 2..n-1 are lexicographically
            // non-decreasing. While every earlier slot ties with the previous
            // point, slot i is bounded below by that point's slot i.
            std::int64_t l0 = 0;
            if (t >= 2 && i < t - 1) {
                bool tied = true;
                for (int j = 0; j < i && tied; ++j)
                    tied = detail::same_value(delta.values[pick[j]], delta.values[prev[j]]);
                if (tied) {
                    const double lo = delta.values[prev[i]];
                    l0 = std::lower_bound(delta.values.begin(), delta.values.end(),
                                          lo - detail::kGroupTol * std::max(1.0, lo)) -
                         delta.values.begin();
                }
            }
            for (std::int64_t l = l0; l < m; ++l) {
                if (used[l]) continue;
                // Equal values are interchangeable: if the previous copy is
                // still unused it was already tried for this slot.
                if (l > 0 && !used[l - 1] &&
                    detail::same_value(delta.values[l - 1], delta.values[l]))
                    continue;
                const double dl = delta.values[l];
                bool ok = true;
                for (int q = 0; q < i && ok; ++q) {
                    const double dq = delta.values[pick[q]];
                    const double dqi = std::sqrt(sqd(q, i));
                    ok = dqi <= dq + dl + 1e-7 * len && dqi >= std::abs(dq - dl) - 1e-7 * len;
                }
                if (!ok) continue;
                pick[i] = l;
                used[l] = 1;
                pair_of_value[l] = {i, t};
                if (cself(cself, i + 1)) return true;
                used[l] = 0;
                pick[i] = -1;
                if (t == 1) break;  // any minimum-value pair can be relabeled (0,1)
            }
            return false;
        };
        return choose(choose, 0);
    };
    place(place, 1, 0);
    return out;
}

}  // namespace udgp

#endif
