#ifndef UDGP_PIPELINE_HPP
#define UDGP_PIPELINE_HPP

#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "udgp/branch_and_bound.hpp"
#include "udgp/common.hpp"
#include "udgp/dgp.hpp"
#include "udgp/instance.hpp"
#include "udgp/io.hpp"
#include "udgp/linalg.hpp"
#include "udgp/metrics.hpp"
#include "udgp/middp.hpp"
#include "udgp/milp.hpp"

namespace udgp {

// The assignment stage ended without a usable incumbent; callers should raise
// the time or node limits.
struct NoIncumbentError : Error {
    using Error::Error;
};

namespace detail {

class StageTimer {
  public:
    StageTimer() : start_(std::chrono::steady_clock::now()) {}
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - start_).count();
        start_ = now;
        return s;
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

struct GenOutcome {
    Realization x;
    DistanceList delta;
    std::string xyz_path, udgp_path, dgp_path;
};

// Builds a named instance (ideal C60 or a seeded random point set) and, when
// an output prefix is given, writes the realization, the complete distance
// list, and the ground-truth complete weighted graph.
inline GenOutcome cmd_gen(const std::string& kind, int n, int k, std::uint64_t seed,
                          double edge_length, const std::string& out_prefix) {
    GenOutcome out;
    if (kind == "c60") {
        out.x = build_c60(edge_length);
    } else if (kind == "random") {
        out.x = random_instance(n, k, seed).first;
    } else {
        throw Error("gen: kind must be c60 or random");
    }
    out.delta = distances_from_realization(out.x);
    if (!out_prefix.empty()) {
        out.xyz_path = out_prefix + ".xyz";
        out.udgp_path = out_prefix + ".udgp";
        out.dgp_path = out_prefix + ".dgp";
        write_realization_xyz(out.xyz_path, out.x, kind + " ground truth");
        write_distance_list(out.udgp_path, out.delta);
        std::vector<Edge> edges;
        for (int i = 0; i < out.x.n; ++i)
            for (int j = i + 1; j < out.x.n; ++j) edges.push_back({i, j, out.x.distance(i, j)});
        write_weighted_graph(out.dgp_path, WeightedGraph(out.x.n, std::move(edges)), out.x.k);
    }
    return out;
}

struct ThinOutcome {
    DistanceList delta;
    double realized_density = 1.0;
    std::string out_path;
};

inline ThinOutcome cmd_thin(const DistanceList& delta, double density, std::uint64_t seed,
                            const std::string& out_path) {
    ThinOutcome out;
    out.delta = thin(delta, density, seed);
    out.realized_density = out.delta.density();
    if (!out_path.empty()) {
        out.out_path = out_path;
        write_distance_list(out_path, out.delta);
    }
    return out;
}

struct SolveUdgpParams {
    int k_override = 0;  // 0 = the K recorded in the instance
    double time_limit_s = 360.0;
    long node_limit = 0;
    int multistart_iters = 10;
    std::uint64_t seed = 0;
    BigMVariant big_m_variant = BigMVariant::SumSquares;
    bool sym_break = false;
    bool group_multiplicities = false;
    std::string extract;  // "", "pca", "barvinok": diagnostic-only realization
    std::size_t lp_cell_cap = SolveLimits{}.lp_cell_cap;
    // Assignment-stage repair knobs, active on complete lists when the
    // coordinate stage rejects the proposed assignment. Rounds bound the
    // propose-exclude-resolve loop; the stall limit turns the tree search into
    // a proposal engine; the size cap gates the constructive embedding search.
    int max_assignment_rounds = 6;
    long stall_node_limit = 500;
    int embed_repair_max_n = 64;
    long long embed_node_limit = 150'000'000;
    std::string out_prefix;
};

struct SolveUdgpOutcome {
    MilpSolution milp;
    Assignment assignment;
    WeightedGraph graph;
    MultistartResult ms;
    EvaluationReport report;
    std::string assign_path, xyz_path, report_path, diag_path;
};

// The five-stage matheuristic: assignment model -> branch and bound ->
// assignment extraction -> weighted graph -> multistart coordinate fit. Any
// Gram-based diagnostic realization is written to its own file and never
// feeds the coordinate stage.
inline SolveUdgpOutcome cmd_solve_udgp(const DistanceList& delta, const SolveUdgpParams& params) {
    const int k = params.k_override > 0 ? params.k_override : delta.k;
    if (k < 1) throw Error("solve-udgp: K must be at least 1");

    detail::StageTimer timer;
    SolveUdgpOutcome out;

    const double M = big_m(delta, params.big_m_variant);
    MiddpOptions mopt;
    mopt.group_multiplicities = params.group_multiplicities;
    mopt.sym_break = params.sym_break;
    MiddpEncoding enc = build_middp(delta, M, mopt);
    log_info(strfmt("solve-udgp: model with %d vars, %d rows, big-M %.6g",
                    enc.model.num_vars(), enc.model.num_rows(), M));

    MultistartConfig ms;
    ms.iterations = params.multistart_iters;
    ms.seed = params.seed;

    // The model treats an assignment as exact when *some* Gram matrix fits its
    // distances, not one of rank <= K, so zero-slack incumbents can still be
    // geometrically wrong, and on larger instances limit-terminated incumbents
    // are only approximate. Both cases are repaired on complete lists: refit /
    // re-match alternation, a bounded constructive embedding search at tiny n,
    // and, if the fit still fails, an exclusion row on the incumbent's support
    // before the next proposal round. The best fit across rounds wins.
    const double fit_tol = 1e-10;
    double assign_seconds = 0.0, dgp_seconds = 0.0;
    int rounds = 0;
    bool have_best = false;
    bool embed_tried = false;

    auto consider = [&](const Assignment& a, WeightedGraph g, MultistartResult fit) {
        if (!have_best || fit.objective < out.ms.objective) {
            out.assignment = a;
            out.graph = std::move(g);
            out.ms = std::move(fit);
            have_best = true;
        }
    };
    auto alternate = [&](Assignment cur, std::uint64_t salt) {
        Assignment prev;
        for (int r = 0; r < 24 && out.ms.objective > fit_tol; ++r) {
            WeightedGraph g = assignment_to_graph(cur, delta);
            MultistartConfig cfg = ms;
            cfg.seed = params.seed + 0x9E3779B9ull * salt + 104729ull * (r + 1);
            MultistartResult fit = multistart(g, k, cfg);
            Assignment next = match_sorted_distances(fit.x, delta);
            consider(cur, std::move(g), std::move(fit));
            if (next.pairs == cur.pairs || next.pairs == prev.pairs) break;
            prev = std::move(cur);
            cur = std::move(next);
        }
    };

    for (;;) {
        ++rounds;
        SolveLimits limits;
        limits.time_limit_s = params.time_limit_s > 0.0
                                  ? std::max(0.1, params.time_limit_s - assign_seconds)
                                  : 0.0;
        limits.node_limit = params.node_limit;
        limits.stall_node_limit = params.stall_node_limit;
        limits.lp_cell_cap = params.lp_cell_cap;
        MilpSolution milp = solve(enc.model, limits);
        assign_seconds += timer.lap();
        if (!milp.has_incumbent) {
            if (have_best) break;  // exclusions exhausted the model
            throw NoIncumbentError(strfmt(
                "no assignment found within limits (status %s after %ld nodes); raise "
                "--time-limit or --node-limit",
                to_string(milp.status), milp.nodes));
        }
        Assignment assignment = extract_assignment(enc, milp);
        {
            WeightedGraph g = assignment_to_graph(assignment, delta);
            MultistartResult fit = multistart(g, k, ms);
            consider(assignment, std::move(g), std::move(fit));
        }
        if (delta.complete() && out.ms.objective > fit_tol) {
            alternate(assignment, static_cast<std::uint64_t>(rounds));
            if (out.ms.objective > fit_tol && !embed_tried &&
                enc.n <= params.embed_repair_max_n) {
                embed_tried = true;
                const EmbeddingSearchResult es =
                    search_complete_embedding(delta, k, params.embed_node_limit);
                log_info(strfmt("solve-udgp: embedding search %s after %lld placements",
                                es.found ? "succeeded" : "gave up",
                                static_cast<long long>(es.nodes)));
                if (es.found) {
                    WeightedGraph g = assignment_to_graph(es.assignment, delta);
                    MultistartConfig cfg = ms;
                    cfg.seed = params.seed + 0x85EBCA6Bull;
                    MultistartResult fit = multistart(g, k, cfg);
                    const double direct = evaluate_minlp_objective(es.x, es.assignment, delta);
                    if (direct < fit.objective) {
                        fit.objective = direct;
                        fit.x = es.x;
                    }
                    consider(es.assignment, std::move(g), std::move(fit));
                }
            }
        }
        dgp_seconds += timer.lap();

        const bool within_budget =
            params.time_limit_s <= 0.0 || assign_seconds < params.time_limit_s;
        const bool retry = delta.complete() && out.ms.objective > fit_tol && within_budget &&
                           rounds < params.max_assignment_rounds;
        if (retry) {
            log_info(strfmt("solve-udgp: round %d best fit %.3g; excluding the incumbent "
                            "support and proposing again",
                            rounds, out.ms.objective));
            append_exclusion_row(enc, milp.values);
        }
        out.milp = std::move(milp);
        if (!retry) break;
    }

    if (!params.extract.empty()) {
        SymMatrix gram(enc.n);
        for (int i = 0; i < enc.n; ++i)
            for (int j = i; j < enc.n; ++j) gram.set(i, j, out.milp.values[enc.xvar(i, j)]);
        Realization diag;
        if (params.extract == "pca") diag = pca_realization(gram, k);
        else if (params.extract == "barvinok") diag = barvinok_realization(gram, k, params.seed);
        else throw Error("solve-udgp: --extract must be pca or barvinok");
        if (!params.out_prefix.empty()) {
            out.diag_path = params.out_prefix + ".diag.xyz";
            write_realization_xyz(out.diag_path, diag, "discarded diagnostic realization");
        }
    }

    out.report.quartic = out.ms.objective;
    out.report.mde_value = mde(out.ms.x, out.graph);
    out.report.density = delta.density();
    out.report.stage_seconds = {{"assign", assign_seconds}, {"dgp", dgp_seconds}};
    out.report.extra = {
        {"milp_status", to_string(out.milp.status)},
        {"milp_nodes", std::to_string(out.milp.nodes)},
        {"milp_objective", detail::format_value(out.milp.objective)},
        {"milp_bound", detail::format_value(out.milp.best_bound)},
        {"big_m", detail::format_value(M)},
        {"assignment_rounds", std::to_string(rounds)},
    };

    if (!params.out_prefix.empty()) {
        out.assign_path = params.out_prefix + ".assign";
        out.xyz_path = params.out_prefix + ".xyz";
        out.report_path = params.out_prefix + ".report";
        write_assignment(out.assign_path, out.assignment);
        write_realization_xyz(out.xyz_path, out.ms.x, "solve-udgp result");
        write_report(out.report_path, out.report);
    }
    return out;
}

struct SolveDgpParams {
    int k_override = 0;
    int multistart_iters = 10;
    std::uint64_t seed = 0;
    LocalSettings local;
    std::string out_prefix;
};

struct SolveDgpOutcome {
    MultistartResult ms;
    EvaluationReport report;
    std::string xyz_path, report_path;
};

inline SolveDgpOutcome cmd_solve_dgp(const WeightedGraph& graph, int file_k,
                                     const SolveDgpParams& params) {
    const int k = params.k_override > 0 ? params.k_override : file_k;
    if (k < 1) throw Error("solve-dgp: K must be at least 1");
    detail::StageTimer timer;
    SolveDgpOutcome out;
    MultistartConfig ms;
    ms.iterations = params.multistart_iters;
    ms.seed = params.seed;
    ms.local = params.local;
    out.ms = multistart(graph, k, ms);
    out.report.quartic = out.ms.objective;
    out.report.mde_value = mde(out.ms.x, graph);
    out.report.density = static_cast<double>(graph.edge_count()) /
                         (static_cast<double>(graph.n) * (graph.n - 1) / 2.0);
    out.report.stage_seconds = {{"dgp", timer.lap()}};
    out.report.extra = {{"converged_starts", std::to_string(out.ms.converged_starts)},
                        {"best_start", std::to_string(out.ms.best_start)}};
    if (!params.out_prefix.empty()) {
        out.xyz_path = params.out_prefix + ".xyz";
        out.report_path = params.out_prefix + ".report";
        write_realization_xyz(out.xyz_path, out.ms.x, "solve-dgp result");
        write_report(out.report_path, out.report);
    }
    return out;
}

struct EvalParams {
    std::optional<WeightedGraph> reference_graph;
    std::optional<Realization> reference_realization;
    std::string dump_xyz_path;  // aligned coordinates for external rendering
    std::string report_path;
};

inline EvaluationReport cmd_eval(const Realization& x, const WeightedGraph& graph,
                                 const EvalParams& params) {
    EvaluationReport report;
    report.quartic = quartic_objective(x, graph);
    report.mde_value = mde(x, graph);
    report.density = static_cast<double>(graph.edge_count()) /
                     (static_cast<double>(graph.n) * (graph.n - 1) / 2.0);
    Realization to_dump = x;
    if (params.reference_graph)
        report.adjacency_error = adjacency_mean_error(graph, *params.reference_graph);
    if (params.reference_realization) {
        const AlignResult aligned = procrustes_align(x, *params.reference_realization);
        report.rmsd = aligned.rmsd;
        to_dump = aligned.aligned;
    }
    if (!params.dump_xyz_path.empty())
        write_realization_xyz(params.dump_xyz_path, to_dump, "aligned realization");
    if (!params.report_path.empty()) write_report(params.report_path, report);
    return report;
}

struct SweepRow {
    double density = 0.0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string status;
    int m = 0;
    double mde_value = kInf;
    double adjacency_error = kInf;
    double quartic = kInf;
    double assign_seconds = 0.0;
    double dgp_seconds = 0.0;
};

struct SweepParams {
    std::vector<double> densities;
    std::vector<std::uint64_t> seeds{0};
    SolveUdgpParams solver;
    std::optional<WeightedGraph> reference_graph;
    std::string table_path;
    std::string run_prefix;  // per-run artifact prefix; empty = keep in memory
};

// Thin -> solve-udgp -> eval over the (density, seed) grid. Failures land in
// the table as rows with a status note; the sweep keeps going.
inline std::vector<SweepRow> cmd_sweep(const DistanceList& delta, const SweepParams& params) {
    if (params.densities.empty()) throw Error("sweep: need at least one density");
    std::vector<SweepRow> rows;
    for (double density : params.densities)
        for (std::uint64_t seed : params.seeds) {
            SweepRow row;
            row.density = density;
            row.seed = seed;
            try {
                const DistanceList thinned =
                    density < 1.0 ? thin(delta, density, seed) : delta;
                row.m = thinned.m();
                SolveUdgpParams sp = params.solver;
                sp.seed = seed;
                if (!params.run_prefix.empty())
                    sp.out_prefix = params.run_prefix + "_d" + detail::format_value(density) +
                                    "_s" + std::to_string(seed);
                const SolveUdgpOutcome run = cmd_solve_udgp(thinned, sp);
                row.ok = true;
                row.status = "ok";
                row.mde_value = run.report.mde_value;
                row.quartic = run.report.quartic;
                if (params.reference_graph)
                    row.adjacency_error =
                        adjacency_mean_error(run.graph, *params.reference_graph);
                for (const auto& [stage, seconds] : run.report.stage_seconds) {
                    if (stage == "assign") row.assign_seconds = seconds;
                    if (stage == "dgp") row.dgp_seconds = seconds;
                }
            } catch (const Error& e) {
                row.ok = false;
                row.status = std::string("error: ") + e.what();
            }
            rows.push_back(row);
            log_info(strfmt("sweep: density %.6g seed %llu -> %s", density,
                            static_cast<unsigned long long>(seed), row.status.c_str()));
        }

    if (!params.table_path.empty()) {
        std::ostringstream out;
        out << "density\tseed\tstatus\tm\tmde\tadjacency_mean_error\tquartic_objective"
               "\tassign_seconds\tdgp_seconds\n";
        for (const SweepRow& row : rows) {
            out << detail::format_value(row.density) << '\t' << row.seed << '\t'
                << (row.ok ? "ok" : row.status) << '\t' << row.m << '\t';
            if (row.ok) {
                out << detail::format_value(row.mde_value) << '\t';
                if (row.adjacency_error != kInf) out << detail::format_value(row.adjacency_error);
                else out << "na";
                out << '\t' << detail::format_value(row.quartic) << '\t'
                    << detail::format_value(row.assign_seconds) << '\t'
                    << detail::format_value(row.dgp_seconds);
            } else {
                out << "na\tna\tna\tna\tna";
            }
            out << '\n';
        }
        detail::write_file_atomic(params.table_path, out.str());
    }
    return rows;
}

}  // namespace udgp

#endif
