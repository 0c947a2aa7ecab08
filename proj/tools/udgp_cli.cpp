// Command-line front end: generate instances, thin them, run the
// assignment + coordinate pipeline, and evaluate results.
//
// Exit codes: 0 success, 1 internal error, 2 bad arguments,
// 3 assignment stage hit its limits with no incumbent, 4 file I/O or parse.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "udgp/udgp.hpp"

namespace {

struct CommonSolveFlags {
    int k = 0;
    double time_limit = 360.0;
    long node_limit = 0;
    int multistart = 10;
    std::uint64_t seed = 0;
    std::string big_m = "experimental";
    bool sym_break = false;
    bool group_multiplicities = false;
    std::string extract;
};

void add_solver_flags(CLI::App* cmd, CommonSolveFlags& f, bool with_extract) {
    cmd->add_option("--k", f.k, "Embedding dimension override (default: from file)");
    cmd->add_option("--time-limit", f.time_limit, "Assignment-stage time limit in seconds")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--node-limit", f.node_limit,
                    "Assignment-stage node limit (0 = none); the reproducible limit");
    cmd->add_option("--multistart", f.multistart, "Coordinate-stage start count")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "Random seed");
    cmd->add_option("--big-m", f.big_m,
                    "Big-M choice: prop22 = (sum of distances)^2, "
                    "experimental = sum of squared distances")
        ->check(CLI::IsMember({"prop22", "experimental"}));
    cmd->add_flag("--sym-break", f.sym_break,
                  "Order the pairs chosen for equal consecutive distance values");
    cmd->add_flag("--group-multiplicities", f.group_multiplicities,
                  "Fold equal distance values into one column with a count right-hand side");
    if (with_extract)
        cmd->add_option("--extract", f.extract,
                        "Write a diagnostic Gram-based realization (pca or barvinok); "
                        "it is discarded, never fed to the coordinate stage")
            ->check(CLI::IsMember({"pca", "barvinok"}));
}

udgp::SolveUdgpParams to_params(const CommonSolveFlags& f) {
    udgp::SolveUdgpParams p;
    p.k_override = f.k;
    p.time_limit_s = f.time_limit;
    p.node_limit = f.node_limit;
    p.multistart_iters = f.multistart;
    p.seed = f.seed;
    p.big_m_variant = f.big_m == "prop22" ? udgp::BigMVariant::SquaredSum
                                          : udgp::BigMVariant::SumSquares;
    p.sym_break = f.sym_break;
    p.group_multiplicities = f.group_multiplicities;
    p.extract = f.extract;
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unassigned distance geometry: assignment via a mixed-integer model over "
                 "the diagonally dominant cone, coordinates via multistart descent"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate an instance (ground truth + distance list)");
    std::string gen_kind;
    int gen_n = 5, gen_k = 3;
    std::uint64_t gen_seed = 0;
    double gen_edge = 1.0;
    std::string gen_out;
    gen->add_option("kind", gen_kind, "c60 or random")->required()
        ->check(CLI::IsMember({"c60", "random"}));
    gen->add_option("--n", gen_n, "Vertex count (random)")->check(CLI::Range(2, 100000));
    gen->add_option("--k", gen_k, "Embedding dimension")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "Random seed");
    gen->add_option("--edge", gen_edge, "Edge length (c60)")->check(CLI::PositiveNumber);
    gen->add_option("--out", gen_out, "Output prefix (.xyz, .udgp, .dgp)")->required();

    // thin
    auto* thin_cmd = app.add_subcommand("thin", "Keep each distance value with given probability");
    std::string thin_in, thin_out;
    double thin_density = 1.0;
    std::uint64_t thin_seed = 0;
    thin_cmd->add_option("input", thin_in, "Complete distance-list file")->required();
    thin_cmd->add_option("--density", thin_density, "Keep probability in (0, 1]")->required();
    thin_cmd->add_option("--seed", thin_seed, "Random seed");
    thin_cmd->add_option("--out", thin_out, "Output distance-list file")->required();

    // solve-udgp
    auto* su = app.add_subcommand("solve-udgp", "Full pipeline on a distance list");
    std::string su_in, su_out;
    CommonSolveFlags su_flags;
    su->add_option("input", su_in, "Distance-list file")->required();
    add_solver_flags(su, su_flags, true);
    su->add_option("--out", su_out, "Output prefix (.assign, .xyz, .report)")->required();

    // solve-dgp
    auto* sd = app.add_subcommand("solve-dgp", "Multistart coordinate fit on a weighted graph");
    std::string sd_in, sd_out;
    int sd_k = 0, sd_multistart = 10;
    std::uint64_t sd_seed = 0;
    sd->add_option("input", sd_in, "Weighted-graph file")->required();
    sd->add_option("--k", sd_k, "Embedding dimension override");
    sd->add_option("--multistart", sd_multistart, "Start count")->check(CLI::PositiveNumber);
    sd->add_option("--seed", sd_seed, "Random seed");
    sd->add_option("--out", sd_out, "Output prefix (.xyz, .report)")->required();

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a realization against a weighted graph");
    std::string ev_xyz, ev_graph, ev_ref_graph, ev_ref_xyz, ev_dump, ev_out;
    ev->add_option("realization", ev_xyz, "Realization file (.xyz)")->required();
    ev->add_option("graph", ev_graph, "Weighted-graph file")->required();
    ev->add_option("--ref-graph", ev_ref_graph, "Reference graph for adjacency error");
    ev->add_option("--ref-xyz", ev_ref_xyz, "Reference realization for rigid-fit RMSD");
    ev->add_option("--dump-xyz", ev_dump, "Write the (aligned) realization for plotting");
    ev->add_option("--out", ev_out, "Report file");

    // sweep
    auto* sw = app.add_subcommand("sweep", "Thin/solve/evaluate over a density-seed grid");
    std::string sw_in, sw_out, sw_ref_graph, sw_run_prefix;
    std::vector<double> sw_densities;
    std::vector<std::uint64_t> sw_seeds;
    CommonSolveFlags sw_flags;
    sw->add_option("input", sw_in, "Complete distance-list file")->required();
    sw->add_option("--density", sw_densities, "Density values in (0, 1]")->required();
    sw->add_option("--seeds", sw_seeds, "Seed list (default 0)");
    sw->add_option("--ref-graph", sw_ref_graph, "Ground-truth graph for adjacency error");
    sw->add_option("--run-prefix", sw_run_prefix, "Prefix for per-run artifacts");
    add_solver_flags(sw, sw_flags, false);
    sw->add_option("--out", sw_out, "Table file (tab-separated)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            const udgp::GenOutcome out =
                udgp::cmd_gen(gen_kind, gen_n, gen_k, gen_seed, gen_edge, gen_out);
            std::printf("n=%d m=%d N=%ld\n", out.x.n, out.delta.m(), out.delta.pair_count());
            std::printf("wrote %s %s %s\n", out.xyz_path.c_str(), out.udgp_path.c_str(),
                        out.dgp_path.c_str());
        } else if (thin_cmd->parsed()) {
            const udgp::DistanceList delta = udgp::read_distance_list(thin_in);
            const udgp::ThinOutcome out = udgp::cmd_thin(delta, thin_density, thin_seed, thin_out);
            std::printf("m=%d density=%.6f\n", out.delta.m(), out.realized_density);
        } else if (su->parsed()) {
            const udgp::DistanceList delta = udgp::read_distance_list(su_in);
            udgp::SolveUdgpParams params = to_params(su_flags);
            params.out_prefix = su_out;
            const udgp::SolveUdgpOutcome out = udgp::cmd_solve_udgp(delta, params);
            std::printf("milp_status=%s nodes=%ld slack_objective=%.12g\n",
                        udgp::to_string(out.milp.status), out.milp.nodes, out.milp.objective);
            std::printf("quartic_objective=%.12g mde=%.12g\n", out.report.quartic,
                        out.report.mde_value);
        } else if (sd->parsed()) {
            const udgp::GraphFile gf = udgp::read_weighted_graph(sd_in);
            udgp::SolveDgpParams params;
            params.k_override = sd_k;
            params.multistart_iters = sd_multistart;
            params.seed = sd_seed;
            params.out_prefix = sd_out;
            const udgp::SolveDgpOutcome out = udgp::cmd_solve_dgp(gf.graph, gf.k, params);
            std::printf("quartic_objective=%.12g mde=%.12g\n", out.report.quartic,
                        out.report.mde_value);
        } else if (ev->parsed()) {
            const udgp::Realization x = udgp::read_realization_xyz(ev_xyz);
            const udgp::GraphFile gf = udgp::read_weighted_graph(ev_graph);
            udgp::EvalParams params;
            if (!ev_ref_graph.empty())
                params.reference_graph = udgp::read_weighted_graph(ev_ref_graph).graph;
            if (!ev_ref_xyz.empty())
                params.reference_realization = udgp::read_realization_xyz(ev_ref_xyz);
            params.dump_xyz_path = ev_dump;
            params.report_path = ev_out;
            const udgp::EvaluationReport report = udgp::cmd_eval(x, gf.graph, params);
            std::fputs(report.serialize().c_str(), stdout);
        } else if (sw->parsed()) {
            const udgp::DistanceList delta = udgp::read_distance_list(sw_in);
            udgp::SweepParams params;
            params.densities = sw_densities;
            if (!sw_seeds.empty()) params.seeds = sw_seeds;
            params.solver = to_params(sw_flags);
            params.table_path = sw_out;
            params.run_prefix = sw_run_prefix;
            if (!sw_ref_graph.empty())
                params.reference_graph = udgp::read_weighted_graph(sw_ref_graph).graph;
            const auto rows = udgp::cmd_sweep(delta, params);
            int failures = 0;
            for (const auto& row : rows)
                if (!row.ok) ++failures;
            std::printf("sweep: %zu rows, %d failed, table %s\n", rows.size(), failures,
                        sw_out.c_str());
        }
        return 0;
    } catch (const udgp::NoIncumbentError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const udgp::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const udgp::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const udgp::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
