#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "udgp/pipeline.hpp"

using namespace udgp;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("udgp_pipe_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(UDGP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

WeightedGraph complete_graph(const Realization& x) {
    std::vector<Edge> edges;
    for (int i = 0; i < x.n; ++i)
        for (int j = i + 1; j < x.n; ++j) edges.push_back({i, j, x.distance(i, j)});
    return WeightedGraph(x.n, std::move(edges));
}

}  // namespace

TEST_CASE("gen writes a consistent instance triple") {
    TempDir dir;
    const GenOutcome out = cmd_gen("random", 5, 3, 42, 1.0, dir.file("inst"));
    REQUIRE(out.x.n == 5);
    REQUIRE(out.delta.m() == 10);

    const Realization x = read_realization_xyz(out.xyz_path);
    REQUIRE(x.n == 5);
    const DistanceList delta = read_distance_list(out.udgp_path);
    const DistanceList direct = distances_from_realization(out.x);
    for (int l = 0; l < delta.m(); ++l)
        REQUIRE(delta.values[l] == Catch::Approx(direct.values[l]).margin(1e-12));
    const GraphFile gf = read_weighted_graph(out.dgp_path);
    REQUIRE(gf.k == 3);
    REQUIRE(gf.graph.edge_count() == 10);

    REQUIRE_THROWS_AS(cmd_gen("nope", 5, 3, 0, 1.0, ""), Error);
}

TEST_CASE("thin keeps a sorted subset and reports its density") {
    const GenOutcome inst = cmd_gen("random", 6, 2, 9, 1.0, "");
    TempDir dir;
    const ThinOutcome out = cmd_thin(inst.delta, 0.6, 3, dir.file("thin.udgp"));
    REQUIRE(out.delta.m() >= 1);
    REQUIRE(out.delta.m() <= inst.delta.m());
    REQUIRE(out.realized_density ==
            Catch::Approx(static_cast<double>(out.delta.m()) / inst.delta.m()));
    REQUIRE(std::is_sorted(out.delta.values.begin(), out.delta.values.end()));
    for (double v : out.delta.values)
        REQUIRE(std::count(inst.delta.values.begin(), inst.delta.values.end(), v) >= 1);
    REQUIRE(read_distance_list(out.out_path).m() == out.delta.m());
}

TEST_CASE("solve-udgp runs a tiny instance end to end, deterministically") {
    auto [truth, delta] = random_instance(4, 2, 11);
    TempDir dir;
    SolveUdgpParams sp;
    sp.time_limit_s = 0.0;  // node-based determinism
    sp.seed = 5;
    sp.out_prefix = dir.file("run");
    const SolveUdgpOutcome a = cmd_solve_udgp(delta, sp);
    REQUIRE(a.report.mde_value <= 1e-5);
    REQUIRE(a.assignment.m() == delta.m());
    REQUIRE(std::filesystem::exists(a.assign_path));
    REQUIRE(std::filesystem::exists(a.xyz_path));
    REQUIRE(std::filesystem::exists(a.report_path));

    const SolveUdgpOutcome b = cmd_solve_udgp(delta, sp);
    REQUIRE(a.report.quartic == b.report.quartic);
    REQUIRE(a.report.mde_value == b.report.mde_value);
    REQUIRE(a.milp.nodes == b.milp.nodes);
}

TEST_CASE("solve-udgp without an incumbent raises the dedicated error") {
    auto [truth, delta] = random_instance(4, 2, 23);
    SolveUdgpParams sp;
    sp.time_limit_s = 0.0;
    sp.node_limit = 1;  // root relaxation only: fractional, no incumbent
    REQUIRE_THROWS_AS(cmd_solve_udgp(delta, sp), NoIncumbentError);
}

TEST_CASE("solve-dgp fits the unit square exactly") {
    Realization square(4, 2);
    square.at(1, 0) = 1.0;
    square.at(2, 1) = 1.0;
    square.at(3, 0) = 1.0;
    square.at(3, 1) = 1.0;
    TempDir dir;
    SolveDgpParams sp;
    sp.multistart_iters = 6;
    sp.out_prefix = dir.file("sq");
    const SolveDgpOutcome out = cmd_solve_dgp(complete_graph(square), 2, sp);
    REQUIRE(out.report.quartic < 1e-10);
    REQUIRE(out.report.mde_value < 1e-6);
    REQUIRE(std::filesystem::exists(out.xyz_path));
    REQUIRE(std::filesystem::exists(out.report_path));
}

TEST_CASE("eval reports exact metrics for the generator layout") {
    auto [truth, delta] = random_instance(5, 3, 77);
    const WeightedGraph graph = complete_graph(truth);
    TempDir dir;
    EvalParams ep;
    ep.reference_graph = graph;
    ep.reference_realization = truth;
    ep.dump_xyz_path = dir.file("aligned.xyz");
    ep.report_path = dir.file("eval.report");
    const EvaluationReport report = cmd_eval(truth, graph, ep);
    REQUIRE(report.quartic == Catch::Approx(0.0).margin(1e-18));
    REQUIRE(report.mde_value == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(report.adjacency_error.has_value());
    REQUIRE(*report.adjacency_error == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(report.rmsd.has_value());
    REQUIRE(*report.rmsd == Catch::Approx(0.0).margin(1e-9));
    REQUIRE(std::filesystem::exists(ep.dump_xyz_path));
    const std::string text = slurp(ep.report_path);
    REQUIRE(text.find("mde=") != std::string::npos);
}

TEST_CASE("sweep walks the grid, records failures, and keeps going") {
    auto [truth, delta] = random_instance(4, 2, 3);
    TempDir dir;
    SweepParams params;
    params.densities = {-0.5, 1.0};  // first density is invalid on purpose
    params.seeds = {1, 2};
    params.solver.time_limit_s = 0.0;
    params.table_path = dir.file("table.tsv");
    const std::vector<SweepRow> rows = cmd_sweep(delta, params);
    REQUIRE(rows.size() == 4);
    REQUIRE_FALSE(rows[0].ok);
    REQUIRE(rows[0].status.find("error") != std::string::npos);
    REQUIRE_FALSE(rows[1].ok);
    REQUIRE(rows[2].ok);
    REQUIRE(rows[3].ok);
    REQUIRE(rows[2].mde_value <= 1e-5);
    REQUIRE(rows[3].mde_value <= 1e-5);

    const std::string table = slurp(params.table_path);
    REQUIRE(table.rfind("density\tseed\tstatus\tm\tmde", 0) == 0);
    REQUIRE(std::count(table.begin(), table.end(), '\n') == 5);  // header + 4 rows
}

TEST_CASE("cli: generate, thin, solve, evaluate round trip") {
    TempDir dir;
    REQUIRE(run_cli("gen random --n 4 --k 2 --seed 12 --out " + dir.file("inst")) == 0);
    REQUIRE(std::filesystem::exists(dir.file("inst.udgp")));
    REQUIRE(run_cli("thin " + dir.file("inst.udgp") + " --density 0.9 --seed 4 --out " +
                    dir.file("part.udgp")) == 0);
    REQUIRE(run_cli("solve-udgp " + dir.file("part.udgp") + " --time-limit 0 --seed 2 --out " +
                    dir.file("sol")) == 0);
    REQUIRE(std::filesystem::exists(dir.file("sol.xyz")));
    REQUIRE(run_cli("eval " + dir.file("sol.xyz") + " " + dir.file("inst.dgp") +
                    " --ref-xyz " + dir.file("inst.xyz") + " --out " + dir.file("ev.report")) ==
            0);
    REQUIRE(std::filesystem::exists(dir.file("ev.report")));
    REQUIRE(run_cli("solve-dgp " + dir.file("inst.dgp") + " --seed 1 --out " +
                    dir.file("dgp")) == 0);
    const std::string report = slurp(dir.file("dgp.report"));
    REQUIRE(report.find("quartic_objective=") != std::string::npos);
}

TEST_CASE("cli: argument problems exit with the parse code") {
    REQUIRE(run_cli("solve-udgp --nope") == 2);
    REQUIRE(run_cli("gen") == 2);          // missing required kind/--out
    REQUIRE(run_cli("unknown-command") == 2);
}

TEST_CASE("cli: io, parse, and limit failures use distinct codes") {
    TempDir dir;
    REQUIRE(run_cli("solve-udgp " + dir.file("missing.udgp") + " --out " + dir.file("x")) == 4);

    std::ofstream(dir.file("bad.udgp")) << "this is not a distance list\n";
    REQUIRE(run_cli("solve-udgp " + dir.file("bad.udgp") + " --out " + dir.file("x")) == 4);

    REQUIRE(run_cli("gen random --n 4 --k 2 --seed 23 --out " + dir.file("inst")) == 0);
    REQUIRE(run_cli("solve-udgp " + dir.file("inst.udgp") +
                    " --time-limit 0 --node-limit 1 --out " + dir.file("x")) == 3);
}

TEST_CASE("cli: sweep emits the table") {
    TempDir dir;
    REQUIRE(run_cli("gen random --n 4 --k 2 --seed 31 --out " + dir.file("inst")) == 0);
    REQUIRE(run_cli("sweep " + dir.file("inst.udgp") +
                    " --density 1.0 --seeds 1 --time-limit 0 --ref-graph " + dir.file("inst.dgp") +
                    " --out " + dir.file("table.tsv")) == 0);
    const std::string table = slurp(dir.file("table.tsv"));
    REQUIRE(table.rfind("density\t", 0) == 0);
    REQUIRE(std::count(table.begin(), table.end(), '\n') == 2);
}
