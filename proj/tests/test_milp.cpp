#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "support/oracles.hpp"
#include "udgp/branch_and_bound.hpp"
#include "udgp/milp.hpp"
#include "udgp/rng.hpp"
#include "udgp/simplex.hpp"

using namespace udgp;

TEST_CASE("model bookkeeping") {
    MilpModel m;
    int x = m.add_var(0.0, 10.0, false, "x");
    int y = m.add_binary("y");
    int z = m.add_var(-kInf, kInf, false);
    m.set_objective(x, 1.0);
    m.set_objective(y, -2.0);
    m.add_row(Relation::LessEqual, 5.0, {{x, 1.0}, {y, 3.0}});
    m.add_row(Relation::Equal, 1.0, {{z, 1.0}});

    REQUIRE(m.num_vars() == 3);
    REQUIRE(m.num_rows() == 2);
    REQUIRE(m.num_nonzeros() == 3);
    REQUIRE(m.is_integer(y));
    REQUIRE_FALSE(m.is_integer(x));
    REQUIRE(m.var_name(y) == "y");
    REQUIRE(m.var_name(z) == "x2");
    REQUIRE(m.lb(y) == 0.0);
    REQUIRE(m.ub(y) == 1.0);

    std::vector<double> point{2.0, 1.0, 1.0};
    REQUIRE(m.objective_value(point) == Catch::Approx(0.0));
    REQUIRE(m.row_activity(0, point) == Catch::Approx(5.0));
    REQUIRE(m.max_violation(point) == Catch::Approx(0.0));
    REQUIRE(m.is_feasible(point, 1e-7));

    point[0] = 3.0;  // activity 6 > 5
    REQUIRE(m.max_violation(point) > 0.1);
    REQUIRE_FALSE(m.is_feasible(point, 1e-7));

    std::vector<double> frac{0.0, 0.4, 1.0};
    REQUIRE(m.max_integrality_violation(frac) == Catch::Approx(0.4));
}

TEST_CASE("simplex solves a textbook LP") {
    // max x + y s.t. x + 2y <= 4, 3x + y <= 6, x,y >= 0
    // optimum at (8/5, 6/5), value 14/5. Minimize the negation.
    MilpModel m;
    int x = m.add_var(0.0, kInf, false);
    int y = m.add_var(0.0, kInf, false);
    m.set_objective(x, -1.0);
    m.set_objective(y, -1.0);
    m.add_row(Relation::LessEqual, 4.0, {{x, 1.0}, {y, 2.0}});
    m.add_row(Relation::LessEqual, 6.0, {{x, 3.0}, {y, 1.0}});
    LpSolution sol = solve_lp(m);
    REQUIRE(sol.status == LpStatus::Optimal);
    REQUIRE(sol.objective == Catch::Approx(-14.0 / 5.0));
    REQUIRE(sol.values[x] == Catch::Approx(8.0 / 5.0));
    REQUIRE(sol.values[y] == Catch::Approx(6.0 / 5.0));
}

TEST_CASE("simplex handles equality rows and negative bounds") {
    MilpModel m;
    int x = m.add_var(-5.0, 5.0, false);
    int y = m.add_var(-5.0, 5.0, false);
    m.set_objective(x, 1.0);
    m.set_objective(y, 2.0);
    m.add_row(Relation::Equal, 1.0, {{x, 1.0}, {y, 1.0}});
    LpSolution sol = solve_lp(m);
    REQUIRE(sol.status == LpStatus::Optimal);
    // Minimize x + 2y on x + y = 1 inside the box: y = -5, x = 6 clipped to
    // 5 -> actually x <= 5 so best is x = 5, y = -4, value -3.
    REQUIRE(sol.objective == Catch::Approx(-3.0));
    REQUIRE(sol.values[x] == Catch::Approx(5.0));
    REQUIRE(sol.values[y] == Catch::Approx(-4.0));
}

TEST_CASE("simplex detects infeasibility") {
    MilpModel m;
    int x = m.add_var(0.0, 1.0, false);
    m.add_row(Relation::GreaterEqual, 3.0, {{x, 1.0}});
    LpSolution sol = solve_lp(m);
    REQUIRE(sol.status == LpStatus::Infeasible);
}

TEST_CASE("simplex detects unboundedness") {
    MilpModel m;
    int x = m.add_var(0.0, kInf, false);
    int y = m.add_var(0.0, kInf, false);
    m.set_objective(x, -1.0);
    m.add_row(Relation::LessEqual, 10.0, {{x, 1.0}, {y, -1.0}});
    LpSolution sol = solve_lp(m);
    REQUIRE(sol.status == LpStatus::Unbounded);
}

TEST_CASE("simplex with free variables") {
    MilpModel m;
    int x = m.add_var(-kInf, kInf, false);
    m.set_objective(x, 1.0);
    m.add_row(Relation::GreaterEqual, -7.5, {{x, 1.0}});
    LpSolution sol = solve_lp(m);
    REQUIRE(sol.status == LpStatus::Optimal);
    REQUIRE(sol.values[x] == Catch::Approx(-7.5));
}

TEST_CASE("simplex agrees with vertex enumeration on random boxed LPs") {
    Rng rng(2024);
    int optimal = 0, infeasible = 0;
    for (int trial = 0; trial < 400; ++trial) {
        MilpModel m = oracles::random_boxed_lp(rng);
        LpSolution sol = solve_lp(m);
        auto ref = oracles::lp_vertex_oracle(m);
        if (ref) {
            ++optimal;
            INFO("trial " << trial);
            REQUIRE(sol.status == LpStatus::Optimal);
            REQUIRE(sol.objective ==
                    Catch::Approx(ref->objective).margin(1e-6).epsilon(1e-9));
            REQUIRE(m.is_feasible(sol.values, 1e-7));
        } else {
            ++infeasible;
            REQUIRE(sol.status == LpStatus::Infeasible);
        }
    }
    // The generator must exercise both outcomes.
    REQUIRE(optimal > 150);
    REQUIRE(infeasible > 20);
}

TEST_CASE("branch and bound solves a small knapsack") {
    // max 10a + 13b + 7c s.t. 3a + 4b + 2c <= 6 -> best {a,c} = 17? No:
    // {b,c} uses 6 and gives 20.
    MilpModel m;
    int a = m.add_binary();
    int b = m.add_binary();
    int c = m.add_binary();
    m.set_objective(a, -10.0);
    m.set_objective(b, -13.0);
    m.set_objective(c, -7.0);
    m.add_row(Relation::LessEqual, 6.0, {{a, 3.0}, {b, 4.0}, {c, 2.0}});
    MilpSolution sol = solve(m);
    REQUIRE(sol.status == MilpStatus::Optimal);
    REQUIRE(sol.objective == Catch::Approx(-20.0));
    REQUIRE(sol.values[a] == Catch::Approx(0.0).margin(1e-6));
    REQUIRE(sol.values[b] == Catch::Approx(1.0).margin(1e-6));
    REQUIRE(sol.values[c] == Catch::Approx(1.0).margin(1e-6));
    REQUIRE(sol.best_bound == Catch::Approx(-20.0).margin(1e-5));
}

TEST_CASE("branch and bound matches enumeration on random binary models") {
    Rng rng(501);
    int feasible = 0, infeasible = 0;
    for (int trial = 0; trial < 120; ++trial) {
        MilpModel m = oracles::random_binary_milp(rng);
        MilpSolution sol = solve(m);
        oracles::EnumResult ref = oracles::enumerate_binary_milp(m);
        INFO("trial " << trial << " vars " << m.num_vars() << " rows " << m.num_rows());
        if (ref.feasible) {
            ++feasible;
            REQUIRE(sol.status == MilpStatus::Optimal);
            REQUIRE(sol.has_incumbent);
            REQUIRE(sol.objective == Catch::Approx(ref.objective).margin(1e-6));
            REQUIRE(m.is_feasible(sol.values, 1e-7));
            REQUIRE(m.max_integrality_violation(sol.values) <= 1e-6);
        } else {
            ++infeasible;
            REQUIRE(sol.status == MilpStatus::Infeasible);
            REQUIRE_FALSE(sol.has_incumbent);
        }
    }
    REQUIRE(feasible > 40);
    REQUIRE(infeasible > 10);
}

TEST_CASE("mixed binary and continuous optimum") {
    // min -3y + x s.t. x >= 2y - 1, x in [0, 4], y binary.
    // y=1 forces x >= 1 so value -3 + 1 = -2; y=0 gives x=0, value 0.
    MilpModel m;
    int x = m.add_var(0.0, 4.0, false);
    int y = m.add_binary();
    m.set_objective(x, 1.0);
    m.set_objective(y, -3.0);
    m.add_row(Relation::GreaterEqual, -1.0, {{x, 1.0}, {y, -2.0}});
    MilpSolution sol = solve(m);
    REQUIRE(sol.status == MilpStatus::Optimal);
    REQUIRE(sol.objective == Catch::Approx(-2.0));
    REQUIRE(sol.values[y] == Catch::Approx(1.0).margin(1e-6));
    REQUIRE(sol.values[x] == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("unbounded relaxation is reported") {
    MilpModel m;
    int x = m.add_var(0.0, kInf, false);
    int y = m.add_binary();
    m.set_objective(x, -1.0);
    m.add_row(Relation::LessEqual, 1.0, {{y, 1.0}});
    MilpSolution sol = solve(m);
    REQUIRE(sol.status == MilpStatus::UnboundedRelaxation);
}

TEST_CASE("node limit yields FeasibleLimit with a usable incumbent") {
    Rng rng(77);
    // A model big enough to need several nodes.
    MilpModel m;
    std::vector<int> vars;
    for (int j = 0; j < 14; ++j) {
        vars.push_back(m.add_binary());
        m.set_objective(vars.back(), rng.uniform(-3.0, -0.5));
    }
    std::vector<std::pair<int, double>> all;
    for (int j = 0; j < 14; ++j) all.emplace_back(vars[j], 1.0 + (j % 3));
    m.add_row(Relation::LessEqual, 9.0, all);

    SolveLimits limits;
    limits.node_limit = 2;
    MilpSolution sol = solve(m, limits);
    REQUIRE(sol.status == MilpStatus::FeasibleLimit);
    if (sol.has_incumbent) {
        REQUIRE(m.is_feasible(sol.values, 1e-7));
        REQUIRE(sol.best_bound <= sol.objective + 1e-9);
    }
}

TEST_CASE("reported bound is monotone and capped by the incumbent") {
    Rng rng(909);
    for (int trial = 0; trial < 20; ++trial) {
        MilpModel m = oracles::random_binary_milp(rng, 10, 6);
        double last_bound = -kInf;
        bool violated = false;
        SolveLimits limits;
        limits.on_progress = [&](long, double bound, double incumbent, bool has_inc) {
            if (bound < last_bound - 1e-9) violated = true;
            if (has_inc && bound > incumbent + 1e-9) violated = true;
            last_bound = bound;
        };
        MilpSolution sol = solve(m, limits);
        REQUIRE_FALSE(violated);
        if (sol.status == MilpStatus::Optimal)
            REQUIRE(sol.best_bound >= sol.objective - tol::mip_gap * (1.0 + std::abs(sol.objective)));
    }
}

TEST_CASE("jump heuristic finds feasible points for binary models") {
    Rng rng(3131);
    int found = 0, reference_feasible = 0;
    for (int trial = 0; trial < 60; ++trial) {
        MilpModel m = oracles::random_binary_milp(rng, 10, 6);
        oracles::EnumResult ref = oracles::enumerate_binary_milp(m);
        FjResult fj = feasibility_jump(m);
        if (ref.feasible) ++reference_feasible;
        if (fj.feasible) {
            ++found;
            REQUIRE(ref.feasible);  // never "finds" a point for infeasible models
            REQUIRE(m.is_feasible(fj.values, 1e-7));
            REQUIRE(m.max_integrality_violation(fj.values) <= 1e-6);
        }
    }
    // Heuristic, not exact: must succeed on a decent share of feasible models.
    REQUIRE(found >= reference_feasible / 2);
    REQUIRE(found > 10);
}

TEST_CASE("solver falls back to the jump heuristic above the cell cap") {
    MilpModel m;
    int a = m.add_binary();
    int b = m.add_binary();
    m.set_objective(a, 1.0);
    m.set_objective(b, 1.0);
    m.add_row(Relation::Equal, 1.0, {{a, 1.0}, {b, 1.0}});
    SolveLimits limits;
    limits.lp_cell_cap = 1;  // force the no-LP path
    MilpSolution sol = solve(m, limits);
    REQUIRE(sol.has_incumbent);
    REQUIRE(sol.objective == Catch::Approx(1.0));
    REQUIRE(m.is_feasible(sol.values, 1e-7));
    // Trivial bound is 0 here, so the gap stays open.
    REQUIRE(sol.status == MilpStatus::FeasibleLimit);
    REQUIRE(sol.best_bound <= sol.objective);
}

TEST_CASE("lp file export") {
    MilpModel m;
    int x = m.add_var(0.0, 2.5, false, "width");
    int y = m.add_binary("pick");
    int z = m.add_var(0.0, kInf, true);
    m.set_objective(x, 1.5);
    m.set_objective(y, -1.0);
    m.add_row(Relation::LessEqual, 3.0, {{x, 2.0}, {y, 1.0}});
    m.add_row(Relation::GreaterEqual, 1.0, {{x, 1.0}, {z, -1.0}});
    m.add_row(Relation::Equal, 2.0, {{z, 1.0}});

    const std::string path = "/tmp/udgp_test_export.lp";
    write_lp(path, m);
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    REQUIRE(text.find("Minimize") != std::string::npos);
    REQUIRE(text.find("Subject To") != std::string::npos);
    REQUIRE(text.find("Bounds") != std::string::npos);
    REQUIRE(text.find("Binaries") != std::string::npos);
    REQUIRE(text.find("Generals") != std::string::npos);
    REQUIRE(text.find("End") != std::string::npos);
    REQUIRE(text.find("width") != std::string::npos);
    REQUIRE(text.find("pick") != std::string::npos);
    REQUIRE(text.find("<=") != std::string::npos);
    REQUIRE(text.find(">=") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("model validation catches malformed input") {
    MilpModel m;
    int x = m.add_var(0.0, 1.0, false);
    m.add_row(Relation::LessEqual, 1.0, {{x, 1.0}});
    REQUIRE_NOTHROW(m.validate());

    MilpModel crossed;
    crossed.add_var(2.0, 1.0, false);
    REQUIRE_THROWS_AS(crossed.validate(), Error);
}

TEST_CASE("stall limit turns an open gap into an early stop") {
    // Twenty identical items, capacity 9.5 pairs: the relaxation sits at
    // -9.5 while every integer point reaches -9, so the gap never closes
    // and only the stall rule ends the search.
    MilpModel model;
    std::vector<std::pair<int, double>> row;
    for (int j = 0; j < 20; ++j) {
        model.set_objective(model.add_binary("y" + std::to_string(j)), -1.0);
        row.emplace_back(j, 2.0);
    }
    model.add_row(Relation::LessEqual, 19.0, row);

    SolveLimits stall;
    stall.stall_node_limit = 30;
    MilpSolution a = solve(model, stall);
    REQUIRE(a.has_incumbent);
    REQUIRE(a.objective == Catch::Approx(-9.0).margin(1e-6));
    REQUIRE(a.status == MilpStatus::FeasibleLimit);
    REQUIRE(a.nodes < 200);

    SolveLimits nodes_only;
    nodes_only.node_limit = 400;
    MilpSolution b = solve(model, nodes_only);
    REQUIRE(b.has_incumbent);
    REQUIRE(b.nodes >= 400);  // without the stall rule the search runs on
    REQUIRE(a.nodes < b.nodes);
}
