#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "udgp/instance.hpp"
#include "udgp/metrics.hpp"
#include "udgp/rng.hpp"

using namespace udgp;

namespace {

Realization random_points(int n, int k, Rng& rng, double box = 1.0) {
    Realization x(n, k);
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < k; ++d) x.at(i, d) = rng.uniform(-box, box);
    return x;
}

}  // namespace

TEST_CASE("mean distance error arithmetic") {
    Realization x(3, 2);
    x.at(1, 0) = 1.0;
    x.at(2, 1) = 1.0;
    // True distances: d(0,1)=1, d(0,2)=1, d(1,2)=sqrt(2).
    WeightedGraph g(3, {{0, 1, 1.5}, {0, 2, 1.0}, {1, 2, std::sqrt(2.0)}});
    // Errors: 0.5, 0, 0 -> mean 1/6.
    REQUIRE(mde(x, g) == Catch::Approx(0.5 / 3.0));

    // Exact fit scores zero; works on distances, not squares.
    WeightedGraph exact(3, {{0, 1, 1.0}, {1, 2, std::sqrt(2.0)}});
    REQUIRE(mde(x, exact) == Catch::Approx(0.0).margin(1e-15));

    Realization wrong(4, 2);
    REQUIRE_THROWS_AS(mde(wrong, g), Error);
}

TEST_CASE("adjacency error counts absent edges as zero weight") {
    WeightedGraph a(3, {{0, 1, 2.0}});
    WeightedGraph b(3, {{0, 1, 1.0}, {1, 2, 3.0}});
    // Differences over the 3 pairs: |2-1|=1, |0-3|=3, |0-0|=0 -> mean 4/3.
    REQUIRE(adjacency_mean_error(a, b) == Catch::Approx(4.0 / 3.0));
    // Metric axioms on examples: symmetry and identity.
    REQUIRE(adjacency_mean_error(b, a) == Catch::Approx(adjacency_mean_error(a, b)));
    REQUIRE(adjacency_mean_error(a, a) == 0.0);

    WeightedGraph other(4, {{0, 1, 1.0}});
    REQUIRE_THROWS_AS(adjacency_mean_error(a, other), Error);
}

TEST_CASE("adjacency error satisfies the triangle inequality on random graphs") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 4;
        auto make = [&]() {
            std::vector<Edge> edges;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    if (rng.uniform01() < 0.6) edges.push_back({i, j, rng.uniform(0.1, 2.0)});
            if (edges.empty()) edges.push_back({0, 1, 1.0});
            return WeightedGraph(n, std::move(edges));
        };
        WeightedGraph a = make(), b = make(), c = make();
        REQUIRE(adjacency_mean_error(a, c) <=
                adjacency_mean_error(a, b) + adjacency_mean_error(b, c) + 1e-12);
    }
}

TEST_CASE("superposition aligns translated copies exactly") {
    Rng rng(11);
    Realization x = random_points(6, 3, rng);
    Realization moved = x;
    for (int i = 0; i < 6; ++i) {
        moved.at(i, 0) += 3.0;
        moved.at(i, 1) -= 1.5;
        moved.at(i, 2) += 0.25;
    }
    AlignResult res = procrustes_align(moved, x);
    REQUIRE(res.rmsd == Catch::Approx(0.0).margin(1e-10));
    for (int i = 0; i < 6; ++i)
        for (int d = 0; d < 3; ++d)
            REQUIRE(res.aligned.at(i, d) == Catch::Approx(x.at(i, d)).margin(1e-9));
}

TEST_CASE("superposition aligns rotated copies exactly") {
    Rng rng(13);
    Realization x = random_points(7, 2, rng);
    const double c = std::cos(1.1), s = std::sin(1.1);
    Realization rotated(7, 2);
    for (int i = 0; i < 7; ++i) {
        rotated.at(i, 0) = c * x.at(i, 0) - s * x.at(i, 1) + 0.7;
        rotated.at(i, 1) = s * x.at(i, 0) + c * x.at(i, 1) - 0.2;
    }
    AlignResult res = procrustes_align(rotated, x);
    REQUIRE(res.rmsd == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("superposition handles mirrored copies per the reflection flag") {
    Rng rng(17);
    Realization x = random_points(5, 3, rng);
    Realization mirrored = x;
    for (int i = 0; i < 5; ++i) mirrored.at(i, 0) = -mirrored.at(i, 0);

    AlignResult allowed = procrustes_align(mirrored, x, true);
    REQUIRE(allowed.rmsd == Catch::Approx(0.0).margin(1e-10));

    // A chiral 5-point cloud cannot be superposed onto its mirror image by a
    // proper rotation.
    AlignResult proper = procrustes_align(mirrored, x, false);
    REQUIRE(proper.rmsd > 1e-3);
    REQUIRE(proper.rmsd >= allowed.rmsd);
}

TEST_CASE("superposition rmsd is optimal against brute rotations in 2d") {
    Rng rng(19);
    Realization x = random_points(5, 2, rng);
    Realization y = random_points(5, 2, rng);
    AlignResult res = procrustes_align(x, y, false);
    // Dense sweep over rotation angles can do no better.
    double best = kInf;
    std::vector<double> cx(2, 0.0), cy(2, 0.0);
    for (int i = 0; i < 5; ++i)
        for (int d = 0; d < 2; ++d) {
            cx[d] += x.at(i, d) / 5.0;
            cy[d] += y.at(i, d) / 5.0;
        }
    for (int step = 0; step < 20000; ++step) {
        const double a = 2.0 * M_PI * step / 20000.0;
        const double c = std::cos(a), s = std::sin(a);
        double ss = 0.0;
        for (int i = 0; i < 5; ++i) {
            const double px = x.at(i, 0) - cx[0], py = x.at(i, 1) - cx[1];
            const double qx = c * px - s * py + cy[0];
            const double qy = s * px + c * py + cy[1];
            ss += (qx - y.at(i, 0)) * (qx - y.at(i, 0)) +
                  (qy - y.at(i, 1)) * (qy - y.at(i, 1));
        }
        best = std::min(best, std::sqrt(ss / 5.0));
    }
    REQUIRE(res.rmsd <= best + 1e-6);
}

TEST_CASE("superposition input validation") {
    Realization a(3, 2), b(4, 2), c(3, 3);
    REQUIRE_THROWS_AS(procrustes_align(a, b), Error);
    REQUIRE_THROWS_AS(procrustes_align(a, c), Error);
    Realization collapsed(3, 2);  // all points coincide -> degenerate reference
    REQUIRE_THROWS_AS(procrustes_align(a, collapsed), Error);
}

TEST_CASE("report serialization") {
    EvaluationReport rep;
    rep.quartic = 0.015625;
    rep.mde_value = 3.5;
    rep.density = 0.5;
    rep.adjacency_error = 0.125;
    rep.rmsd = 0.75;
    rep.stage_seconds = {{"assign", 1.5}, {"dgp", 0.25}};
    rep.extra = {{"nodes", "17"}, {"milp_status", "Optimal"}};
    const std::string text = rep.serialize();
    REQUIRE(text.find("quartic_objective=0.015625") != std::string::npos);
    REQUIRE(text.find("mde=3.5") != std::string::npos);
    REQUIRE(text.find("density=0.5") != std::string::npos);
    REQUIRE(text.find("adjacency_mean_error=0.125") != std::string::npos);
    REQUIRE(text.find("rmsd=0.75") != std::string::npos);
    REQUIRE(text.find("assign_seconds=1.5") != std::string::npos);
    REQUIRE(text.find("dgp_seconds=0.25") != std::string::npos);
    REQUIRE(text.find("nodes=17") != std::string::npos);
    REQUIRE(text.find("milp_status=Optimal") != std::string::npos);

    // Optional fields stay absent when unset.
    EvaluationReport bare;
    const std::string none = bare.serialize();
    REQUIRE(none.find("rmsd=") == std::string::npos);
    REQUIRE(none.find("adjacency_mean_error=") == std::string::npos);

    const std::string path = "/tmp/udgp_test_report.txt";
    write_report(path, rep);
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    REQUIRE(buf.str() == text);
    std::filesystem::remove(path);
}
