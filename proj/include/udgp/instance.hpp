#ifndef UDGP_INSTANCE_HPP
#define UDGP_INSTANCE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "udgp/matrix.hpp"
#include "udgp/rng.hpp"

namespace udgp {

// A distance-list instance: m positive values to be matched to vertex pairs
// of an n-point set in R^K. Values are kept sorted ascending.
struct DistanceList {
    int n = 0;
    int k = 0;
    std::vector<double> values;

    DistanceList() = default;
    DistanceList(int n_, int k_, std::vector<double> values_)
        : n(n_), k(k_), values(std::move(values_)) {
        if (n < 2) throw Error("DistanceList: need n >= 2");
        if (k < 1) throw Error("DistanceList: need K >= 1");
        if (values.empty()) throw Error("DistanceList: empty value list");
        if (static_cast<long>(values.size()) > pair_count())
            throw Error("DistanceList: more values than vertex pairs");
        for (double v : values)
            if (!(v > 0.0) || !std::isfinite(v))
                throw Error("DistanceList: values must be positive and finite");
        std::sort(values.begin(), values.end());
    }

    int m() const { return static_cast<int>(values.size()); }
    long pair_count() const { return static_cast<long>(n) * (n - 1) / 2; }
    bool complete() const { return m() == pair_count(); }
    double density() const { return static_cast<double>(m()) / static_cast<double>(pair_count()); }
};

struct Edge {
    int i = 0;  // 0-based, i < j
    int j = 0;
    double weight = 0.0;
};

// Simple edge-weighted undirected graph; edges stored sorted by (i, j).
struct WeightedGraph {
    int n = 0;
    std::vector<Edge> edges;

    WeightedGraph() = default;
    WeightedGraph(int n_, std::vector<Edge> edges_) : n(n_), edges(std::move(edges_)) {
        if (n < 1) throw Error("WeightedGraph: need n >= 1");
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            return a.i != b.i ? a.i < b.i : a.j < b.j;
        });
        for (size_t e = 0; e < edges.size(); ++e) {
            const Edge& edge = edges[e];
            if (edge.i < 0 || edge.i >= edge.j || edge.j >= n)
                throw Error("WeightedGraph: edge endpoints must satisfy 0 <= i < j < n");
            if (!(edge.weight > 0.0) || !std::isfinite(edge.weight))
                throw Error("WeightedGraph: weights must be positive and finite");
            if (e > 0 && edges[e - 1].i == edge.i && edges[e - 1].j == edge.j)
                throw Error("WeightedGraph: duplicate edge");
        }
    }

    int edge_count() const { return static_cast<int>(edges.size()); }

    double max_weight() const {
        double best = 0.0;
        for (const Edge& e : edges) best = std::max(best, e.weight);
        return best;
    }

    // Dense upper-triangular weight lookup; absent edges read as 0.
    Matrix adjacency() const {
        Matrix adj(n, n);
        for (const Edge& e : edges) {
            adj(e.i, e.j) = e.weight;
            adj(e.j, e.i) = e.weight;
        }
        return adj;
    }
};

// The map from distance indices to vertex pairs: total on [m], injective
// into pairs.
struct Assignment {
    int n = 0;
    std::vector<std::pair<int, int>> pairs;  // pairs[l] = (i, j) with i < j, 0-based

    int m() const { return static_cast<int>(pairs.size()); }
};

// Ideal truncated icosahedron with all 90 edges of the given length,
// centered at the origin, vertices sorted lexicographically by coordinates.
inline Realization build_c60(double edge_length = 1.0) {
    if (!(edge_length > 0.0)) throw Error("build_c60: edge length must be positive");
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    // Base triples for unit edge 2; all cyclic rotations and sign choices.
    const double bases[3][3] = {
        {0.0, 1.0, 3.0 * phi},
        {1.0, 2.0 + phi, 2.0 * phi},
        {phi, 2.0, 2.0 * phi + 1.0},
    };

    std::vector<std::array<double, 3>> vertices;
    vertices.reserve(60);
    for (const auto& base : bases) {
        for (int signs = 0; signs < 8; ++signs) {
            double v[3];
            bool skip = false;
            for (int c = 0; c < 3; ++c) {
                const double sign = (signs >> c) & 1 ? -1.0 : 1.0;
                if (base[c] == 0.0 && sign < 0.0) skip = true;
                v[c] = sign * base[c];
            }
            if (skip) continue;
            for (int rot = 0; rot < 3; ++rot)
                vertices.push_back({v[rot % 3], v[(rot + 1) % 3], v[(rot + 2) % 3]});
        }
    }

    const double scale = edge_length / 2.0;
    for (auto& v : vertices)
        for (double& c : v) c *= scale;
    std::sort(vertices.begin(), vertices.end());

    Realization out(static_cast<int>(vertices.size()), 3);
    for (int i = 0; i < out.n; ++i)
        for (int d = 0; d < 3; ++d) out.at(i, d) = vertices[i][d];
    out.center();
    return out;
}

// Complete sorted list of the n(n-1)/2 pairwise distances.
inline DistanceList distances_from_realization(const Realization& x) {
    if (x.n < 2) throw Error("distances_from_realization: need n >= 2");
    std::vector<double> values;
    values.reserve(static_cast<size_t>(x.n) * (x.n - 1) / 2);
    for (int i = 0; i < x.n; ++i)
        for (int j = i + 1; j < x.n; ++j) {
            const double d = x.distance(i, j);
            if (!(d > 0.0)) throw Error(strfmt(
                "distances_from_realization: vertices %d and %d coincide", i + 1, j + 1));
            values.push_back(d);
        }
    return DistanceList(x.n, x.k, std::move(values));
}

// Independent removal: each value kept with the given probability. Only
// complete lists are thinned; an empty draw is resampled so batch sweeps
// stay total.
inline DistanceList thin(const DistanceList& delta, double density, std::uint64_t seed) {
    if (!delta.complete()) throw Error("thin: input list must be complete");
    if (!(density > 0.0) || density > 1.0) throw Error("thin: density must be in (0, 1]");
    const Rng base(seed);
    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng = base.derive(attempt);
        std::vector<double> kept;
        kept.reserve(delta.values.size());
        for (double v : delta.values)
            if (rng.uniform01() < density) kept.push_back(v);
        if (!kept.empty()) return DistanceList(delta.n, delta.k, std::move(kept));
    }
}

// Uniform points in [-box, box]^K with a minimum pairwise separation of
// 1e-6 * box; offending points are redrawn. Returns the ground truth
// together with its complete distance list.
inline std::pair<Realization, DistanceList> random_instance(int n, int k, std::uint64_t seed,
                                                            double box = 1.0) {
    if (n < 2) throw Error("random_instance: need n >= 2");
    if (k < 1) throw Error("random_instance: need K >= 1");
    if (!(box > 0.0)) throw Error("random_instance: box must be positive");
    Rng rng(seed);
    const double min_sep = 1e-6 * box;
    Realization x(n, k);
    for (int i = 0; i < n; ++i) {
        for (;;) {
            for (int d = 0; d < k; ++d) x.at(i, d) = rng.uniform(-box, box);
            bool clear = true;
            for (int p = 0; p < i && clear; ++p)
                if (x.distance(i, p) < min_sep) clear = false;
            if (clear) break;
        }
    }
    DistanceList delta = distances_from_realization(x);
    return {std::move(x), std::move(delta)};
}

}  // namespace udgp

#endif
