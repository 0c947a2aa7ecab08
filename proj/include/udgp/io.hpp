#ifndef UDGP_IO_HPP
#define UDGP_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "udgp/instance.hpp"

namespace udgp {

namespace detail {

inline std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Whole-file atomic write: temp file in the same directory, then rename.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp);
        out << content;
        if (!out.flush()) throw IoError("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + tmp + " -> " + path + ": " + ec.message());
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

}  // namespace detail

// --- DistanceList files: header "UDGP <n> <m> <K>", then one value per line.

inline void write_distance_list(const std::string& path, const DistanceList& delta) {
    std::ostringstream out;
    out << "UDGP " << delta.n << ' ' << delta.m() << ' ' << delta.k << '\n';
    for (double v : delta.values) out << detail::format_value(v) << '\n';
    detail::write_file_atomic(path, out.str());
}

inline DistanceList read_distance_list(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw ParseError(path + ": empty file", 1);
    std::istringstream header(lines[0]);
    std::string magic;
    int n = 0, m = 0, k = 0;
    if (!(header >> magic >> n >> m >> k) || magic != "UDGP")
        throw ParseError(path + ": expected header 'UDGP <n> <m> <K>'", 1);
    if (m < 1) throw ParseError(path + ": value count must be positive", 1);
    if (static_cast<long>(lines.size()) < 1 + m)
        throw ParseError(path + ": expected " + std::to_string(m) + " values",
                         static_cast<long>(lines.size()));
    std::vector<double> values;
    values.reserve(m);
    for (int idx = 0; idx < m; ++idx) {
        std::istringstream row(lines[1 + idx]);
        double v = 0.0;
        if (!(row >> v)) throw ParseError(path + ": malformed value", 2 + idx);
        if (!(v > 0.0)) throw ParseError(path + ": distance values must be positive", 2 + idx);
        values.push_back(v);
    }
    try {
        return DistanceList(n, k, std::move(values));
    } catch (const Error& err) {
        throw ParseError(path + ": " + err.what(), 1);
    }
}

// --- WeightedGraph files: header "DGP <n> <|E|> <K>", then "<i> <j> <d>"
// --- per edge with 1-based i < j.

inline void write_weighted_graph(const std::string& path, const WeightedGraph& graph, int k) {
    std::ostringstream out;
    out << "DGP " << graph.n << ' ' << graph.edge_count() << ' ' << k << '\n';
    for (const Edge& e : graph.edges)
        out << e.i + 1 << ' ' << e.j + 1 << ' ' << detail::format_value(e.weight) << '\n';
    detail::write_file_atomic(path, out.str());
}

struct GraphFile {
    WeightedGraph graph;
    int k = 3;
};

inline GraphFile read_weighted_graph(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw ParseError(path + ": empty file", 1);
    std::istringstream header(lines[0]);
    std::string magic;
    int n = 0, edge_count = 0, k = 0;
    if (!(header >> magic >> n >> edge_count >> k) || magic != "DGP")
        throw ParseError(path + ": expected header 'DGP <n> <|E|> <K>'", 1);
    if (static_cast<long>(lines.size()) < 1 + edge_count)
        throw ParseError(path + ": expected " + std::to_string(edge_count) + " edges",
                         static_cast<long>(lines.size()));
    std::vector<Edge> edges;
    edges.reserve(edge_count);
    for (int e = 0; e < edge_count; ++e) {
        const long line_no = 2 + e;
        std::istringstream row(lines[1 + e]);
        int i = 0, j = 0;
        double w = 0.0;
        if (!(row >> i >> j >> w)) throw ParseError(path + ": malformed edge", line_no);
        if (i < 1 || i >= j || j > n)
            throw ParseError(path + ": edge endpoints must satisfy 1 <= i < j <= n", line_no);
        if (!(w > 0.0)) throw ParseError(path + ": edge weights must be positive", line_no);
        edges.push_back({i - 1, j - 1, w});
    }
    try {
        return GraphFile{WeightedGraph(n, std::move(edges)), k};
    } catch (const Error& err) {
        throw ParseError(path + ": " + err.what(), 1);
    }
}

// --- Realization files: standard XYZ chemical format, element fixed to C.
// --- K < 3 is zero-padded to three columns; K > 3 is not representable.

inline void write_realization_xyz(const std::string& path, const Realization& x,
                                  const std::string& comment = "udgp realization") {
    if (x.k > 3) throw IoError("write_realization_xyz: XYZ files support K <= 3");
    std::ostringstream out;
    out << x.n << '\n' << comment << '\n';
    for (int i = 0; i < x.n; ++i) {
        out << 'C';
        for (int d = 0; d < 3; ++d)
            out << ' ' << detail::format_value(d < x.k ? x.at(i, d) : 0.0);
        out << '\n';
    }
    detail::write_file_atomic(path, out.str());
}

inline Realization read_realization_xyz(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw ParseError(path + ": empty file", 1);
    int n = 0;
    {
        std::istringstream header(lines[0]);
        if (!(header >> n) || n < 1)
            throw ParseError(path + ": expected a positive atom count", 1);
    }
    if (static_cast<long>(lines.size()) < 2 + n)
        throw ParseError(path + ": expected " + std::to_string(n) + " atom lines",
                         static_cast<long>(lines.size()));
    Realization x(n, 3);
    for (int i = 0; i < n; ++i) {
        const long line_no = 3 + i;
        std::istringstream row(lines[2 + i]);
        std::string element;
        double cx = 0.0, cy = 0.0, cz = 0.0;
        if (!(row >> element >> cx >> cy >> cz))
            throw ParseError(path + ": malformed atom line", line_no);
        x.at(i, 0) = cx;
        x.at(i, 1) = cy;
        x.at(i, 2) = cz;
    }
    if (!x.coords.all_finite()) throw ParseError(path + ": non-finite coordinates", 3);
    return x;
}

// --- Assignment files: header "ASSIGN <n> <m>", then "<l> <i> <j>" with
// --- 1-based indices.

inline void write_assignment(const std::string& path, const Assignment& alpha) {
    std::ostringstream out;
    out << "ASSIGN " << alpha.n << ' ' << alpha.m() << '\n';
    for (int l = 0; l < alpha.m(); ++l)
        out << l + 1 << ' ' << alpha.pairs[l].first + 1 << ' ' << alpha.pairs[l].second + 1
            << '\n';
    detail::write_file_atomic(path, out.str());
}

inline Assignment read_assignment(const std::string& path) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw ParseError(path + ": empty file", 1);
    std::istringstream header(lines[0]);
    std::string magic;
    int n = 0, m = 0;
    if (!(header >> magic >> n >> m) || magic != "ASSIGN")
        throw ParseError(path + ": expected header 'ASSIGN <n> <m>'", 1);
    if (static_cast<long>(lines.size()) < 1 + m)
        throw ParseError(path + ": expected " + std::to_string(m) + " rows",
                         static_cast<long>(lines.size()));
    Assignment alpha;
    alpha.n = n;
    alpha.pairs.assign(m, {0, 0});
    std::vector<bool> seen(m, false);
    for (int row_idx = 0; row_idx < m; ++row_idx) {
        const long line_no = 2 + row_idx;
        std::istringstream row(lines[1 + row_idx]);
        int l = 0, i = 0, j = 0;
        if (!(row >> l >> i >> j)) throw ParseError(path + ": malformed row", line_no);
        if (l < 1 || l > m) throw ParseError(path + ": index out of range", line_no);
        if (seen[l - 1]) throw ParseError(path + ": duplicate index", line_no);
        if (i < 1 || i >= j || j > n)
            throw ParseError(path + ": pair must satisfy 1 <= i < j <= n", line_no);
        seen[l - 1] = true;
        alpha.pairs[l - 1] = {i - 1, j - 1};
    }
    return alpha;
}

}  // namespace udgp

#endif
