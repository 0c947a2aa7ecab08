#ifndef UDGP_METRICS_HPP
#define UDGP_METRICS_HPP

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "udgp/common.hpp"
#include "udgp/dgp.hpp"
#include "udgp/instance.hpp"
#include "udgp/io.hpp"
#include "udgp/matrix.hpp"

namespace udgp {

// Mean absolute deviation of realized distances from edge weights
// (distances, not squared distances).
inline double mde(const Realization& x, const WeightedGraph& g) {
    if (x.n != g.n) throw Error("mde: size mismatch");
    if (g.edges.empty()) throw Error("mde: graph has no edges");
    double sum = 0.0;
    for (const Edge& e : g.edges) sum += std::abs(x.distance(e.i, e.j) - e.weight);
    return sum / static_cast<double>(g.edges.size());
}

// Mean over all upper-triangle positions of the absolute weight difference;
// absent edges weigh 0.
inline double adjacency_mean_error(const WeightedGraph& a, const WeightedGraph& b) {
    if (a.n != b.n) throw Error("adjacency_mean_error: vertex counts differ");
    const Matrix adj_a = a.adjacency();
    const Matrix adj_b = b.adjacency();
    const double pairs = static_cast<double>(a.n) * (a.n - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < a.n; ++i)
        for (int j = i + 1; j < a.n; ++j) sum += std::abs(adj_a(i, j) - adj_b(i, j));
    return sum / pairs;
}

namespace detail {

struct SmallSvd {
    Matrix u, v;               // H = U diag(sigma) V^T
    std::vector<double> sigma;
};

// One-sided Jacobi: right rotations orthogonalize the columns of H.
inline SmallSvd svd_small(const Matrix& h) {
    const int k = h.rows();
    Matrix a = h;
    Matrix v = Matrix::identity(k);
    for (int sweep = 0; sweep < 60; ++sweep) {
        double worst = 0.0;
        for (int p = 0; p < k; ++p)
            for (int q = p + 1; q < k; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (int r = 0; r < k; ++r) {
                    app += a(r, p) * a(r, p);
                    aqq += a(r, q) * a(r, q);
                    apq += a(r, p) * a(r, q);
                }
                const double denom = std::sqrt(app * aqq);
                if (denom > 0.0) worst = std::max(worst, std::abs(apq) / denom);
                if (std::abs(apq) <= 1e-15 * std::max(denom, 1e-300)) continue;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (int r = 0; r < k; ++r) {
                    const double ap = a(r, p), aq = a(r, q);
                    a(r, p) = cs * ap - sn * aq;
                    a(r, q) = sn * ap + cs * aq;
                    const double vp = v(r, p), vq = v(r, q);
                    v(r, p) = cs * vp - sn * vq;
                    v(r, q) = sn * vp + cs * vq;
                }
            }
        if (worst < 1e-15) break;
    }
    SmallSvd out;
    out.v = v;
    out.sigma.assign(k, 0.0);
    out.u = Matrix(k, k);
    double sigma_max = 0.0;
    for (int j = 0; j < k; ++j) {
        double norm = 0.0;
        for (int r = 0; r < k; ++r) norm += a(r, j) * a(r, j);
        out.sigma[j] = std::sqrt(norm);
        sigma_max = std::max(sigma_max, out.sigma[j]);
    }
    for (int j = 0; j < k; ++j) {
        if (out.sigma[j] > 1e-14 * std::max(sigma_max, 1e-300)) {
            for (int r = 0; r < k; ++r) out.u(r, j) = a(r, j) / out.sigma[j];
        } else {
            // Null column: complete with a unit vector orthogonal to the rest.
            for (int basis = 0; basis < k; ++basis) {
                std::vector<double> cand(k, 0.0);
                cand[basis] = 1.0;
                for (int jj = 0; jj < k; ++jj) {
                    if (jj == j) continue;
                    double dot = 0.0;
                    for (int r = 0; r < k; ++r) dot += cand[r] * out.u(r, jj);
                    for (int r = 0; r < k; ++r) cand[r] -= dot * out.u(r, jj);
                }
                double norm = 0.0;
                for (double c : cand) norm += c * c;
                if (norm > 1e-8) {
                    norm = std::sqrt(norm);
                    for (int r = 0; r < k; ++r) out.u(r, j) = cand[r] / norm;
                    break;
                }
            }
        }
    }
    return out;
}

inline double det_small(Matrix m) {
    const int k = m.rows();
    double det = 1.0;
    for (int col = 0; col < k; ++col) {
        int pivot = col;
        for (int r = col + 1; r < k; ++r)
            if (std::abs(m(r, col)) > std::abs(m(pivot, col))) pivot = r;
        if (m(pivot, col) == 0.0) return 0.0;
        if (pivot != col) {
            for (int c = 0; c < k; ++c) std::swap(m(pivot, c), m(col, c));
            det = -det;
        }
        det *= m(col, col);
        for (int r = col + 1; r < k; ++r) {
            const double f = m(r, col) / m(col, col);
            for (int c = col; c < k; ++c) m(r, c) -= f * m(col, c);
        }
    }
    return det;
}

}  // namespace detail

struct AlignResult {
    Realization aligned;
    double rmsd = 0.0;
};

// Least-squares rigid superposition of x onto ref (orthogonal transform plus
// translation). Reflections are allowed by default since distance data cannot
// fix chirality; pass false to restrict to proper rotations.
inline AlignResult procrustes_align(const Realization& x, const Realization& ref,
                                    bool allow_reflections = true) {
    if (x.n != ref.n || x.k != ref.k) throw Error("procrustes_align: shape mismatch");
    const int n = x.n, k = x.k;

    std::vector<double> cx(k, 0.0), cr(k, 0.0);
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < k; ++d) {
            cx[d] += x.at(i, d) / n;
            cr[d] += ref.at(i, d) / n;
        }
    double ref_spread = 0.0;
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < k; ++d) {
            const double c = ref.at(i, d) - cr[d];
            ref_spread += c * c;
        }
    if (ref_spread <= 1e-24) throw Error("procrustes_align: degenerate reference");

    Matrix h(k, k);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b)
                h(a, b) += (x.at(i, a) - cx[a]) * (ref.at(i, b) - cr[b]);

    detail::SmallSvd svd = detail::svd_small(h);
    Matrix q = svd.u * svd.v.transposed();
    if (!allow_reflections && detail::det_small(q) < 0.0) {
        int smallest = 0;
        for (int j = 1; j < k; ++j)
            if (svd.sigma[j] < svd.sigma[smallest]) smallest = j;
        for (int r = 0; r < k; ++r) svd.u(r, smallest) = -svd.u(r, smallest);
        q = svd.u * svd.v.transposed();
    }

    AlignResult out;
    out.aligned = Realization(n, k);
    double ss = 0.0;
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < k; ++d) {
            double v = cr[d];
            for (int a = 0; a < k; ++a) v += (x.at(i, a) - cx[a]) * q(a, d);
            out.aligned.at(i, d) = v;
            const double diff = v - ref.at(i, d);
            ss += diff * diff;
        }
    out.rmsd = std::sqrt(ss / n);
    return out;
}

// Flat key=value run summary embedded in CLI reports.
struct EvaluationReport {
    double quartic = 0.0;
    double mde_value = 0.0;
    double density = 1.0;
    std::optional<double> adjacency_error;
    std::optional<double> rmsd;
    std::vector<std::pair<std::string, double>> stage_seconds;
    std::vector<std::pair<std::string, std::string>> extra;

    std::string serialize() const {
        std::ostringstream out;
        out << "quartic_objective=" << detail::format_value(quartic) << '\n';
        out << "mde=" << detail::format_value(mde_value) << '\n';
        out << "density=" << detail::format_value(density) << '\n';
        if (adjacency_error)
            out << "adjacency_mean_error=" << detail::format_value(*adjacency_error) << '\n';
        if (rmsd) out << "rmsd=" << detail::format_value(*rmsd) << '\n';
        for (const auto& [stage, seconds] : stage_seconds)
            out << stage << "_seconds=" << detail::format_value(seconds) << '\n';
        for (const auto& [key, value] : extra) out << key << '=' << value << '\n';
        return out.str();
    }
};

inline void write_report(const std::string& path, const EvaluationReport& report) {
    detail::write_file_atomic(path, report.serialize());
}

}  // namespace udgp

#endif
