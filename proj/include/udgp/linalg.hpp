#ifndef UDGP_LINALG_HPP
#define UDGP_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "udgp/matrix.hpp"
#include "udgp/rng.hpp"

namespace udgp {

// Eigenvalues sorted descending; eigenvector columns paired with them.
// Columns are sign-normalized so the largest-magnitude component is
// positive, which makes decompositions reproducible.
struct SpectralDecomposition {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;
};

namespace detail {

inline double offdiag_frobenius(const Matrix& a) {
    double sum = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (i != j) sum += a(i, j) * a(i, j);
    return std::sqrt(sum);
}

}  // namespace detail

// Cyclic Jacobi rotations; converges when the off-diagonal Frobenius mass
// falls below tol::spectral * ||X||_F.
inline SpectralDecomposition spectral_decompose(const SymMatrix& x) {
    if (!x.all_finite()) throw Error("spectral_decompose: non-finite input");
    const int n = x.order();
    Matrix a = x.as_matrix();
    Matrix v(n, n);
    for (int i = 0; i < n; ++i) v(i, i) = 1.0;

    const double norm = x.frobenius_norm();
    const double stop = tol::spectral * norm;
    const int max_sweeps = 60;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (detail::offdiag_frobenius(a) <= stop) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double sign = theta >= 0.0 ? 1.0 : -1.0;
                const double t = sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double app = a(p, p);
                const double aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (int r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double arp = a(r, p);
                        const double arq = a(r, q);
                        a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
                        a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
                    }
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }
    if (detail::offdiag_frobenius(a) > stop)
        throw Error("spectral_decompose: Jacobi iteration did not converge");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int lhs, int rhs) { return a(lhs, lhs) > a(rhs, rhs); });

    SpectralDecomposition result;
    result.eigenvalues.resize(n);
    result.eigenvectors = Matrix(n, n);
    for (int col = 0; col < n; ++col) {
        const int src = order[col];
        result.eigenvalues[col] = a(src, src);
        int lead = 0;
        for (int r = 1; r < n; ++r)
            if (std::abs(v(r, src)) > std::abs(v(lead, src))) lead = r;
        const double flip = v(lead, src) < 0.0 ? -1.0 : 1.0;
        for (int r = 0; r < n; ++r) result.eigenvectors(r, col) = flip * v(r, src);
    }
    return result;
}

// Diagonal dominance, checked exactly: X_ii >= sum_{j != i} |X_ij| per row.
inline bool is_dd(const SymMatrix& x) {
    for (int i = 0; i < x.order(); ++i)
        if (x(i, i) < x.offdiag_abs_row_sum(i)) return false;
    return true;
}

// Per-row eigenvalue enclosures [X_ii - r_i, X_ii + r_i] with r_i the
// off-diagonal absolute row sum; every eigenvalue lies in their union.
inline std::vector<std::pair<double, double>> gershgorin_intervals(const SymMatrix& x) {
    std::vector<std::pair<double, double>> intervals;
    intervals.reserve(x.order());
    for (int i = 0; i < x.order(); ++i) {
        const double radius = x.offdiag_abs_row_sum(i);
        intervals.emplace_back(x(i, i) - radius, x(i, i) + radius);
    }
    return intervals;
}

inline bool is_psd(const SymMatrix& x, double tol) {
    const SpectralDecomposition spec = spectral_decompose(x);
    const double floor_value = -tol * std::max(1.0, x.frobenius_norm());
    return spec.eigenvalues.back() >= floor_value;
}

namespace detail {

// Eigenvalues slightly below zero are clamped before square roots; anything
// more negative means the matrix is not PSD at the given tolerance.
inline std::vector<double> clamped_spectrum(const SymMatrix& x, const SpectralDecomposition& spec,
                                            double tol, const char* who) {
    const double floor_value = -tol * std::max(1.0, x.frobenius_norm());
    std::vector<double> lambda = spec.eigenvalues;
    for (double& value : lambda) {
        if (value < floor_value)
            throw Error(strfmt("%s: matrix is not PSD (eigenvalue %.3e below tolerance)", who,
                               value));
        if (value < 0.0) value = 0.0;
    }
    return lambda;
}

}  // namespace detail

// Best rank-K factor: keep the K largest eigenvalues, zero the rest, and
// return P * sqrt(Lambda_K) as n x K coordinates.
inline Realization pca_realization(const SymMatrix& x, int k, double tol = 1e-9) {
    if (k < 1) throw Error("pca_realization: K must be >= 1");
    const int n = x.order();
    const SpectralDecomposition spec = spectral_decompose(x);
    const std::vector<double> lambda = detail::clamped_spectrum(x, spec, tol, "pca_realization");

    Realization out(n, k);
    const int keep = std::min(k, n);
    for (int d = 0; d < keep; ++d) {
        const double scale = std::sqrt(lambda[d]);
        for (int i = 0; i < n; ++i) out.at(i, d) = scale * spec.eigenvectors(i, d);
    }
    return out;
}

// Random projection of the full factor F = P * sqrt(Lambda) by an n x K
// Gaussian matrix with per-component standard deviation 1/sqrt(K).
inline Realization barvinok_realization(const SymMatrix& x, int k, std::uint64_t seed,
                                        double tol = 1e-9) {
    if (k < 1) throw Error("barvinok_realization: K must be >= 1");
    const int n = x.order();
    const SpectralDecomposition spec = spectral_decompose(x);
    const std::vector<double> lambda =
        detail::clamped_spectrum(x, spec, tol, "barvinok_realization");

    Matrix factor(n, n);
    for (int d = 0; d < n; ++d) {
        const double scale = std::sqrt(lambda[d]);
        for (int i = 0; i < n; ++i) factor(i, d) = scale * spec.eigenvectors(i, d);
    }

    Rng rng(seed);
    const double stddev = 1.0 / std::sqrt(static_cast<double>(k));
    Matrix z(n, k);
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < k; ++d) z(i, d) = rng.normal(stddev);

    Realization out(n, k);
    out.coords = factor * z;
    return out;
}

inline SymMatrix gram_from_realization(const Realization& x) {
    SymMatrix gram(x.n);
    for (int i = 0; i < x.n; ++i)
        for (int j = i; j < x.n; ++j) {
            double dot = 0.0;
            for (int d = 0; d < x.k; ++d) dot += x.at(i, d) * x.at(j, d);
            gram.set(i, j, dot);
        }
    return gram;
}

}  // namespace udgp

#endif
