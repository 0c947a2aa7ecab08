#ifndef UDGP_DGP_HPP
#define UDGP_DGP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "udgp/common.hpp"
#include "udgp/instance.hpp"
#include "udgp/matrix.hpp"
#include "udgp/rng.hpp"

namespace udgp {

// f(x) = sum over edges of (||x_i - x_j||^2 - d_ij^2)^2
inline double quartic_objective(const Realization& x, const WeightedGraph& g) {
    if (x.n != g.n) throw Error("quartic_objective: size mismatch");
    double sum = 0.0;
    for (const Edge& e : g.edges) {
        const double r = x.squared_distance(e.i, e.j) - e.weight * e.weight;
        sum += r * r;
    }
    return sum;
}

// d f / d x_i = sum over incident edges of 4 (||x_i - x_j||^2 - d^2)(x_i - x_j)
inline Matrix quartic_gradient(const Realization& x, const WeightedGraph& g) {
    if (x.n != g.n) throw Error("quartic_gradient: size mismatch");
    Matrix grad(x.n, x.k);
    for (const Edge& e : g.edges) {
        const double r = x.squared_distance(e.i, e.j) - e.weight * e.weight;
        for (int d = 0; d < x.k; ++d) {
            const double diff = x.at(e.i, d) - x.at(e.j, d);
            grad(e.i, d) += 4.0 * r * diff;
            grad(e.j, d) -= 4.0 * r * diff;
        }
    }
    return grad;
}

struct LocalSettings {
    int max_steps = 5000;
    double grad_tol = tol::gradient;
};

struct LocalResult {
    Realization x;
    double objective = kInf;
    bool converged = false;
    bool diverged = false;  // a non-finite iterate aborted the run
    int steps = 0;
};

namespace detail {

inline double inf_norm(const std::vector<double>& v) {
    double best = 0.0;
    for (double e : v) best = std::max(best, std::abs(e));
    return best;
}

inline void flatten(const Matrix& m, std::vector<double>& out) {
    out.assign(m.data().begin(), m.data().end());
}

}  // namespace detail

// Quasi-Newton descent with dense inverse-Hessian memory and a backtracking
// sufficient-decrease line search; curvature failures fall back to steepest
// descent. Only improving steps are accepted, so the result never exceeds the
// start value.
inline LocalResult local_solve(const WeightedGraph& g, const Realization& x0,
                               const LocalSettings& settings = {}) {
    if (!x0.coords.all_finite()) throw Error("local_solve: start point must be finite");
    const int dim = x0.n * x0.k;
    LocalResult out;
    out.x = x0;
    out.objective = quartic_objective(out.x, g);
    if (!std::isfinite(out.objective)) {
        out.diverged = true;
        return out;
    }

    std::vector<double> grad, grad_new, direction(dim), s(dim), y(dim), hy(dim);
    detail::flatten(quartic_gradient(out.x, g), grad);
    Matrix inv_h = Matrix::identity(dim);
    Realization trial = out.x;
    constexpr double c1 = 1e-4;

    auto grad_small = [&](double f, const std::vector<double>& gr) {
        return detail::inf_norm(gr) <= settings.grad_tol * (1.0 + f);
    };

    bool fresh_memory = true;
    for (out.steps = 0; out.steps < settings.max_steps; ++out.steps) {
        if (grad_small(out.objective, grad)) {
            out.converged = true;
            return out;
        }

        for (int a = 0; a < dim; ++a) {
            double v = 0.0;
            for (int b = 0; b < dim; ++b) v += inv_h(a, b) * grad[b];
            direction[a] = -v;
        }
        double slope = 0.0;
        for (int a = 0; a < dim; ++a) slope += direction[a] * grad[a];
        if (!(slope < 0.0)) {
            for (int a = 0; a < dim; ++a) direction[a] = -grad[a];
            slope = 0.0;
            for (double ge : grad) slope -= ge * ge;
            inv_h = Matrix::identity(dim);
            fresh_memory = true;
        }

        // Backtracking from a gradient-scaled first step.
        double t = fresh_memory ? std::min(1.0, 1.0 / (1.0 + detail::inf_norm(grad))) : 1.0;
        double f_new = kInf;
        bool accepted = false;
        for (int half = 0; half < 60; ++half) {
            for (int i = 0; i < x0.n; ++i)
                for (int d = 0; d < x0.k; ++d)
                    trial.at(i, d) = out.x.at(i, d) + t * direction[static_cast<size_t>(i) * x0.k + d];
            f_new = quartic_objective(trial, g);
            if (!std::isfinite(f_new)) {
                t *= 0.5;
                continue;
            }
            if (f_new <= out.objective + c1 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // No decrease along either direction: treat the point as final.
            out.converged = grad_small(out.objective, grad);
            return out;
        }

        detail::flatten(quartic_gradient(trial, g), grad_new);
        if (!std::isfinite(f_new) || !std::isfinite(detail::inf_norm(grad_new))) {
            out.diverged = true;
            return out;
        }

        double sy = 0.0, ss = 0.0, yy = 0.0;
        for (int a = 0; a < dim; ++a) {
            s[a] = t * direction[a];
            y[a] = grad_new[a] - grad[a];
            sy += s[a] * y[a];
            ss += s[a] * s[a];
            yy += y[a] * y[a];
        }
        if (sy > 1e-12 * std::sqrt(ss * yy)) {
            const double rho = 1.0 / sy;
            for (int a = 0; a < dim; ++a) {
                double v = 0.0;
                for (int b = 0; b < dim; ++b) v += inv_h(a, b) * y[b];
                hy[a] = v;
            }
            double yhy = 0.0;
            for (int a = 0; a < dim; ++a) yhy += y[a] * hy[a];
            for (int a = 0; a < dim; ++a)
                for (int b = 0; b < dim; ++b)
                    inv_h(a, b) += (1.0 + rho * yhy) * rho * s[a] * s[b] -
                                   rho * (s[a] * hy[b] + hy[a] * s[b]);
            fresh_memory = false;
        }

        out.x = trial;
        out.objective = f_new;
        grad.swap(grad_new);
    }
    out.converged = grad_small(out.objective, grad);
    return out;
}

struct MultistartConfig {
    int iterations = 10;
    std::uint64_t seed = 0;
    double start_box = 0.0;  // 0 = use the largest edge weight
    LocalSettings local;
};

struct MultistartResult {
    Realization x;
    double objective = kInf;
    int best_start = -1;
    int converged_starts = 0;
    int diverged_starts = 0;
};

// Best of `iterations` independent seeded local solves; start k draws its
// coordinates from a generator derived from (seed, k), so the outcome does
// not depend on evaluation order. Ties keep the lowest start index.
inline MultistartResult multistart(const WeightedGraph& g, int k,
                                   const MultistartConfig& config = {}) {
    if (config.iterations < 1) throw Error("multistart: need at least one iteration");
    if (k < 1) throw Error("multistart: need K >= 1");
    const double box = config.start_box > 0.0 ? config.start_box
                                              : std::max(g.max_weight(), 1e-3);
    const Rng base(config.seed);
    MultistartResult out;
    for (int start = 0; start < config.iterations; ++start) {
        Rng rng = base.derive(static_cast<std::uint64_t>(start));
        Realization x0(g.n, k);
        for (int i = 0; i < g.n; ++i)
            for (int d = 0; d < k; ++d) x0.at(i, d) = rng.uniform(-box, box);
        const LocalResult local = local_solve(g, x0, config.local);
        if (local.diverged) {
            ++out.diverged_starts;
            log_debug(strfmt("multistart: start %d diverged", start));
            continue;
        }
        if (local.converged) ++out.converged_starts;
        if (local.objective < out.objective) {
            out.objective = local.objective;
            out.x = local.x;
            out.best_start = start;
        }
    }
    if (out.best_start < 0)
        throw Error(strfmt("multistart: all %d starts diverged", config.iterations));
    return out;
}

}  // namespace udgp

#endif
