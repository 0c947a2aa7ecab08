#ifndef UDGP_MATRIX_HPP
#define UDGP_MATRIX_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "udgp/common.hpp"

namespace udgp {

// Dense row-major matrix. Sized for desk-scale work (n up to a few hundred).
class Matrix {
  public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
        if (rows < 0 || cols < 0) throw Error("matrix dimensions must be nonnegative");
    }

    static Matrix identity(int order) {
        Matrix m(order, order);
        for (int i = 0; i < order; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    double frobenius_norm() const {
        double sum = 0.0;
        for (double v : data_) sum += v * v;
        return std::sqrt(sum);
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw Error("matrix product dimension mismatch");
        Matrix c(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Symmetric matrix of order n; assignments through set() keep both triangles
// in sync.
class SymMatrix {
  public:
    SymMatrix() = default;
    explicit SymMatrix(int order, double fill = 0.0) : full_(order, order, fill) {
        if (order < 1) throw Error("symmetric matrix order must be >= 1");
    }

    static SymMatrix identity(int order) {
        SymMatrix m(order);
        for (int i = 0; i < order; ++i) m.set(i, i, 1.0);
        return m;
    }

    int order() const { return full_.rows(); }

    double operator()(int i, int j) const { return full_(i, j); }

    void set(int i, int j, double value) {
        full_(i, j) = value;
        full_(j, i) = value;
    }

    void add(int i, int j, double value) { set(i, j, full_(i, j) + value); }

    const Matrix& as_matrix() const { return full_; }

    bool all_finite() const { return full_.all_finite(); }
    double frobenius_norm() const { return full_.frobenius_norm(); }

    double offdiag_abs_row_sum(int i) const {
        double sum = 0.0;
        for (int j = 0; j < order(); ++j)
            if (j != i) sum += std::abs(full_(i, j));
        return sum;
    }

  private:
    Matrix full_;
};

// Coordinates of n points in R^K, one row per vertex. Units are lengths
// (e.g. angstroms for molecular instances).
struct Realization {
    int n = 0;
    int k = 0;
    Matrix coords;

    Realization() = default;
    Realization(int n_, int k_) : n(n_), k(k_), coords(n_, k_) {
        if (n_ < 1 || k_ < 1) throw Error("realization needs n >= 1 and K >= 1");
    }

    double& at(int i, int d) { return coords(i, d); }
    double at(int i, int d) const { return coords(i, d); }

    double squared_distance(int i, int j) const {
        double sum = 0.0;
        for (int d = 0; d < k; ++d) {
            const double diff = coords(i, d) - coords(j, d);
            sum += diff * diff;
        }
        return sum;
    }

    double distance(int i, int j) const { return std::sqrt(squared_distance(i, j)); }

    // Translate so the centroid sits at the origin.
    void center() {
        for (int d = 0; d < k; ++d) {
            double mean = 0.0;
            for (int i = 0; i < n; ++i) mean += coords(i, d);
            mean /= n;
            for (int i = 0; i < n; ++i) coords(i, d) -= mean;
        }
    }
};

}  // namespace udgp

#endif
