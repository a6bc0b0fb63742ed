#pragma once

#include <cstddef>
#include <vector>

#include "uqsurro/errors.hpp"

namespace uqsurro {

// Dense row-major matrix of doubles. Just enough linear algebra for the
// small networks and datasets in this library.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), v(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return v[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }

    double* row_ptr(std::size_t r) { return v.data() + r * cols; }
    const double* row_ptr(std::size_t r) const { return v.data() + r * cols; }

    std::vector<double> row(std::size_t r) const {
        return std::vector<double>(row_ptr(r), row_ptr(r) + cols);
    }

    void fill(double x) { std::fill(v.begin(), v.end(), x); }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// Loop orders and blocking below keep the large operand cache-resident for
// the tall-weights / short-batch shapes the training loop produces.

// C += A * B, shapes (m x k) * (k x n) -> (m x n). Blocks over k so the B
// tile is reused across all rows of A.
inline void gemm_acc(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols)
        throw DataError("gemm: incompatible shapes");
    const std::size_t m = a.rows, k = a.cols, n = b.cols;
    constexpr std::size_t tile = 64;
    for (std::size_t p0 = 0; p0 < k; p0 += tile) {
        const std::size_t p1 = std::min(p0 + tile, k);
        for (std::size_t i = 0; i < m; ++i) {
            const double* arow = a.row_ptr(i);
            double* crow = c.row_ptr(i);
            for (std::size_t p = p0; p < p1; ++p) {
                const double aval = arow[p];
                const double* brow = b.row_ptr(p);
                for (std::size_t j = 0; j < n; ++j)
                    crow[j] += aval * brow[j];
            }
        }
    }
}

// C += A^T * B, shapes (k x m)^T * (k x n) -> (m x n). k is the batch
// dimension; keeping it innermost streams C exactly once.
inline void gemm_at_b_acc(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.rows != b.rows || c.rows != a.cols || c.cols != b.cols)
        throw DataError("gemm_at_b: incompatible shapes");
    const std::size_t k = a.rows, m = a.cols, n = b.cols;
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c.row_ptr(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double aval = a(p, i);
            const double* brow = b.row_ptr(p);
            for (std::size_t j = 0; j < n; ++j)
                crow[j] += aval * brow[j];
        }
    }
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    constexpr std::size_t tile = 32;
    for (std::size_t i0 = 0; i0 < a.rows; i0 += tile)
        for (std::size_t j0 = 0; j0 < a.cols; j0 += tile) {
            const std::size_t i1 = std::min(i0 + tile, a.rows);
            const std::size_t j1 = std::min(j0 + tile, a.cols);
            for (std::size_t i = i0; i < i1; ++i)
                for (std::size_t j = j0; j < j1; ++j) t(j, i) = a(i, j);
        }
    return t;
}

// C += A * B^T via an explicit transpose; a dot-product inner loop would
// serialize on the accumulator and run several times slower.
inline void gemm_a_bt_acc(const Matrix& a, const Matrix& b, Matrix& c) {
    if (a.cols != b.cols || c.rows != a.rows || c.cols != b.rows)
        throw DataError("gemm_a_bt: incompatible shapes");
    gemm_acc(a, transpose(b), c);
}

} // namespace uqsurro
