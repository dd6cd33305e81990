#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "heurlink/graph.hpp"

namespace heurlink {

// Row-major dense matrix of 64-bit reals. Verification paths rely on the
// 64-bit width; keep it double.
struct DenseMatrix {
    Index rows = 0;
    Index cols = 0;
    std::vector<double> values;

    DenseMatrix() = default;
    DenseMatrix(Index r, Index c)
        : rows(r), cols(c), values(static_cast<std::size_t>(r * c), 0.0) {}

    static DenseMatrix identity(Index n) {
        DenseMatrix m(n, n);
        for (Index i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    double& at(Index r, Index c) {
        return values[static_cast<std::size_t>(r * cols + c)];
    }
    double at(Index r, Index c) const {
        return values[static_cast<std::size_t>(r * cols + c)];
    }
    std::span<double> row(Index r) {
        return {values.data() + r * cols, static_cast<std::size_t>(cols)};
    }
    std::span<const double> row(Index r) const {
        return {values.data() + r * cols, static_cast<std::size_t>(cols)};
    }
    bool empty() const { return values.empty(); }
    bool same_shape(const DenseMatrix& o) const {
        return rows == o.rows && cols == o.cols;
    }
};

// y += s * x over the flat value arrays; shapes must match.
void add_scaled(DenseMatrix& y, double s, const DenseMatrix& x);

// Frobenius inner product <a, b>.
double dot(const DenseMatrix& a, const DenseMatrix& b);

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

// Plain dense product a (r x k) times b (k x c).
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

// All entries finite.
bool all_finite(const DenseMatrix& m);
bool all_finite(std::span<const double> v);

}  // namespace heurlink
