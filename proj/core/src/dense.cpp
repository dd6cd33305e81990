#include "heurlink/dense.hpp"

#include <cmath>
#include <stdexcept>

namespace heurlink {

void add_scaled(DenseMatrix& y, double s, const DenseMatrix& x) {
    if (!y.same_shape(x)) throw std::invalid_argument("add_scaled: shape mismatch");
    for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] += s * x.values[i];
}

double dot(const DenseMatrix& a, const DenseMatrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("dot: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) acc += a.values[i] * b.values[i];
    return acc;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
    }
    return worst;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dim mismatch");
    DenseMatrix out(a.rows, b.cols);
    for (Index i = 0; i < a.rows; ++i) {
        for (Index k = 0; k < a.cols; ++k) {
            const double v = a.at(i, k);
            if (v == 0.0) continue;
            const auto brow = b.row(k);
            auto orow = out.row(i);
            for (Index j = 0; j < b.cols; ++j) orow[j] += v * brow[j];
        }
    }
    return out;
}

bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

bool all_finite(const DenseMatrix& m) { return all_finite(std::span<const double>(m.values)); }

}  // namespace heurlink
