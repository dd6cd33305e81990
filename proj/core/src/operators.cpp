#include "heurlink/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "heurlink/rng.hpp"
#include "heurlink/threading.hpp"

namespace heurlink {

namespace {

double entry_weight(OperatorKind kind, double di, double dj) {
    switch (kind) {
        case OperatorKind::RawWithLoops: return 1.0;
        case OperatorKind::Symmetric: return 1.0 / std::sqrt(di * dj);
        case OperatorKind::RowStochastic: return 1.0 / di;
        case OperatorKind::ColumnStochastic: return 1.0 / dj;
    }
    throw std::invalid_argument("normalize: unknown operator kind");
}

}  // namespace

SparseOperator normalize(const SparseGraph& g, OperatorSpec spec) {
    SparseOperator op;
    op.graph = &g;
    op.values.resize(static_cast<std::size_t>(g.nnz()));
    for (Index i = 0; i < g.num_nodes; ++i) {
        const double di = static_cast<double>(g.degrees_with_loops[i]);
        for (Index e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e) {
            const double dj = static_cast<double>(g.degrees_with_loops[g.col_indices[e]]);
            op.values[e] = entry_weight(spec.kind, di, dj);
        }
    }
    return op;
}

SparseOperator mix_operators(const SparseGraph& g, const std::array<double, 3>& alpha) {
    double sum = 0.0;
    for (double a : alpha) {
        if (!(a >= 0.0)) throw std::invalid_argument("mix_operators: negative mixture weight");
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("mix_operators: mixture weights must sum to 1");
    }
    SparseOperator op;
    op.graph = &g;
    op.values.resize(static_cast<std::size_t>(g.nnz()));
    for (Index i = 0; i < g.num_nodes; ++i) {
        const double di = static_cast<double>(g.degrees_with_loops[i]);
        for (Index e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e) {
            const double dj = static_cast<double>(g.degrees_with_loops[g.col_indices[e]]);
            op.values[e] = alpha[0] / di + alpha[1] / dj + alpha[2] / std::sqrt(di * dj);
        }
    }
    return op;
}

SparseOperator transpose(const SparseOperator& op) {
    const SparseGraph& g = *op.graph;
    SparseOperator out;
    out.graph = &g;
    out.values.resize(op.values.size());
    for (Index i = 0; i < g.num_nodes; ++i) {
        for (Index e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e) {
            const Index j = g.col_indices[e];
            // locate (j, i) in row j; the pattern is symmetric so it exists
            auto row = g.neighbors(j);
            const auto it = std::lower_bound(row.begin(), row.end(), i);
            const Index em = g.row_offsets[j] + (it - row.begin());
            out.values[em] = op.values[e];
        }
    }
    return out;
}

DenseMatrix spmm(const SparseOperator& op, const DenseMatrix& x, int threads) {
    const SparseGraph& g = *op.graph;
    if (x.rows != g.num_nodes) throw std::invalid_argument("spmm: dimension mismatch");
    DenseMatrix y(g.num_nodes, x.cols);
    const Index c = x.cols;
    parallel_for_rows(g.num_nodes, threads, [&](Index begin, Index end) {
        for (Index i = begin; i < end; ++i) {
            auto yrow = y.row(i);
            for (Index e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e) {
                const double v = op.values[e];
                const auto xrow = x.row(g.col_indices[e]);
                for (Index k = 0; k < c; ++k) yrow[k] += v * xrow[k];
            }
        }
    });
    return y;
}

std::vector<double> spmv(const SparseOperator& op, std::span<const double> x) {
    const SparseGraph& g = *op.graph;
    if (static_cast<Index>(x.size()) != g.num_nodes) {
        throw std::invalid_argument("spmv: dimension mismatch");
    }
    std::vector<double> y(static_cast<std::size_t>(g.num_nodes), 0.0);
    for (Index i = 0; i < g.num_nodes; ++i) {
        double acc = 0.0;
        for (Index e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e) {
            acc += op.values[e] * x[g.col_indices[e]];
        }
        y[i] = acc;
    }
    return y;
}

std::vector<double> spmv_transpose(const SparseOperator& op, std::span<const double> x) {
    const SparseGraph& g = *op.graph;
    if (static_cast<Index>(x.size()) != g.num_nodes) {
        throw std::invalid_argument("spmv_transpose: dimension mismatch");
    }
    std::vector<double> y(static_cast<std::size_t>(g.num_nodes), 0.0);
    for (Index i = 0; i < g.num_nodes; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (Index e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e) {
            y[g.col_indices[e]] += op.values[e] * xi;
        }
    }
    return y;
}

DenseMatrix spmm_transpose(const SparseOperator& op, const DenseMatrix& x, int threads) {
    // The pattern is symmetric, so op^T is an operator on the same pattern;
    // materializing the permuted values keeps the product row parallel.
    return spmm(transpose(op), x, threads);
}

DenseMatrix to_dense(const SparseOperator& op) {
    const SparseGraph& g = *op.graph;
    DenseMatrix d(g.num_nodes, g.num_nodes);
    for (Index i = 0; i < g.num_nodes; ++i) {
        for (Index e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e) {
            d.at(i, g.col_indices[e]) = op.values[e];
        }
    }
    return d;
}

double estimate_spectral_radius(const SparseOperator& op, int iters, std::uint64_t seed) {
    const Index n = op.rows();
    bool all_zero = true;
    for (double v : op.values) {
        if (v != 0.0) {
            all_zero = false;
            break;
        }
    }
    if (all_zero || n == 0) return 0.0;

    Rng rng(seed);
    std::vector<double> v(static_cast<std::size_t>(n));
    double norm = 0.0;
    for (auto& x : v) {
        x = rng.uniform(-1.0, 1.0);
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;

    double rho = 0.0;
    for (int it = 0; it < iters; ++it) {
        std::vector<double> w = spmv(op, v);
        double wn = 0.0;
        for (double x : w) wn += x * x;
        wn = std::sqrt(wn);
        if (wn == 0.0) return 0.0;
        rho = wn;  // ||op v|| with ||v|| = 1
        for (std::size_t k = 0; k < w.size(); ++k) v[k] = w[k] / wn;
    }
    return rho;
}

}  // namespace heurlink
