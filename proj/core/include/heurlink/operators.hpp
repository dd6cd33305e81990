#pragma once

#include <array>
#include <cstdint>

#include "heurlink/dense.hpp"
#include "heurlink/graph.hpp"

namespace heurlink {

// The four normalizations of the self-looped adjacency A~:
//   RawWithLoops      A~
//   Symmetric         D~^{-1/2} A~ D~^{-1/2}
//   RowStochastic     D~^{-1} A~        (rows sum to 1)
//   ColumnStochastic  A~ D~^{-1}        (columns sum to 1)
enum class OperatorKind : std::uint8_t {
    RawWithLoops = 0,
    Symmetric = 1,
    RowStochastic = 2,
    ColumnStochastic = 3,
};

struct OperatorSpec {
    OperatorKind kind = OperatorKind::RawWithLoops;
};

// Weighted view over a graph's CSR pattern: one real weight per stored
// entry, index arrays shared with the owning graph. The graph must
// outlive the operator. Immutable after construction.
struct SparseOperator {
    const SparseGraph* graph = nullptr;
    std::vector<double> values;  // aligned with graph->col_indices

    Index rows() const { return graph->num_nodes; }
    Index cols() const { return graph->num_nodes; }
};

SparseOperator normalize(const SparseGraph& g, OperatorSpec spec);

// Convex mixture a[0] * A~_rs + a[1] * A~_cs + a[2] * A~_sym on the shared
// pattern. Throws std::invalid_argument unless the weights are nonnegative
// and sum to 1 within 1e-9.
SparseOperator mix_operators(const SparseGraph& g, const std::array<double, 3>& alpha);

// Transpose as value permutation on the symmetric pattern. Row stochastic
// and column stochastic swap; the other kinds are self transpose.
SparseOperator transpose(const SparseOperator& op);

// y = op * x. Parallelizes across output rows; each output row is a fixed
// left-to-right accumulation over the CSR entries, so the result is
// identical for any thread count.
DenseMatrix spmm(const SparseOperator& op, const DenseMatrix& x, int threads = 1);

// y = op * x for a single vector.
std::vector<double> spmv(const SparseOperator& op, std::span<const double> x);

// y = op^T * x without materializing the transpose (row scatter).
std::vector<double> spmv_transpose(const SparseOperator& op, std::span<const double> x);
DenseMatrix spmm_transpose(const SparseOperator& op, const DenseMatrix& x, int threads = 1);

DenseMatrix to_dense(const SparseOperator& op);

// Power-iteration estimate of the dominant eigenvalue magnitude,
// deterministic given the seed. Returns 0 for the zero matrix.
double estimate_spectral_radius(const SparseOperator& op, int iters, std::uint64_t seed);

}  // namespace heurlink
