#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace heurlink {

using Index = std::int64_t;
using Edge = std::pair<Index, Index>;

// Undirected, unweighted graph stored as CSR over the self-looped
// adjacency: row i lists the closed neighborhood of node i (node i
// itself plus every neighbor), sorted ascending, no duplicates.
//
// Construction symmetrizes and deduplicates the input edge list and adds
// exactly one self loop per node, so downstream code never manages loops.
// Instances are immutable after build_graph and safe to share across
// threads.
struct SparseGraph {
    Index num_nodes = 0;
    // Undirected non-loop edge count. The stored entry count is
    // 2 * num_edges + num_nodes.
    Index num_edges = 0;
    std::vector<Index> row_offsets;         // size num_nodes + 1
    std::vector<Index> col_indices;         // sorted within each row
    std::vector<Index> degrees_with_loops;  // row lengths, every entry >= 1

    Index nnz() const { return static_cast<Index>(col_indices.size()); }

    std::span<const Index> neighbors(Index i) const {
        return {col_indices.data() + row_offsets[i],
                col_indices.data() + row_offsets[i + 1]};
    }

    // True for stored entries, which includes (i, i) for every node.
    bool has_entry(Index i, Index j) const;

    // The undirected edge list with i < j, self loops excluded.
    std::vector<Edge> undirected_edges() const;
};

// Builds the CSR representation from an arbitrary edge list. Input may
// contain duplicates, reversed copies, and explicit self loops; all are
// collapsed. Throws std::invalid_argument for num_nodes == 0 or a node
// id outside [0, num_nodes).
SparseGraph build_graph(std::span<const Edge> edges, Index num_nodes);

}  // namespace heurlink
