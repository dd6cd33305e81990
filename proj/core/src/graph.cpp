#include "heurlink/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace heurlink {

bool SparseGraph::has_entry(Index i, Index j) const {
    auto row = neighbors(i);
    return std::binary_search(row.begin(), row.end(), j);
}

std::vector<Edge> SparseGraph::undirected_edges() const {
    std::vector<Edge> out;
    out.reserve(static_cast<std::size_t>(num_edges));
    for (Index i = 0; i < num_nodes; ++i) {
        for (Index j : neighbors(i)) {
            if (j > i) out.emplace_back(i, j);
        }
    }
    return out;
}

SparseGraph build_graph(std::span<const Edge> edges, Index num_nodes) {
    if (num_nodes <= 0) {
        throw std::invalid_argument("build_graph: num_nodes must be positive");
    }

    // Normalize to (min, max) pairs, drop loops, dedupe.
    std::vector<Edge> norm;
    norm.reserve(edges.size());
    for (const auto& [a, b] : edges) {
        if (a < 0 || a >= num_nodes || b < 0 || b >= num_nodes) {
            throw std::invalid_argument(
                "build_graph: node id out of range: (" + std::to_string(a) +
                ", " + std::to_string(b) + ") with num_nodes " +
                std::to_string(num_nodes));
        }
        if (a == b) continue;
        norm.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(norm.begin(), norm.end());
    norm.erase(std::unique(norm.begin(), norm.end()), norm.end());

    SparseGraph g;
    g.num_nodes = num_nodes;
    g.num_edges = static_cast<Index>(norm.size());
    g.degrees_with_loops.assign(static_cast<std::size_t>(num_nodes), 1);
    for (const auto& [a, b] : norm) {
        ++g.degrees_with_loops[a];
        ++g.degrees_with_loops[b];
    }

    g.row_offsets.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
    for (Index i = 0; i < num_nodes; ++i) {
        g.row_offsets[i + 1] = g.row_offsets[i] + g.degrees_with_loops[i];
    }
    g.col_indices.assign(static_cast<std::size_t>(g.row_offsets[num_nodes]), 0);

    std::vector<Index> cursor(g.row_offsets.begin(), g.row_offsets.end() - 1);
    for (Index i = 0; i < num_nodes; ++i) {
        g.col_indices[cursor[i]++] = i;  // self loop
    }
    for (const auto& [a, b] : norm) {
        g.col_indices[cursor[a]++] = b;
        g.col_indices[cursor[b]++] = a;
    }
    for (Index i = 0; i < num_nodes; ++i) {
        std::sort(g.col_indices.begin() + g.row_offsets[i],
                  g.col_indices.begin() + g.row_offsets[i + 1]);
    }
    return g;
}

}  // namespace heurlink
