#pragma once

#include <optional>
#include <string>

#include "heurlink/dense.hpp"
#include "heurlink/eval.hpp"
#include "heurlink/graph.hpp"

namespace heurlink {

struct Dataset {
    std::string name;
    std::string source;  // originating path or generator tag
    SparseGraph graph;
    std::optional<DenseMatrix> features;
};

// Edge list: one "u v" pair per line, '#' starts a comment, blank lines
// skipped. Node count is 1 + max id unless the override is positive.
// An optional feature matrix is attached from features_path: ".csv" reads
// a headered CSV, anything else reads the binary layout (two little-endian
// u64 dims, then f64 row-major values).
Dataset load_dataset(const std::string& edge_path, const std::string& features_path = "",
                     Index num_nodes_override = 0);

DenseMatrix load_features_csv(const std::string& path);
DenseMatrix load_features_bin(const std::string& path);

// Disjoint 3-cycles (shortest closing detour 2) and 6-cycles (detour 5).
// The seed permutes node ids so structure never aligns with id order.
Dataset generate_triangular(Index num_triangles, std::uint64_t seed);
Dataset generate_hexagonal(Index num_hexagons, std::uint64_t seed);

void save_split(const EdgeSplit& split, const std::string& path);

// Reloads a split and re-proves its invariants from the file content:
// ids in range, no self loops, positive lists pairwise disjoint, negatives
// absent from the union of positives.
EdgeSplit load_split(const std::string& path, Index num_nodes);

}  // namespace heurlink
