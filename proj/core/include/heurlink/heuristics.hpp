#pragma once

#include <array>
#include <string>
#include <vector>

#include "heurlink/operators.hpp"

namespace heurlink {

// One propagation step: either a single normalized adjacency or a convex
// mixture (rs, cs, sym) on the shared pattern.
struct LayerOp {
    bool is_mixture = false;
    OperatorSpec spec;
    std::array<double, 3> alpha = {0.0, 0.0, 0.0};

    static LayerOp pure(OperatorKind kind) {
        LayerOp op;
        op.spec.kind = kind;
        return op;
    }
    static LayerOp mixed(const std::array<double, 3>& alpha) {
        LayerOp op;
        op.is_mixture = true;
        op.alpha = alpha;
        return op;
    }
};

SparseOperator realize_layer(const SparseGraph& g, const LayerOp& op);

// A weighted sum of ordered operator products:
//
//   H = beta[0] * I + sum_{l=1..L} beta[l] * (Op_l * Op_{l-1} * ... * Op_1)
//
// Products are taken in application order: operators[0] acts first on a
// column vector, operators[L-1] last. This matches the layer recursion
// Z_l = Op_l Z_{l-1}, so a depth-L propagation stack and a config with the
// same operator list produce identical partial products at every order.
struct FormulationConfig {
    Index max_order = 0;            // L
    std::vector<LayerOp> operators; // size L
    std::vector<double> betas;      // size L + 1

    void validate() const;  // throws std::invalid_argument
};

// Classical pairwise scorers. Local scores read the closed neighborhood
// directly; global scores are truncated series over walk orders.
enum class Heuristic {
    CN,      // common neighbors
    LLHN,    // local Leicht-Holme-Newman
    RA,      // resource allocation
    KI,      // Katz index
    GLHN,    // global Leicht-Holme-Newman
    RWR,     // random walk with restart
    LPI,     // local path index
    LRW,     // local random walks
    RA_SQ,   // resource allocation with squared degrees
    RA_SYM,  // degree-symmetrized resource allocation
};

const char* heuristic_name(Heuristic id);
bool heuristic_from_name(const std::string& name, Heuristic& out);

struct HeuristicParams {
    double gamma = 0.5;  // damping for KI / LPI
    double phi = 0.5;    // damping for GLHN
    double alpha = 0.5;  // restart for RWR / LRW
    Index order = 20;    // truncation L
};

// The operator/beta pattern realizing a heuristic. Infinite series (KI,
// GLHN, RWR) are truncated at params.order; LPI requires order >= 2; LRW's
// walk budget L yields a config of order L - 1 plus the per-source scale
// applied by score_lrw.
FormulationConfig heuristic_config(Heuristic id, const HeuristicParams& params);

// H[i, j] for each requested pair, by incremental sparse matrix-vector
// chains: pairs are grouped by target j, the column H e_j is built once
// per distinct target in O(L * nnz), and entries are read at each i.
std::vector<double> score_pairs_formulation(const SparseGraph& g,
                                            const FormulationConfig& cfg,
                                            std::span<const Edge> pairs,
                                            int threads = 1);

// Dense H per the same weighting; intended for small graphs (cost O(L * nnz * N)).
DenseMatrix assemble_dense_h(const SparseGraph& g, const FormulationConfig& cfg,
                             int threads = 1);

// Closed-form local scorers via sorted intersection of CSR rows. The
// neighborhoods are self inclusive, so adjacent pairs count both endpoints.
double score_cn(const SparseGraph& g, Index i, Index j);
double score_llhn(const SparseGraph& g, Index i, Index j);
double score_ra(const SparseGraph& g, Index i, Index j);
double score_ra_sq(const SparseGraph& g, Index i, Index j);
double score_ra_sym(const SparseGraph& g, Index i, Index j);

// Truncated-series scorers; these delegate to score_pairs_formulation.
std::vector<double> score_katz(const SparseGraph& g, std::span<const Edge> pairs,
                               double gamma, Index order);
std::vector<double> score_glhn(const SparseGraph& g, std::span<const Edge> pairs,
                               double phi, Index order);
std::vector<double> score_lpi(const SparseGraph& g, std::span<const Edge> pairs,
                              double gamma, Index order);
// Walk budget L: (d_i / 2M) * sum_{l=0}^{L-1} (1-alpha) alpha^l rs-walk mass.
std::vector<double> score_lrw(const SparseGraph& g, std::span<const Edge> pairs,
                              double alpha, Index order);

// Exhaustive DFS count of length-l walks on the self-looped adjacency.
// Exponential; guarded to l <= 8 and N <= 60.
std::int64_t oracle_path_count(const SparseGraph& g, Index i, Index j, Index length);

// Dense evaluation of sum_{l=0}^{L} (1-alpha) alpha^l (A~_rs^l)_{i,j},
// independent of the sparse code path. Guarded to N <= 60.
double oracle_rwr(const SparseGraph& g, Index i, Index j, double alpha, Index steps);

}  // namespace heurlink
