#include "heurlink/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "heurlink/threading.hpp"

namespace heurlink {

SparseOperator realize_layer(const SparseGraph& g, const LayerOp& op) {
    if (op.is_mixture) return mix_operators(g, op.alpha);
    return normalize(g, op.spec);
}

void FormulationConfig::validate() const {
    if (max_order < 0) throw std::invalid_argument("config: negative order");
    if (static_cast<Index>(operators.size()) != max_order) {
        throw std::invalid_argument("config: operator list length must equal max_order");
    }
    if (static_cast<Index>(betas.size()) != max_order + 1) {
        throw std::invalid_argument("config: betas length must equal max_order + 1");
    }
}

const char* heuristic_name(Heuristic id) {
    switch (id) {
        case Heuristic::CN: return "cn";
        case Heuristic::LLHN: return "llhn";
        case Heuristic::RA: return "ra";
        case Heuristic::KI: return "katz";
        case Heuristic::GLHN: return "glhn";
        case Heuristic::RWR: return "rwr";
        case Heuristic::LPI: return "lpi";
        case Heuristic::LRW: return "lrw";
        case Heuristic::RA_SQ: return "ra_sq";
        case Heuristic::RA_SYM: return "ra_sym";
    }
    return "?";
}

bool heuristic_from_name(const std::string& name, Heuristic& out) {
    static const std::pair<const char*, Heuristic> table[] = {
        {"cn", Heuristic::CN},     {"llhn", Heuristic::LLHN},
        {"ra", Heuristic::RA},     {"katz", Heuristic::KI},
        {"ki", Heuristic::KI},     {"glhn", Heuristic::GLHN},
        {"rwr", Heuristic::RWR},   {"lpi", Heuristic::LPI},
        {"lrw", Heuristic::LRW},   {"ra_sq", Heuristic::RA_SQ},
        {"ra_sym", Heuristic::RA_SYM},
    };
    for (const auto& [n, id] : table) {
        if (name == n) {
            out = id;
            return true;
        }
    }
    return false;
}

namespace {

void check_param_open_unit(double v, const char* what) {
    if (!(v > 0.0 && v < 1.0)) {
        throw std::invalid_argument(std::string("heuristic_config: ") + what +
                                    " must lie in (0, 1)");
    }
}

FormulationConfig two_step(OperatorKind first, OperatorKind second) {
    FormulationConfig cfg;
    cfg.max_order = 2;
    cfg.operators = {LayerOp::pure(first), LayerOp::pure(second)};
    cfg.betas = {0.0, 0.0, 1.0};
    return cfg;
}

FormulationConfig homogeneous(OperatorKind kind, Index order, std::vector<double> betas) {
    FormulationConfig cfg;
    cfg.max_order = order;
    cfg.operators.assign(static_cast<std::size_t>(order), LayerOp::pure(kind));
    cfg.betas = std::move(betas);
    return cfg;
}

}  // namespace

FormulationConfig heuristic_config(Heuristic id, const HeuristicParams& p) {
    const Index L = p.order;
    switch (id) {
        case Heuristic::CN:
            // A~^2
            return two_step(OperatorKind::RawWithLoops, OperatorKind::RawWithLoops);
        case Heuristic::LLHN:
            // A~_rs A~_cs: cs acts first, rs second
            return two_step(OperatorKind::ColumnStochastic, OperatorKind::RowStochastic);
        case Heuristic::RA:
            // A~_cs A~ = A~ D~^{-1} A~, entrywise sum 1/d_k over common
            // neighbors k; raw acts first, cs second
            return two_step(OperatorKind::RawWithLoops, OperatorKind::ColumnStochastic);
        case Heuristic::RA_SQ:
            // A~_cs A~_rs, entrywise sum 1/d_k^2
            return two_step(OperatorKind::RowStochastic, OperatorKind::ColumnStochastic);
        case Heuristic::RA_SYM:
            // A~_sym^2
            return two_step(OperatorKind::Symmetric, OperatorKind::Symmetric);
        case Heuristic::KI: {
            check_param_open_unit(p.gamma, "gamma");
            if (L < 1) throw std::invalid_argument("heuristic_config: order must be >= 1");
            std::vector<double> betas(static_cast<std::size_t>(L) + 1, 0.0);
            for (Index l = 1; l <= L; ++l) betas[l] = std::pow(p.gamma, static_cast<double>(l));
            return homogeneous(OperatorKind::RawWithLoops, L, std::move(betas));
        }
        case Heuristic::GLHN: {
            check_param_open_unit(p.phi, "phi");
            if (L < 1) throw std::invalid_argument("heuristic_config: order must be >= 1");
            std::vector<double> betas(static_cast<std::size_t>(L) + 1, 0.0);
            betas[0] = 1.0;
            for (Index l = 1; l <= L; ++l) betas[l] = std::pow(p.phi, static_cast<double>(l));
            return homogeneous(OperatorKind::RawWithLoops, L, std::move(betas));
        }
        case Heuristic::RWR: {
            check_param_open_unit(p.alpha, "alpha");
            if (L < 0) throw std::invalid_argument("heuristic_config: order must be >= 0");
            std::vector<double> betas(static_cast<std::size_t>(L) + 1, 0.0);
            for (Index l = 0; l <= L; ++l) {
                betas[l] = (1.0 - p.alpha) * std::pow(p.alpha, static_cast<double>(l));
            }
            return homogeneous(OperatorKind::RowStochastic, L, std::move(betas));
        }
        case Heuristic::LPI: {
            check_param_open_unit(p.gamma, "gamma");
            if (L < 2) throw std::invalid_argument("heuristic_config: LPI needs order >= 2");
            std::vector<double> betas(static_cast<std::size_t>(L) + 1, 0.0);
            for (Index l = 2; l <= L; ++l) betas[l] = std::pow(p.gamma, static_cast<double>(l - 2));
            return homogeneous(OperatorKind::RawWithLoops, L, std::move(betas));
        }
        case Heuristic::LRW: {
            check_param_open_unit(p.alpha, "alpha");
            if (L < 1) throw std::invalid_argument("heuristic_config: LRW needs order >= 1");
            HeuristicParams q = p;
            q.order = L - 1;
            return heuristic_config(Heuristic::RWR, q);
        }
    }
    throw std::invalid_argument("heuristic_config: unsupported heuristic");
}

std::vector<double> score_pairs_formulation(const SparseGraph& g,
                                            const FormulationConfig& cfg,
                                            std::span<const Edge> pairs, int threads) {
    cfg.validate();
    for (const auto& [i, j] : pairs) {
        if (i < 0 || i >= g.num_nodes || j < 0 || j >= g.num_nodes) {
            throw std::invalid_argument("score_pairs_formulation: pair out of node range");
        }
    }

    std::vector<SparseOperator> ops;
    ops.reserve(cfg.operators.size());
    for (const auto& op : cfg.operators) ops.push_back(realize_layer(g, op));

    // Group by target: H e_j is one spmv chain shared by every pair (*, j).
    std::map<Index, std::vector<std::size_t>> by_target;
    for (std::size_t p = 0; p < pairs.size(); ++p) by_target[pairs[p].second].push_back(p);

    std::vector<double> out(pairs.size(), 0.0);
    std::vector<Index> targets;
    targets.reserve(by_target.size());
    for (const auto& [j, _] : by_target) targets.push_back(j);

    parallel_for_rows(static_cast<Index>(targets.size()), threads, [&](Index begin, Index end) {
        for (Index t = begin; t < end; ++t) {
            const Index j = targets[t];
            const auto& slots = by_target.at(j);
            std::vector<double> v(static_cast<std::size_t>(g.num_nodes), 0.0);
            v[j] = 1.0;
            for (std::size_t p : slots) {
                if (pairs[p].first == j) out[p] += cfg.betas[0];
            }
            for (Index l = 1; l <= cfg.max_order; ++l) {
                v = spmv(ops[l - 1], v);
                const double beta = cfg.betas[l];
                if (beta == 0.0) continue;
                for (std::size_t p : slots) out[p] += beta * v[pairs[p].first];
            }
        }
    });
    return out;
}

DenseMatrix assemble_dense_h(const SparseGraph& g, const FormulationConfig& cfg, int threads) {
    cfg.validate();
    const Index n = g.num_nodes;
    DenseMatrix h(n, n);
    for (Index i = 0; i < n; ++i) h.at(i, i) = cfg.betas[0];
    DenseMatrix partial = DenseMatrix::identity(n);
    for (Index l = 1; l <= cfg.max_order; ++l) {
        SparseOperator op = realize_layer(g, cfg.operators[l - 1]);
        partial = spmm(op, partial, threads);
        if (cfg.betas[l] != 0.0) add_scaled(h, cfg.betas[l], partial);
    }
    return h;
}

namespace {

// Walks rows i and j in lockstep and feeds each shared neighbor's degree
// to the accumulator.
template <typename Fn>
void for_common_neighbors(const SparseGraph& g, Index i, Index j, Fn&& fn) {
    auto a = g.neighbors(i);
    auto b = g.neighbors(j);
    std::size_t x = 0, y = 0;
    while (x < a.size() && y < b.size()) {
        if (a[x] < b[y]) {
            ++x;
        } else if (a[x] > b[y]) {
            ++y;
        } else {
            fn(a[x]);
            ++x;
            ++y;
        }
    }
}

void check_node(const SparseGraph& g, Index i) {
    if (i < 0 || i >= g.num_nodes) throw std::invalid_argument("node id out of range");
}

}  // namespace

double score_cn(const SparseGraph& g, Index i, Index j) {
    check_node(g, i);
    check_node(g, j);
    double count = 0.0;
    for_common_neighbors(g, i, j, [&](Index) { count += 1.0; });
    return count;
}

double score_llhn(const SparseGraph& g, Index i, Index j) {
    const double denom = static_cast<double>(g.degrees_with_loops[i]) *
                         static_cast<double>(g.degrees_with_loops[j]);
    return score_cn(g, i, j) / denom;
}

double score_ra(const SparseGraph& g, Index i, Index j) {
    check_node(g, i);
    check_node(g, j);
    double acc = 0.0;
    for_common_neighbors(g, i, j,
                         [&](Index k) { acc += 1.0 / static_cast<double>(g.degrees_with_loops[k]); });
    return acc;
}

double score_ra_sq(const SparseGraph& g, Index i, Index j) {
    check_node(g, i);
    check_node(g, j);
    double acc = 0.0;
    for_common_neighbors(g, i, j, [&](Index k) {
        const double d = static_cast<double>(g.degrees_with_loops[k]);
        acc += 1.0 / (d * d);
    });
    return acc;
}

double score_ra_sym(const SparseGraph& g, Index i, Index j) {
    const double denom = std::sqrt(static_cast<double>(g.degrees_with_loops[i]) *
                                   static_cast<double>(g.degrees_with_loops[j]));
    return score_ra(g, i, j) / denom;
}

std::vector<double> score_katz(const SparseGraph& g, std::span<const Edge> pairs,
                               double gamma, Index order) {
    HeuristicParams p;
    p.gamma = gamma;
    p.order = order;
    return score_pairs_formulation(g, heuristic_config(Heuristic::KI, p), pairs);
}

std::vector<double> score_glhn(const SparseGraph& g, std::span<const Edge> pairs,
                               double phi, Index order) {
    HeuristicParams p;
    p.phi = phi;
    p.order = order;
    return score_pairs_formulation(g, heuristic_config(Heuristic::GLHN, p), pairs);
}

std::vector<double> score_lpi(const SparseGraph& g, std::span<const Edge> pairs,
                              double gamma, Index order) {
    HeuristicParams p;
    p.gamma = gamma;
    p.order = order;
    return score_pairs_formulation(g, heuristic_config(Heuristic::LPI, p), pairs);
}

std::vector<double> score_lrw(const SparseGraph& g, std::span<const Edge> pairs,
                              double alpha, Index order) {
    if (g.num_edges == 0) {
        throw std::domain_error("score_lrw: graph has no edges, the per-source scale is undefined");
    }
    HeuristicParams p;
    p.alpha = alpha;
    p.order = order;
    std::vector<double> scores =
        score_pairs_formulation(g, heuristic_config(Heuristic::LRW, p), pairs);
    const double two_m = 2.0 * static_cast<double>(g.num_edges);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        scores[k] *= static_cast<double>(g.degrees_with_loops[pairs[k].first]) / two_m;
    }
    return scores;
}

std::int64_t oracle_path_count(const SparseGraph& g, Index i, Index j, Index length) {
    check_node(g, i);
    check_node(g, j);
    if (length < 0 || length > 8) {
        throw std::invalid_argument("oracle_path_count: length must lie in [0, 8]");
    }
    if (g.num_nodes > 60) {
        throw std::invalid_argument("oracle_path_count: graph too large for the exhaustive oracle");
    }
    if (length == 0) return i == j ? 1 : 0;
    std::int64_t count = 0;
    // Iterative DFS over walk prefixes.
    struct Frame {
        Index node;
        Index depth;
    };
    std::vector<Frame> stack{{i, 0}};
    while (!stack.empty()) {
        auto [node, depth] = stack.back();
        stack.pop_back();
        if (depth == length) {
            if (node == j) ++count;
            continue;
        }
        for (Index next : g.neighbors(node)) stack.push_back({next, depth + 1});
    }
    return count;
}

double oracle_rwr(const SparseGraph& g, Index i, Index j, double alpha, Index steps) {
    check_node(g, i);
    check_node(g, j);
    if (g.num_nodes > 60) {
        throw std::invalid_argument("oracle_rwr: graph too large for the dense oracle");
    }
    if (steps < 0) throw std::invalid_argument("oracle_rwr: negative step count");
    const Index n = g.num_nodes;
    // Dense row-stochastic matrix.
    DenseMatrix p(n, n);
    for (Index r = 0; r < n; ++r) {
        const double d = static_cast<double>(g.degrees_with_loops[r]);
        for (Index c : g.neighbors(r)) p.at(r, c) = 1.0 / d;
    }
    // u^T = e_i^T P^l by repeated right multiplication.
    std::vector<double> u(static_cast<std::size_t>(n), 0.0);
    u[i] = 1.0;
    double acc = (1.0 - alpha) * u[j];
    for (Index l = 1; l <= steps; ++l) {
        std::vector<double> next(static_cast<std::size_t>(n), 0.0);
        for (Index r = 0; r < n; ++r) {
            const double ur = u[r];
            if (ur == 0.0) continue;
            for (Index c = 0; c < n; ++c) next[c] += ur * p.at(r, c);
        }
        u = std::move(next);
        acc += (1.0 - alpha) * std::pow(alpha, static_cast<double>(l)) * u[j];
    }
    return acc;
}

}  // namespace heurlink
