#include "heurlink/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "heurlink/rng.hpp"

namespace heurlink {

namespace {

std::uint64_t pair_key(Index a, Index b, Index n) {
    return static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(n) +
           static_cast<std::uint64_t>(b);
}

// Connected components over the full edge set; used only when a
// per-component holdout cap is requested.
std::vector<Index> component_ids(const SparseGraph& g) {
    std::vector<Index> parent(static_cast<std::size_t>(g.num_nodes));
    std::iota(parent.begin(), parent.end(), Index{0});
    auto find = [&](Index x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (Index i = 0; i < g.num_nodes; ++i) {
        for (Index j : g.neighbors(i)) {
            if (j == i) continue;
            Index a = find(i), b = find(j);
            if (a != b) parent[static_cast<std::size_t>(a)] = b;
        }
    }
    std::vector<Index> id(static_cast<std::size_t>(g.num_nodes));
    for (Index i = 0; i < g.num_nodes; ++i) id[static_cast<std::size_t>(i)] = find(i);
    return id;
}

std::vector<Edge> sample_nonedges(const SparseGraph& g, Index count, Rng& rng,
                                  std::unordered_set<std::uint64_t>& taken) {
    const Index n = g.num_nodes;
    // Loopless simple graph: total candidate non-edges.
    const double possible =
        0.5 * static_cast<double>(n) * static_cast<double>(n - 1) -
        static_cast<double>(g.num_edges);
    if (static_cast<double>(count) > possible)
        throw std::invalid_argument("split_edges: not enough non-edges to sample");
    std::vector<Edge> out;
    out.reserve(static_cast<std::size_t>(count));
    while (static_cast<Index>(out.size()) < count) {
        Index a = rng.below(n);
        Index b = rng.below(n);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (g.has_entry(a, b)) continue;
        auto key = pair_key(a, b, n);
        if (!taken.insert(key).second) continue;
        out.emplace_back(a, b);
    }
    return out;
}

}  // namespace

EdgeSplit split_edges(const SparseGraph& g, double valid_ratio, double test_ratio,
                      std::uint64_t seed, const SplitOptions& opts) {
    if (valid_ratio < 0.0 || test_ratio < 0.0 || valid_ratio + test_ratio >= 1.0)
        throw std::invalid_argument("split_edges: ratios must be nonnegative and sum below 1");
    auto edges = g.undirected_edges();
    const auto m = static_cast<Index>(edges.size());
    const auto n_valid = static_cast<Index>(
        std::floor(valid_ratio * static_cast<double>(m) + 1e-9));
    const auto n_test = static_cast<Index>(
        std::floor(test_ratio * static_cast<double>(m) + 1e-9));
    if (n_valid + n_test >= m && m > 0)
        throw std::invalid_argument("split_edges: holdout would consume every edge");

    Rng rng(Rng::mix(seed, 0x73706c6974ULL));
    for (std::size_t i = edges.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>(rng.below(static_cast<Index>(i)));
        std::swap(edges[i - 1], edges[j]);
    }

    EdgeSplit split;
    split.seed = seed;
    split.valid_ratio = valid_ratio;
    split.test_ratio = test_ratio;

    if (opts.max_holdout_per_component > 0) {
        auto comp = component_ids(g);
        std::vector<Index> used(static_cast<std::size_t>(g.num_nodes), 0);
        Index need = n_test + n_valid;
        std::vector<Edge> held;
        held.reserve(static_cast<std::size_t>(need));
        for (const auto& e : edges) {
            if (static_cast<Index>(held.size()) == need) {
                split.train.push_back(e);
                continue;
            }
            Index c = comp[static_cast<std::size_t>(e.first)];
            if (used[static_cast<std::size_t>(c)] < opts.max_holdout_per_component) {
                ++used[static_cast<std::size_t>(c)];
                held.push_back(e);
            } else {
                split.train.push_back(e);
            }
        }
        if (static_cast<Index>(held.size()) < need)
            throw std::invalid_argument(
                "split_edges: per-component cap cannot satisfy the requested holdout");
        split.test_pos.assign(held.begin(), held.begin() + n_test);
        split.valid_pos.assign(held.begin() + n_test, held.end());
    } else {
        split.test_pos.assign(edges.begin(), edges.begin() + n_test);
        split.valid_pos.assign(edges.begin() + n_test, edges.begin() + n_test + n_valid);
        split.train.assign(edges.begin() + n_test + n_valid, edges.end());
    }

    std::unordered_set<std::uint64_t> taken;
    split.valid_neg = sample_nonedges(g, n_valid, rng, taken);
    split.test_neg = sample_nonedges(g, n_test, rng, taken);
    return split;
}

double hits_at_k(std::span<const double> pos, std::span<const double> neg, Index k,
                 bool* k_exceeded) {
    if (k <= 0) throw std::invalid_argument("hits_at_k: K must be positive");
    if (pos.empty()) throw std::invalid_argument("hits_at_k: no positive scores");
    if (k_exceeded) *k_exceeded = false;
    if (static_cast<std::size_t>(k) > neg.size()) {
        if (k_exceeded) *k_exceeded = true;
        return 1.0;
    }
    std::vector<double> pool(neg.begin(), neg.end());
    auto nth = pool.begin() + static_cast<std::ptrdiff_t>(k - 1);
    std::nth_element(pool.begin(), nth, pool.end(), std::greater<>());
    const double bar = *nth;
    std::size_t hits = 0;
    for (double s : pos)
        if (s > bar) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pos.size());
}

double mrr(const std::vector<std::pair<double, std::vector<double>>>& per_positive) {
    if (per_positive.empty()) throw std::invalid_argument("mrr: no positives");
    double total = 0.0;
    for (const auto& [score, negs] : per_positive) {
        double above = 0.0, equal = 0.0;
        for (double v : negs) {
            if (v > score)
                above += 1.0;
            else if (v == score)
                equal += 1.0;
        }
        total += 1.0 / (1.0 + above + 0.5 * equal);
    }
    return total / static_cast<double>(per_positive.size());
}

double auc_metric(std::span<const double> pos, std::span<const double> neg) {
    if (pos.empty() || neg.empty())
        throw std::invalid_argument("auc_metric: needs both positive and negative scores");
    std::vector<double> sorted(neg.begin(), neg.end());
    std::sort(sorted.begin(), sorted.end());
    // Win and tie counts are integers; their weighted sum stays exact in
    // doubles far beyond any pool size we evaluate.
    double wins = 0.0, ties = 0.0;
    for (double p : pos) {
        auto lo = std::lower_bound(sorted.begin(), sorted.end(), p);
        auto hi = std::upper_bound(lo, sorted.end(), p);
        wins += static_cast<double>(lo - sorted.begin());
        ties += static_cast<double>(hi - lo);
    }
    return (wins + 0.5 * ties) /
           (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

std::string report_json(const EvalReport& r) {
    nlohmann::json j;
    j["metric"] = r.metric;
    if (r.k > 0) j["k"] = r.k;
    j["value"] = r.value;
    j["n_pos"] = r.n_pos;
    j["n_neg"] = r.n_neg;
    j["seed"] = r.seed;
    return j.dump(2);
}

bool parse_metric(const std::string& text, MetricSpec& out) {
    if (text == "auc" || text == "mrr") {
        out.name = text;
        out.k = 0;
        return true;
    }
    if (text.rfind("hits@", 0) == 0) {
        try {
            std::size_t used = 0;
            long long k = std::stoll(text.substr(5), &used);
            if (used != text.size() - 5 || k <= 0) return false;
            out.name = "hits";
            out.k = static_cast<Index>(k);
            return true;
        } catch (const std::exception&) {
            return false;
        }
    }
    return false;
}

double evaluate_metric(const MetricSpec& spec, std::span<const double> pos,
                       std::span<const double> neg, bool* warning) {
    if (warning) *warning = false;
    if (spec.name == "hits") return hits_at_k(pos, neg, spec.k, warning);
    if (spec.name == "auc") return auc_metric(pos, neg);
    if (spec.name == "mrr") {
        std::vector<double> shared(neg.begin(), neg.end());
        std::vector<std::pair<double, std::vector<double>>> rows;
        rows.reserve(pos.size());
        for (double p : pos) rows.emplace_back(p, shared);
        return mrr(rows);
    }
    throw std::invalid_argument("evaluate_metric: unknown metric " + spec.name);
}

}  // namespace heurlink
