#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heurlink/graph.hpp"

namespace heurlink {

struct SplitOptions {
    // Upper bound on held-out edges (validation plus test) per connected
    // component; 0 means unconstrained. The synthetic case studies cap
    // this at 1 so the residual component keeps its detour path intact.
    Index max_holdout_per_component = 0;
};

struct EdgeSplit {
    std::uint64_t seed = 0;
    double valid_ratio = 0.05;
    double test_ratio = 0.10;
    std::vector<Edge> train;
    std::vector<Edge> valid_pos;
    std::vector<Edge> valid_neg;
    std::vector<Edge> test_pos;
    std::vector<Edge> test_neg;
};

// Uniform edge holdout without replacement; negatives are uniform
// non-edges of the full graph, matched in count to each positive list.
// The training graph is NOT rebuilt here; callers construct it from
// split.train so held-out edges never propagate.
EdgeSplit split_edges(const SparseGraph& g, double valid_ratio, double test_ratio,
                      std::uint64_t seed, const SplitOptions& opts = {});

// Fraction of positives scoring strictly above the K-th largest negative
// (shared negative pool). K beyond the pool size returns 1.0 and sets the
// warning flag: every positive trivially clears an empty bar.
double hits_at_k(std::span<const double> pos, std::span<const double> neg, Index k,
                 bool* k_exceeded = nullptr);

// Mean reciprocal rank with per-positive negative lists;
// rank = 1 + |{n > p}| + 0.5 |{n == p}|.
double mrr(const std::vector<std::pair<double, std::vector<double>>>& per_positive);

// Probability a random positive outranks a random negative, ties at half
// credit, computed exactly from sorted rank counts.
double auc_metric(std::span<const double> pos, std::span<const double> neg);

struct EvalReport {
    std::string metric;
    Index k = 0;  // meaningful for hits@K only
    double value = 0.0;
    Index n_pos = 0;
    Index n_neg = 0;
    std::uint64_t seed = 0;
};

std::string report_json(const EvalReport& r);

// "hits@K", "mrr", or "auc".
struct MetricSpec {
    std::string name = "auc";
    Index k = 0;
};

bool parse_metric(const std::string& text, MetricSpec& out);

// Applies a metric to a shared positive/negative score pool. For mrr each
// positive is ranked against the whole shared pool.
double evaluate_metric(const MetricSpec& spec, std::span<const double> pos,
                       std::span<const double> neg, bool* warning = nullptr);

}  // namespace heurlink
