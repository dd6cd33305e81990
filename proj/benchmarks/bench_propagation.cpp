// Microbenchmarks for the hot kernels: mixture propagation (the training
// inner loop) and per-target formulation scoring. Each family scales one
// axis so the O(depth * nnz * width) cost model can be read off directly.
#include <benchmark/benchmark.h>

#include <map>
#include <tuple>
#include <vector>

#include "heurlink/dense.hpp"
#include "heurlink/graph.hpp"
#include "heurlink/heuristics.hpp"
#include "heurlink/operators.hpp"
#include "heurlink/rng.hpp"

using namespace heurlink;

namespace {

const SparseGraph& cached_graph(Index n, Index avg_degree) {
    static std::map<std::pair<Index, Index>, SparseGraph> cache;
    const auto key = std::make_pair(n, avg_degree);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const Index target = n * avg_degree / 2;
    Rng rng(Rng::mix(static_cast<std::uint64_t>(n), 0x62656e6368ULL));
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(target));
    while (static_cast<Index>(edges.size()) < target) {
        const Index a = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
        const Index b = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
        if (a != b) edges.emplace_back(a, b);
    }
    return cache.emplace(key, build_graph(edges, n)).first->second;
}

DenseMatrix random_dense(Index rows, Index cols, std::uint64_t seed) {
    DenseMatrix m(rows, cols);
    Rng rng(Rng::mix(seed, 0x64656e7365ULL));
    for (auto& v : m.values) v = rng.normal();
    return m;
}

void run_propagation(benchmark::State& state, Index n, Index avg_degree, Index depth,
                     Index width) {
    const SparseGraph& g = cached_graph(n, avg_degree);
    const SparseOperator op = mix_operators(g, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    const DenseMatrix x = random_dense(n, width, 11);
    for (auto _ : state) {
        DenseMatrix z = x;
        for (Index l = 0; l < depth; ++l) z = spmm(op, z);
        benchmark::DoNotOptimize(z.values.data());
    }
    state.SetItemsProcessed(state.iterations() * depth *
                            static_cast<std::int64_t>(g.nnz()) * width);
}

void BM_PropagationDepth(benchmark::State& state) {
    run_propagation(state, 20000, 8, state.range(0), 64);
}

void BM_PropagationEdges(benchmark::State& state) {
    run_propagation(state, 20000, state.range(0), 10, 64);
}

void BM_PropagationWidth(benchmark::State& state) {
    run_propagation(state, 20000, 8, 10, state.range(0));
}

// One H e_j column per iteration: the unit of work behind pairwise scoring.
void BM_FormulationColumn(benchmark::State& state) {
    const SparseGraph& g = cached_graph(20000, 8);
    HeuristicParams hp;
    hp.order = state.range(0);
    const FormulationConfig cfg = heuristic_config(Heuristic::KI, hp);
    Index j = 0;
    for (auto _ : state) {
        const std::vector<Edge> pair = {{0, j}};
        const auto s = score_pairs_formulation(g, cfg, pair);
        benchmark::DoNotOptimize(s.data());
        j = (j + 1) % g.num_nodes;
    }
}

}  // namespace

BENCHMARK(BM_PropagationDepth)->Arg(5)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PropagationEdges)->Arg(4)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PropagationWidth)->Arg(16)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FormulationColumn)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
