#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "heurlink/data.hpp"
#include "heurlink/errors.hpp"
#include "heurlink/training.hpp"
#include "oracle_helpers.hpp"

using namespace heurlink;

namespace {

ModelParams small_concat_params(const SparseGraph& g, std::uint64_t seed, double dropout,
                                LossKind loss) {
    ModelConfig cfg;
    cfg.depth = 3;
    cfg.hidden_dim = 4;
    cfg.input_dim = 3;
    cfg.use_node_embeddings = true;
    cfg.embedding_dim = 3;
    cfg.mlp_layers = 2;
    cfg.mlp_hidden_dim = 4;
    cfg.dropout_rate = dropout;
    cfg.loss = loss;
    cfg.beta_init = BetaInit::Random;
    ModelParams p = init_params(cfg, g, seed);
    Rng lrng(Rng::mix(seed, 77));
    for (auto& v : p.alpha_logits.values) v = lrng.uniform(-1.0, 1.0);
    return p;
}

DenseMatrix random_features(Index rows, Index cols, std::uint64_t seed) {
    DenseMatrix m(rows, cols);
    Rng rng(seed);
    for (auto& v : m.values) v = rng.uniform(-1.0, 1.0);
    return m;
}

}  // namespace

TEST_CASE("squared hinge matches hand-worked values") {
    SUBCASE("active pair") {
        const std::vector<double> pos = {0.5}, neg = {2.0}, m = {1.0};
        const LossGrads lg = auc_hinge_loss(pos, neg, 1, m);
        // 1 * (1 - 0.5 + 2)^2 = 6.25
        CHECK(lg.value == doctest::Approx(6.25).epsilon(1e-15));
        CHECK(lg.dpos[0] == doctest::Approx(-5.0).epsilon(1e-15));
        CHECK(lg.dneg[0] == doctest::Approx(5.0).epsilon(1e-15));
    }
    SUBCASE("tied scores sit exactly one margin inside the hinge") {
        const std::vector<double> pos = {1.0}, neg = {1.0}, m = {1.0};
        const LossGrads lg = auc_hinge_loss(pos, neg, 1, m);
        CHECK(lg.value == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(lg.dpos[0] == doctest::Approx(-2.0).epsilon(1e-15));
        CHECK(lg.dneg[0] == doctest::Approx(2.0).epsilon(1e-15));
    }
    SUBCASE("separated pair is inactive") {
        const std::vector<double> pos = {5.0}, neg = {1.0}, m = {1.0};
        const LossGrads lg = auc_hinge_loss(pos, neg, 1, m);
        CHECK(lg.value == 0.0);
        CHECK(lg.dpos[0] == 0.0);
        CHECK(lg.dneg[0] == 0.0);
    }
    SUBCASE("mean over pairs, one active") {
        const std::vector<double> pos = {0.5, 5.0}, neg = {2.0, 1.0}, m = {1.0, 1.0};
        const LossGrads lg = auc_hinge_loss(pos, neg, 1, m);
        CHECK(lg.value == doctest::Approx(3.125).epsilon(1e-15));
        CHECK(lg.dpos[0] == doctest::Approx(-2.5).epsilon(1e-15));
        CHECK(lg.dpos[1] == 0.0);
        CHECK(lg.dneg[1] == 0.0);
    }
    SUBCASE("two negatives per positive share the group mean") {
        const std::vector<double> pos = {1.0}, neg = {1.0, 0.0}, m = {1.0};
        const LossGrads lg = auc_hinge_loss(pos, neg, 2, m);
        // residuals 1 and 0 over 2 ranked pairs
        CHECK(lg.value == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(lg.dpos[0] == doctest::Approx(-1.0).epsilon(1e-15));
        CHECK(lg.dneg[0] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(lg.dneg[1] == 0.0);
    }
    SUBCASE("per-positive margins are honored") {
        const std::vector<double> pos = {1.0, 1.0}, neg = {1.0, 1.0}, m = {1.0, 2.0};
        const LossGrads lg = auc_hinge_loss(pos, neg, 1, m);
        // (1 * 1^2 + 2 * 2^2) / 2
        CHECK(lg.value == doctest::Approx(4.5).epsilon(1e-15));
        CHECK(lg.dpos[1] == doctest::Approx(-2.0 * 2.0 * 2.0 / 2.0).epsilon(1e-15));
    }
    SUBCASE("shape mismatches throw") {
        const std::vector<double> pos = {1.0}, neg = {1.0, 2.0}, m = {1.0};
        CHECK_THROWS_AS(auc_hinge_loss(pos, neg, 1, m), std::invalid_argument);
        CHECK_THROWS_AS(auc_hinge_loss({}, neg, 1, {}), std::invalid_argument);
    }
}

TEST_CASE("cross-entropy on logits matches hand-worked values and stays stable") {
    SUBCASE("zero logits give log 2 each") {
        const std::vector<double> pos = {0.0}, neg = {0.0};
        const LossGrads lg = bce_loss(pos, neg);
        CHECK(lg.value == doctest::Approx(std::log(2.0)).epsilon(1e-15));
        CHECK(lg.dpos[0] == doctest::Approx(-0.25).epsilon(1e-15));  // (sigma(0) - 1) / 2
        CHECK(lg.dneg[0] == doctest::Approx(0.25).epsilon(1e-15));
    }
    SUBCASE("well-classified extreme logits neither overflow nor vanish wrongly") {
        const std::vector<double> pos = {20.0}, neg = {-20.0};
        const LossGrads lg = bce_loss(pos, neg);
        CHECK(lg.value == doctest::Approx(std::log1p(std::exp(-20.0))).epsilon(1e-12));
        CHECK(std::isfinite(lg.value));
        const std::vector<double> hp = {700.0}, hn = {-700.0};
        const LossGrads hard = bce_loss(hp, hn);
        CHECK(std::isfinite(hard.value));
        CHECK(hard.value >= 0.0);
    }
    SUBCASE("badly-classified extreme logits grow linearly, not to infinity") {
        const std::vector<double> pos = {-700.0}, neg = {700.0};
        const LossGrads lg = bce_loss(pos, neg);
        CHECK(lg.value == doctest::Approx(700.0).epsilon(1e-12));
        CHECK(std::isfinite(lg.dpos[0]));
    }
    SUBCASE("gradient signs push positives up and negatives down") {
        const std::vector<double> pos = {1.3, -0.2}, neg = {0.4};
        const LossGrads lg = bce_loss(pos, neg);
        for (double d : lg.dpos) CHECK(d < 0.0);
        for (double d : lg.dneg) CHECK(d > 0.0);
        CHECK(lg.value > 0.0);
    }
}

TEST_CASE("negative sampling corrupts tails into verified non-edges") {
    const Index n = 30;
    const auto edges = oracle::random_edges(n, 0.2, 3);
    const SparseGraph g = build_graph(edges, n);
    const auto positives = g.undirected_edges();
    const Index k = 3;

    Index skipped = 0;
    const auto negs = sample_negatives(g, positives, k, 42, &skipped);
    CHECK(skipped == 0);
    REQUIRE(negs.size() == positives.size() * static_cast<std::size_t>(k));
    for (std::size_t p = 0; p < positives.size(); ++p) {
        for (Index t = 0; t < k; ++t) {
            const auto [i, c] = negs[p * static_cast<std::size_t>(k) + static_cast<std::size_t>(t)];
            CHECK(i == positives[p].first);  // heads survive corruption
            CHECK(!g.has_entry(i, c));
            CHECK(c != i);
            CHECK(c >= 0);
            CHECK(c < n);
        }
    }
    CHECK(sample_negatives(g, positives, k, 42) == negs);
    CHECK(sample_negatives(g, positives, k, 43) != negs);
}

TEST_CASE("saturated rows cannot be corrupted and are skipped") {
    // K4: every row's closed neighborhood covers all nodes.
    std::vector<Edge> k4;
    for (Index i = 0; i < 4; ++i) {
        for (Index j = i + 1; j < 4; ++j) k4.emplace_back(i, j);
    }
    const SparseGraph g = build_graph(k4, 4);
    const auto positives = g.undirected_edges();
    Index skipped = 0;
    const auto negs = sample_negatives(g, positives, 2, 1, &skipped);
    CHECK(negs.empty());
    CHECK(skipped == static_cast<Index>(positives.size()));
}

TEST_CASE("analytic gradients agree with central differences on every block") {
    const Index n = 14;
    const auto edges = oracle::random_edges(n, 0.3, 19);
    const SparseGraph g = build_graph(edges, n);
    const DenseMatrix x = random_features(n, 3, 5);
    const auto positives = g.undirected_edges();
    const auto negatives = sample_negatives(g, positives, 1, 9);

    for (const LossKind loss : {LossKind::BCE, LossKind::AUC}) {
        for (const std::uint64_t seed : {11ull, 12ull}) {
            const ModelParams params = small_concat_params(g, seed, 0.3, loss);
            const GradCheckReport rep =
                finite_difference_check(params, g, &x, positives, negatives, loss);
            INFO("loss ", loss_name(loss), " seed ", seed, " worst ", rep.worst());
            CHECK(rep.alpha <= 1e-4);
            CHECK(rep.beta <= 1e-4);
            CHECK(rep.preproc <= 1e-4);
            CHECK(rep.reproj <= 1e-4);
            CHECK(rep.embeddings <= 1e-4);
            CHECK(rep.mlp <= 1e-4);
        }
    }
}

TEST_CASE("optimizer steps respect zero learning rate and reject bad gradients") {
    const Index n = 10;
    const auto edges = oracle::random_edges(n, 0.3, 2);
    const SparseGraph g = build_graph(edges, n);
    ModelParams params = small_concat_params(g, 1, 0.0, LossKind::BCE);
    const ModelParams before = params;
    AdamState st = AdamState::init(params);

    GradientBundle grads = zeros_like(params);
    for (auto& b : grads.betas) b = 0.5;
    grads.embeddings.values[0] = -1.0;

    adam_step(params, grads, st, 0.0, AdamConfig{});
    CHECK(params.betas == before.betas);
    CHECK(params.embeddings.values == before.embeddings.values);
    CHECK(st.t == 1);

    adam_step(params, grads, st, 0.1, AdamConfig{});
    CHECK(params.betas != before.betas);

    GradientBundle bad = zeros_like(params);
    bad.betas[0] = std::nan("");
    const ModelParams snapshot = params;
    CHECK_THROWS_AS(adam_step(params, bad, st, 0.1, AdamConfig{}), NumericError);
    CHECK(params.betas == snapshot.betas);
    CHECK(params.embeddings.values == snapshot.embeddings.values);
}

TEST_CASE("gradient bundles accumulate, scale, and detect non-finite entries") {
    const Index n = 8;
    const auto edges = oracle::random_edges(n, 0.4, 6);
    const SparseGraph g = build_graph(edges, n);
    const ModelParams params = small_concat_params(g, 4, 0.0, LossKind::BCE);

    GradientBundle a = zeros_like(params);
    GradientBundle b = zeros_like(params);
    a.betas[0] = 1.0;
    b.betas[0] = 2.0;
    b.mlp[0].w.values[0] = 4.0;
    a.accumulate(b, 0.5);
    CHECK(a.betas[0] == 2.0);
    CHECK(a.mlp[0].w.values[0] == 2.0);
    a.scale_all(3.0);
    CHECK(a.betas[0] == 6.0);
    CHECK(a.finite());
    a.preproc.w.values[1] = std::numeric_limits<double>::infinity();
    CHECK(!a.finite());
}

TEST_CASE("margins are flat by default and grow with the safer endpoint degree") {
    // Path 0-1-2-3: degrees with loops (2, 3, 3, 2).
    const std::vector<Edge> edges = {{0, 1}, {1, 2}, {2, 3}};
    const SparseGraph g = build_graph(edges, 4);
    const std::vector<Edge> pairs = {{0, 1}, {1, 2}};

    const auto flat = pair_margins(g, pairs, 1.5, false);
    CHECK(flat == std::vector<double>{1.5, 1.5});

    const auto adaptive = pair_margins(g, pairs, 1.5, true);
    CHECK(adaptive[0] > 1.5);
    CHECK(adaptive[1] > adaptive[0]);  // min degree 3 vs 2
    const double denom = std::log1p(4.0);
    CHECK(adaptive[0] == doctest::Approx(1.5 * (1.0 + std::log1p(2.0) / denom)).epsilon(1e-15));
    CHECK(adaptive[1] == doctest::Approx(1.5 * (1.0 + std::log1p(3.0) / denom)).epsilon(1e-15));
}

TEST_CASE("training reduces the loss on an easy synthetic instance") {
    const Dataset ds = generate_triangular(10, 5);
    const EdgeSplit split = split_edges(ds.graph, 0.1, 0.1, 7);
    const SparseGraph g = build_graph(split.train, ds.graph.num_nodes);

    ModelConfig mcfg;
    mcfg.depth = 4;
    mcfg.use_node_embeddings = true;
    mcfg.embedding_dim = 8;
    mcfg.mlp_layers = 2;
    mcfg.mlp_hidden_dim = 8;
    mcfg.loss = LossKind::BCE;
    TrainConfig tcfg;
    tcfg.epochs = 40;
    tcfg.learning_rate = 0.05;
    tcfg.resample_negatives = false;  // deterministic descent curve
    tcfg.seed = 3;

    const FitResult res = fit(g, nullptr, split, mcfg, tcfg);
    REQUIRE(res.history.size() == 40);
    for (const auto& row : res.history) {
        CHECK(std::isfinite(row.loss));
        CHECK(row.val_metric >= 0.0);
        CHECK(row.val_metric <= 1.0);
    }
    CHECK(res.history.back().loss < res.history.front().loss);
    CHECK(res.best_epoch >= 0);
    CHECK(res.sampler_skipped == 0);
}

TEST_CASE("zero learning rate with fixed negatives gives a flat deterministic curve") {
    const Dataset ds = generate_triangular(6, 9);
    const EdgeSplit split = split_edges(ds.graph, 0.1, 0.1, 2);
    const SparseGraph g = build_graph(split.train, ds.graph.num_nodes);

    ModelConfig mcfg;
    mcfg.depth = 3;
    mcfg.use_node_embeddings = true;
    mcfg.embedding_dim = 6;
    mcfg.mlp_layers = 2;
    mcfg.mlp_hidden_dim = 4;
    TrainConfig tcfg;
    tcfg.epochs = 5;
    tcfg.learning_rate = 0.0;
    tcfg.resample_negatives = false;
    tcfg.seed = 11;

    const ModelParams start = init_params(mcfg, g, tcfg.seed);
    const FitResult res = fit_from(g, nullptr, split, start, tcfg);
    REQUIRE(res.history.size() == 5);
    for (const auto& row : res.history) {
        CHECK(row.loss == res.history.front().loss);
        CHECK(row.val_metric == res.history.front().val_metric);
    }
    CHECK(res.best_params.betas == start.betas);
    CHECK(res.best_params.embeddings.values == start.embeddings.values);
    CHECK(res.best_params.mlp[0].w.values == start.mlp[0].w.values);
}

TEST_CASE("zero epochs returns the initialization unchanged with empty history") {
    const Dataset ds = generate_triangular(6, 9);
    const EdgeSplit split = split_edges(ds.graph, 0.1, 0.1, 2);
    const SparseGraph g = build_graph(split.train, ds.graph.num_nodes);

    ModelConfig mcfg;
    mcfg.depth = 3;
    mcfg.use_node_embeddings = true;
    mcfg.embedding_dim = 6;
    mcfg.mlp_layers = 2;
    mcfg.mlp_hidden_dim = 4;
    TrainConfig tcfg;
    tcfg.epochs = 0;
    tcfg.seed = 11;

    const ModelParams start = init_params(mcfg, g, tcfg.seed);
    const FitResult res = fit_from(g, nullptr, split, start, tcfg);
    CHECK(res.history.empty());
    CHECK(res.best_epoch == -1);
    CHECK(res.best_params.betas == start.betas);
    CHECK(res.best_params.alpha_logits.values == start.alpha_logits.values);
    CHECK(res.best_params.embeddings.values == start.embeddings.values);
    for (std::size_t k = 0; k < start.mlp.size(); ++k) {
        CHECK(res.best_params.mlp[k].w.values == start.mlp[k].w.values);
        CHECK(res.best_params.mlp[k].b == start.mlp[k].b);
    }
}

TEST_CASE("predictor-only training leaves propagation and encoder blocks untouched") {
    const Dataset ds = generate_triangular(8, 13);
    const EdgeSplit split = split_edges(ds.graph, 0.1, 0.1, 4);
    const SparseGraph g = build_graph(split.train, ds.graph.num_nodes);

    ModelConfig mcfg;
    mcfg.depth = 3;
    mcfg.use_node_embeddings = true;
    mcfg.embedding_dim = 6;
    mcfg.mlp_layers = 2;
    mcfg.mlp_hidden_dim = 6;
    TrainConfig tcfg;
    tcfg.epochs = 6;
    tcfg.learning_rate = 0.05;
    tcfg.seed = 8;

    const ModelParams start = init_params(mcfg, g, tcfg.seed);
    FitOptions opts;
    opts.predictor_only = true;
    const FitResult res = fit_from(g, nullptr, split, start, tcfg, opts);

    CHECK(res.best_params.alpha_logits.values == start.alpha_logits.values);
    CHECK(res.best_params.betas == start.betas);
    CHECK(res.best_params.embeddings.values == start.embeddings.values);
    bool mlp_changed = false;
    for (std::size_t k = 0; k < start.mlp.size(); ++k) {
        if (res.best_params.mlp[k].w.values != start.mlp[k].w.values) mlp_changed = true;
    }
    CHECK(mlp_changed);
}

TEST_CASE("training configuration validation rejects bad settings") {
    TrainConfig ok;
    CHECK_NOTHROW(ok.validate());

    TrainConfig bad = ok;
    bad.epochs = -1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.epochs = 0;  // zero epochs is a valid "return the initialization" run
    CHECK_NOTHROW(bad.validate());
    bad = ok;
    bad.learning_rate = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.negatives_per_positive = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.margin_base = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = ok;
    bad.adam.beta1 = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
