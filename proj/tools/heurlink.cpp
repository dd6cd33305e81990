// Command line front end: heuristic scoring, model training, checkpoint
// evaluation, formulation export, gradient checking, synthetic graph
// generation, and propagation timing.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "heurlink/data.hpp"
#include "heurlink/errors.hpp"
#include "heurlink/eval.hpp"
#include "heurlink/heuristics.hpp"
#include "heurlink/model.hpp"
#include "heurlink/rng.hpp"
#include "heurlink/threading.hpp"
#include "heurlink/training.hpp"

using json = nlohmann::json;
using namespace heurlink;

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& context) {
    if (!j.is_object()) throw std::invalid_argument("config: " + context + " must be an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) {
            if (key == a) {
                ok = true;
                break;
            }
        }
        if (!ok) throw std::invalid_argument("config: unknown key '" + key + "' in " + context);
    }
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("'" + path + "' is not valid JSON: " + e.what());
    }
    return j;
}

std::vector<Edge> read_pairs_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open pairs file '" + path + "'");
    std::vector<Edge> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::stringstream ss(line);
        long long u, v;
        if (!(ss >> u)) continue;
        if (!(ss >> v)) {
            throw std::invalid_argument("pairs file line " + std::to_string(line_no) +
                                        ": expected two node ids");
        }
        pairs.emplace_back(static_cast<Index>(u), static_cast<Index>(v));
    }
    return pairs;
}

void write_scores_csv(const std::string& path, std::span<const Edge> pairs,
                      std::span<const double> scores) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open output '" + path + "'");
    out << "i,j,score\n";
    char buf[64];
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        std::snprintf(buf, sizeof(buf), "%.17g", scores[p]);
        out << pairs[p].first << "," << pairs[p].second << "," << buf << "\n";
    }
}

// ---- config file parsing ---------------------------------------------

struct DatasetSpec {
    std::string edges;
    std::string features;
    Index num_nodes = 0;
    bool synthetic = false;
    std::string synth_kind;
    Index synth_size = 0;
    std::uint64_t synth_seed = 1;
};

struct SplitSpec {
    std::string load;
    double valid_ratio = 0.05;
    double test_ratio = 0.10;
    std::uint64_t seed = 1;
    Index max_holdout_per_component = 0;
};

struct RunConfig {
    DatasetSpec dataset;
    SplitSpec split;
    ModelConfig model;
    TrainConfig train;
    MetricSpec metric;
};

DatasetSpec dataset_from_json(const json& j) {
    reject_unknown(j, {"edges", "features", "num_nodes", "synthetic"}, "dataset");
    DatasetSpec d;
    if (j.contains("edges")) d.edges = j.at("edges").get<std::string>();
    if (j.contains("features")) d.features = j.at("features").get<std::string>();
    if (j.contains("num_nodes")) d.num_nodes = j.at("num_nodes").get<Index>();
    if (j.contains("synthetic")) {
        const json& s = j.at("synthetic");
        reject_unknown(s, {"kind", "size", "seed"}, "dataset.synthetic");
        d.synthetic = true;
        d.synth_kind = s.at("kind").get<std::string>();
        d.synth_size = s.at("size").get<Index>();
        if (s.contains("seed")) d.synth_seed = s.at("seed").get<std::uint64_t>();
    }
    if (!d.synthetic && d.edges.empty()) {
        throw std::invalid_argument("config: dataset needs either 'edges' or 'synthetic'");
    }
    if (d.synthetic && !d.edges.empty()) {
        throw std::invalid_argument("config: dataset 'edges' and 'synthetic' are exclusive");
    }
    return d;
}

SplitSpec split_from_json(const json& j) {
    reject_unknown(j, {"load", "valid_ratio", "test_ratio", "seed", "max_holdout_per_component"},
                   "split");
    SplitSpec s;
    if (j.contains("load")) s.load = j.at("load").get<std::string>();
    if (j.contains("valid_ratio")) s.valid_ratio = j.at("valid_ratio").get<double>();
    if (j.contains("test_ratio")) s.test_ratio = j.at("test_ratio").get<double>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("max_holdout_per_component")) {
        s.max_holdout_per_component = j.at("max_holdout_per_component").get<Index>();
    }
    return s;
}

ModelConfig model_from_json(const json& j) {
    reject_unknown(j,
                   {"depth", "hidden_dim", "use_node_embeddings", "embedding_dim", "mlp_layers",
                    "mlp_hidden_dim", "beta_init", "init_param", "dropout_rate", "loss"},
                   "model");
    ModelConfig c;
    if (j.contains("depth")) c.depth = j.at("depth").get<Index>();
    if (j.contains("hidden_dim")) c.hidden_dim = j.at("hidden_dim").get<Index>();
    if (j.contains("use_node_embeddings")) {
        c.use_node_embeddings = j.at("use_node_embeddings").get<bool>();
    }
    if (j.contains("embedding_dim")) c.embedding_dim = j.at("embedding_dim").get<Index>();
    if (j.contains("mlp_layers")) c.mlp_layers = j.at("mlp_layers").get<Index>();
    if (j.contains("mlp_hidden_dim")) c.mlp_hidden_dim = j.at("mlp_hidden_dim").get<Index>();
    if (j.contains("beta_init")) {
        if (!beta_init_from_name(j.at("beta_init").get<std::string>(), c.beta_init)) {
            throw std::invalid_argument("config: unknown beta_init '" +
                                        j.at("beta_init").get<std::string>() + "'");
        }
    }
    if (j.contains("init_param")) c.init_param = j.at("init_param").get<double>();
    if (j.contains("dropout_rate")) c.dropout_rate = j.at("dropout_rate").get<double>();
    if (j.contains("loss")) {
        if (!loss_from_name(j.at("loss").get<std::string>(), c.loss)) {
            throw std::invalid_argument("config: unknown loss '" +
                                        j.at("loss").get<std::string>() + "'");
        }
    }
    return c;
}

TrainConfig train_from_json(const json& j) {
    reject_unknown(j,
                   {"epochs", "learning_rate", "negatives_per_positive", "margin_base",
                    "adaptive_margin", "batch_size", "resample_negatives", "seed", "adam"},
                   "train");
    TrainConfig t;
    if (j.contains("epochs")) t.epochs = j.at("epochs").get<Index>();
    if (j.contains("learning_rate")) t.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("negatives_per_positive")) {
        t.negatives_per_positive = j.at("negatives_per_positive").get<Index>();
    }
    if (j.contains("margin_base")) t.margin_base = j.at("margin_base").get<double>();
    if (j.contains("adaptive_margin")) t.adaptive_margin = j.at("adaptive_margin").get<bool>();
    if (j.contains("batch_size")) t.batch_size = j.at("batch_size").get<Index>();
    if (j.contains("resample_negatives")) {
        t.resample_negatives = j.at("resample_negatives").get<bool>();
    }
    if (j.contains("seed")) t.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("adam")) {
        const json& a = j.at("adam");
        reject_unknown(a, {"beta1", "beta2", "eps"}, "train.adam");
        if (a.contains("beta1")) t.adam.beta1 = a.at("beta1").get<double>();
        if (a.contains("beta2")) t.adam.beta2 = a.at("beta2").get<double>();
        if (a.contains("eps")) t.adam.eps = a.at("eps").get<double>();
    }
    return t;
}

RunConfig run_config_from_json(const json& j) {
    reject_unknown(j, {"dataset", "split", "model", "train", "eval"}, "run config");
    RunConfig rc;
    rc.dataset = dataset_from_json(j.at("dataset"));
    if (j.contains("split")) rc.split = split_from_json(j.at("split"));
    if (j.contains("model")) rc.model = model_from_json(j.at("model"));
    if (j.contains("train")) rc.train = train_from_json(j.at("train"));
    if (j.contains("eval")) {
        const json& e = j.at("eval");
        reject_unknown(e, {"metric"}, "eval");
        if (e.contains("metric")) {
            const auto text = e.at("metric").get<std::string>();
            if (!parse_metric(text, rc.metric)) {
                throw std::invalid_argument("config: unknown metric '" + text + "'");
            }
        }
    }
    return rc;
}

Dataset realize_dataset(const DatasetSpec& spec) {
    if (spec.synthetic) {
        if (spec.synth_kind == "triangular") {
            return generate_triangular(spec.synth_size, spec.synth_seed);
        }
        if (spec.synth_kind == "hexagonal") {
            return generate_hexagonal(spec.synth_size, spec.synth_seed);
        }
        throw std::invalid_argument("config: unknown synthetic kind '" + spec.synth_kind + "'");
    }
    return load_dataset(spec.edges, spec.features, spec.num_nodes);
}

// ---- heuristic subcommand --------------------------------------------

// Dense reference: explicit matrix products, no shared code with the
// column-chain scorer beyond operator realization.
DenseMatrix dense_reference_h(const SparseGraph& g, const FormulationConfig& cfg) {
    DenseMatrix acc(g.num_nodes, g.num_nodes);
    add_scaled(acc, cfg.betas[0], DenseMatrix::identity(g.num_nodes));
    DenseMatrix partial = DenseMatrix::identity(g.num_nodes);
    for (Index l = 1; l <= cfg.max_order; ++l) {
        partial = matmul(to_dense(realize_layer(g, cfg.operators[l - 1])), partial);
        add_scaled(acc, cfg.betas[l], partial);
    }
    return acc;
}

struct HeuristicArgs {
    std::string graph_path;
    std::string method;
    std::string pairs_path;
    bool all_nonedges = false;
    std::string out_path;
    bool verify = false;
    double gamma = 0.5;
    double phi = 0.5;
    double alpha = 0.5;
    Index order = 20;
    int threads = 0;
};

int cmd_heuristic(const HeuristicArgs& args) {
    Heuristic id;
    if (!heuristic_from_name(args.method, id)) {
        throw std::invalid_argument("unknown heuristic '" + args.method + "'");
    }
    Dataset ds = load_dataset(args.graph_path);
    const SparseGraph& g = ds.graph;

    std::vector<Edge> pairs;
    if (args.all_nonedges) {
        if (g.num_nodes > 5000) {
            throw std::invalid_argument("--all-nonedges is quadratic; refuse above 5000 nodes");
        }
        for (Index i = 0; i < g.num_nodes; ++i) {
            for (Index j = i + 1; j < g.num_nodes; ++j) {
                if (!g.has_entry(i, j)) pairs.emplace_back(i, j);
            }
        }
    } else if (!args.pairs_path.empty()) {
        pairs = read_pairs_file(args.pairs_path);
    } else {
        throw std::invalid_argument("heuristic: need --pairs or --all-nonedges");
    }

    HeuristicParams hp;
    hp.gamma = args.gamma;
    hp.phi = args.phi;
    hp.alpha = args.alpha;
    hp.order = args.order;
    const int threads = resolve_thread_count(args.threads);

    std::vector<double> scores;
    switch (id) {
        case Heuristic::KI: scores = score_katz(g, pairs, hp.gamma, hp.order); break;
        case Heuristic::GLHN: scores = score_glhn(g, pairs, hp.phi, hp.order); break;
        case Heuristic::LPI: scores = score_lpi(g, pairs, hp.gamma, hp.order); break;
        case Heuristic::LRW: scores = score_lrw(g, pairs, hp.alpha, hp.order); break;
        default:
            scores = score_pairs_formulation(g, heuristic_config(id, hp), pairs, threads);
            break;
    }

    if (args.verify) {
        if (g.num_nodes > 60) {
            throw std::invalid_argument("--verify uses dense references; limit is 60 nodes");
        }
        const FormulationConfig cfg = heuristic_config(id, hp);
        const DenseMatrix href = dense_reference_h(g, cfg);
        const double m2 = 2.0 * static_cast<double>(g.num_edges);
        double worst = 0.0;
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const auto [i, j] = pairs[p];
            double ref = href.at(i, j);
            if (id == Heuristic::LRW) {
                ref *= static_cast<double>(g.degrees_with_loops[i]) / m2;
            }
            worst = std::max(worst, std::abs(ref - scores[p]));
        }
        double closed_worst = 0.0;
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const auto [i, j] = pairs[p];
            double ref;
            switch (id) {
                case Heuristic::CN: ref = score_cn(g, i, j); break;
                case Heuristic::LLHN: ref = score_llhn(g, i, j); break;
                case Heuristic::RA: ref = score_ra(g, i, j); break;
                case Heuristic::RA_SQ: ref = score_ra_sq(g, i, j); break;
                case Heuristic::RA_SYM: ref = score_ra_sym(g, i, j); break;
                default: continue;
            }
            closed_worst = std::max(closed_worst, std::abs(ref - scores[p]));
        }
        std::printf("verify: dense max |diff| = %.3g, closed-form max |diff| = %.3g\n", worst,
                    closed_worst);
        if (worst > 1e-9 || closed_worst > 1e-9) {
            throw ContractError("heuristic --verify: reference routes disagree");
        }
    }

    if (!args.out_path.empty()) {
        write_scores_csv(args.out_path, pairs, scores);
        std::printf("wrote %zu scores to %s\n", pairs.size(), args.out_path.c_str());
    } else {
        std::printf("%8s %8s %22s\n", "i", "j", heuristic_name(id));
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            std::printf("%8lld %8lld %22.12g\n", static_cast<long long>(pairs[p].first),
                        static_cast<long long>(pairs[p].second), scores[p]);
        }
    }
    return 0;
}

// ---- train subcommand ------------------------------------------------

struct TrainArgs {
    std::string config_path;
    std::string out_checkpoint;
    std::string history_path;
    std::string out_split;
    std::uint64_t seed = 0;
    bool seed_set = false;
    Index epochs = 0;
    bool epochs_set = false;
    int threads = 0;
};

void write_history_csv(const std::string& path, const std::vector<EpochRecord>& history) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open history output '" + path + "'");
    out << "epoch,loss,val_metric\n";
    char buf[96];
    for (const auto& row : history) {
        std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g", static_cast<long long>(row.epoch),
                      row.loss, row.val_metric);
        out << buf << "\n";
    }
}

int cmd_train(const TrainArgs& args) {
    RunConfig rc = run_config_from_json(load_json_file(args.config_path));
    if (args.seed_set) rc.train.seed = args.seed;
    if (args.epochs_set) rc.train.epochs = args.epochs;

    Dataset ds = realize_dataset(rc.dataset);
    const Index n = ds.graph.num_nodes;
    std::printf("dataset %s: %lld nodes, %lld edges\n", ds.name.c_str(),
                static_cast<long long>(n), static_cast<long long>(ds.graph.num_edges));

    EdgeSplit split;
    if (!rc.split.load.empty()) {
        split = load_split(rc.split.load, n);
    } else {
        SplitOptions so;
        so.max_holdout_per_component = rc.split.max_holdout_per_component;
        split = split_edges(ds.graph, rc.split.valid_ratio, rc.split.test_ratio, rc.split.seed,
                            so);
    }
    std::printf("split: %zu train, %zu valid, %zu test positives\n", split.train.size(),
                split.valid_pos.size(), split.test_pos.size());

    const SparseGraph train_graph = build_graph(split.train, n);
    const DenseMatrix* features = nullptr;
    if (ds.features) {
        rc.model.input_dim = ds.features->cols;
        features = &*ds.features;
    }
    rc.model.validate();
    rc.train.validate();

    FitOptions opts;
    opts.val_metric = rc.metric;
    opts.threads = resolve_thread_count(args.threads);

    const auto t0 = std::chrono::steady_clock::now();
    FitResult res = fit(train_graph, features, split, rc.model, rc.train, opts);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::printf("trained %lld epochs in %.1fs; best validation %s = %.6f at epoch %lld\n",
                static_cast<long long>(rc.train.epochs), secs, rc.metric.name.c_str(),
                res.best_val, static_cast<long long>(res.best_epoch));
    if (res.sampler_skipped > 0) {
        std::fprintf(stderr, "warning: %lld positives had no corruption candidates\n",
                     static_cast<long long>(res.sampler_skipped));
    }

    if (!split.test_pos.empty() && !split.test_neg.empty()) {
        ForwardState fs = forward(res.best_params, train_graph, features, false, 0, opts.threads);
        const auto sp = predict_links(res.best_params, fs.rep, split.test_pos);
        const auto sn = predict_links(res.best_params, fs.rep, split.test_neg);
        bool warned = false;
        const double test_val = evaluate_metric(rc.metric, sp, sn, &warned);
        if (warned) {
            std::fprintf(stderr, "warning: hits K exceeds the negative pool; metric is 1 by definition\n");
        }
        std::printf("test %s = %.6f\n", rc.metric.name.c_str(), test_val);
    }

    if (!args.out_checkpoint.empty()) {
        save_checkpoint(res.best_params, args.out_checkpoint);
        std::printf("checkpoint: %s\n", args.out_checkpoint.c_str());
    }
    if (!args.history_path.empty()) {
        write_history_csv(args.history_path, res.history);
        std::printf("history: %s\n", args.history_path.c_str());
    }
    if (!args.out_split.empty()) {
        save_split(split, args.out_split);
        std::printf("split: %s\n", args.out_split.c_str());
    }
    return 0;
}

// ---- eval subcommand ---------------------------------------------------

struct EvalArgs {
    std::string checkpoint;
    std::string split_path;
    std::string features_path;
    std::string metric = "auc";
    std::string out_path;
    int threads = 0;
};

int cmd_eval(const EvalArgs& args) {
    MetricSpec metric;
    if (!parse_metric(args.metric, metric)) {
        throw std::invalid_argument("unknown metric '" + args.metric + "'");
    }
    ModelParams params = load_checkpoint(args.checkpoint);
    EdgeSplit split = load_split(args.split_path, params.num_nodes);
    const SparseGraph g = build_graph(split.train, params.num_nodes);

    DenseMatrix features;
    const DenseMatrix* fptr = nullptr;
    if (params.cfg.input_dim > 0) {
        if (args.features_path.empty()) {
            throw std::invalid_argument("checkpoint expects features; pass --features");
        }
        features = args.features_path.size() > 4 &&
                           args.features_path.substr(args.features_path.size() - 4) == ".csv"
                       ? load_features_csv(args.features_path)
                       : load_features_bin(args.features_path);
        fptr = &features;
    }

    const int threads = resolve_thread_count(args.threads);
    ForwardState fs = forward(params, g, fptr, false, 0, threads);
    const auto sp = predict_links(params, fs.rep, split.test_pos);
    const auto sn = predict_links(params, fs.rep, split.test_neg);
    bool warned = false;

    EvalReport report;
    report.metric = metric.name;
    report.k = metric.k;
    report.value = evaluate_metric(metric, sp, sn, &warned);
    report.n_pos = static_cast<Index>(sp.size());
    report.n_neg = static_cast<Index>(sn.size());
    report.seed = split.seed;
    if (warned) {
        std::fprintf(stderr, "warning: hits K exceeds the negative pool; metric is 1 by definition\n");
    }

    const std::string text = report_json(report);
    if (!args.out_path.empty()) {
        std::ofstream out(args.out_path);
        if (!out) throw std::invalid_argument("cannot open output '" + args.out_path + "'");
        out << text << "\n";
        std::printf("%s %s = %.6f (report: %s)\n", args.metric.c_str(), metric.name.c_str(),
                    report.value, args.out_path.c_str());
    } else {
        std::cout << text << "\n";
    }
    return 0;
}

// ---- recover subcommand ------------------------------------------------

struct RecoverArgs {
    std::string checkpoint;
    std::string split_path;
    std::string graph_path;
    bool dense = false;
    std::string out_path;
};

int cmd_recover(const RecoverArgs& args) {
    ModelParams params = load_checkpoint(args.checkpoint);
    SparseGraph g;
    if (!args.graph_path.empty()) {
        g = load_dataset(args.graph_path).graph;
    } else if (!args.split_path.empty()) {
        EdgeSplit split = load_split(args.split_path, params.num_nodes);
        g = build_graph(split.train, params.num_nodes);
    } else {
        throw std::invalid_argument("recover: need --graph or --split");
    }
    if (g.num_nodes != params.num_nodes) {
        throw ContractError("recover: graph size does not match the checkpoint");
    }
    const std::string text = interpretability_json(params, g, args.dense);
    if (!args.out_path.empty()) {
        std::ofstream out(args.out_path);
        if (!out) throw std::invalid_argument("cannot open output '" + args.out_path + "'");
        out << text << "\n";
        std::printf("wrote %s\n", args.out_path.c_str());
    } else {
        std::cout << text << "\n";
    }
    return 0;
}

// ---- gradcheck subcommand ----------------------------------------------

struct GradcheckArgs {
    Index nodes = 24;
    double edge_prob = 0.25;
    Index depth = 3;
    Index input_dim = 4;
    Index hidden = 6;
    Index embedding = 5;
    Index mlp_hidden = 7;
    Index seeds = 3;
    double tolerance = 1e-4;
    double dropout = 0.0;
    std::string loss = "both";
};

SparseGraph random_er_graph(Index n, double p, std::uint64_t seed) {
    Rng rng(Rng::mix(seed, 0x6572ULL));
    std::vector<Edge> edges;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            if (rng.uniform() < p) edges.emplace_back(i, j);
        }
    }
    if (edges.empty()) edges.emplace_back(0, n > 1 ? 1 : 0);
    return build_graph(edges, n);
}

int cmd_gradcheck(const GradcheckArgs& args) {
    std::vector<LossKind> losses;
    if (args.loss == "both") {
        losses = {LossKind::AUC, LossKind::BCE};
    } else {
        LossKind k;
        if (!loss_from_name(args.loss, k)) {
            throw std::invalid_argument("unknown loss '" + args.loss + "'");
        }
        losses = {k};
    }

    double worst_overall = 0.0;
    std::printf("%6s %5s %10s %10s %10s %10s %10s %10s\n", "seed", "loss", "alpha", "beta",
                "preproc", "reproj", "embed", "mlp");
    for (Index s = 0; s < args.seeds; ++s) {
        const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(s);
        SparseGraph g = random_er_graph(args.nodes, args.edge_prob, seed);
        DenseMatrix features(g.num_nodes, args.input_dim);
        Rng frng(Rng::mix(seed, 0x66656174ULL));
        for (auto& v : features.values) v = frng.normal();

        ModelConfig cfg;
        cfg.depth = args.depth;
        cfg.input_dim = args.input_dim;
        cfg.hidden_dim = args.hidden;
        cfg.use_node_embeddings = true;
        cfg.embedding_dim = args.embedding;
        cfg.mlp_layers = 3;
        cfg.mlp_hidden_dim = args.mlp_hidden;
        cfg.beta_init = BetaInit::Random;
        cfg.dropout_rate = args.dropout;

        ModelParams params = init_params(cfg, g, seed);

        auto pos = g.undirected_edges();
        if (pos.size() > 6) pos.resize(6);
        const auto neg = sample_negatives(g, pos, 1, seed);
        if (neg.size() != pos.size()) {
            throw ContractError("gradcheck: corruption skipped a saturated row; lower edge_prob");
        }

        for (LossKind lk : losses) {
            const GradCheckReport rep =
                finite_difference_check(params, g, &features, pos, neg, lk);
            std::printf("%6lld %5s %10.2e %10.2e %10.2e %10.2e %10.2e %10.2e\n",
                        static_cast<long long>(seed), loss_name(lk), rep.alpha, rep.beta,
                        rep.preproc, rep.reproj, rep.embeddings, rep.mlp);
            worst_overall = std::max(worst_overall, rep.worst());
        }
    }
    std::printf("worst relative error: %.3e (tolerance %.1e)\n", worst_overall, args.tolerance);
    if (worst_overall > args.tolerance) {
        throw ContractError("gradcheck: analytic and numerical gradients disagree");
    }
    return 0;
}

// ---- synth subcommand ----------------------------------------------------

struct SynthArgs {
    std::string kind = "triangular";
    Index size = 10;
    std::uint64_t seed = 1;
    std::string out_path;
};

int cmd_synth(const SynthArgs& args) {
    Dataset ds;
    if (args.kind == "triangular") {
        ds = generate_triangular(args.size, args.seed);
    } else if (args.kind == "hexagonal") {
        ds = generate_hexagonal(args.size, args.seed);
    } else {
        throw std::invalid_argument("unknown synthetic kind '" + args.kind + "'");
    }
    if (args.out_path.empty()) throw std::invalid_argument("synth: --out is required");
    std::ofstream out(args.out_path);
    if (!out) throw std::invalid_argument("cannot open output '" + args.out_path + "'");
    for (const auto& [u, v] : ds.graph.undirected_edges()) out << u << " " << v << "\n";
    std::printf("%s: %lld nodes, %lld edges -> %s\n", ds.name.c_str(),
                static_cast<long long>(ds.graph.num_nodes),
                static_cast<long long>(ds.graph.num_edges), args.out_path.c_str());
    return 0;
}

// ---- bench subcommand -----------------------------------------------------

struct BenchArgs {
    Index nodes = 4000;
    std::vector<Index> depths = {4, 8, 16};
    std::vector<Index> degrees = {4, 8, 16};
    std::vector<Index> dims = {16, 32, 64};
    Index base_depth = 8;
    Index base_degree = 8;
    Index base_dim = 32;
    Index repeats = 5;
    std::uint64_t seed = 1;
    std::string out_path;
    int threads = 0;
};

SparseGraph random_regularish_graph(Index n, Index avg_degree, std::uint64_t seed) {
    const Index target = n * avg_degree / 2;
    Rng rng(Rng::mix(seed, 0x62656e6368ULL));
    std::unordered_set<std::uint64_t> seen;
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(target));
    while (static_cast<Index>(edges.size()) < target) {
        Index a = rng.below(n);
        Index b = rng.below(n);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        const auto key =
            static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(b);
        if (!seen.insert(key).second) continue;
        edges.emplace_back(a, b);
    }
    return build_graph(edges, n);
}

double time_propagation(const SparseGraph& g, Index depth, Index dim, Index repeats,
                        std::uint64_t seed, int threads) {
    const SparseOperator op = mix_operators(g, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    DenseMatrix x(g.num_nodes, dim);
    Rng rng(Rng::mix(seed, 0x78ULL));
    for (auto& v : x.values) v = rng.normal();

    std::vector<double> times;
    double sink = 0.0;
    for (Index r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        DenseMatrix z = x;
        for (Index l = 0; l < depth; ++l) z = spmm(op, z, threads);
        const auto t1 = std::chrono::steady_clock::now();
        sink += z.values[0];
        times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    if (sink == 12345.678) std::printf(" ");  // keep the work observable
    return times[times.size() / 2];
}

int cmd_bench(const BenchArgs& args) {
    const int threads = resolve_thread_count(args.threads);
    struct Row {
        std::string axis;
        Index value;
        double seconds;
    };
    std::vector<Row> rows;

    const SparseGraph base_graph = random_regularish_graph(args.nodes, args.base_degree, args.seed);
    for (Index depth : args.depths) {
        rows.push_back({"depth", depth,
                        time_propagation(base_graph, depth, args.base_dim, args.repeats,
                                         args.seed, threads)});
    }
    for (Index deg : args.degrees) {
        const SparseGraph g = random_regularish_graph(args.nodes, deg, args.seed);
        rows.push_back({"edges", g.num_edges,
                        time_propagation(g, args.base_depth, args.base_dim, args.repeats,
                                         args.seed, threads)});
    }
    for (Index dim : args.dims) {
        rows.push_back({"feature_dim", dim,
                        time_propagation(base_graph, args.base_depth, dim, args.repeats,
                                         args.seed, threads)});
    }

    std::printf("%-12s %10s %12s\n", "axis", "value", "seconds");
    for (const auto& row : rows) {
        std::printf("%-12s %10lld %12.6f\n", row.axis.c_str(),
                    static_cast<long long>(row.value), row.seconds);
    }
    if (!args.out_path.empty()) {
        std::ofstream out(args.out_path);
        if (!out) throw std::invalid_argument("cannot open output '" + args.out_path + "'");
        out << "axis,value,seconds\n";
        char buf[64];
        for (const auto& row : rows) {
            std::snprintf(buf, sizeof(buf), "%.9f", row.seconds);
            out << row.axis << "," << row.value << "," << buf << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"link prediction with weighted walk-operator propagation"};
    app.require_subcommand(1);

    HeuristicArgs ha;
    auto* sub_h = app.add_subcommand("heuristic", "score node pairs with a classical heuristic");
    sub_h->add_option("--graph", ha.graph_path, "edge list file")->required();
    sub_h->add_option("--method", ha.method,
                      "cn|llhn|ra|ra_sq|ra_sym|ki|glhn|rwr|lpi|lrw")
        ->required();
    sub_h->add_option("--pairs", ha.pairs_path, "pairs file (one 'i j' per line)");
    sub_h->add_flag("--all-nonedges", ha.all_nonedges, "score every non-adjacent pair");
    sub_h->add_option("--out", ha.out_path, "write i,j,score CSV here");
    sub_h->add_flag("--verify", ha.verify, "cross-check against dense references (<= 60 nodes)");
    sub_h->add_option("--gamma", ha.gamma, "series damping for ki/lpi");
    sub_h->add_option("--phi", ha.phi, "series damping for glhn");
    sub_h->add_option("--alpha", ha.alpha, "restart probability for rwr/lrw");
    sub_h->add_option("--order", ha.order, "series truncation / walk budget");
    sub_h->add_option("--threads", ha.threads, "worker threads (0: HEURLINK_THREADS or 1)");

    TrainArgs ta;
    auto* sub_t = app.add_subcommand("train", "train a propagation model from a config file");
    sub_t->add_option("--config", ta.config_path, "run config JSON")->required();
    sub_t->add_option("--out-checkpoint", ta.out_checkpoint, "write the best checkpoint here");
    sub_t->add_option("--history", ta.history_path, "write epoch,loss,val_metric CSV here");
    sub_t->add_option("--out-split", ta.out_split, "write the edge split JSON here");
    sub_t->add_option("--epochs", ta.epochs, "override train.epochs")
        ->each([&ta](const std::string&) { ta.epochs_set = true; });
    sub_t->add_option("--seed", ta.seed, "override train.seed")->each([&ta](const std::string&) {
        ta.seed_set = true;
    });
    sub_t->add_option("--threads", ta.threads, "worker threads (0: HEURLINK_THREADS or 1)");

    EvalArgs ea;
    auto* sub_e = app.add_subcommand("eval", "evaluate a checkpoint on a saved split");
    sub_e->add_option("--checkpoint", ea.checkpoint, "checkpoint JSON")->required();
    sub_e->add_option("--split", ea.split_path, "split JSON")->required();
    sub_e->add_option("--features", ea.features_path, "feature matrix (.csv or binary)");
    sub_e->add_option("--metric", ea.metric, "hits@K | mrr | auc");
    sub_e->add_option("--out", ea.out_path, "write the report JSON here (default: stdout)");
    sub_e->add_option("--threads", ea.threads, "worker threads (0: HEURLINK_THREADS or 1)");

    RecoverArgs ra;
    auto* sub_r = app.add_subcommand("recover", "export a checkpoint's formulation");
    sub_r->add_option("--checkpoint", ra.checkpoint, "checkpoint JSON")->required();
    sub_r->add_option("--split", ra.split_path, "split JSON (train graph source)");
    sub_r->add_option("--graph", ra.graph_path, "edge list (alternative graph source)");
    sub_r->add_flag("--dense", ra.dense, "include the dense score matrix (<= 500 nodes)");
    sub_r->add_option("--out", ra.out_path, "write the JSON here (default: stdout)");

    GradcheckArgs ga;
    auto* sub_g = app.add_subcommand("gradcheck", "compare analytic and numerical gradients");
    sub_g->add_option("--nodes", ga.nodes, "graph size");
    sub_g->add_option("--edge-prob", ga.edge_prob, "edge probability");
    sub_g->add_option("--depth", ga.depth, "propagation depth");
    sub_g->add_option("--input-dim", ga.input_dim, "feature width");
    sub_g->add_option("--hidden", ga.hidden, "hidden width");
    sub_g->add_option("--embedding", ga.embedding, "embedding width");
    sub_g->add_option("--mlp-hidden", ga.mlp_hidden, "predictor hidden width");
    sub_g->add_option("--seeds", ga.seeds, "number of random instances");
    sub_g->add_option("--tolerance", ga.tolerance, "max relative error allowed");
    sub_g->add_option("--dropout", ga.dropout, "dropout rate during the check");
    sub_g->add_option("--loss", ga.loss, "auc | bce | both");

    SynthArgs sa;
    auto* sub_s = app.add_subcommand("synth", "generate a synthetic cycle graph");
    sub_s->add_option("--kind", sa.kind, "triangular | hexagonal");
    sub_s->add_option("--size", sa.size, "number of components")->required();
    sub_s->add_option("--seed", sa.seed, "node id permutation seed");
    sub_s->add_option("--out", sa.out_path, "edge list output path")->required();

    BenchArgs ba;
    auto* sub_b = app.add_subcommand("bench", "time the propagation kernel across scales");
    sub_b->add_option("--nodes", ba.nodes, "graph size");
    sub_b->add_option("--depths", ba.depths, "depth values")->delimiter(',');
    sub_b->add_option("--degrees", ba.degrees, "average degree values")->delimiter(',');
    sub_b->add_option("--dims", ba.dims, "feature width values")->delimiter(',');
    sub_b->add_option("--base-depth", ba.base_depth, "depth for the other axes");
    sub_b->add_option("--base-degree", ba.base_degree, "degree for the other axes");
    sub_b->add_option("--base-dim", ba.base_dim, "width for the other axes");
    sub_b->add_option("--repeats", ba.repeats, "timing repeats (median reported)");
    sub_b->add_option("--seed", ba.seed, "graph and input seed");
    sub_b->add_option("--out", ba.out_path, "write axis,value,seconds CSV here");
    sub_b->add_option("--threads", ba.threads, "worker threads (0: HEURLINK_THREADS or 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand(sub_h)) return cmd_heuristic(ha);
        if (app.got_subcommand(sub_t)) return cmd_train(ta);
        if (app.got_subcommand(sub_e)) return cmd_eval(ea);
        if (app.got_subcommand(sub_r)) return cmd_recover(ra);
        if (app.got_subcommand(sub_g)) return cmd_gradcheck(ga);
        if (app.got_subcommand(sub_s)) return cmd_synth(sa);
        if (app.got_subcommand(sub_b)) return cmd_bench(ba);
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const ContractError& e) {
        std::fprintf(stderr, "verification error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 2;
    }
    return 0;
}
