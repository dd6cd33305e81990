#include "heurlink/model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "heurlink/errors.hpp"
#include "heurlink/rng.hpp"

namespace heurlink {

using nlohmann::json;

const char* beta_init_name(BetaInit v) {
    switch (v) {
        case BetaInit::KI: return "ki";
        case BetaInit::RWR: return "rwr";
        case BetaInit::Random: return "random";
        case BetaInit::Uniform: return "uniform";
        case BetaInit::ReverseKI: return "reverse_ki";
        case BetaInit::FinalLayer: return "final_layer";
    }
    return "?";
}

bool beta_init_from_name(const std::string& name, BetaInit& out) {
    static const std::pair<const char*, BetaInit> table[] = {
        {"ki", BetaInit::KI},           {"rwr", BetaInit::RWR},
        {"random", BetaInit::Random},   {"uniform", BetaInit::Uniform},
        {"reverse_ki", BetaInit::ReverseKI}, {"final_layer", BetaInit::FinalLayer},
    };
    for (const auto& [n, v] : table) {
        if (name == n) {
            out = v;
            return true;
        }
    }
    return false;
}

const char* loss_name(LossKind v) { return v == LossKind::AUC ? "auc" : "bce"; }

bool loss_from_name(const std::string& name, LossKind& out) {
    if (name == "auc") {
        out = LossKind::AUC;
        return true;
    }
    if (name == "bce") {
        out = LossKind::BCE;
        return true;
    }
    return false;
}

void ModelConfig::validate() const {
    if (depth < 1) throw std::invalid_argument("model: depth must be >= 1");
    if (input_dim < 0) throw std::invalid_argument("model: negative input_dim");
    if (input_dim == 0 && !use_node_embeddings) {
        throw std::invalid_argument("model: need features or node embeddings");
    }
    if (input_dim > 0 && hidden_dim < 1) {
        throw std::invalid_argument("model: hidden_dim must be positive");
    }
    if (use_node_embeddings && embedding_dim < 1) {
        throw std::invalid_argument("model: embedding_dim must be positive");
    }
    if (mlp_layers < 1) throw std::invalid_argument("model: mlp_layers must be >= 1");
    if (mlp_layers > 1 && mlp_hidden_dim < 1) {
        throw std::invalid_argument("model: mlp_hidden_dim must be positive");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw std::invalid_argument("model: dropout_rate must lie in [0, 1)");
    }
    const bool needs_param = beta_init == BetaInit::KI || beta_init == BetaInit::RWR ||
                             beta_init == BetaInit::ReverseKI;
    if (needs_param && !(init_param > 0.0 && init_param < 1.0)) {
        throw std::invalid_argument("model: init parameter must lie in (0, 1)");
    }
}

std::vector<double> make_beta_schedule(BetaInit strategy, double param, Index depth,
                                       std::uint64_t seed) {
    std::vector<double> betas(static_cast<std::size_t>(depth) + 1, 0.0);
    switch (strategy) {
        case BetaInit::KI:
            for (Index l = 0; l <= depth; ++l) betas[l] = std::pow(param, static_cast<double>(l));
            break;
        case BetaInit::RWR:
            for (Index l = 0; l <= depth; ++l) {
                betas[l] = (1.0 - param) * std::pow(param, static_cast<double>(l));
            }
            break;
        case BetaInit::Random: {
            Rng rng(seed);
            for (auto& b : betas) b = rng.normal();
            break;
        }
        case BetaInit::Uniform:
            // depth + 1 weights; normalize over the actual count
            for (auto& b : betas) b = 1.0 / static_cast<double>(depth + 1);
            break;
        case BetaInit::ReverseKI:
            for (Index l = 0; l <= depth; ++l) {
                betas[l] = std::pow(param, static_cast<double>(depth - l));
            }
            break;
        case BetaInit::FinalLayer:
            betas[depth] = 1.0;
            break;
    }
    return betas;
}

namespace {

void fill_bounded_uniform(DenseMatrix& m, Index fan_in, Index fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& v : m.values) v = rng.uniform(-limit, limit);
}

DenseLayer make_layer(Index in, Index out, Rng& rng) {
    DenseLayer layer;
    layer.w = DenseMatrix(in, out);
    fill_bounded_uniform(layer.w, in, out, rng);
    layer.b.assign(static_cast<std::size_t>(out), 0.0);
    return layer;
}

std::array<double, 3> softmax3(const double* logits) {
    const double m = std::max({logits[0], logits[1], logits[2]});
    std::array<double, 3> e = {std::exp(logits[0] - m), std::exp(logits[1] - m),
                               std::exp(logits[2] - m)};
    const double s = e[0] + e[1] + e[2];
    return {e[0] / s, e[1] / s, e[2] / s};
}

// Appends b's columns to a's.
DenseMatrix hconcat(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix out(a.rows, a.cols + b.cols);
    for (Index r = 0; r < a.rows; ++r) {
        auto orow = out.row(r);
        auto arow = a.row(r);
        auto brow = b.row(r);
        for (Index c = 0; c < a.cols; ++c) orow[c] = arow[c];
        for (Index c = 0; c < b.cols; ++c) orow[a.cols + c] = brow[c];
    }
    return out;
}

DenseMatrix linear(const DenseMatrix& x, const DenseLayer& layer) {
    DenseMatrix y = matmul(x, layer.w);
    for (Index r = 0; r < y.rows; ++r) {
        auto row = y.row(r);
        for (Index c = 0; c < y.cols; ++c) row[c] += layer.b[c];
    }
    return y;
}

void apply_dropout(DenseMatrix& m, double rate, Rng& rng, std::vector<std::uint8_t>& mask) {
    mask.resize(m.values.size());
    const double scale = 1.0 / (1.0 - rate);
    for (std::size_t k = 0; k < m.values.size(); ++k) {
        const bool keep = rng.uniform() >= rate;
        mask[k] = keep ? 1 : 0;
        m.values[k] = keep ? m.values[k] * scale : 0.0;
    }
}

}  // namespace

ModelParams init_params(const ModelConfig& cfg, const SparseGraph& g, std::uint64_t seed) {
    cfg.validate();
    ModelParams p;
    p.cfg = cfg;
    p.num_nodes = g.num_nodes;
    p.alpha_logits = DenseMatrix(cfg.depth, 3);  // zeros: uniform thirds
    p.betas = make_beta_schedule(cfg.beta_init, cfg.init_param, cfg.depth,
                                 Rng::mix(seed, 0x62657461));

    Rng rng(Rng::mix(seed, 0x64656e7365));
    if (cfg.input_dim > 0) {
        p.preproc = make_layer(cfg.input_dim, cfg.hidden_dim, rng);
        if (cfg.use_node_embeddings) {
            p.reproj = make_layer(cfg.hidden_dim + cfg.embedding_dim, cfg.hidden_dim, rng);
        }
    }
    if (cfg.use_node_embeddings) {
        p.embeddings = DenseMatrix(g.num_nodes, cfg.embedding_dim);
        const double limit = 1.0 / std::sqrt(static_cast<double>(cfg.embedding_dim));
        for (auto& v : p.embeddings.values) v = rng.uniform(-limit, limit);
    }

    const Index d = cfg.rep_dim();
    p.mlp.clear();
    if (cfg.mlp_layers == 1) {
        p.mlp.push_back(make_layer(d, 1, rng));
    } else {
        p.mlp.push_back(make_layer(d, cfg.mlp_hidden_dim, rng));
        for (Index k = 1; k + 1 < cfg.mlp_layers; ++k) {
            p.mlp.push_back(make_layer(cfg.mlp_hidden_dim, cfg.mlp_hidden_dim, rng));
        }
        p.mlp.push_back(make_layer(cfg.mlp_hidden_dim, 1, rng));
    }
    return p;
}

ForwardState forward(const ModelParams& params, const SparseGraph& g,
                     const DenseMatrix* features, bool training,
                     std::uint64_t dropout_seed, int threads) {
    const ModelConfig& cfg = params.cfg;
    if (params.num_nodes != g.num_nodes) {
        throw ContractError("forward: params were initialized for a different graph size");
    }
    if (cfg.input_dim > 0) {
        if (features == nullptr) {
            throw std::invalid_argument("forward: config expects a feature matrix");
        }
        if (features->rows != g.num_nodes || features->cols != cfg.input_dim) {
            throw std::invalid_argument("forward: feature matrix shape mismatch");
        }
    }

    ForwardState fs;
    fs.features = features;
    fs.training = training;

    if (cfg.input_dim > 0) {
        fs.xp = linear(*features, params.preproc);
        if (cfg.use_node_embeddings) {
            fs.concat = hconcat(fs.xp, params.embeddings);
            fs.z.push_back(linear(fs.concat, params.reproj));
        } else {
            fs.z.push_back(fs.xp);
        }
    } else {
        fs.z.push_back(params.embeddings);
    }

    const Index depth = params.operators_injected
                            ? static_cast<Index>(params.injected_ops.size())
                            : cfg.depth;
    if (!params.operators_injected) {
        fs.alphas = DenseMatrix(depth, 3);
    }
    fs.ops.reserve(static_cast<std::size_t>(depth));
    for (Index l = 0; l < depth; ++l) {
        if (params.operators_injected) {
            fs.ops.push_back(realize_layer(g, params.injected_ops[l]));
        } else {
            const auto a = softmax3(&params.alpha_logits.values[static_cast<std::size_t>(l) * 3]);
            fs.alphas.at(l, 0) = a[0];
            fs.alphas.at(l, 1) = a[1];
            fs.alphas.at(l, 2) = a[2];
            fs.ops.push_back(mix_operators(g, a));
        }
        fs.z.push_back(spmm(fs.ops.back(), fs.z.back(), threads));
    }

    fs.agg = DenseMatrix(fs.z[0].rows, fs.z[0].cols);
    for (Index l = 0; l <= depth; ++l) {
        if (params.betas[l] != 0.0) add_scaled(fs.agg, params.betas[l], fs.z[l]);
    }

    fs.rep = fs.agg;
    if (training && cfg.dropout_rate > 0.0) {
        Rng rng(Rng::mix(dropout_seed, 0x64726f70));
        apply_dropout(fs.rep, cfg.dropout_rate, rng, fs.drop_mask);
    }
    return fs;
}

std::vector<double> predict_links(const ModelParams& params, const DenseMatrix& rep,
                                  std::span<const Edge> pairs, bool training,
                                  std::uint64_t dropout_seed, PredictState* state) {
    const Index d = rep.cols;
    if (d != params.mlp.front().w.rows) {
        throw std::invalid_argument("predict_links: representation width does not match the predictor");
    }
    const Index np = static_cast<Index>(pairs.size());
    DenseMatrix had(np, d);
    for (Index p = 0; p < np; ++p) {
        const auto [i, j] = pairs[p];
        if (i < 0 || i >= rep.rows || j < 0 || j >= rep.rows) {
            throw std::invalid_argument("predict_links: pair out of range");
        }
        auto out = had.row(p);
        auto ri = rep.row(i);
        auto rj = rep.row(j);
        for (Index c = 0; c < d; ++c) out[c] = ri[c] * rj[c];
    }

    PredictState local;
    PredictState& ps = state ? *state : local;
    ps.pairs.assign(pairs.begin(), pairs.end());
    ps.training = training;
    ps.had = had;
    ps.inputs.clear();
    ps.preacts.clear();
    ps.masks.assign(params.mlp.size(), {});

    Rng rng(Rng::mix(dropout_seed, 0x6d6c70));
    DenseMatrix cur = std::move(had);
    for (std::size_t k = 0; k < params.mlp.size(); ++k) {
        ps.inputs.push_back(cur);
        DenseMatrix pre = linear(cur, params.mlp[k]);
        ps.preacts.push_back(pre);
        if (k + 1 < params.mlp.size()) {
            for (auto& v : pre.values) v = v > 0.0 ? v : 0.0;
            if (training && params.cfg.dropout_rate > 0.0) {
                apply_dropout(pre, params.cfg.dropout_rate, rng, ps.masks[k]);
            }
        }
        cur = std::move(pre);
    }

    std::vector<double> scores(static_cast<std::size_t>(np));
    for (Index p = 0; p < np; ++p) scores[p] = cur.at(p, 0);
    return scores;
}

void inject_formulation(ModelParams& params, const FormulationConfig& cfg) {
    cfg.validate();
    params.operators_injected = true;
    params.injected_ops = cfg.operators;
    params.betas = cfg.betas;
    params.cfg.depth = cfg.max_order;
    params.alpha_logits = DenseMatrix(std::max<Index>(cfg.max_order, 1), 3);
}

Materialized materialize_formulation(const ModelParams& params, const SparseGraph& g,
                                     bool want_dense, int threads) {
    Materialized out;
    const Index depth = params.operators_injected
                            ? static_cast<Index>(params.injected_ops.size())
                            : params.cfg.depth;
    out.config.max_order = depth;
    out.config.betas = params.betas;
    if (params.operators_injected) {
        out.config.operators = params.injected_ops;
    } else {
        for (Index l = 0; l < depth; ++l) {
            out.config.operators.push_back(
                LayerOp::mixed(softmax3(&params.alpha_logits.values[l * 3])));
        }
    }
    if (want_dense) {
        if (g.num_nodes > 500) {
            throw std::invalid_argument("materialize_formulation: dense export refused above 500 nodes");
        }
        out.dense_h = assemble_dense_h(g, out.config, threads);
    }
    return out;
}

namespace {

json dense_to_json(const DenseMatrix& m) {
    return json{{"rows", m.rows}, {"cols", m.cols}, {"values", m.values}};
}

DenseMatrix dense_from_json(const json& j) {
    DenseMatrix m(j.at("rows").get<Index>(), j.at("cols").get<Index>());
    m.values = j.at("values").get<std::vector<double>>();
    if (static_cast<Index>(m.values.size()) != m.rows * m.cols) {
        throw ContractError("checkpoint: dense block size mismatch");
    }
    return m;
}

json layer_to_json(const DenseLayer& l) {
    return json{{"w", dense_to_json(l.w)}, {"b", l.b}};
}

DenseLayer layer_from_json(const json& j) {
    DenseLayer l;
    l.w = dense_from_json(j.at("w"));
    l.b = j.at("b").get<std::vector<double>>();
    return l;
}

const char* kind_name(OperatorKind k) {
    switch (k) {
        case OperatorKind::RawWithLoops: return "raw";
        case OperatorKind::Symmetric: return "sym";
        case OperatorKind::RowStochastic: return "rs";
        case OperatorKind::ColumnStochastic: return "cs";
    }
    return "?";
}

OperatorKind kind_from_name(const std::string& s) {
    if (s == "raw") return OperatorKind::RawWithLoops;
    if (s == "sym") return OperatorKind::Symmetric;
    if (s == "rs") return OperatorKind::RowStochastic;
    if (s == "cs") return OperatorKind::ColumnStochastic;
    throw ContractError("checkpoint: unknown operator kind '" + s + "'");
}

json layer_op_to_json(const LayerOp& op) {
    if (op.is_mixture) {
        return json{{"alpha", op.alpha}};
    }
    return json{{"kind", kind_name(op.spec.kind)}};
}

LayerOp layer_op_from_json(const json& j) {
    if (j.contains("alpha")) {
        auto a = j.at("alpha").get<std::array<double, 3>>();
        return LayerOp::mixed(a);
    }
    return LayerOp::pure(kind_from_name(j.at("kind").get<std::string>()));
}

json config_to_json(const ModelConfig& c) {
    return json{{"depth", c.depth},
                {"hidden_dim", c.hidden_dim},
                {"input_dim", c.input_dim},
                {"use_node_embeddings", c.use_node_embeddings},
                {"embedding_dim", c.embedding_dim},
                {"mlp_layers", c.mlp_layers},
                {"mlp_hidden_dim", c.mlp_hidden_dim},
                {"beta_init", beta_init_name(c.beta_init)},
                {"init_param", c.init_param},
                {"dropout_rate", c.dropout_rate},
                {"loss", loss_name(c.loss)}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig c;
    c.depth = j.at("depth").get<Index>();
    c.hidden_dim = j.at("hidden_dim").get<Index>();
    c.input_dim = j.at("input_dim").get<Index>();
    c.use_node_embeddings = j.at("use_node_embeddings").get<bool>();
    c.embedding_dim = j.at("embedding_dim").get<Index>();
    c.mlp_layers = j.at("mlp_layers").get<Index>();
    c.mlp_hidden_dim = j.at("mlp_hidden_dim").get<Index>();
    if (!beta_init_from_name(j.at("beta_init").get<std::string>(), c.beta_init)) {
        throw ContractError("checkpoint: unknown beta_init");
    }
    c.init_param = j.at("init_param").get<double>();
    c.dropout_rate = j.at("dropout_rate").get<double>();
    if (!loss_from_name(j.at("loss").get<std::string>(), c.loss)) {
        throw ContractError("checkpoint: unknown loss");
    }
    return c;
}

constexpr int kCheckpointVersion = 1;

}  // namespace

void save_checkpoint(const ModelParams& params, const std::string& path) {
    json j;
    j["version"] = kCheckpointVersion;
    j["config"] = config_to_json(params.cfg);
    j["num_nodes"] = params.num_nodes;
    j["alpha_logits"] = dense_to_json(params.alpha_logits);
    j["betas"] = params.betas;
    j["operators_injected"] = params.operators_injected;
    json ops = json::array();
    for (const auto& op : params.injected_ops) ops.push_back(layer_op_to_json(op));
    j["injected_ops"] = ops;
    j["preproc"] = layer_to_json(params.preproc);
    j["reproj"] = layer_to_json(params.reproj);
    j["embeddings"] = dense_to_json(params.embeddings);
    json mlp = json::array();
    for (const auto& l : params.mlp) mlp.push_back(layer_to_json(l));
    j["mlp"] = mlp;

    std::ofstream out(path);
    if (!out) throw std::invalid_argument("save_checkpoint: cannot open '" + path + "'");
    out << j.dump(2) << "\n";
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_checkpoint: cannot open '" + path + "'");
    json j;
    in >> j;
    if (j.at("version").get<int>() != kCheckpointVersion) {
        throw ContractError("load_checkpoint: unsupported checkpoint version");
    }
    ModelParams p;
    p.cfg = config_from_json(j.at("config"));
    p.num_nodes = j.at("num_nodes").get<Index>();
    p.alpha_logits = dense_from_json(j.at("alpha_logits"));
    p.betas = j.at("betas").get<std::vector<double>>();
    p.operators_injected = j.at("operators_injected").get<bool>();
    for (const auto& op : j.at("injected_ops")) p.injected_ops.push_back(layer_op_from_json(op));
    p.preproc = layer_from_json(j.at("preproc"));
    p.reproj = layer_from_json(j.at("reproj"));
    p.embeddings = dense_from_json(j.at("embeddings"));
    for (const auto& l : j.at("mlp")) p.mlp.push_back(layer_from_json(l));
    return p;
}

std::string interpretability_json(const ModelParams& params, const SparseGraph& g,
                                  bool want_dense) {
    Materialized m = materialize_formulation(params, g, want_dense);
    json j;
    j["version"] = kCheckpointVersion;
    j["depth"] = m.config.max_order;
    j["betas"] = m.config.betas;
    json layers = json::array();
    for (const auto& op : m.config.operators) layers.push_back(layer_op_to_json(op));
    j["layers"] = layers;
    if (m.dense_h) j["dense_h"] = dense_to_json(*m.dense_h);
    return j.dump(2);
}

}  // namespace heurlink
