#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "heurlink/heuristics.hpp"

namespace heurlink {

enum class BetaInit { KI, RWR, Random, Uniform, ReverseKI, FinalLayer };
enum class LossKind { AUC, BCE };

const char* beta_init_name(BetaInit v);
bool beta_init_from_name(const std::string& name, BetaInit& out);
const char* loss_name(LossKind v);
bool loss_from_name(const std::string& name, LossKind& out);

struct ModelConfig {
    Index depth = 20;
    Index hidden_dim = 256;   // propagation width when features are present
    Index input_dim = 0;      // raw feature width; 0 means no feature matrix
    bool use_node_embeddings = false;
    Index embedding_dim = 0;
    Index mlp_layers = 3;
    Index mlp_hidden_dim = 256;
    BetaInit beta_init = BetaInit::RWR;
    double init_param = 0.2;  // damping or restart, depending on the strategy
    double dropout_rate = 0.0;
    LossKind loss = LossKind::BCE;

    void validate() const;  // throws std::invalid_argument

    // Width of the propagated representation: hidden_dim with features,
    // embedding_dim when embeddings alone form the input.
    Index rep_dim() const { return input_dim > 0 ? hidden_dim : embedding_dim; }
};

struct DenseLayer {
    DenseMatrix w;
    std::vector<double> b;
};

// Learnable state. Layer operators are convex mixtures of (rs, cs, sym)
// driven by per-layer softmaxed logits, unless a fixed formulation has
// been injected, in which case injected_ops is used verbatim and the
// logits are inert.
struct ModelParams {
    ModelConfig cfg;
    Index num_nodes = 0;
    DenseMatrix alpha_logits;  // depth x 3
    std::vector<double> betas; // depth + 1, unconstrained sign
    bool operators_injected = false;
    std::vector<LayerOp> injected_ops;
    DenseLayer preproc;     // input_dim x hidden_dim
    DenseLayer reproj;      // (hidden_dim + embedding_dim) x hidden_dim, concat mode
    DenseMatrix embeddings; // num_nodes x embedding_dim
    std::vector<DenseLayer> mlp;
};

// Deterministic initialization: zero alpha logits (uniform thirds after
// softmax), betas per the configured strategy, bounded-uniform dense
// blocks scaled by fan-in and fan-out.
ModelParams init_params(const ModelConfig& cfg, const SparseGraph& g, std::uint64_t seed);

std::vector<double> make_beta_schedule(BetaInit strategy, double param, Index depth,
                                       std::uint64_t seed);

// Everything backward needs: inputs, per-layer outputs, realized
// operators, softmax rows, and dropout masks. `features` is borrowed and
// must stay alive until backward has run.
struct ForwardState {
    const DenseMatrix* features = nullptr;
    bool training = false;
    DenseMatrix xp;      // preprocessing output (feature modes)
    DenseMatrix concat;  // [xp | embeddings] (concat mode)
    std::vector<DenseMatrix> z;  // z[l], l = 0..depth
    DenseMatrix agg;             // sum_l beta_l z[l]
    DenseMatrix rep;             // agg after dropout; equals agg in eval mode
    std::vector<std::uint8_t> drop_mask;
    std::vector<SparseOperator> ops;
    DenseMatrix alphas;  // depth x 3 softmax rows; empty when injected
};

ForwardState forward(const ModelParams& params, const SparseGraph& g,
                     const DenseMatrix* features, bool training,
                     std::uint64_t dropout_seed, int threads = 1);

// Retained predictor activations for one scored batch.
struct PredictState {
    std::vector<Edge> pairs;
    bool training = false;
    DenseMatrix had;                     // pairwise elementwise products
    std::vector<DenseMatrix> inputs;     // input to each linear layer
    std::vector<DenseMatrix> preacts;    // linear outputs before activation
    std::vector<std::vector<std::uint8_t>> masks;  // dropout between layers
};

// s = mlp(rep_i * rep_j) per pair; symmetric in (i, j) by construction.
std::vector<double> predict_links(const ModelParams& params, const DenseMatrix& rep,
                                  std::span<const Edge> pairs, bool training = false,
                                  std::uint64_t dropout_seed = 0,
                                  PredictState* state = nullptr);

// Replaces the learned per-layer mixtures with a fixed formulation; depth
// and betas are taken from the config. Used for heuristic recovery and
// predictor-only training.
void inject_formulation(ModelParams& params, const FormulationConfig& cfg);

struct Materialized {
    FormulationConfig config;
    std::optional<DenseMatrix> dense_h;
};

// Exports the betas and per-layer operators as a formulation; optionally
// assembles dense H, refused above 500 nodes.
Materialized materialize_formulation(const ModelParams& params, const SparseGraph& g,
                                     bool want_dense = false, int threads = 1);

// Versioned JSON checkpoint; 64-bit values round-trip exactly.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

// Interpretability report: betas plus softmaxed alphas (or injected
// operator descriptions) per layer, optionally with dense H.
std::string interpretability_json(const ModelParams& params, const SparseGraph& g,
                                  bool want_dense);

}  // namespace heurlink
