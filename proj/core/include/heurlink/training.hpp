#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "heurlink/eval.hpp"
#include "heurlink/model.hpp"

namespace heurlink {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainConfig {
    Index epochs = 100;
    double learning_rate = 1e-3;
    Index negatives_per_positive = 1;
    double margin_base = 1.0;
    // Scales each pair's margin by the positive edge's endpoint degrees;
    // off by default so the ranking loss stays the plain squared hinge.
    bool adaptive_margin = false;
    Index batch_size = 0;  // 0: one full-batch step per epoch
    // Draw fresh negatives every epoch; disable for a fixed corruption set
    // (and a bit-for-bit flat loss curve at learning_rate 0, dropout 0).
    bool resample_negatives = true;
    std::uint64_t seed = 1;
    AdamConfig adam;

    void validate() const;
};

// Gradient w.r.t. every trainable block, laid out exactly like ModelParams.
struct GradientBundle {
    DenseMatrix alpha_logits;
    std::vector<double> betas;
    DenseLayer preproc;
    DenseLayer reproj;
    DenseMatrix embeddings;
    std::vector<DenseLayer> mlp;

    void accumulate(const GradientBundle& other, double scale = 1.0);
    void scale_all(double s);
    bool finite() const;
};

GradientBundle zeros_like(const ModelParams& params);

// Uniform corruption: for positive (i, j) draw k tail replacements c with
// (i, c) absent from the graph (c == i is excluded by the self-loop).
// Rows with no non-neighbor are skipped and counted in *skipped.
std::vector<Edge> sample_negatives(const SparseGraph& g, std::span<const Edge> positives,
                                   Index k_per_positive, std::uint64_t seed,
                                   Index* skipped = nullptr);

// Per-pair margins for the ranking loss. Adaptive mode grows the margin
// with the positive's endpoint degrees: base * (1 + log1p(min(d_i, d_j)) /
// log1p(1 + max degree)).
std::vector<double> pair_margins(const SparseGraph& g, std::span<const Edge> positives,
                                 double margin_base, bool adaptive);

struct LossGrads {
    double value = 0.0;
    std::vector<double> dpos;
    std::vector<double> dneg;
};

// Squared hinge over (positive, negative) pairs: mean of
// margin * max(0, margin - s_pos + s_neg)^2. neg holds k negatives per
// positive, grouped contiguously; margins has one entry per positive.
LossGrads auc_hinge_loss(std::span<const double> pos, std::span<const double> neg,
                         Index k_per_positive, std::span<const double> margins);

// Mean binary cross-entropy on logits over all positives and negatives.
LossGrads bce_loss(std::span<const double> pos, std::span<const double> neg);

// Reverse-mode pass matching forward + predict_links. dscore holds one
// entry per scored pair in PredictState order. The states must come from
// the same parameters the gradient is taken at.
GradientBundle backward(const ModelParams& params, const SparseGraph& g,
                        const ForwardState& fs, const PredictState& ps,
                        std::span<const double> dscore, int threads = 1);

struct AdamState {
    Index t = 0;
    GradientBundle m;
    GradientBundle v;

    static AdamState init(const ModelParams& params);
};

// One Adam update in place. Rejects non-finite gradients before touching
// either the parameters or the moment estimates.
void adam_step(ModelParams& params, const GradientBundle& grads, AdamState& state,
               double lr, const AdamConfig& cfg);

struct EpochRecord {
    Index epoch = 0;
    double loss = 0.0;
    double val_metric = 0.0;
};

struct FitOptions {
    MetricSpec val_metric;  // validation selector, default auc
    // Freeze propagation and encoder blocks; only the pair scorer trains.
    // Node representations are computed once and reused across epochs.
    bool predictor_only = false;
    int threads = 1;
};

struct FitResult {
    ModelParams best_params;
    Index best_epoch = -1;
    double best_val = 0.0;
    std::vector<EpochRecord> history;
    Index sampler_skipped = 0;
};

// Full training loop: per-epoch negative corruption, loss backward, Adam,
// validation scoring, best-checkpoint selection on the validation metric.
// g must be built from split.train only.
FitResult fit(const SparseGraph& g, const DenseMatrix* features, const EdgeSplit& split,
              const ModelConfig& mcfg, const TrainConfig& tcfg, const FitOptions& opts = {});

// Same loop starting from caller-provided parameters (e.g. an injected
// fixed formulation trained predictor-only).
FitResult fit_from(const SparseGraph& g, const DenseMatrix* features, const EdgeSplit& split,
                   ModelParams start, const TrainConfig& tcfg, const FitOptions& opts = {});

struct GradCheckReport {
    double alpha = 0.0;
    double beta = 0.0;
    double preproc = 0.0;
    double reproj = 0.0;
    double embeddings = 0.0;
    double mlp = 0.0;

    double worst() const;
};

// Central-difference probe of backward() on the full loss. Dense blocks are
// spot-checked on a deterministic stride of entries; alpha logits and betas
// are checked exhaustively. Reported values are max relative errors
// |g_an - g_fd| / max(1, |g_an|, |g_fd|) per block.
GradCheckReport finite_difference_check(const ModelParams& params, const SparseGraph& g,
                                        const DenseMatrix* features,
                                        std::span<const Edge> positives,
                                        std::span<const Edge> negatives, LossKind loss,
                                        double step = 1e-5, double margin_base = 1.0);

}  // namespace heurlink
