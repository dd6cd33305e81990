#include "heurlink/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "heurlink/errors.hpp"
#include "heurlink/rng.hpp"

namespace heurlink {

namespace {

// a^T b for row-major operands sharing their row count.
DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows != b.rows) throw std::invalid_argument("matmul_at_b: row mismatch");
    DenseMatrix out(a.cols, b.cols);
    for (Index r = 0; r < a.rows; ++r) {
        auto arow = a.row(r);
        auto brow = b.row(r);
        for (Index i = 0; i < a.cols; ++i) {
            const double v = arow[i];
            if (v == 0.0) continue;
            auto orow = out.row(i);
            for (Index j = 0; j < b.cols; ++j) orow[j] += v * brow[j];
        }
    }
    return out;
}

// a b^T; contracts the shared column dimension.
DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.cols) throw std::invalid_argument("matmul_a_bt: column mismatch");
    DenseMatrix out(a.rows, b.rows);
    for (Index r = 0; r < a.rows; ++r) {
        auto arow = a.row(r);
        auto orow = out.row(r);
        for (Index i = 0; i < b.rows; ++i) {
            auto brow = b.row(i);
            double s = 0.0;
            for (Index j = 0; j < a.cols; ++j) s += arow[j] * brow[j];
            orow[i] = s;
        }
    }
    return out;
}

std::vector<double> column_sums(const DenseMatrix& m) {
    std::vector<double> out(static_cast<std::size_t>(m.cols), 0.0);
    for (Index r = 0; r < m.rows; ++r) {
        auto row = m.row(r);
        for (Index c = 0; c < m.cols; ++c) out[c] += row[c];
    }
    return out;
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

void add_vec(std::vector<double>& y, const std::vector<double>& x, double s) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("train: learning_rate must be finite and nonnegative");
    }
    if (negatives_per_positive < 1) {
        throw std::invalid_argument("train: negatives_per_positive must be >= 1");
    }
    if (!(margin_base > 0.0)) throw std::invalid_argument("train: margin_base must be positive");
    if (batch_size < 0) throw std::invalid_argument("train: negative batch_size");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
        throw std::invalid_argument("train: adam decay rates must lie in [0, 1)");
    }
    if (!(adam.eps > 0.0)) throw std::invalid_argument("train: adam eps must be positive");
}

void GradientBundle::accumulate(const GradientBundle& other, double scale) {
    add_vec(alpha_logits.values, other.alpha_logits.values, scale);
    add_vec(betas, other.betas, scale);
    add_vec(preproc.w.values, other.preproc.w.values, scale);
    add_vec(preproc.b, other.preproc.b, scale);
    add_vec(reproj.w.values, other.reproj.w.values, scale);
    add_vec(reproj.b, other.reproj.b, scale);
    add_vec(embeddings.values, other.embeddings.values, scale);
    for (std::size_t k = 0; k < mlp.size(); ++k) {
        add_vec(mlp[k].w.values, other.mlp[k].w.values, scale);
        add_vec(mlp[k].b, other.mlp[k].b, scale);
    }
}

void GradientBundle::scale_all(double s) {
    auto scale_vec = [s](std::vector<double>& v) {
        for (auto& x : v) x *= s;
    };
    scale_vec(alpha_logits.values);
    scale_vec(betas);
    scale_vec(preproc.w.values);
    scale_vec(preproc.b);
    scale_vec(reproj.w.values);
    scale_vec(reproj.b);
    scale_vec(embeddings.values);
    for (auto& layer : mlp) {
        scale_vec(layer.w.values);
        scale_vec(layer.b);
    }
}

bool GradientBundle::finite() const {
    if (!all_finite(alpha_logits) || !all_finite(betas)) return false;
    if (!all_finite(preproc.w) || !all_finite(preproc.b)) return false;
    if (!all_finite(reproj.w) || !all_finite(reproj.b)) return false;
    if (!all_finite(embeddings)) return false;
    for (const auto& layer : mlp) {
        if (!all_finite(layer.w) || !all_finite(layer.b)) return false;
    }
    return true;
}

GradientBundle zeros_like(const ModelParams& p) {
    GradientBundle g;
    g.alpha_logits = DenseMatrix(p.alpha_logits.rows, p.alpha_logits.cols);
    g.betas.assign(p.betas.size(), 0.0);
    g.preproc.w = DenseMatrix(p.preproc.w.rows, p.preproc.w.cols);
    g.preproc.b.assign(p.preproc.b.size(), 0.0);
    g.reproj.w = DenseMatrix(p.reproj.w.rows, p.reproj.w.cols);
    g.reproj.b.assign(p.reproj.b.size(), 0.0);
    g.embeddings = DenseMatrix(p.embeddings.rows, p.embeddings.cols);
    g.mlp.resize(p.mlp.size());
    for (std::size_t k = 0; k < p.mlp.size(); ++k) {
        g.mlp[k].w = DenseMatrix(p.mlp[k].w.rows, p.mlp[k].w.cols);
        g.mlp[k].b.assign(p.mlp[k].b.size(), 0.0);
    }
    return g;
}

std::vector<Edge> sample_negatives(const SparseGraph& g, std::span<const Edge> positives,
                                   Index k_per_positive, std::uint64_t seed, Index* skipped) {
    if (k_per_positive < 1) {
        throw std::invalid_argument("sample_negatives: need at least one negative per positive");
    }
    Rng rng(Rng::mix(seed, 0x6e6567ULL));
    std::vector<Edge> out;
    out.reserve(positives.size() * static_cast<std::size_t>(k_per_positive));
    Index skip_count = 0;
    for (const auto& pos : positives) {
        const Index i = pos.first;
        // The self-loop makes a full row exactly num_nodes entries wide.
        if (g.degrees_with_loops[static_cast<std::size_t>(i)] == g.num_nodes) {
            ++skip_count;
            continue;
        }
        for (Index t = 0; t < k_per_positive; ++t) {
            Index c;
            do {
                c = rng.below(g.num_nodes);
            } while (g.has_entry(i, c));
            out.emplace_back(i, c);
        }
    }
    if (skipped) *skipped = skip_count;
    return out;
}

std::vector<double> pair_margins(const SparseGraph& g, std::span<const Edge> positives,
                                 double margin_base, bool adaptive) {
    std::vector<double> out(positives.size(), margin_base);
    if (!adaptive) return out;
    Index dmax = 1;
    for (Index d : g.degrees_with_loops) dmax = std::max(dmax, d);
    const double denom = std::log1p(1.0 + static_cast<double>(dmax));
    for (std::size_t p = 0; p < positives.size(); ++p) {
        const auto [i, j] = positives[p];
        const double dmin = static_cast<double>(
            std::min(g.degrees_with_loops[static_cast<std::size_t>(i)],
                     g.degrees_with_loops[static_cast<std::size_t>(j)]));
        out[p] = margin_base * (1.0 + std::log1p(dmin) / denom);
    }
    return out;
}

LossGrads auc_hinge_loss(std::span<const double> pos, std::span<const double> neg,
                         Index k_per_positive, std::span<const double> margins) {
    if (pos.empty()) throw std::invalid_argument("auc_hinge_loss: no positive scores");
    if (k_per_positive < 1) throw std::invalid_argument("auc_hinge_loss: bad group size");
    if (neg.size() != pos.size() * static_cast<std::size_t>(k_per_positive)) {
        throw std::invalid_argument("auc_hinge_loss: negative count must be k per positive");
    }
    if (margins.size() != pos.size()) {
        throw std::invalid_argument("auc_hinge_loss: one margin per positive required");
    }
    LossGrads out;
    out.dpos.assign(pos.size(), 0.0);
    out.dneg.assign(neg.size(), 0.0);
    const double pairs = static_cast<double>(neg.size());
    double total = 0.0;
    for (std::size_t p = 0; p < pos.size(); ++p) {
        const double gamma = margins[p];
        for (Index t = 0; t < k_per_positive; ++t) {
            const std::size_t q = p * static_cast<std::size_t>(k_per_positive) +
                                  static_cast<std::size_t>(t);
            const double gap = gamma - pos[p] + neg[q];
            if (gap <= 0.0) continue;
            total += gamma * gap * gap;
            const double d = 2.0 * gamma * gap / pairs;
            out.dpos[p] -= d;
            out.dneg[q] += d;
        }
    }
    out.value = total / pairs;
    return out;
}

LossGrads bce_loss(std::span<const double> pos, std::span<const double> neg) {
    const double n = static_cast<double>(pos.size() + neg.size());
    if (n == 0.0) throw std::invalid_argument("bce_loss: no scores");
    LossGrads out;
    out.dpos.assign(pos.size(), 0.0);
    out.dneg.assign(neg.size(), 0.0);
    double total = 0.0;
    for (std::size_t p = 0; p < pos.size(); ++p) {
        total += softplus(-pos[p]);
        out.dpos[p] = (sigmoid(pos[p]) - 1.0) / n;
    }
    for (std::size_t q = 0; q < neg.size(); ++q) {
        total += softplus(neg[q]);
        out.dneg[q] = sigmoid(neg[q]) / n;
    }
    out.value = total / n;
    return out;
}

GradientBundle backward(const ModelParams& params, const SparseGraph& g,
                        const ForwardState& fs, const PredictState& ps,
                        std::span<const double> dscore, int threads) {
    const ModelConfig& cfg = params.cfg;
    if (dscore.size() != ps.pairs.size()) {
        throw std::invalid_argument("backward: one loss gradient per scored pair required");
    }
    const Index depth = static_cast<Index>(fs.ops.size());
    if (static_cast<Index>(fs.z.size()) != depth + 1 ||
        static_cast<Index>(params.betas.size()) != depth + 1) {
        throw ContractError("backward: forward state does not match the parameters");
    }

    GradientBundle grad = zeros_like(params);
    const Index np = static_cast<Index>(ps.pairs.size());

    // Predictor chain, last layer first. preacts are pre-activation; hidden
    // layers applied relu then dropout on top of them in forward order.
    DenseMatrix dpre(np, 1);
    for (Index p = 0; p < np; ++p) dpre.at(p, 0) = dscore[static_cast<std::size_t>(p)];
    DenseMatrix dhad;
    for (std::size_t k = params.mlp.size(); k-- > 0;) {
        grad.mlp[k].w = matmul_at_b(ps.inputs[k], dpre);
        grad.mlp[k].b = column_sums(dpre);
        DenseMatrix dinp = matmul_a_bt(dpre, params.mlp[k].w);
        if (k == 0) {
            dhad = std::move(dinp);
            break;
        }
        const auto& mask = ps.masks[k - 1];
        const bool dropped = ps.training && cfg.dropout_rate > 0.0 && !mask.empty();
        const double scale = dropped ? 1.0 / (1.0 - cfg.dropout_rate) : 1.0;
        const auto& pre = ps.preacts[k - 1];
        for (std::size_t idx = 0; idx < dinp.values.size(); ++idx) {
            double v = dinp.values[idx];
            if (dropped) v = mask[idx] ? v * scale : 0.0;
            dinp.values[idx] = pre.values[idx] > 0.0 ? v : 0.0;
        }
        dpre = std::move(dinp);
    }

    // had[p] = rep_i * rep_j elementwise; scatter both halves.
    const Index d = fs.rep.cols;
    DenseMatrix drep(fs.rep.rows, d);
    for (Index p = 0; p < np; ++p) {
        const auto [i, j] = ps.pairs[static_cast<std::size_t>(p)];
        auto dh = dhad.row(p);
        auto ri = fs.rep.row(i);
        auto rj = fs.rep.row(j);
        auto gi = drep.row(i);
        auto gj = drep.row(j);
        for (Index c = 0; c < d; ++c) {
            gi[c] += dh[c] * rj[c];
            gj[c] += dh[c] * ri[c];
        }
    }

    DenseMatrix dagg = std::move(drep);
    if (fs.training && cfg.dropout_rate > 0.0 && !fs.drop_mask.empty()) {
        const double scale = 1.0 / (1.0 - cfg.dropout_rate);
        for (std::size_t idx = 0; idx < dagg.values.size(); ++idx) {
            dagg.values[idx] = fs.drop_mask[idx] ? dagg.values[idx] * scale : 0.0;
        }
    }

    for (Index l = 0; l <= depth; ++l) {
        grad.betas[static_cast<std::size_t>(l)] = dot(dagg, fs.z[static_cast<std::size_t>(l)]);
    }

    // Adjoint sweep: hat_l = dL/dZ_l, hat_depth = beta_depth * dagg,
    // hat_{l-1} = Op_l^T hat_l + beta_{l-1} * dagg.
    DenseMatrix hat(dagg.rows, dagg.cols);
    add_scaled(hat, params.betas[static_cast<std::size_t>(depth)], dagg);
    for (Index l = depth; l >= 1; --l) {
        const auto& op = fs.ops[static_cast<std::size_t>(l - 1)];
        if (!params.operators_injected) {
            // d mixture entry (i, j) / d alpha = (1/d_i, 1/d_j, 1/sqrt(d_i d_j));
            // each entry contributes <hat_l[i,:], z_{l-1}[j,:]> through it.
            const auto& zprev = fs.z[static_cast<std::size_t>(l - 1)];
            double gk0 = 0.0, gk1 = 0.0, gk2 = 0.0;
            for (Index i = 0; i < g.num_nodes; ++i) {
                const double di = static_cast<double>(g.degrees_with_loops[i]);
                auto hrow = hat.row(i);
                for (Index e = g.row_offsets[i]; e < g.row_offsets[i + 1]; ++e) {
                    const Index j = g.col_indices[e];
                    auto zrow = zprev.row(j);
                    double t = 0.0;
                    for (Index c = 0; c < d; ++c) t += hrow[c] * zrow[c];
                    const double dj = static_cast<double>(g.degrees_with_loops[j]);
                    gk0 += t / di;
                    gk1 += t / dj;
                    gk2 += t / std::sqrt(di * dj);
                }
            }
            const double a0 = fs.alphas.at(l - 1, 0);
            const double a1 = fs.alphas.at(l - 1, 1);
            const double a2 = fs.alphas.at(l - 1, 2);
            const double avg = a0 * gk0 + a1 * gk1 + a2 * gk2;
            grad.alpha_logits.at(l - 1, 0) = a0 * (gk0 - avg);
            grad.alpha_logits.at(l - 1, 1) = a1 * (gk1 - avg);
            grad.alpha_logits.at(l - 1, 2) = a2 * (gk2 - avg);
        }
        DenseMatrix prev = spmm_transpose(op, hat, threads);
        add_scaled(prev, params.betas[static_cast<std::size_t>(l - 1)], dagg);
        hat = std::move(prev);
    }

    // hat now carries dL/dZ_0; push it through the encoder.
    if (cfg.input_dim > 0) {
        if (cfg.use_node_embeddings) {
            grad.reproj.w = matmul_at_b(fs.concat, hat);
            grad.reproj.b = column_sums(hat);
            DenseMatrix dconcat = matmul_a_bt(hat, params.reproj.w);
            DenseMatrix dxp(dconcat.rows, cfg.hidden_dim);
            for (Index r = 0; r < dconcat.rows; ++r) {
                auto src = dconcat.row(r);
                auto xr = dxp.row(r);
                auto er = grad.embeddings.row(r);
                for (Index c = 0; c < cfg.hidden_dim; ++c) xr[c] = src[c];
                for (Index c = 0; c < cfg.embedding_dim; ++c) er[c] += src[cfg.hidden_dim + c];
            }
            grad.preproc.w = matmul_at_b(*fs.features, dxp);
            grad.preproc.b = column_sums(dxp);
        } else {
            grad.preproc.w = matmul_at_b(*fs.features, hat);
            grad.preproc.b = column_sums(hat);
        }
    } else {
        add_scaled(grad.embeddings, 1.0, hat);
    }
    return grad;
}

AdamState AdamState::init(const ModelParams& params) {
    AdamState s;
    s.m = zeros_like(params);
    s.v = zeros_like(params);
    return s;
}

namespace {

template <typename F>
void zip_blocks(ModelParams& p, const GradientBundle& g, AdamState& s, F&& f) {
    auto vecs = [&f](std::vector<double>& pv, const std::vector<double>& gv,
                     std::vector<double>& mv, std::vector<double>& vv) {
        if (pv.size() != gv.size() || pv.size() != mv.size() || pv.size() != vv.size()) {
            throw ContractError("adam_step: gradient layout does not match the parameters");
        }
        for (std::size_t i = 0; i < pv.size(); ++i) f(pv[i], gv[i], mv[i], vv[i]);
    };
    vecs(p.alpha_logits.values, g.alpha_logits.values, s.m.alpha_logits.values,
         s.v.alpha_logits.values);
    vecs(p.betas, g.betas, s.m.betas, s.v.betas);
    vecs(p.preproc.w.values, g.preproc.w.values, s.m.preproc.w.values, s.v.preproc.w.values);
    vecs(p.preproc.b, g.preproc.b, s.m.preproc.b, s.v.preproc.b);
    vecs(p.reproj.w.values, g.reproj.w.values, s.m.reproj.w.values, s.v.reproj.w.values);
    vecs(p.reproj.b, g.reproj.b, s.m.reproj.b, s.v.reproj.b);
    vecs(p.embeddings.values, g.embeddings.values, s.m.embeddings.values,
         s.v.embeddings.values);
    for (std::size_t k = 0; k < p.mlp.size(); ++k) {
        vecs(p.mlp[k].w.values, g.mlp[k].w.values, s.m.mlp[k].w.values, s.v.mlp[k].w.values);
        vecs(p.mlp[k].b, g.mlp[k].b, s.m.mlp[k].b, s.v.mlp[k].b);
    }
}

}  // namespace

void adam_step(ModelParams& params, const GradientBundle& grads, AdamState& state,
               double lr, const AdamConfig& cfg) {
    if (!grads.finite()) throw NumericError("adam_step: non-finite gradient");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    zip_blocks(params, grads, state, [&](double& p, double gval, double& m, double& v) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * gval;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * gval * gval;
        p -= lr * (m / bc1) / (std::sqrt(v / bc2) + cfg.eps);
    });
}

namespace {

void freeze_to_predictor(GradientBundle& g) {
    std::fill(g.alpha_logits.values.begin(), g.alpha_logits.values.end(), 0.0);
    std::fill(g.betas.begin(), g.betas.end(), 0.0);
    std::fill(g.preproc.w.values.begin(), g.preproc.w.values.end(), 0.0);
    std::fill(g.preproc.b.begin(), g.preproc.b.end(), 0.0);
    std::fill(g.reproj.w.values.begin(), g.reproj.w.values.end(), 0.0);
    std::fill(g.reproj.b.begin(), g.reproj.b.end(), 0.0);
    std::fill(g.embeddings.values.begin(), g.embeddings.values.end(), 0.0);
}

}  // namespace

FitResult fit_from(const SparseGraph& g, const DenseMatrix* features, const EdgeSplit& split,
                   ModelParams start, const TrainConfig& tcfg, const FitOptions& opts) {
    tcfg.validate();
    const ModelConfig& cfg = start.cfg;
    const Index k = tcfg.negatives_per_positive;

    // Positives on a saturated row have no corruption candidates; drop them
    // up front so loss groups stay aligned.
    std::vector<Edge> trainable;
    trainable.reserve(split.train.size());
    Index skipped = 0;
    for (const auto& e : split.train) {
        if (g.degrees_with_loops[static_cast<std::size_t>(e.first)] == g.num_nodes) {
            ++skipped;
        } else {
            trainable.push_back(e);
        }
    }
    if (trainable.empty()) throw std::invalid_argument("fit: no trainable positive edges");

    FitResult res;
    res.sampler_skipped = skipped;

    ModelParams params = std::move(start);
    res.best_params = params;  // epochs == 0 hands the initialization back
    AdamState adam = AdamState::init(params);
    const auto all_margins = pair_margins(g, trainable, tcfg.margin_base, tcfg.adaptive_margin);

    ForwardState cached;
    if (opts.predictor_only) cached = forward(params, g, features, false, 0, opts.threads);

    std::vector<Edge> fixed_negs;
    if (!tcfg.resample_negatives) {
        fixed_negs = sample_negatives(g, trainable, k, Rng::mix(tcfg.seed, 0x66697865ULL));
    }

    const auto P = trainable.size();
    std::vector<std::size_t> order(P);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const bool has_valid = !split.valid_pos.empty() && !split.valid_neg.empty();

    for (Index epoch = 0; epoch < tcfg.epochs; ++epoch) {
        const std::uint64_t estream =
            Rng::mix(tcfg.seed, 0x65706f6368ULL + static_cast<std::uint64_t>(epoch));
        const std::size_t step =
            tcfg.batch_size > 0 ? static_cast<std::size_t>(tcfg.batch_size) : P;
        if (tcfg.batch_size > 0) {
            Rng shuffle_rng(Rng::mix(estream, 4));
            for (std::size_t i = P; i > 1; --i) {
                auto j = static_cast<std::size_t>(shuffle_rng.below(static_cast<Index>(i)));
                std::swap(order[i - 1], order[j]);
            }
        }

        double loss_sum = 0.0;
        std::size_t loss_weight = 0;
        std::size_t batch_index = 0;
        for (std::size_t begin = 0; begin < P; begin += step, ++batch_index) {
            const std::size_t end = std::min(begin + step, P);
            std::vector<Edge> bpos;
            std::vector<double> bmargins;
            bpos.reserve(end - begin);
            bmargins.reserve(end - begin);
            for (std::size_t idx = begin; idx < end; ++idx) {
                bpos.push_back(trainable[order[idx]]);
                bmargins.push_back(all_margins[order[idx]]);
            }
            std::vector<Edge> bneg;
            if (tcfg.resample_negatives) {
                bneg = sample_negatives(g, bpos, k, Rng::mix(estream, 16 + batch_index));
            } else {
                bneg.reserve(bpos.size() * static_cast<std::size_t>(k));
                for (std::size_t idx = begin; idx < end; ++idx) {
                    const std::size_t base = order[idx] * static_cast<std::size_t>(k);
                    for (Index t = 0; t < k; ++t) {
                        bneg.push_back(fixed_negs[base + static_cast<std::size_t>(t)]);
                    }
                }
            }

            ForwardState fresh;
            if (!opts.predictor_only) {
                fresh = forward(params, g, features, true, Rng::mix(estream, 2), opts.threads);
            }
            const ForwardState& fs = opts.predictor_only ? cached : fresh;

            std::vector<Edge> pairs(bpos);
            pairs.insert(pairs.end(), bneg.begin(), bneg.end());
            PredictState pstate;
            const auto scores = predict_links(params, fs.rep, pairs, true,
                                              Rng::mix(estream, 32 + batch_index), &pstate);
            std::span<const double> spos(scores.data(), bpos.size());
            std::span<const double> sneg(scores.data() + bpos.size(), bneg.size());
            const LossGrads lg = cfg.loss == LossKind::AUC
                                     ? auc_hinge_loss(spos, sneg, k, bmargins)
                                     : bce_loss(spos, sneg);
            if (!std::isfinite(lg.value)) throw NumericError("fit: loss is not finite");

            std::vector<double> dscore(lg.dpos);
            dscore.insert(dscore.end(), lg.dneg.begin(), lg.dneg.end());
            GradientBundle grads = backward(params, g, fs, pstate, dscore, opts.threads);
            if (opts.predictor_only) freeze_to_predictor(grads);
            adam_step(params, grads, adam, tcfg.learning_rate, tcfg.adam);

            loss_sum += lg.value * static_cast<double>(bpos.size());
            loss_weight += bpos.size();
        }

        double val = 0.0;
        if (has_valid) {
            ForwardState feval_fresh;
            if (!opts.predictor_only) {
                feval_fresh = forward(params, g, features, false, 0, opts.threads);
            }
            const ForwardState& feval = opts.predictor_only ? cached : feval_fresh;
            const auto vp = predict_links(params, feval.rep, split.valid_pos);
            const auto vn = predict_links(params, feval.rep, split.valid_neg);
            val = evaluate_metric(opts.val_metric, vp, vn);
        }

        res.history.push_back(
            {epoch, loss_sum / static_cast<double>(loss_weight), val});
        const bool improved = has_valid ? (res.best_epoch < 0 || val > res.best_val)
                                        : true;  // no validation: keep the last
        if (improved) {
            res.best_val = val;
            res.best_epoch = epoch;
            res.best_params = params;
        }
    }
    return res;
}

FitResult fit(const SparseGraph& g, const DenseMatrix* features, const EdgeSplit& split,
              const ModelConfig& mcfg, const TrainConfig& tcfg, const FitOptions& opts) {
    return fit_from(g, features, split, init_params(mcfg, g, tcfg.seed), tcfg, opts);
}

double GradCheckReport::worst() const {
    return std::max({alpha, beta, preproc, reproj, embeddings, mlp});
}

GradCheckReport finite_difference_check(const ModelParams& params0, const SparseGraph& g,
                                        const DenseMatrix* features,
                                        std::span<const Edge> positives,
                                        std::span<const Edge> negatives, LossKind loss,
                                        double step, double margin_base) {
    if (positives.empty() || negatives.empty()) {
        throw std::invalid_argument("finite_difference_check: need positives and negatives");
    }
    Index k = 1;
    if (loss == LossKind::AUC) {
        if (negatives.size() % positives.size() != 0) {
            throw std::invalid_argument(
                "finite_difference_check: ranking loss needs k negatives per positive");
        }
        k = static_cast<Index>(negatives.size() / positives.size());
    }

    ModelParams params = params0;  // perturbed in place below
    const auto margins = pair_margins(g, positives, margin_base, false);
    std::vector<Edge> pairs(positives.begin(), positives.end());
    pairs.insert(pairs.end(), negatives.begin(), negatives.end());
    // One fixed seed for every evaluation: dropout masks depend only on
    // shapes, so perturbed losses stay on the same stochastic slice.
    const std::uint64_t mask_seed = 7;

    auto eval_loss = [&](ForwardState* fs_out, PredictState* ps_out,
                         LossGrads* lg_out) -> double {
        ForwardState fs = forward(params, g, features, true, mask_seed, 1);
        PredictState ps;
        const auto scores = predict_links(params, fs.rep, pairs, true, mask_seed, &ps);
        std::span<const double> spos(scores.data(), positives.size());
        std::span<const double> sneg(scores.data() + positives.size(), negatives.size());
        LossGrads lg = loss == LossKind::AUC ? auc_hinge_loss(spos, sneg, k, margins)
                                             : bce_loss(spos, sneg);
        const double value = lg.value;
        if (fs_out) *fs_out = std::move(fs);
        if (ps_out) *ps_out = std::move(ps);
        if (lg_out) *lg_out = std::move(lg);
        return value;
    };

    ForwardState fs;
    PredictState ps;
    LossGrads lg;
    eval_loss(&fs, &ps, &lg);
    std::vector<double> dscore(lg.dpos);
    dscore.insert(dscore.end(), lg.dneg.begin(), lg.dneg.end());
    const GradientBundle an = backward(params, g, fs, ps, dscore, 1);

    GradCheckReport report;
    auto probe = [&](double& slot, double analytic, double& worst) {
        const double orig = slot;
        slot = orig + step;
        const double fp = eval_loss(nullptr, nullptr, nullptr);
        slot = orig - step;
        const double fm = eval_loss(nullptr, nullptr, nullptr);
        slot = orig;
        const double fd = (fp - fm) / (2.0 * step);
        const double rel =
            std::abs(analytic - fd) / std::max({1.0, std::abs(analytic), std::abs(fd)});
        worst = std::max(worst, rel);
    };
    auto probe_vec = [&](std::vector<double>& pv, const std::vector<double>& gv,
                         double& worst, std::size_t max_entries) {
        if (pv.empty()) return;
        const std::size_t stride = std::max<std::size_t>(1, pv.size() / max_entries);
        for (std::size_t i = 0; i < pv.size(); i += stride) probe(pv[i], gv[i], worst);
    };

    if (!params.operators_injected) {
        probe_vec(params.alpha_logits.values, an.alpha_logits.values, report.alpha,
                  params.alpha_logits.values.size());
    }
    probe_vec(params.betas, an.betas, report.beta, params.betas.size());
    probe_vec(params.preproc.w.values, an.preproc.w.values, report.preproc, 12);
    probe_vec(params.preproc.b, an.preproc.b, report.preproc, 4);
    probe_vec(params.reproj.w.values, an.reproj.w.values, report.reproj, 12);
    probe_vec(params.reproj.b, an.reproj.b, report.reproj, 4);
    probe_vec(params.embeddings.values, an.embeddings.values, report.embeddings, 16);
    for (std::size_t layer = 0; layer < params.mlp.size(); ++layer) {
        probe_vec(params.mlp[layer].w.values, an.mlp[layer].w.values, report.mlp, 10);
        probe_vec(params.mlp[layer].b, an.mlp[layer].b, report.mlp, 4);
    }
    return report;
}

}  // namespace heurlink
