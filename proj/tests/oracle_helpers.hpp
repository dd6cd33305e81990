// Dense Eigen references used to cross-check every sparse code path.
// These rebuild the self-looped adjacency straight from an edge list and
// evaluate heuristics from their set or series definitions, sharing no
// arithmetic with the library's CSR kernels.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "heurlink/graph.hpp"
#include "heurlink/rng.hpp"

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using heurlink::Edge;
using heurlink::Index;

inline Mat adj_with_loops(const std::vector<Edge>& edges, Index n) {
    Mat a = Mat::Identity(n, n);
    for (const auto& [u, v] : edges) {
        if (u == v) continue;
        a(u, v) = 1.0;
        a(v, u) = 1.0;
    }
    return a;
}

inline Vec degrees(const Mat& a) { return a.rowwise().sum(); }

inline Mat row_stochastic(const Mat& a) {
    return degrees(a).cwiseInverse().asDiagonal() * a;
}

inline Mat col_stochastic(const Mat& a) {
    return a * degrees(a).cwiseInverse().asDiagonal();
}

inline Mat sym_normalized(const Mat& a) {
    Vec s = degrees(a).cwiseSqrt().cwiseInverse();
    return s.asDiagonal() * a * s.asDiagonal();
}

inline Mat mixture(const Mat& a, double w_rs, double w_cs, double w_sym) {
    return w_rs * row_stochastic(a) + w_cs * col_stochastic(a) + w_sym * sym_normalized(a);
}

// Weighted sum of ordered products, application order: ops[0] acts first
// (rightmost factor), matching the library's layer recursion.
inline Mat formulation(const std::vector<Mat>& ops, const std::vector<double>& betas) {
    const Index n = ops.empty() ? 0 : static_cast<Index>(ops[0].rows());
    Mat h = betas[0] * Mat::Identity(n, n);
    Mat partial = Mat::Identity(n, n);
    for (std::size_t l = 0; l < ops.size(); ++l) {
        partial = ops[l] * partial;
        h += betas[l + 1] * partial;
    }
    return h;
}

// ---- set / series definitions of the classical heuristics ----

// Common closed neighbors; the adjacency carries self loops, so the count
// is over closed neighborhoods.
inline double cn_sets(const Mat& a, Index i, Index j) {
    double c = 0.0;
    for (Index k = 0; k < a.rows(); ++k) {
        if (a(i, k) > 0.0 && a(j, k) > 0.0) c += 1.0;
    }
    return c;
}

inline double llhn_sets(const Mat& a, Index i, Index j) {
    const Vec d = degrees(a);
    return cn_sets(a, i, j) / (d(i) * d(j));
}

inline double ra_sets(const Mat& a, Index i, Index j) {
    const Vec d = degrees(a);
    double s = 0.0;
    for (Index k = 0; k < a.rows(); ++k) {
        if (a(i, k) > 0.0 && a(j, k) > 0.0) s += 1.0 / d(k);
    }
    return s;
}

inline double ra_sq_sets(const Mat& a, Index i, Index j) {
    const Vec d = degrees(a);
    double s = 0.0;
    for (Index k = 0; k < a.rows(); ++k) {
        if (a(i, k) > 0.0 && a(j, k) > 0.0) s += 1.0 / (d(k) * d(k));
    }
    return s;
}

inline double ra_sym_sets(const Mat& a, Index i, Index j) {
    const Vec d = degrees(a);
    return ra_sets(a, i, j) / std::sqrt(d(i) * d(j));
}

// Truncated walk series sum_{l in [lo, hi]} w(l) * B^l, evaluated by
// repeated dense multiplication.
template <typename WeightFn>
inline Mat walk_series(const Mat& b, Index lo, Index hi, WeightFn&& w) {
    const Index n = static_cast<Index>(b.rows());
    Mat h = Mat::Zero(n, n);
    Mat p = Mat::Identity(n, n);
    for (Index l = 0; l <= hi; ++l) {
        if (l > 0) p = b * p;
        if (l >= lo) h += w(l) * p;
    }
    return h;
}

inline Mat katz_series(const Mat& a, double gamma, Index order) {
    return walk_series(a, 1, order, [&](Index l) { return std::pow(gamma, double(l)); });
}

inline Mat glhn_series(const Mat& a, double phi, Index order) {
    Mat h = walk_series(a, 1, order, [&](Index l) { return std::pow(phi, double(l)); });
    return h + Mat::Identity(a.rows(), a.cols());
}

inline Mat lpi_series(const Mat& a, double gamma, Index order) {
    return walk_series(a, 2, order, [&](Index l) { return std::pow(gamma, double(l - 2)); });
}

inline Mat rwr_series(const Mat& a, double alpha, Index order) {
    return walk_series(row_stochastic(a), 0, order,
                       [&](Index l) { return (1.0 - alpha) * std::pow(alpha, double(l)); });
}

// s(i, j) = (d_i / 2M) * truncated rs walk mass with budget `order`
// (orders 0 .. order-1). m_edges excludes self loops.
inline double lrw_value(const Mat& a, Index i, Index j, double alpha, Index order,
                        Index m_edges) {
    const Mat h = rwr_series(a, alpha, order - 1);
    return degrees(a)(i) / (2.0 * double(m_edges)) * h(i, j);
}

inline double spectral_radius(const Mat& m) {
    return m.eigenvalues().cwiseAbs().maxCoeff();
}

// ---- deterministic random instances ----

inline std::vector<Edge> random_edges(Index n, double p, std::uint64_t seed) {
    heurlink::Rng rng(heurlink::Rng::mix(seed, 0x6772617068ULL));
    std::vector<Edge> edges;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            if (rng.uniform() < p) edges.emplace_back(i, j);
        }
    }
    if (edges.empty()) edges.emplace_back(0, n > 1 ? 1 : 0);
    return edges;
}

}  // namespace oracle
