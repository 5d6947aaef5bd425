#pragma once

// Slow, direct reference implementations used to check the library.
// Nothing here shares code with the implementations under test.

#include <cmath>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "gaeco/gat.hpp"
#include "gaeco/graph.hpp"
#include "gaeco/rng.hpp"

namespace oracle {

using gaeco::Index;
using gaeco::Matrix;
using gaeco::Real;

/// Central differences of f with respect to every entry of x (x is restored).
inline Matrix central_difference(const std::function<Real()>& f, Matrix& x, Real step = 1e-4) {
    Matrix g(x.rows(), x.cols());
    for (Index r = 0; r < x.rows(); ++r) {
        for (Index c = 0; c < x.cols(); ++c) {
            const Real saved = x(r, c);
            x(r, c) = saved + step;
            const Real up = f();
            x(r, c) = saved - step;
            const Real down = f();
            x(r, c) = saved;
            g(r, c) = (up - down) / (2 * step);
        }
    }
    return g;
}

/// Per-entry comparison: an entry passes when its absolute error is within
/// `abs_floor` or its relative error is within the relative tolerance.
inline bool gradients_match(const Matrix& analytic, const Matrix& numeric, Real rel_tol, Real abs_floor,
                            Real* worst_rel = nullptr) {
    bool ok = true;
    Real worst = 0;
    for (Index i = 0; i < analytic.size(); ++i) {
        const Real a = analytic.data()[i];
        const Real b = numeric.data()[i];
        const Real abs_err = std::abs(a - b);
        if (abs_err <= abs_floor) continue;
        const Real rel = abs_err / std::max(std::abs(a), std::abs(b));
        worst = std::max(worst, rel);
        if (rel > rel_tol) ok = false;
    }
    if (worst_rel) *worst_rel = worst;
    return ok;
}

inline Real leaky(Real x, Real slope = 0.2) { return x >= 0 ? x : slope * x; }
inline Real elu(Real x) { return x > 0 ? x : std::exp(x) - 1; }

/// The attention layer written out node by node: for every node i and head k,
///   e_ij = leaky(<a_self_k, W_k h_i> + <a_nb_k, W_k h_j>),
///   alpha_ij = exp(e_ij) / sum_m exp(e_im),
///   out_i = act(sum_j alpha_ij W_k h_j), heads concatenated or averaged.
inline Matrix naive_gat_layer(const gaeco::GatLayerParams& p, const Matrix& h, const gaeco::Graph& g,
                              gaeco::Activation act) {
    const Index n = h.rows();
    const Index heads = p.heads;
    const Index d = p.head_dim();
    const Index f = h.cols();
    const bool concat = p.combine == gaeco::HeadCombine::kConcat;
    Matrix out = Matrix::Zero(n, concat ? heads * d : d);

    // projected[k][node][c]
    std::vector<std::vector<std::vector<Real>>> projected(
        static_cast<std::size_t>(heads),
        std::vector<std::vector<Real>>(static_cast<std::size_t>(n), std::vector<Real>(static_cast<std::size_t>(d), 0.0)));
    for (Index k = 0; k < heads; ++k) {
        for (Index v = 0; v < n; ++v) {
            for (Index c = 0; c < d; ++c) {
                Real s = 0;
                for (Index q = 0; q < f; ++q) s += h(v, q) * p.weight(q, k * d + c);
                projected[k][v][c] = s;
            }
        }
    }
    for (Index i = 0; i < n; ++i) {
        const auto nb = g.neighbors(i);
        for (Index k = 0; k < heads; ++k) {
            std::vector<Real> e;
            for (Index j : nb) {
                Real s = 0;
                for (Index c = 0; c < d; ++c) {
                    s += p.att_self(k, c) * projected[k][i][c] + p.att_neighbor(k, c) * projected[k][j][c];
                }
                e.push_back(leaky(s));
            }
            Real z = 0;
            for (Real v : e) z += std::exp(v);
            for (Index c = 0; c < d; ++c) {
                Real acc = 0;
                for (std::size_t t = 0; t < nb.size(); ++t) acc += std::exp(e[t]) / z * projected[k][nb[t]][c];
                if (concat) {
                    out(i, k * d + c) = acc;
                } else {
                    out(i, c) += acc / static_cast<Real>(heads);
                }
            }
        }
    }
    if (act == gaeco::Activation::kElu) {
        for (Index i = 0; i < out.size(); ++i) out.data()[i] = elu(out.data()[i]);
    }
    return out;
}

/// NMI straight from its definition, with 0 log 0 = 0 and 0/0 = 1.
inline double nmi(const std::vector<Index>& a, const std::vector<Index>& b) {
    const double n = static_cast<double>(a.size());
    std::map<Index, double> ca, cb;
    std::map<std::pair<Index, Index>, double> joint;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ca[a[i]] += 1;
        cb[b[i]] += 1;
        joint[{a[i], b[i]}] += 1;
    }
    double numer = 0;
    for (const auto& [key, nij] : joint) numer += nij * std::log(nij * n / (ca[key.first] * cb[key.second]));
    double denom = 0;
    for (const auto& [_, ni] : ca) denom += ni * std::log(ni / n);
    for (const auto& [_, nj] : cb) denom += nj * std::log(nj / n);
    if (denom == 0) return 1.0;
    return -2.0 * numer / denom;
}

/// ARI by enumerating every unordered node pair (Hubert-Arabie pair form).
inline double ari(const std::vector<Index>& a, const std::vector<Index>& b) {
    double both = 0, only_a = 0, only_b = 0, neither = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const bool sa = a[i] == a[j];
            const bool sb = b[i] == b[j];
            if (sa && sb) {
                both += 1;
            } else if (sa) {
                only_a += 1;
            } else if (sb) {
                only_b += 1;
            } else {
                neither += 1;
            }
        }
    }
    const double denom = (both + only_a) * (only_a + neither) + (both + only_b) * (only_b + neither);
    if (denom == 0) return 1.0;
    return 2.0 * (both * neither - only_a * only_b) / denom;
}

inline std::vector<gaeco::EdgePair> random_edges(gaeco::Rng& rng, Index n, Real p) {
    std::vector<gaeco::EdgePair> edges;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            if (gaeco::uniform01(rng) < p) edges.emplace_back(i, j);
        }
    }
    return edges;
}

inline gaeco::Graph random_graph(gaeco::Rng& rng, Index n, Real p, bool self_loops = true) {
    const auto edges = random_edges(rng, n, p);
    return gaeco::Graph::build(n, edges, self_loops);
}

inline Matrix random_matrix(gaeco::Rng& rng, Index rows, Index cols, Real lo = -1, Real hi = 1) {
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = lo + (hi - lo) * gaeco::uniform01(rng);
    return m;
}

inline std::vector<Index> random_labels(gaeco::Rng& rng, Index n, Index k) {
    std::vector<Index> labels(static_cast<std::size_t>(n));
    for (auto& l : labels) l = static_cast<Index>(gaeco::uniform_index(rng, static_cast<std::uint64_t>(k)));
    return labels;
}

} // namespace oracle
