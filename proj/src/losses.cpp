#include "gaeco/losses.hpp"

#include <string>

#include "gaeco/parallel.hpp"

namespace gaeco {

ad::Var decode(ad::Var z, Index cap) {
    const Index n = z.rows();
    if (n * n > cap) {
        throw InvalidArgument("decode: n^2 = " + std::to_string(n * n) + " exceeds dense cap " + std::to_string(cap) +
                              "; use sampled reconstruction");
    }
    return ad::sigmoid(ad::matmul_nt(z, z));
}

ad::Var recon_loss(const Matrix& adjacency, ad::Var a_hat, Real pos_weight) {
    return ad::binary_cross_entropy(adjacency, a_hat, pos_weight);
}

ad::Var recon_loss(std::shared_ptr<const Matrix> adjacency, ad::Var a_hat, Real pos_weight) {
    return ad::binary_cross_entropy(std::move(adjacency), a_hat, pos_weight);
}

ad::Var sampled_recon_loss(const Graph& g, ad::Var z, const SampledReconOptions& options, Rng& rng,
                           Index* terms) {
    require(options.neg_per_pos >= 1, "sampled_recon_loss: neg_per_pos must be >= 1");
    require(g.num_undirected_edges() > 0, "sampled_recon_loss: graph has no edges");
    require(z.rows() == g.num_nodes(), "sampled_recon_loss: z rows must equal node count");
    const Index n = g.num_nodes();

    const auto is_positive = [&](Index i, Index j) { return i == j ? options.unit_diagonal : g.has_edge(i, j); };

    std::vector<EdgePair> pairs;
    for (Index i = 0; i < n; ++i) {
        for (Index j : g.neighbors(i)) {
            if (j != i) pairs.emplace_back(i, j);
        }
        if (options.unit_diagonal) pairs.emplace_back(i, i);
    }
    const Index positives = static_cast<Index>(pairs.size());
    const Index zero_entries = n * n - positives;
    if (zero_entries > 0) {
        const Index negatives = positives * options.neg_per_pos;
        pairs.reserve(static_cast<std::size_t>(positives + negatives));
        for (Index s = 0; s < negatives; ++s) {
            while (true) {
                const auto i = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
                const auto j = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
                if (!is_positive(i, j)) {
                    pairs.emplace_back(i, j);
                    break;
                }
            }
        }
    }

    if (terms) *terms = static_cast<Index>(pairs.size());
    Matrix target = Matrix::Zero(static_cast<Index>(pairs.size()), 1);
    target.topRows(positives).setOnes();
    const ad::Var p = ad::sigmoid(ad::pair_dot(z, pairs));
    return ad::binary_cross_entropy(target, p, options.pos_weight);
}

ad::Var kmeans_loss(ad::Var z, const Matrix& centroids) {
    require(centroids.rows() >= 1, "kmeans_loss: need at least one centroid");
    require(centroids.cols() == z.cols(), "kmeans_loss: centroid dimension differs from embedding dimension");
    ad::Tape& tape = *z.tape();
    const Matrix& zv = z.value();
    const Index n = zv.rows();
    require(n > 0, "kmeans_loss: empty embedding");

    std::vector<Index> nearest(static_cast<std::size_t>(n));
    std::vector<Real> dist(static_cast<std::size_t>(n));
    parallel_for(n, [&](Index begin, Index end) {
        for (Index i = begin; i < end; ++i) {
            Index best = 0;
            Real best_d = (zv.row(i) - centroids.row(0)).squaredNorm();
            for (Index c = 1; c < centroids.rows(); ++c) {
                const Real d = (zv.row(i) - centroids.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            nearest[static_cast<std::size_t>(i)] = best;
            dist[static_cast<std::size_t>(i)] = best_d;
        }
    }, 1024);
    Real total = 0;
    for (Real d : dist) total += d;
    Matrix y(1, 1);
    y(0, 0) = total / static_cast<Real>(n);

    // d/dz_i of |z_i - c|^2 / n
    Matrix local(n, zv.cols());
    for (Index i = 0; i < n; ++i) {
        local.row(i) = (2.0 / static_cast<Real>(n)) * (zv.row(i) - centroids.row(nearest[static_cast<std::size_t>(i)]));
    }
    const std::size_t zi = z.id();
    return tape.record(std::move(y), {zi},
                       [zi, local = std::move(local)](ad::Tape& t, std::size_t self) {
                           t.accumulate(zi, local * t.grad(self)(0, 0));
                       },
                       "kmeans_loss");
}

void to_json(nlohmann::json& j, const LossReport& r) {
    j = nlohmann::json{{"epoch", r.epoch},
                       {"l_total", r.l_total},
                       {"l_recon", r.l_recon},
                       {"l_clust", r.l_clust},
                       {"beta", r.beta}};
}

void from_json(const nlohmann::json& j, LossReport& r) {
    j.at("epoch").get_to(r.epoch);
    j.at("l_total").get_to(r.l_total);
    j.at("l_recon").get_to(r.l_recon);
    j.at("l_clust").get_to(r.l_clust);
    j.at("beta").get_to(r.beta);
}

ad::Var total_loss(ad::Var l_recon, ad::Var l_clust, Real beta, LossReport* report) {
    require(beta >= 0, "total_loss: beta must be >= 0");
    const ad::Var total = ad::add(l_recon, ad::scale(l_clust, beta));
    if (report != nullptr) {
        report->l_recon = l_recon.scalar();
        report->l_clust = l_clust.scalar();
        report->beta = beta;
        report->l_total = total.scalar();
    }
    return total;
}

LossReport total_loss(Real l_recon, Real l_clust, Real beta) {
    require(beta >= 0, "total_loss: beta must be >= 0");
    LossReport r;
    r.l_recon = l_recon;
    r.l_clust = l_clust;
    r.beta = beta;
    r.l_total = l_recon + beta * l_clust;
    return r;
}

} // namespace gaeco
