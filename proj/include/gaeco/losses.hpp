#pragma once

#include <memory>

#include <nlohmann/json.hpp>

#include "gaeco/autodiff.hpp"
#include "gaeco/graph.hpp"
#include "gaeco/rng.hpp"

namespace gaeco {

/// Inner-product decoder: sigmoid(Z Z^T).
ad::Var decode(ad::Var z, Index cap = kDefaultDenseCap);

/// Mean binary cross-entropy over all n^2 entries of the adjacency target.
ad::Var recon_loss(const Matrix& adjacency, ad::Var a_hat, Real pos_weight = 1.0);
ad::Var recon_loss(std::shared_ptr<const Matrix> adjacency, ad::Var a_hat, Real pos_weight = 1.0);

struct SampledReconOptions {
    Index neg_per_pos = 5;
    bool unit_diagonal = true;
    Real pos_weight = 1.0;
};

/// BCE over every positive target entry plus `neg_per_pos` uniformly drawn
/// zero entries per positive, mean-reduced. Positives are the stored
/// adjacency entries off the diagonal (both orientations) plus the diagonal
/// when `unit_diagonal`. Falls back to positives only when the target has
/// no zero entries. `terms` receives the number of averaged entries.
ad::Var sampled_recon_loss(const Graph& g, ad::Var z, const SampledReconOptions& options, Rng& rng,
                           Index* terms = nullptr);

/// Mean squared distance from each row of z to its nearest centroid (ties to
/// the lowest index). Centroids are constants: gradient reaches z only.
ad::Var kmeans_loss(ad::Var z, const Matrix& centroids);

struct LossReport {
    Real l_total = 0;
    Real l_recon = 0;
    Real l_clust = 0;
    Real beta = 0;
    Index epoch = 0;
};

void to_json(nlohmann::json& j, const LossReport& r);
void from_json(const nlohmann::json& j, LossReport& r);

/// l_recon + beta * l_clust, with its report. beta = 0 is the reconstruction-only ablation.
ad::Var total_loss(ad::Var l_recon, ad::Var l_clust, Real beta, LossReport* report = nullptr);
LossReport total_loss(Real l_recon, Real l_clust, Real beta);

} // namespace gaeco
