#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gaeco/autodiff.hpp"
#include "gaeco/graph.hpp"
#include "gaeco/rng.hpp"

namespace gaeco {

enum class HeadCombine { kConcat, kMean };
enum class Activation { kIdentity, kElu };

/// One multi-head attention layer. Head k owns the column block
/// [k*D, (k+1)*D) of `weight`, and rows k of the two attention vectors.
/// `att_self` scores the aggregating node, `att_neighbor` the neighbor, so
/// e_ij = LeakyReLU(<att_self_k, W_k h_i> + <att_neighbor_k, W_k h_j>).
struct GatLayerParams {
    Matrix weight;        // in_dim x (heads * head_dim)
    Matrix att_self;      // heads x head_dim
    Matrix att_neighbor;  // heads x head_dim
    Index heads = 1;
    HeadCombine combine = HeadCombine::kConcat;

    Index in_dim() const { return weight.rows(); }
    Index head_dim() const { return att_self.cols(); }
    Index out_dim() const { return combine == HeadCombine::kConcat ? heads * head_dim() : head_dim(); }

    /// Glorot-uniform initialization.
    static GatLayerParams glorot(Index in_dim, Index head_dim, Index heads, HeadCombine combine, Rng& rng);
};

struct EncoderConfig {
    Index in_dim = 0;
    Index hidden = 256;  // total width of the concatenated hidden layer
    Index embed = 64;
    Index heads = 8;
    Real input_dropout = 0.4;
    Real attention_dropout = 0.2;

    void validate() const;
};

struct EncoderParams {
    GatLayerParams hidden;
    GatLayerParams output;

    static EncoderParams init(const EncoderConfig& config, Rng& rng);

    /// Tensors in a fixed order, with stable names for checkpoints and
    /// optimizer state.
    std::vector<Matrix*> tensors();
    std::vector<const Matrix*> tensors() const;
    static std::vector<std::string> tensor_names();
};

/// A layer's parameters registered on a tape.
struct GatLayerVars {
    ad::Var weight;
    ad::Var att_self;
    ad::Var att_neighbor;
    Index heads = 1;
    HeadCombine combine = HeadCombine::kConcat;

    static GatLayerVars bind(ad::Tape& tape, const GatLayerParams& params, const std::string& prefix = {});
};

/// Stochastic regularization for one forward pass; rng == nullptr disables it.
struct DropoutSpec {
    Real input = 0.0;
    Real attention = 0.0;
    Rng* rng = nullptr;
};

/// Per-edge, per-head scores (edges x heads) for the projected features wh = h W.
ad::Var attention_logits_projected(const GatLayerVars& layer, ad::Var wh, const ad::EdgeIndex& edges);
ad::Var attention_logits(const GatLayerVars& layer, ad::Var h, const ad::EdgeIndex& edges);

ad::Var gat_layer_forward(const GatLayerVars& layer, ad::Var h, const ad::EdgeIndex& edges, Activation activation,
                          const DropoutSpec& dropout = {});

/// Attention, aggregation and activation for already projected features
/// wh = h W (input dropout, if any, has been applied to h).
ad::Var gat_layer_aggregate(const GatLayerVars& layer, ad::Var wh, const ad::EdgeIndex& edges, Activation activation,
                            const DropoutSpec& dropout = {});

struct EncoderVars {
    GatLayerVars hidden;
    GatLayerVars output;

    static EncoderVars bind(ad::Tape& tape, const EncoderParams& params);
};

/// Two-layer encoder: concat heads + ELU, then averaged heads with identity
/// output. Dropout is applied to both layer inputs and to the attention
/// coefficients only when `train_mode` is set.
ad::Var encode(const EncoderConfig& config, const EncoderVars& vars, const ad::EdgeIndex& edges, ad::Var x,
               Rng* rng, bool train_mode);

/// Same encoder with a constant sparse feature matrix as the first-layer input.
ad::Var encode(const EncoderConfig& config, const EncoderVars& vars, const ad::EdgeIndex& edges,
               const std::shared_ptr<const SparseMatrix>& x, Rng* rng, bool train_mode);

/// Eval-mode embeddings on a scratch tape.
Matrix encode_eval(const EncoderConfig& config, const EncoderParams& params, const Graph& graph, const Matrix& x);
Matrix encode_eval(const EncoderConfig& config, const EncoderParams& params, const Graph& graph,
                   const std::shared_ptr<const SparseMatrix>& x);

} // namespace gaeco
