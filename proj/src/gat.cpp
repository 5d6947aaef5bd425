#include "gaeco/gat.hpp"

#include <cmath>

namespace gaeco {
namespace {

Matrix glorot_uniform(Index rows, Index cols, Index fan_in, Index fan_out, Rng& rng) {
    const Real limit = std::sqrt(6.0 / static_cast<Real>(fan_in + fan_out));
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = (2.0 * uniform01(rng) - 1.0) * limit;
    return m;
}

} // namespace

GatLayerParams GatLayerParams::glorot(Index in_dim, Index head_dim, Index heads, HeadCombine combine, Rng& rng) {
    require(in_dim > 0 && head_dim > 0 && heads > 0, "GatLayerParams: dimensions must be positive");
    GatLayerParams p;
    p.heads = heads;
    p.combine = combine;
    p.weight = glorot_uniform(in_dim, heads * head_dim, in_dim, heads * head_dim, rng);
    p.att_self = glorot_uniform(heads, head_dim, heads, head_dim, rng);
    p.att_neighbor = glorot_uniform(heads, head_dim, heads, head_dim, rng);
    return p;
}

void EncoderConfig::validate() const {
    require(in_dim > 0, "EncoderConfig: in_dim must be positive");
    require(heads >= 1, "EncoderConfig: need at least one head");
    require(hidden > 0 && hidden % heads == 0, "EncoderConfig: hidden width must be divisible by heads");
    require(embed > 0, "EncoderConfig: embed must be positive");
    require(input_dropout >= 0 && input_dropout <= 1, "EncoderConfig: input dropout outside [0, 1]");
    require(attention_dropout >= 0 && attention_dropout <= 1, "EncoderConfig: attention dropout outside [0, 1]");
}

EncoderParams EncoderParams::init(const EncoderConfig& config, Rng& rng) {
    config.validate();
    EncoderParams p;
    p.hidden = GatLayerParams::glorot(config.in_dim, config.hidden / config.heads, config.heads, HeadCombine::kConcat, rng);
    p.output = GatLayerParams::glorot(config.hidden, config.embed, config.heads, HeadCombine::kMean, rng);
    return p;
}

std::vector<Matrix*> EncoderParams::tensors() {
    return {&hidden.weight, &hidden.att_self, &hidden.att_neighbor,
            &output.weight, &output.att_self, &output.att_neighbor};
}

std::vector<const Matrix*> EncoderParams::tensors() const {
    return {&hidden.weight, &hidden.att_self, &hidden.att_neighbor,
            &output.weight, &output.att_self, &output.att_neighbor};
}

std::vector<std::string> EncoderParams::tensor_names() {
    return {"hidden.weight", "hidden.att_self", "hidden.att_neighbor",
            "output.weight", "output.att_self", "output.att_neighbor"};
}

GatLayerVars GatLayerVars::bind(ad::Tape& tape, const GatLayerParams& params, const std::string& prefix) {
    require(params.att_self.rows() == params.heads && params.att_neighbor.rows() == params.heads,
            "GatLayerParams: attention vectors need one row per head");
    require(params.att_self.cols() == params.att_neighbor.cols(), "GatLayerParams: attention widths differ");
    require(params.weight.cols() == params.heads * params.head_dim(), "GatLayerParams: weight width != heads * head_dim");
    GatLayerVars v;
    v.weight = tape.parameter(params.weight, prefix + "weight");
    v.att_self = tape.parameter(params.att_self, prefix + "att_self");
    v.att_neighbor = tape.parameter(params.att_neighbor, prefix + "att_neighbor");
    v.heads = params.heads;
    v.combine = params.combine;
    return v;
}

ad::Var attention_logits_projected(const GatLayerVars& layer, ad::Var wh, const ad::EdgeIndex& edges) {
    const ad::Var self_scores = ad::head_scores(wh, layer.att_self);
    const ad::Var neighbor_scores = ad::head_scores(wh, layer.att_neighbor);
    const ad::Var e = ad::add(ad::gather_rows(self_scores, edges.dst), ad::gather_rows(neighbor_scores, edges.src));
    return ad::leaky_relu(e, ad::kLeakySlope);
}

ad::Var attention_logits(const GatLayerVars& layer, ad::Var h, const ad::EdgeIndex& edges) {
    return attention_logits_projected(layer, ad::matmul(h, layer.weight), edges);
}

ad::Var gat_layer_forward(const GatLayerVars& layer, ad::Var h, const ad::EdgeIndex& edges, Activation activation,
                          const DropoutSpec& dropout) {
    require(h.rows() == edges.num_nodes(), "gat_layer_forward: h rows must equal node count");
    if (dropout.rng != nullptr) h = ad::dropout(h, dropout.input, *dropout.rng);
    return gat_layer_aggregate(layer, ad::matmul(h, layer.weight), edges, activation, dropout);
}

ad::Var gat_layer_aggregate(const GatLayerVars& layer, ad::Var wh, const ad::EdgeIndex& edges, Activation activation,
                            const DropoutSpec& dropout) {
    require(wh.rows() == edges.num_nodes(), "gat_layer_aggregate: wh rows must equal node count");
    ad::Var alpha = ad::segment_softmax(attention_logits_projected(layer, wh, edges), edges);
    if (dropout.rng != nullptr) alpha = ad::dropout(alpha, dropout.attention, *dropout.rng);
    ad::Var out = ad::edge_aggregate(alpha, wh, edges);
    if (layer.combine == HeadCombine::kMean) out = ad::head_mean(out, layer.heads);
    return activation == Activation::kElu ? ad::elu(out) : out;
}

EncoderVars EncoderVars::bind(ad::Tape& tape, const EncoderParams& params) {
    return {GatLayerVars::bind(tape, params.hidden, "hidden."), GatLayerVars::bind(tape, params.output, "output.")};
}

ad::Var encode(const EncoderConfig& config, const EncoderVars& vars, const ad::EdgeIndex& edges, ad::Var x, Rng* rng,
               bool train_mode) {
    require(x.rows() == edges.num_nodes(), "encode: feature rows must equal node count");
    DropoutSpec dropout;
    if (train_mode && rng != nullptr) dropout = {config.input_dropout, config.attention_dropout, rng};
    const ad::Var h = gat_layer_forward(vars.hidden, x, edges, Activation::kElu, dropout);
    return gat_layer_forward(vars.output, h, edges, Activation::kIdentity, dropout);
}

ad::Var encode(const EncoderConfig& config, const EncoderVars& vars, const ad::EdgeIndex& edges,
               const std::shared_ptr<const SparseMatrix>& x, Rng* rng, bool train_mode) {
    require(x != nullptr && x->rows() == edges.num_nodes(), "encode: feature rows must equal node count");
    DropoutSpec dropout;
    if (train_mode && rng != nullptr) dropout = {config.input_dropout, config.attention_dropout, rng};
    auto input = dropout.rng != nullptr && dropout.input > 0
                     ? std::make_shared<const SparseMatrix>(ad::sparse_dropout(*x, dropout.input, *dropout.rng))
                     : x;
    const ad::Var h =
        gat_layer_aggregate(vars.hidden, ad::sparse_matmul(std::move(input), vars.hidden.weight), edges,
                            Activation::kElu, dropout);
    return gat_layer_forward(vars.output, h, edges, Activation::kIdentity, dropout);
}

Matrix encode_eval(const EncoderConfig& config, const EncoderParams& params, const Graph& graph,
                   const std::shared_ptr<const SparseMatrix>& x) {
    ad::Tape tape;
    const auto edges = ad::EdgeIndex::from_graph(graph);
    const auto vars = EncoderVars::bind(tape, params);
    return encode(config, vars, edges, x, nullptr, false).value();
}

Matrix encode_eval(const EncoderConfig& config, const EncoderParams& params, const Graph& graph, const Matrix& x) {
    ad::Tape tape;
    const auto edges = ad::EdgeIndex::from_graph(graph);
    const auto vars = EncoderVars::bind(tape, params);
    return encode(config, vars, edges, tape.constant(x), nullptr, false).value();
}

} // namespace gaeco
