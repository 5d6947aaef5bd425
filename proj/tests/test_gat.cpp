#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "gaeco/gat.hpp"
#include "gaeco/losses.hpp"
#include "oracles.hpp"

using namespace gaeco;
using ad::Tape;
using ad::Var;

namespace {

GatLayerParams identity_layer(Index dim) {
    GatLayerParams p;
    p.heads = 1;
    p.combine = HeadCombine::kConcat;
    p.weight = Matrix::Identity(dim, dim);
    p.att_self = Matrix::Zero(1, dim);
    p.att_neighbor = Matrix::Zero(1, dim);
    return p;
}

Matrix layer_output(const GatLayerParams& p, const Matrix& h, const Graph& g, Activation act) {
    Tape t;
    const auto layer = GatLayerVars::bind(t, p);
    return gat_layer_forward(layer, t.constant(h), ad::EdgeIndex::from_graph(g), act).value();
}

EncoderConfig small_config(Index in_dim) {
    EncoderConfig c;
    c.in_dim = in_dim;
    c.hidden = 12;
    c.embed = 5;
    c.heads = 3;
    return c;
}

} // namespace

TEST_CASE("zero attention vectors give zero logits") {
    Rng rng(1);
    const Graph g = oracle::random_graph(rng, 6, 0.5);
    auto p = GatLayerParams::glorot(4, 3, 2, HeadCombine::kConcat, rng);
    p.att_self.setZero();
    p.att_neighbor.setZero();
    Tape t;
    const auto layer = GatLayerVars::bind(t, p);
    const Matrix e =
        attention_logits(layer, t.constant(oracle::random_matrix(rng, 6, 4)), ad::EdgeIndex::from_graph(g)).value();
    CHECK(e.isZero(0));
}

TEST_CASE("single node hand evaluation") {
    GatLayerParams p = identity_layer(2);
    p.att_self << 1, 0;
    p.att_neighbor << 1, 0;
    Matrix h(1, 2);
    h << 3, 5;
    const Graph g = Graph::build(1, {});
    Tape t;
    const auto layer = GatLayerVars::bind(t, p);
    const Matrix e = attention_logits(layer, t.constant(h), ad::EdgeIndex::from_graph(g)).value();
    CHECK(e.rows() == 1);
    CHECK(e(0, 0) == 6.0);
}

TEST_CASE("negated attention vectors flip and scale the logits") {
    Rng rng(2);
    const Graph g = oracle::random_graph(rng, 5, 0.6);
    const auto edges = ad::EdgeIndex::from_graph(g);
    auto p = GatLayerParams::glorot(3, 4, 2, HeadCombine::kConcat, rng);
    p.weight = p.weight.cwiseAbs();
    p.att_self = p.att_self.cwiseAbs();
    p.att_neighbor = p.att_neighbor.cwiseAbs();
    const Matrix h = oracle::random_matrix(rng, 5, 3, 0.1, 1.0);
    Tape t;
    const Matrix e = attention_logits(GatLayerVars::bind(t, p), t.constant(h), edges).value();
    auto q = p;
    q.att_self = -p.att_self;
    q.att_neighbor = -p.att_neighbor;
    const Matrix f = attention_logits(GatLayerVars::bind(t, q), t.constant(h), edges).value();
    CHECK((e.array() > 0).all());
    CHECK((f - (-0.2 * e)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("single node with only a self-loop returns its input") {
    Matrix h(1, 3);
    h << 0.5, -2, 7;
    const Graph g = Graph::build(1, {});
    CHECK(layer_output(identity_layer(3), h, g, Activation::kIdentity) == h);
}

TEST_CASE("disconnected nodes are independent") {
    Rng rng(3);
    auto p = GatLayerParams::glorot(3, 2, 2, HeadCombine::kConcat, rng);
    const Matrix h = oracle::random_matrix(rng, 2, 3);
    const Matrix both = layer_output(p, h, Graph::build(2, {}), Activation::kElu);
    const Matrix first = layer_output(p, h.topRows(1), Graph::build(1, {}), Activation::kElu);
    const Matrix second = layer_output(p, h.bottomRows(1), Graph::build(1, {}), Activation::kElu);
    CHECK(both.row(0) == first.row(0));
    CHECK(both.row(1) == second.row(0));
}

TEST_CASE("layer matches the node-by-node oracle") {
    Rng rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const Index n = 2 + static_cast<Index>(uniform_index(rng, 9));
        const Index f = 1 + static_cast<Index>(uniform_index(rng, 6));
        const Index heads = 1 + static_cast<Index>(uniform_index(rng, 4));
        const Index d = 1 + static_cast<Index>(uniform_index(rng, 4));
        const auto combine = trial % 2 ? HeadCombine::kMean : HeadCombine::kConcat;
        const auto act = trial % 3 ? Activation::kElu : Activation::kIdentity;
        const Graph g = oracle::random_graph(rng, n, uniform01(rng));
        auto p = GatLayerParams::glorot(f, d, heads, combine, rng);
        p.att_self *= 3;
        p.att_neighbor *= 3;
        const Matrix h = oracle::random_matrix(rng, n, f, -2, 2);
        const Matrix fast = layer_output(p, h, g, act);
        const Matrix slow = oracle::naive_gat_layer(p, h, g, act);
        CHECK(fast.rows() == slow.rows());
        CHECK(fast.cols() == slow.cols());
        CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("encoder shape and eval determinism") {
    Rng rng(5);
    const Graph g = oracle::random_graph(rng, 20, 0.2);
    const Matrix x = oracle::random_matrix(rng, 20, 7, 0, 1);
    EncoderConfig config;
    config.in_dim = 7;
    const auto params = EncoderParams::init(config, rng);
    CHECK(params.hidden.out_dim() == 256);
    CHECK(params.hidden.head_dim() == 32);
    CHECK(params.output.out_dim() == 64);
    const Matrix z1 = encode_eval(config, params, g, x);
    const Matrix z2 = encode_eval(config, params, g, x);
    CHECK(z1.rows() == 20);
    CHECK(z1.cols() == 64);
    CHECK(z1 == z2);
}

TEST_CASE("sparse and dense inputs give the same embeddings") {
    Rng rng(6);
    const Graph g = oracle::random_graph(rng, 15, 0.3);
    Matrix x = oracle::random_matrix(rng, 15, 9, 0, 1);
    for (Index i = 0; i < x.size(); ++i) {
        if (uniform01(rng) < 0.7) x.data()[i] = 0;
    }
    const auto config = small_config(9);
    const auto params = EncoderParams::init(config, rng);
    const Matrix dense = encode_eval(config, params, g, x);
    const Matrix sparse = encode_eval(config, params, g, std::make_shared<const SparseMatrix>(x.sparseView()));
    CHECK((dense - sparse).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("train mode applies dropout, eval mode does not") {
    Rng rng(7);
    const Graph g = oracle::random_graph(rng, 10, 0.4);
    const Matrix x = oracle::random_matrix(rng, 10, 4, 0, 1);
    const auto config = small_config(4);
    const auto params = EncoderParams::init(config, rng);
    const auto edges = ad::EdgeIndex::from_graph(g);
    const Matrix eval = encode_eval(config, params, g, x);

    Tape t;
    Rng drop(1);
    const Matrix train = encode(config, EncoderVars::bind(t, params), edges, t.constant(x), &drop, true).value();
    CHECK_FALSE(train.isApprox(eval));

    Tape t2;
    const Matrix no_rng = encode(config, EncoderVars::bind(t2, params), edges, t2.constant(x), nullptr, true).value();
    CHECK(no_rng == eval);
}

TEST_CASE("input dropout of 1 removes all feature information") {
    Rng rng(8);
    const Graph g = oracle::random_graph(rng, 8, 0.4);
    const Matrix x = oracle::random_matrix(rng, 8, 3, 0, 1);
    auto config = small_config(3);
    config.input_dropout = 1.0;
    config.attention_dropout = 0.0;
    const auto params = EncoderParams::init(config, rng);
    const auto edges = ad::EdgeIndex::from_graph(g);

    // With zero inputs the projections vanish, so every logit is 0 and attention is uniform.
    Tape t;
    const auto vars = EncoderVars::bind(t, params);
    const Matrix logits = attention_logits(vars.hidden, t.constant(Matrix::Zero(8, 3)), edges).value();
    CHECK(logits.isZero(0));
    const Matrix alpha = ad::segment_softmax(t.constant(logits), edges).value();
    for (Index i = 0; i < 8; ++i) {
        for (Index q = edges.offsets[i]; q < edges.offsets[i + 1]; ++q) {
            CHECK(alpha(q, 0) == doctest::Approx(1.0 / static_cast<Real>(g.degree(i))));
        }
    }
    Rng drop(3);
    const Matrix z = encode(config, vars, edges, t.constant(x), &drop, true).value();
    CHECK(z.isZero(0));
    Rng drop2(3);
    Tape t2;
    const Matrix zs = encode(config, EncoderVars::bind(t2, params), edges,
                             std::make_shared<const SparseMatrix>(x.sparseView()), &drop2, true)
                          .value();
    CHECK(zs.isZero(0));
}

TEST_CASE("permutation equivariance") {
    Rng rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        const Index n = 12;
        const Graph g = oracle::random_graph(rng, n, 0.3);
        const Matrix x = oracle::random_matrix(rng, n, 5, 0, 1);
        const auto config = small_config(5);
        const auto params = EncoderParams::init(config, rng);
        std::vector<Index> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Matrix px(n, 5);
        for (Index i = 0; i < n; ++i) px.row(perm[i]) = x.row(i);
        const Matrix z = encode_eval(config, params, g, x);
        const Matrix pz = encode_eval(config, params, permute(g, perm), px);
        for (Index i = 0; i < n; ++i) CHECK((pz.row(perm[i]) - z.row(i)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("embeddings depend on the two-hop neighborhood only") {
    // Path 0-1-2-3-4-5: node 0 sees features of 0, 1, 2 only.
    std::vector<EdgePair> path;
    for (Index i = 0; i + 1 < 6; ++i) path.emplace_back(i, i + 1);
    const Graph g = Graph::build(6, path);
    Rng rng(10);
    const Matrix x = oracle::random_matrix(rng, 6, 4, 0, 1);
    const auto config = small_config(4);
    const auto params = EncoderParams::init(config, rng);
    const Matrix z = encode_eval(config, params, g, x);
    for (Index far = 3; far < 6; ++far) {
        Matrix changed = x;
        changed.row(far) = oracle::random_matrix(rng, 1, 4, 0, 5);
        const Matrix zc = encode_eval(config, params, g, changed);
        CHECK(zc.row(0) == z.row(0));
    }
    Matrix near = x;
    near.row(2).array() += 1.0;
    CHECK(encode_eval(config, params, g, near).row(0) != z.row(0));
}

TEST_CASE("encoder gradients match finite differences") {
    Rng rng(11);
    for (int trial = 0; trial < 3; ++trial) {
        const Index n = 4 + static_cast<Index>(uniform_index(rng, 5));
        const Graph g = oracle::random_graph(rng, n, 0.4);
        const auto edges = ad::EdgeIndex::from_graph(g);
        const Matrix x = oracle::random_matrix(rng, n, 3, 0, 1);
        const Matrix adjacency = dense_adjacency(g);
        EncoderConfig config;
        config.in_dim = 3;
        config.hidden = 6;
        config.embed = 3;
        config.heads = 2;
        auto params = EncoderParams::init(config, rng);
        const Matrix centroids = oracle::random_matrix(rng, 2, 3);
        const auto loss_of = [&](std::vector<Matrix>* grads) {
            Tape t;
            const auto vars = EncoderVars::bind(t, params);
            const Var z = encode(config, vars, edges, t.constant(x), nullptr, false);
            const Var loss = total_loss(recon_loss(adjacency, decode(z)), kmeans_loss(z, centroids), 0.5);
            if (grads) {
                t.backward(loss);
                for (const Var& v : {vars.hidden.weight, vars.hidden.att_self, vars.hidden.att_neighbor,
                                     vars.output.weight, vars.output.att_self, vars.output.att_neighbor}) {
                    grads->push_back(v.grad());
                }
            }
            return loss.scalar();
        };
        std::vector<Matrix> analytic;
        loss_of(&analytic);
        const auto tensors = params.tensors();
        for (std::size_t k = 0; k < tensors.size(); ++k) {
            const Matrix numeric = oracle::central_difference([&] { return loss_of(nullptr); }, *tensors[k]);
            Real worst = 0;
            INFO("tensor " << EncoderParams::tensor_names()[k]);
            CHECK(oracle::gradients_match(analytic[k], numeric, 1e-4, 1e-7, &worst));
        }
    }
}

TEST_CASE("configuration and shape validation") {
    EncoderConfig c;
    c.in_dim = 4;
    c.hidden = 10;
    c.heads = 3;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c.hidden = 12;
    CHECK_NOTHROW(c.validate());
    c.input_dropout = 1.5;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c.input_dropout = 0.4;
    c.in_dim = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);

    Rng rng(12);
    auto p = GatLayerParams::glorot(4, 3, 2, HeadCombine::kConcat, rng);
    const Real limit = std::sqrt(6.0 / (4 + 6));
    CHECK(p.weight.cwiseAbs().maxCoeff() <= limit);
    p.att_self = Matrix::Zero(3, 3);
    Tape t;
    CHECK_THROWS_AS(GatLayerVars::bind(t, p), InvalidArgument);

    const auto good = GatLayerParams::glorot(4, 3, 2, HeadCombine::kConcat, rng);
    const Graph g = Graph::build(3, {});
    const auto vars = GatLayerVars::bind(t, good);
    CHECK_THROWS_AS(gat_layer_forward(vars, t.constant(Matrix::Zero(3, 5)), ad::EdgeIndex::from_graph(g),
                                      Activation::kElu),
                    InvalidArgument);
    CHECK_THROWS_AS(gat_layer_forward(vars, t.constant(Matrix::Zero(4, 4)), ad::EdgeIndex::from_graph(g),
                                      Activation::kElu),
                    InvalidArgument);
}
