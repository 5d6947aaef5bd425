#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gaeco/graph.hpp"
#include "gaeco/rng.hpp"
#include "gaeco/types.hpp"

namespace gaeco::ad {

class Tape;

/// Handle to a tensor recorded on a Tape. Cheap to copy; valid while the
/// tape lives.
class Var {
public:
    Var() = default;

    const Matrix& value() const;
    const Matrix& grad() const;
    Index rows() const { return value().rows(); }
    Index cols() const { return value().cols(); }
    Real scalar() const;

    Tape* tape() const { return tape_; }
    std::size_t id() const { return id_; }
    bool valid() const { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Ordered record of operations for reverse-mode differentiation.
///
/// Ops are appended as they execute, so inputs always precede their
/// consumers; backward() walks the record in exact reverse order. Every
/// recorded value is checked for NaN/Inf and the op name is reported on
/// failure.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Differentiable leaf (a parameter).
    Var parameter(Matrix value, std::string name = {});
    /// Non-differentiable leaf.
    Var constant(Matrix value);

    Var record(Matrix value, std::vector<std::size_t> inputs, BackwardFn backward, const char* op);

    /// Accumulates d(loss)/d(node) for every node that needs a gradient.
    void backward(Var loss);

    const Matrix& value(std::size_t id) const { return nodes_[id].value; }
    const Matrix& grad(std::size_t id) const;
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    /// Adds g into the gradient of `id` when it requires one.
    void accumulate(std::size_t id, const Eigen::Ref<const Matrix>& g);

    std::size_t size() const { return nodes_.size(); }
    bool consumed() const { return consumed_; }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        std::vector<std::size_t> inputs;
        BackwardFn backward;
        const char* op = "";
        std::string name;
    };

    std::vector<Node> nodes_;
    bool consumed_ = false;
};

/// Directed edge instances grouped by destination: for node i, entries
/// offsets[i]..offsets[i+1] hold the edges (src=j, dst=i) for j in N(i).
struct EdgeIndex {
    std::vector<Index> src;
    std::vector<Index> dst;
    std::vector<Index> offsets;

    static EdgeIndex from_graph(const Graph& g);
    Index num_edges() const { return static_cast<Index>(src.size()); }
    Index num_nodes() const { return static_cast<Index>(offsets.size()) - 1; }
};

inline constexpr Real kLogEpsilon = 1e-12;
inline constexpr Real kLeakySlope = 0.2;

// Dense algebra
Var matmul(Var a, Var b);
/// a * b^T
Var matmul_nt(Var a, Var b);
/// Constant sparse x times parameter w; the gradient reaches w only.
Var sparse_matmul(std::shared_ptr<const SparseMatrix> x, Var w);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// x + broadcast of the 1 x cols row vector r.
Var add_row(Var x, Var r);
Var mul(Var a, Var b);
Var scale(Var x, Real s);
Var sum(Var x);
Var mean(Var x);

// Elementwise
Var sigmoid(Var x);
Var elu(Var x, Real alpha = 1.0);
Var exp(Var x);
/// log(clamp(x, eps, 1 - eps)); the gradient is zero where the clamp is active.
Var log(Var x, Real eps = kLogEpsilon);
Var square(Var x);
Var leaky_relu(Var x, Real slope = kLeakySlope);
/// Inverted dropout with a fresh Bernoulli(1 - p) mask; p = 1 yields zeros.
Var dropout(Var x, Real p, Rng& rng);

/// Inverted dropout on the stored entries of a constant sparse matrix.
SparseMatrix sparse_dropout(const SparseMatrix& x, Real p, Rng& rng);

// Graph ops
Var gather_rows(Var x, std::span<const Index> rows);
/// Column-wise softmax within each destination group of `edges`.
Var segment_softmax(Var scores, const EdgeIndex& edges);
/// For per-head row blocks of width D = h.cols / heads:
/// out[i, block k] = sum_{e in group(i)} alpha[e, k] * h[src_e, block k].
Var edge_aggregate(Var alpha, Var h, const EdgeIndex& edges);
/// out[i, k] = <h[i, block k], att[k, :]> for att of shape heads x D.
Var head_scores(Var h, Var att);
/// Mean over the `heads` column blocks: n x (heads*D) -> n x D.
Var head_mean(Var x, Index heads);
/// out[p] = <z[i_p], z[j_p]> for each pair, as an m x 1 column.
Var pair_dot(Var z, std::span<const EdgePair> pairs);

// Losses
/// Mean binary cross-entropy of predictions p against a 0/1 target with
/// log clamped to [eps, 1 - eps]; positives weighted by pos_weight.
Var binary_cross_entropy(const Matrix& target, Var p, Real pos_weight = 1.0, Real eps = kLogEpsilon);
// Shares the target with the tape instead of copying it; for large dense targets.
Var binary_cross_entropy(std::shared_ptr<const Matrix> target, Var p, Real pos_weight = 1.0,
                         Real eps = kLogEpsilon);

} // namespace gaeco::ad
