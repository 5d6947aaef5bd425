#include "gaeco/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "gaeco/parallel.hpp"

namespace gaeco::ad {
namespace {

Tape& tape_of(Var a) {
    require(a.valid(), "autodiff: invalid Var");
    return *a.tape();
}

Tape& same_tape(Var a, Var b) {
    Tape& t = tape_of(a);
    require(b.tape() == &t, "autodiff: operands live on different tapes");
    return t;
}

void require_same_shape(Var a, Var b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw InvalidArgument(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                              std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                              std::to_string(b.cols()));
    }
}

// x * 0 is NaN exactly when x is inf or NaN; the sum vectorizes where allFinite() does not.
bool all_finite(const Matrix& m) { return (m.array() * 0.0).sum() == 0.0; }

} // namespace

const Matrix& Var::value() const {
    require(valid(), "autodiff: invalid Var");
    return tape_->value(id_);
}

const Matrix& Var::grad() const {
    require(valid(), "autodiff: invalid Var");
    return tape_->grad(id_);
}

Real Var::scalar() const {
    const Matrix& v = value();
    require(v.rows() == 1 && v.cols() == 1, "autodiff: Var is not a scalar");
    return v(0, 0);
}

Var Tape::parameter(Matrix value, std::string name) {
    if (!value.allFinite()) throw NumericError("parameter '" + name + "' has non-finite entries");
    Node node;
    node.value = std::move(value);
    node.requires_grad = true;
    node.op = "parameter";
    node.name = std::move(name);
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Matrix value) {
    Node node;
    node.value = std::move(value);
    node.op = "constant";
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::vector<std::size_t> inputs, BackwardFn backward, const char* op) {
    require(!consumed_, std::string(op) + ": tape already consumed by backward()");
    if (!all_finite(value)) throw NumericError(std::string("non-finite value produced by ") + op);
    Node node;
    node.value = std::move(value);
    node.inputs = std::move(inputs);
    for (std::size_t in : node.inputs) node.requires_grad = node.requires_grad || nodes_[in].requires_grad;
    if (node.requires_grad) node.backward = std::move(backward);
    node.op = op;
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

const Matrix& Tape::grad(std::size_t id) const { return nodes_[id].grad; }

void Tape::accumulate(std::size_t id, const Eigen::Ref<const Matrix>& g) {
    Node& node = nodes_[id];
    if (!node.requires_grad) return;
    if (node.grad.size() == 0) {
        node.grad = g;
    } else {
        node.grad += g;
    }
}

void Tape::backward(Var loss) {
    require(loss.tape() == this, "backward: loss is not on this tape");
    require(!consumed_, "backward: tape already consumed");
    const Matrix& lv = nodes_[loss.id()].value;
    require(lv.rows() == 1 && lv.cols() == 1, "backward: loss must be 1x1");
    consumed_ = true;
    for (auto& node : nodes_) node.grad.resize(0, 0);
    nodes_[loss.id()].grad = Matrix::Ones(1, 1);
    for (std::size_t id = loss.id() + 1; id-- > 0;) {
        Node& node = nodes_[id];
        if (!node.requires_grad || node.grad.size() == 0) continue;
        // Every gradient is complete once its consumer list is exhausted, so each is checked once here.
        if (!all_finite(node.grad)) {
            throw NumericError(std::string("non-finite gradient flowing into ") + node.op);
        }
        if (node.backward) node.backward(*this, id);
    }
    // Leaves the backward pass never reached get explicit zeros.
    for (auto& node : nodes_) {
        if (node.requires_grad && node.grad.size() == 0) node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
    }
}

EdgeIndex EdgeIndex::from_graph(const Graph& g) {
    EdgeIndex e;
    const Index n = g.num_nodes();
    e.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
    e.src.reserve(static_cast<std::size_t>(g.num_entries()));
    e.dst.reserve(static_cast<std::size_t>(g.num_entries()));
    for (Index i = 0; i < n; ++i) {
        for (Index j : g.neighbors(i)) {
            e.src.push_back(j);
            e.dst.push_back(i);
        }
        e.offsets[static_cast<std::size_t>(i) + 1] = static_cast<Index>(e.src.size());
    }
    return e;
}

Var matmul(Var a, Var b) {
    Tape& t = same_tape(a, b);
    if (a.cols() != b.rows()) {
        throw InvalidArgument("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                              std::to_string(b.rows()) + ")");
    }
    Matrix y(a.rows(), b.cols());
    y.noalias() = a.value() * b.value();
    const std::size_t ai = a.id(), bi = b.id();
    return t.record(std::move(y), {ai, bi},
                    [ai, bi](Tape& tape, std::size_t self) {
                        const Matrix& g = tape.grad(self);
                        if (tape.requires_grad(ai)) {
                            Matrix ga(g.rows(), tape.value(bi).rows());
                            ga.noalias() = g * tape.value(bi).transpose();
                            tape.accumulate(ai, ga);
                        }
                        if (tape.requires_grad(bi)) {
                            Matrix gb(tape.value(ai).cols(), g.cols());
                            gb.noalias() = tape.value(ai).transpose() * g;
                            tape.accumulate(bi, gb);
                        }
                    },
                    "matmul");
}

Var matmul_nt(Var a, Var b) {
    Tape& t = same_tape(a, b);
    if (a.cols() != b.cols()) throw InvalidArgument("matmul_nt: column counts differ");
    Matrix y(a.rows(), b.rows());
    y.noalias() = a.value() * b.value().transpose();
    const std::size_t ai = a.id(), bi = b.id();
    return t.record(std::move(y), {ai, bi},
                    [ai, bi](Tape& tape, std::size_t self) {
                        const Matrix& g = tape.grad(self);
                        if (ai == bi) {
                            // d(a a^T): (G + G^T) a in one product
                            if (!tape.requires_grad(ai)) return;
                            const Matrix sym = g + g.transpose();
                            Matrix ga(g.rows(), tape.value(ai).cols());
                            ga.noalias() = sym * tape.value(ai);
                            tape.accumulate(ai, ga);
                            return;
                        }
                        if (tape.requires_grad(ai)) {
                            Matrix ga(g.rows(), tape.value(bi).cols());
                            ga.noalias() = g * tape.value(bi);
                            tape.accumulate(ai, ga);
                        }
                        if (tape.requires_grad(bi)) {
                            Matrix gb(g.cols(), tape.value(ai).cols());
                            gb.noalias() = g.transpose() * tape.value(ai);
                            tape.accumulate(bi, gb);
                        }
                    },
                    "matmul_nt");
}

Var sparse_matmul(std::shared_ptr<const SparseMatrix> x, Var w) {
    Tape& t = tape_of(w);
    require(x != nullptr, "sparse_matmul: null input");
    if (x->cols() != w.rows()) {
        throw InvalidArgument("sparse_matmul: inner dimensions differ (" + std::to_string(x->cols()) + " vs " +
                              std::to_string(w.rows()) + ")");
    }
    Matrix y(x->rows(), w.cols());
    y.noalias() = *x * w.value();
    const std::size_t wi = w.id();
    return t.record(std::move(y), {wi},
                    [wi, x = std::move(x)](Tape& tape, std::size_t self) {
                        if (!tape.requires_grad(wi)) return;
                        Matrix gw(x->cols(), tape.grad(self).cols());
                        gw.noalias() = x->transpose() * tape.grad(self);
                        tape.accumulate(wi, gw);
                    },
                    "sparse_matmul");
}

Var add(Var a, Var b) {
    Tape& t = same_tape(a, b);
    require_same_shape(a, b, "add");
    const std::size_t ai = a.id(), bi = b.id();
    return t.record(a.value() + b.value(), {ai, bi},
                    [ai, bi](Tape& tape, std::size_t self) {
                        tape.accumulate(ai, tape.grad(self));
                        tape.accumulate(bi, tape.grad(self));
                    },
                    "add");
}

Var sub(Var a, Var b) {
    Tape& t = same_tape(a, b);
    require_same_shape(a, b, "sub");
    const std::size_t ai = a.id(), bi = b.id();
    return t.record(a.value() - b.value(), {ai, bi},
                    [ai, bi](Tape& tape, std::size_t self) {
                        tape.accumulate(ai, tape.grad(self));
                        if (tape.requires_grad(bi)) tape.accumulate(bi, -tape.grad(self));
                    },
                    "sub");
}

Var add_row(Var x, Var r) {
    Tape& t = same_tape(x, r);
    require(r.rows() == 1 && r.cols() == x.cols(), "add_row: expected a 1 x cols row vector");
    Matrix y = x.value().rowwise() + r.value().row(0);
    const std::size_t xi = x.id(), ri = r.id();
    return t.record(std::move(y), {xi, ri},
                    [xi, ri](Tape& tape, std::size_t self) {
                        tape.accumulate(xi, tape.grad(self));
                        if (tape.requires_grad(ri)) tape.accumulate(ri, tape.grad(self).colwise().sum());
                    },
                    "add_row");
}

Var mul(Var a, Var b) {
    Tape& t = same_tape(a, b);
    require_same_shape(a, b, "mul");
    const std::size_t ai = a.id(), bi = b.id();
    return t.record(a.value().cwiseProduct(b.value()), {ai, bi},
                    [ai, bi](Tape& tape, std::size_t self) {
                        const Matrix& g = tape.grad(self);
                        if (tape.requires_grad(ai)) tape.accumulate(ai, g.cwiseProduct(tape.value(bi)));
                        if (tape.requires_grad(bi)) tape.accumulate(bi, g.cwiseProduct(tape.value(ai)));
                    },
                    "mul");
}

Var scale(Var x, Real s) {
    Tape& t = tape_of(x);
    const std::size_t xi = x.id();
    return t.record(x.value() * s, {xi},
                    [xi, s](Tape& tape, std::size_t self) { tape.accumulate(xi, tape.grad(self) * s); }, "scale");
}

Var sum(Var x) {
    Tape& t = tape_of(x);
    const std::size_t xi = x.id();
    Matrix y(1, 1);
    y(0, 0) = x.value().sum();
    return t.record(std::move(y), {xi},
                    [xi](Tape& tape, std::size_t self) {
                        const Matrix& xv = tape.value(xi);
                        tape.accumulate(xi, Matrix::Constant(xv.rows(), xv.cols(), tape.grad(self)(0, 0)));
                    },
                    "sum");
}

Var mean(Var x) {
    require(x.value().size() > 0, "mean: empty tensor");
    return scale(sum(x), 1.0 / static_cast<Real>(x.value().size()));
}

Var sigmoid(Var x) {
    Tape& t = tape_of(x);
    // exp(-v) overflows to inf for very negative v, giving exactly 0.
    Matrix y = (1.0 + (-x.value().array()).exp()).inverse().matrix();
    const std::size_t xi = x.id();
    return t.record(std::move(y), {xi},
                    [xi](Tape& tape, std::size_t self) {
                        if (!tape.requires_grad(xi)) return;
                        const auto yv = tape.value(self).array();
                        tape.accumulate(xi, (tape.grad(self).array() * yv * (1.0 - yv)).matrix());
                    },
                    "sigmoid");
}

Var elu(Var x, Real alpha) {
    Tape& t = tape_of(x);
    const auto xv = x.value().array();
    Matrix y = (xv > 0).select(xv, alpha * (xv.min(0.0).exp() - 1.0)).matrix();
    const std::size_t xi = x.id();
    return t.record(std::move(y), {xi},
                    [xi, alpha](Tape& tape, std::size_t self) {
                        if (!tape.requires_grad(xi)) return;
                        const auto xv = tape.value(xi).array();
                        const auto yv = tape.value(self).array();
                        const auto local = (xv > 0).select(1.0, yv + alpha);
                        tape.accumulate(xi, (tape.grad(self).array() * local).matrix());
                    },
                    "elu");
}

Var exp(Var x) {
    Tape& t = tape_of(x);
    Matrix y = x.value().array().exp().matrix();
    const std::size_t xi = x.id();
    return t.record(std::move(y), {xi},
                    [xi](Tape& tape, std::size_t self) {
                        tape.accumulate(xi, tape.grad(self).cwiseProduct(tape.value(self)));
                    },
                    "exp");
}

Var log(Var x, Real eps) {
    Tape& t = tape_of(x);
    const Real lo = eps, hi = 1.0 - eps;
    Matrix y = x.value().array().max(lo).min(hi).log().matrix();
    const std::size_t xi = x.id();
    return t.record(std::move(y), {xi},
                    [xi, lo, hi](Tape& tape, std::size_t self) {
                        if (!tape.requires_grad(xi)) return;
                        const auto xv = tape.value(xi).array();
                        const auto inside = (xv >= lo && xv <= hi);
                        const auto local = inside.select(xv.inverse(), 0.0);
                        tape.accumulate(xi, (tape.grad(self).array() * local).matrix());
                    },
                    "log");
}

Var square(Var x) {
    Tape& t = tape_of(x);
    Matrix y = x.value().cwiseAbs2();
    const std::size_t xi = x.id();
    return t.record(std::move(y), {xi},
                    [xi](Tape& tape, std::size_t self) {
                        tape.accumulate(xi, 2.0 * tape.grad(self).cwiseProduct(tape.value(xi)));
                    },
                    "square");
}

Var leaky_relu(Var x, Real slope) {
    require(slope > 0 && slope < 1, "leaky_relu: slope must lie in (0, 1)");
    Tape& t = tape_of(x);
    const auto xv = x.value().array();
    Matrix y = (xv >= 0).select(xv, slope * xv).matrix();
    const std::size_t xi = x.id();
    return t.record(std::move(y), {xi},
                    [xi, slope](Tape& tape, std::size_t self) {
                        if (!tape.requires_grad(xi)) return;
                        const auto g = tape.grad(self).array();
                        tape.accumulate(xi, (tape.value(xi).array() >= 0).select(g, slope * g).matrix());
                    },
                    "leaky_relu");
}

Var dropout(Var x, Real p, Rng& rng) {
    require(p >= 0 && p <= 1, "dropout: probability must lie in [0, 1]");
    Tape& t = tape_of(x);
    if (p == 0) return x;
    Matrix mask(x.rows(), x.cols());
    const Real keep_scale = p < 1 ? 1.0 / (1.0 - p) : 0.0;
    for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = uniform01(rng) >= p ? keep_scale : 0.0;
    const std::size_t xi = x.id();
    Matrix y = x.value().cwiseProduct(mask);
    return t.record(std::move(y), {xi},
                    [xi, mask = std::move(mask)](Tape& tape, std::size_t self) {
                        tape.accumulate(xi, tape.grad(self).cwiseProduct(mask));
                    },
                    "dropout");
}

SparseMatrix sparse_dropout(const SparseMatrix& x, Real p, Rng& rng) {
    require(p >= 0 && p <= 1, "dropout: probability must lie in [0, 1]");
    SparseMatrix y = x;
    if (p == 0) return y;
    const Real keep_scale = p < 1 ? 1.0 / (1.0 - p) : 0.0;
    Real* values = y.valuePtr();
    for (Index i = 0; i < y.nonZeros(); ++i) values[i] *= uniform01(rng) >= p ? keep_scale : 0.0;
    return y;
}

Var gather_rows(Var x, std::span<const Index> rows) {
    Tape& t = tape_of(x);
    const Index n = x.rows();
    Matrix y(static_cast<Index>(rows.size()), x.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        require(rows[r] >= 0 && rows[r] < n, "gather_rows: row index out of range");
        y.row(static_cast<Index>(r)) = x.value().row(rows[r]);
    }
    const std::size_t xi = x.id();
    std::vector<Index> idx(rows.begin(), rows.end());
    return t.record(std::move(y), {xi},
                    [xi, idx = std::move(idx)](Tape& tape, std::size_t self) {
                        if (!tape.requires_grad(xi)) return;
                        const Matrix& g = tape.grad(self);
                        const Matrix& xv = tape.value(xi);
                        Matrix gx = Matrix::Zero(xv.rows(), xv.cols());
                        for (std::size_t r = 0; r < idx.size(); ++r) gx.row(idx[r]) += g.row(static_cast<Index>(r));
                        tape.accumulate(xi, gx);
                    },
                    "gather_rows");
}

Var segment_softmax(Var scores, const EdgeIndex& edges) {
    Tape& t = tape_of(scores);
    require(scores.rows() == edges.num_edges(), "segment_softmax: one score row per edge required");
    const Matrix& s = scores.value();
    const Index n = edges.num_nodes();
    Matrix y(s.rows(), s.cols());
    for (Index i = 0; i < n; ++i) {
        const Index b = edges.offsets[static_cast<std::size_t>(i)];
        const Index e = edges.offsets[static_cast<std::size_t>(i) + 1];
        if (b == e) throw InvalidArgument("segment_softmax: node " + std::to_string(i) + " has an empty group");
        const auto block = s.middleRows(b, e - b);
        const RowVector m = block.colwise().maxCoeff();
        Matrix ex = (block.rowwise() - m).array().exp().matrix();
        const RowVector z = ex.colwise().sum();
        y.middleRows(b, e - b) = ex.array().rowwise() / z.array();
    }
    const std::size_t si = scores.id();
    std::vector<Index> offsets = edges.offsets;
    return t.record(std::move(y), {si},
                    [si, offsets = std::move(offsets)](Tape& tape, std::size_t self) {
                        const Matrix& yv = tape.value(self);
                        const Matrix& g = tape.grad(self);
                        Matrix gs(yv.rows(), yv.cols());
                        for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
                            const Index b = offsets[i], len = offsets[i + 1] - offsets[i];
                            const auto yb = yv.middleRows(b, len);
                            const auto gb = g.middleRows(b, len);
                            const RowVector dot = yb.cwiseProduct(gb).colwise().sum();
                            gs.middleRows(b, len) = yb.cwiseProduct(gb.rowwise() - dot);
                        }
                        tape.accumulate(si, gs);
                    },
                    "segment_softmax");
}

Var edge_aggregate(Var alpha, Var h, const EdgeIndex& edges) {
    Tape& t = same_tape(alpha, h);
    const Index heads = alpha.cols();
    require(alpha.rows() == edges.num_edges(), "edge_aggregate: one alpha row per edge required");
    require(h.rows() == edges.num_nodes(), "edge_aggregate: h rows must equal node count");
    require(heads >= 1 && h.cols() % heads == 0, "edge_aggregate: h width must be a multiple of the head count");
    const Index d = h.cols() / heads;
    const Matrix& av = alpha.value();
    const Matrix& hv = h.value();
    Matrix y = Matrix::Zero(h.rows(), h.cols());
    parallel_for(edges.num_nodes(), [&](Index begin, Index end) {
        for (Index i = begin; i < end; ++i) {
            for (Index e = edges.offsets[static_cast<std::size_t>(i)]; e < edges.offsets[static_cast<std::size_t>(i) + 1];
                 ++e) {
                const Index j = edges.src[static_cast<std::size_t>(e)];
                for (Index k = 0; k < heads; ++k) y.row(i).segment(k * d, d) += av(e, k) * hv.row(j).segment(k * d, d);
            }
        }
    });
    const std::size_t ai = alpha.id(), hi = h.id();
    return t.record(std::move(y), {ai, hi},
                    [ai, hi, heads, d, edges](Tape& tape, std::size_t self) {
                        const Matrix& g = tape.grad(self);
                        const Matrix& av = tape.value(ai);
                        const Matrix& hv = tape.value(hi);
                        if (tape.requires_grad(ai)) {
                            Matrix ga(av.rows(), av.cols());
                            parallel_for(edges.num_edges(), [&](Index begin, Index end) {
                                for (Index e = begin; e < end; ++e) {
                                    const Index i = edges.dst[static_cast<std::size_t>(e)];
                                    const Index j = edges.src[static_cast<std::size_t>(e)];
                                    for (Index k = 0; k < heads; ++k) {
                                        ga(e, k) = g.row(i).segment(k * d, d).dot(hv.row(j).segment(k * d, d));
                                    }
                                }
                            });
                            tape.accumulate(ai, ga);
                        }
                        if (tape.requires_grad(hi)) {
                            Matrix gh = Matrix::Zero(hv.rows(), hv.cols());
                            for (Index e = 0; e < edges.num_edges(); ++e) {
                                const Index i = edges.dst[static_cast<std::size_t>(e)];
                                const Index j = edges.src[static_cast<std::size_t>(e)];
                                for (Index k = 0; k < heads; ++k) {
                                    gh.row(j).segment(k * d, d) += av(e, k) * g.row(i).segment(k * d, d);
                                }
                            }
                            tape.accumulate(hi, gh);
                        }
                    },
                    "edge_aggregate");
}

Var head_scores(Var h, Var att) {
    Tape& t = same_tape(h, att);
    const Index heads = att.rows();
    const Index d = att.cols();
    require(h.cols() == heads * d, "head_scores: h width must equal heads * head_dim");
    const Matrix& hv = h.value();
    const Matrix& wv = att.value();
    Matrix y(h.rows(), heads);
    for (Index k = 0; k < heads; ++k) y.col(k).noalias() = hv.middleCols(k * d, d) * wv.row(k).transpose();
    const std::size_t hi = h.id(), wi = att.id();
    return t.record(std::move(y), {hi, wi},
                    [hi, wi, heads, d](Tape& tape, std::size_t self) {
                        const Matrix& g = tape.grad(self);
                        if (tape.requires_grad(hi)) {
                            const Matrix& wv = tape.value(wi);
                            Matrix gh(g.rows(), heads * d);
                            for (Index k = 0; k < heads; ++k) gh.middleCols(k * d, d).noalias() = g.col(k) * wv.row(k);
                            tape.accumulate(hi, gh);
                        }
                        if (tape.requires_grad(wi)) {
                            const Matrix& hv = tape.value(hi);
                            Matrix gw(heads, d);
                            for (Index k = 0; k < heads; ++k) {
                                gw.row(k).noalias() = g.col(k).transpose() * hv.middleCols(k * d, d);
                            }
                            tape.accumulate(wi, gw);
                        }
                    },
                    "head_scores");
}

Var head_mean(Var x, Index heads) {
    Tape& t = tape_of(x);
    require(heads >= 1 && x.cols() % heads == 0, "head_mean: width must be a multiple of the head count");
    const Index d = x.cols() / heads;
    const Matrix& xv = x.value();
    Matrix y = Matrix::Zero(x.rows(), d);
    for (Index k = 0; k < heads; ++k) y += xv.middleCols(k * d, d);
    y /= static_cast<Real>(heads);
    const std::size_t xi = x.id();
    return t.record(std::move(y), {xi},
                    [xi, heads, d](Tape& tape, std::size_t self) {
                        const Matrix g = tape.grad(self) / static_cast<Real>(heads);
                        Matrix gx(g.rows(), heads * d);
                        for (Index k = 0; k < heads; ++k) gx.middleCols(k * d, d) = g;
                        tape.accumulate(xi, gx);
                    },
                    "head_mean");
}

Var pair_dot(Var z, std::span<const EdgePair> pairs) {
    Tape& t = tape_of(z);
    const Matrix& zv = z.value();
    Matrix y(static_cast<Index>(pairs.size()), 1);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [i, j] = pairs[p];
        require(i >= 0 && j >= 0 && i < zv.rows() && j < zv.rows(), "pair_dot: node index out of range");
        y(static_cast<Index>(p), 0) = zv.row(i).dot(zv.row(j));
    }
    const std::size_t zi = z.id();
    std::vector<EdgePair> ps(pairs.begin(), pairs.end());
    return t.record(std::move(y), {zi},
                    [zi, ps = std::move(ps)](Tape& tape, std::size_t self) {
                        const Matrix& g = tape.grad(self);
                        const Matrix& zv = tape.value(zi);
                        Matrix gz = Matrix::Zero(zv.rows(), zv.cols());
                        for (std::size_t p = 0; p < ps.size(); ++p) {
                            const auto [i, j] = ps[p];
                            const Real gp = g(static_cast<Index>(p), 0);
                            gz.row(i) += gp * zv.row(j);
                            gz.row(j) += gp * zv.row(i);
                        }
                        tape.accumulate(zi, gz);
                    },
                    "pair_dot");
}

Var binary_cross_entropy(const Matrix& target, Var p, Real pos_weight, Real eps) {
    return binary_cross_entropy(std::make_shared<const Matrix>(target), p, pos_weight, eps);
}

Var binary_cross_entropy(std::shared_ptr<const Matrix> target_ptr, Var p, Real pos_weight, Real eps) {
    Tape& t = tape_of(p);
    require(target_ptr != nullptr, "binary_cross_entropy: null target");
    const Matrix& target = *target_ptr;
    if (target.rows() != p.rows() || target.cols() != p.cols()) {
        throw InvalidArgument("binary_cross_entropy: target and prediction shapes differ");
    }
    require(pos_weight > 0, "binary_cross_entropy: pos_weight must be positive");
    const Real lo = eps, hi = 1.0 - eps;
    const Real count = static_cast<Real>(target.size());
    require(count > 0, "binary_cross_entropy: empty input");
    const auto a = target.array();
    const auto q = p.value().array().max(lo).min(hi);
    // Row sums first, then a sum over rows: a fixed reduction order.
    const Vector per_row = (pos_weight * a * q.log() + (1.0 - a) * (1.0 - q).log()).rowwise().sum();
    Matrix y(1, 1);
    y(0, 0) = -per_row.sum() / count;
    const std::size_t pi = p.id();
    return t.record(std::move(y), {pi},
                    [pi, target_ptr, pos_weight, lo, hi, count](Tape& tape, std::size_t self) {
                        if (!tape.requires_grad(pi)) return;
                        const Real g = tape.grad(self)(0, 0) / count;
                        const auto pv = tape.value(pi).array();
                        const auto a = target_ptr->array();
                        const auto local = -g * (pos_weight * a / pv - (1.0 - a) / (1.0 - pv));
                        const auto inside = (pv >= lo && pv <= hi);
                        tape.accumulate(pi, inside.select(local, 0.0).matrix());
                    },
                    "binary_cross_entropy");
}

} // namespace gaeco::ad
