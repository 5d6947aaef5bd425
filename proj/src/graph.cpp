#include "gaeco/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gaeco {

Graph Graph::build(Index n, std::span<const EdgePair> edges, bool add_self_loops) {
    require(n > 0, "build_graph: node count must be positive");
    std::vector<std::vector<Index>> rows(static_cast<std::size_t>(n));
    for (const auto& [i, j] : edges) {
        if (i < 0 || j < 0 || i >= n || j >= n) {
            throw InvalidArgument("build_graph: edge (" + std::to_string(i) + ", " + std::to_string(j) +
                                  ") out of range for n=" + std::to_string(n));
        }
        rows[static_cast<std::size_t>(i)].push_back(j);
        if (i != j) rows[static_cast<std::size_t>(j)].push_back(i);
    }
    if (add_self_loops) {
        for (Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)].push_back(i);
    }

    Graph g;
    g.self_loops_added_ = add_self_loops;
    g.row_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (Index i = 0; i < n; ++i) {
        auto& row = rows[static_cast<std::size_t>(i)];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        g.row_offsets_[static_cast<std::size_t>(i) + 1] =
            g.row_offsets_[static_cast<std::size_t>(i)] + static_cast<Index>(row.size());
    }
    g.col_indices_.reserve(static_cast<std::size_t>(g.row_offsets_.back()));
    for (Index i = 0; i < n; ++i) {
        for (Index j : rows[static_cast<std::size_t>(i)]) {
            g.col_indices_.push_back(j);
            if (j == i) {
                ++g.self_loops_;
            } else if (j > i) {
                ++g.undirected_edges_;
            }
        }
    }
    return g;
}

std::span<const Index> Graph::neighbors(Index i) const {
    if (i < 0 || i >= num_nodes()) {
        throw InvalidArgument("neighbors: node " + std::to_string(i) + " out of range");
    }
    const auto begin = static_cast<std::size_t>(row_offsets_[static_cast<std::size_t>(i)]);
    const auto end = static_cast<std::size_t>(row_offsets_[static_cast<std::size_t>(i) + 1]);
    return std::span<const Index>(col_indices_).subspan(begin, end - begin);
}

bool Graph::has_edge(Index i, Index j) const {
    const auto row = neighbors(i);
    return std::binary_search(row.begin(), row.end(), j);
}

std::vector<EdgePair> Graph::edge_list(bool include_self_loops) const {
    std::vector<EdgePair> out;
    std::vector<EdgePair> loops;
    for (Index i = 0; i < num_nodes(); ++i) {
        for (Index j : neighbors(i)) {
            if (j > i) out.emplace_back(i, j);
            if (j == i && include_self_loops) loops.emplace_back(i, i);
        }
    }
    out.insert(out.end(), loops.begin(), loops.end());
    return out;
}

FeatureMatrix::FeatureMatrix(Matrix values) : values_(std::move(values)) {
    if (!values_.allFinite()) throw NumericError("FeatureMatrix: non-finite entry");
}

Partition::Partition(std::vector<Index> labels, Index k) : labels_(std::move(labels)) {
    Index max_label = -1;
    for (Index l : labels_) {
        require(l >= 0, "Partition: negative label");
        max_label = std::max(max_label, l);
    }
    k_ = k < 0 ? std::max<Index>(max_label + 1, 1) : k;
    require(k_ >= 1, "Partition: k must be >= 1");
    require(max_label < k_, "Partition: label " + std::to_string(max_label) + " outside [0, k)");
}

Index Partition::num_distinct() const {
    std::vector<char> seen(static_cast<std::size_t>(k_), 0);
    Index count = 0;
    for (Index l : labels_) {
        if (!seen[static_cast<std::size_t>(l)]) {
            seen[static_cast<std::size_t>(l)] = 1;
            ++count;
        }
    }
    return count;
}

Matrix dense_adjacency(const Graph& g, bool unit_diagonal, Index cap) {
    const Index n = g.num_nodes();
    if (n * n > cap) {
        throw InvalidArgument("dense_adjacency: n^2 = " + std::to_string(n * n) + " exceeds dense cap " +
                              std::to_string(cap) + "; use sampled reconstruction");
    }
    Matrix a = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j : g.neighbors(i)) {
            if (j != i) a(i, j) = 1.0;
        }
        if (unit_diagonal) a(i, i) = 1.0;
    }
    return a;
}

Graph permute(const Graph& g, std::span<const Index> perm) {
    const Index n = g.num_nodes();
    require(static_cast<Index>(perm.size()) == n, "permute: permutation length mismatch");
    std::vector<EdgePair> edges;
    for (Index i = 0; i < n; ++i) {
        for (Index j : g.neighbors(i)) {
            if (j >= i) edges.emplace_back(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        }
    }
    return Graph::build(n, edges, g.self_loops_added());
}

} // namespace gaeco
