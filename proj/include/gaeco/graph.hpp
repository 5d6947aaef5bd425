#pragma once

#include <span>
#include <utility>
#include <vector>

#include "gaeco/types.hpp"

namespace gaeco {

/// Default ceiling on n*n entries for dense n x n materializations.
inline constexpr Index kDefaultDenseCap = 50'000'000;

using EdgePair = std::pair<Index, Index>;

/// Immutable undirected graph in compressed-row form.
///
/// Every undirected pair {i, j} is stored in both rows, neighbor lists are
/// sorted ascending and free of duplicates. Self-loops are either taken from
/// the input or, with `add_self_loops`, present for every node.
class Graph {
public:
    Graph() = default;

    static Graph build(Index n, std::span<const EdgePair> edges, bool add_self_loops = true);

    Index num_nodes() const { return static_cast<Index>(row_offsets_.size()) - 1; }
    /// Number of stored (directed) adjacency entries, self-loops counted once.
    Index num_entries() const { return static_cast<Index>(col_indices_.size()); }
    /// Number of distinct undirected pairs excluding self-loops.
    Index num_undirected_edges() const { return undirected_edges_; }
    Index num_self_loops() const { return self_loops_; }
    bool self_loops_added() const { return self_loops_added_; }

    std::span<const Index> neighbors(Index i) const;
    Index degree(Index i) const { return static_cast<Index>(neighbors(i).size()); }
    bool has_edge(Index i, Index j) const;

    const std::vector<Index>& row_offsets() const { return row_offsets_; }
    const std::vector<Index>& col_indices() const { return col_indices_; }

    /// Undirected pairs (i < j) followed by self-loops (i, i), in row order.
    std::vector<EdgePair> edge_list(bool include_self_loops = false) const;

private:
    std::vector<Index> row_offsets_{0};
    std::vector<Index> col_indices_;
    Index undirected_edges_ = 0;
    Index self_loops_ = 0;
    bool self_loops_added_ = false;
};

/// Dense node-by-feature matrix with finite entries.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    explicit FeatureMatrix(Matrix values);

    Index rows() const { return values_.rows(); }
    Index dim() const { return values_.cols(); }
    const Matrix& values() const { return values_; }

private:
    Matrix values_;
};

/// Node -> community assignment with labels in [0, k).
class Partition {
public:
    Partition() = default;
    /// `k` defaults to max(label) + 1.
    explicit Partition(std::vector<Index> labels, Index k = -1);

    Index size() const { return static_cast<Index>(labels_.size()); }
    Index num_communities() const { return k_; }
    /// Number of label values actually used.
    Index num_distinct() const;
    const std::vector<Index>& labels() const { return labels_; }
    Index operator[](Index i) const { return labels_[static_cast<std::size_t>(i)]; }

private:
    std::vector<Index> labels_;
    Index k_ = 0;
};

/// Symmetric 0/1 adjacency. Off-diagonal entries come from the edges; the
/// diagonal is all ones when `unit_diagonal`, else all zeros.
Matrix dense_adjacency(const Graph& g, bool unit_diagonal = true, Index cap = kDefaultDenseCap);

/// Graph with node ids relabeled as perm[old] = new.
Graph permute(const Graph& g, std::span<const Index> perm);

} // namespace gaeco
