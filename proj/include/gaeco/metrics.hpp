#pragma once

#include <span>
#include <vector>

#include "gaeco/graph.hpp"

namespace gaeco {

/// Co-membership counts between two labelings. Rows follow the sorted
/// distinct truth labels, columns the sorted distinct predicted labels.
struct ContingencyTable {
    Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> counts;
    std::vector<Index> row_sums;
    std::vector<Index> col_sums;
    Index total = 0;

    Index rows() const { return counts.rows(); }
    Index cols() const { return counts.cols(); }
};

ContingencyTable contingency(std::span<const Index> truth, std::span<const Index> pred);

/// Normalized mutual information, natural log, 0 log 0 = 0. Two
/// single-cluster partitions score 1.
double nmi(std::span<const Index> truth, std::span<const Index> pred);

/// Adjusted Rand index from pair counts; a zero denominator scores 1.
double ari(std::span<const Index> truth, std::span<const Index> pred);

inline double nmi(const Partition& truth, const Partition& pred) { return nmi(truth.labels(), pred.labels()); }
inline double ari(const Partition& truth, const Partition& pred) { return ari(truth.labels(), pred.labels()); }

} // namespace gaeco
