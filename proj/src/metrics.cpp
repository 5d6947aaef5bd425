#include "gaeco/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gaeco {
namespace {

std::vector<Index> compress(std::span<const Index> labels, Index& k) {
    std::vector<Index> values(labels.begin(), labels.end());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    k = static_cast<Index>(values.size());
    std::vector<Index> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out[i] = std::lower_bound(values.begin(), values.end(), labels[i]) - values.begin();
    }
    return out;
}

double choose2(Index m) { return 0.5 * static_cast<double>(m) * static_cast<double>(m - 1); }

} // namespace

ContingencyTable contingency(std::span<const Index> truth, std::span<const Index> pred) {
    if (truth.size() != pred.size()) {
        throw InvalidArgument("contingency: label vectors differ in length (" + std::to_string(truth.size()) + " vs " +
                              std::to_string(pred.size()) + ")");
    }
    Index kt = 0, kp = 0;
    const auto t = compress(truth, kt);
    const auto p = compress(pred, kp);
    ContingencyTable table;
    table.counts = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>::Zero(kt, kp);
    table.row_sums.assign(static_cast<std::size_t>(kt), 0);
    table.col_sums.assign(static_cast<std::size_t>(kp), 0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        ++table.counts(t[i], p[i]);
        ++table.row_sums[static_cast<std::size_t>(t[i])];
        ++table.col_sums[static_cast<std::size_t>(p[i])];
    }
    table.total = static_cast<Index>(t.size());
    return table;
}

double nmi(std::span<const Index> truth, std::span<const Index> pred) {
    const auto table = contingency(truth, pred);
    require(table.total > 0, "nmi: empty partitions");
    const double n = static_cast<double>(table.total);
    double numer = 0;
    for (Index i = 0; i < table.rows(); ++i) {
        for (Index j = 0; j < table.cols(); ++j) {
            const double nij = static_cast<double>(table.counts(i, j));
            if (nij == 0) continue;
            const double ni = static_cast<double>(table.row_sums[static_cast<std::size_t>(i)]);
            const double nj = static_cast<double>(table.col_sums[static_cast<std::size_t>(j)]);
            numer += nij * std::log(nij * n / (ni * nj));
        }
    }
    double denom = 0;
    for (Index a : table.row_sums) denom += static_cast<double>(a) * std::log(static_cast<double>(a) / n);
    for (Index b : table.col_sums) denom += static_cast<double>(b) * std::log(static_cast<double>(b) / n);
    if (denom == 0) return 1.0;  // both partitions are a single cluster
    return std::clamp(-2.0 * numer / denom, 0.0, 1.0);
}

double ari(std::span<const Index> truth, std::span<const Index> pred) {
    const auto table = contingency(truth, pred);
    require(table.total >= 2, "ari: need at least two nodes");
    double index = 0;
    for (Index i = 0; i < table.rows(); ++i) {
        for (Index j = 0; j < table.cols(); ++j) index += choose2(table.counts(i, j));
    }
    double sum_a = 0, sum_b = 0;
    for (Index a : table.row_sums) sum_a += choose2(a);
    for (Index b : table.col_sums) sum_b += choose2(b);
    const double expected = sum_a * sum_b / choose2(table.total);
    const double max_index = 0.5 * (sum_a + sum_b);
    const double denom = max_index - expected;
    if (denom == 0) return 1.0;
    return (index - expected) / denom;
}

} // namespace gaeco
