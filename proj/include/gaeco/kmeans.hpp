#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gaeco/parallel.hpp"
#include "gaeco/rng.hpp"
#include "gaeco/types.hpp"

namespace gaeco {

struct KmeansOptions {
    Index max_iter = 300;
    double tol = 1e-6;
    Index n_init = 10;
};

template <typename Scalar>
struct KmeansResult {
    MatrixX<Scalar> centroids;      // K x d
    std::vector<Index> assignment;  // per point, in [0, K)
    Scalar inertia = 0;             // sum of squared distances to assigned centers
    Index iterations = 0;
    /// Inertia after the initial assignment and after every (update, assign) step.
    std::vector<Scalar> inertia_trace;
};

/// Assigns every point to its nearest centroid (ties to the lowest index),
/// writing labels and squared distances. Returns the summed distance.
template <typename Scalar>
Scalar assign_nearest(const MatrixX<Scalar>& points, const MatrixX<Scalar>& centroids, std::vector<Index>& labels,
                      std::vector<Scalar>& sq_dist) {
    const Index n = points.rows();
    const Index k = centroids.rows();
    require(k >= 1, "assign_nearest: need at least one centroid");
    require(points.cols() == centroids.cols(), "assign_nearest: point and centroid dimensions differ");
    labels.resize(static_cast<std::size_t>(n));
    sq_dist.resize(static_cast<std::size_t>(n));
    parallel_for(n, [&](Index begin, Index end) {
        for (Index i = begin; i < end; ++i) {
            Index best = 0;
            Scalar best_d = (points.row(i) - centroids.row(0)).squaredNorm();
            for (Index c = 1; c < k; ++c) {
                const Scalar d = (points.row(i) - centroids.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            labels[static_cast<std::size_t>(i)] = best;
            sq_dist[static_cast<std::size_t>(i)] = best_d;
        }
    }, 1024);
    Scalar total = 0;
    for (Scalar d : sq_dist) total += d;
    return total;
}

/// k-means++ seeding: first center uniform, then proportional to the squared
/// distance to the nearest chosen center.
template <typename Scalar>
MatrixX<Scalar> kmeans_pp_init(const MatrixX<Scalar>& points, Index k, Rng& rng) {
    const Index n = points.rows();
    require(k >= 1, "kmeans_pp_init: K must be >= 1");
    require(k <= n, "kmeans_pp_init: K = " + std::to_string(k) + " exceeds point count " + std::to_string(n));
    MatrixX<Scalar> centers(k, points.cols());
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    Index first = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    centers.row(0) = points.row(first);
    chosen[static_cast<std::size_t>(first)] = 1;

    std::vector<double> nearest(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        nearest[static_cast<std::size_t>(i)] = static_cast<double>((points.row(i) - centers.row(0)).squaredNorm());
    }
    for (Index c = 1; c < k; ++c) {
        double total = 0;
        for (Index i = 0; i < n; ++i) {
            if (!chosen[static_cast<std::size_t>(i)]) total += nearest[static_cast<std::size_t>(i)];
        }
        Index pick = -1;
        if (total > 0) {
            const double r = uniform01(rng) * total;
            double acc = 0;
            for (Index i = 0; i < n; ++i) {
                if (chosen[static_cast<std::size_t>(i)]) continue;
                acc += nearest[static_cast<std::size_t>(i)];
                if (acc > r && nearest[static_cast<std::size_t>(i)] > 0) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) {
                // Rounding pushed r past the last positive weight.
                for (Index i = n; i-- > 0;) {
                    if (!chosen[static_cast<std::size_t>(i)] && nearest[static_cast<std::size_t>(i)] > 0) {
                        pick = i;
                        break;
                    }
                }
            }
        } else {
            // Every remaining point coincides with a center.
            const Index remaining = n - c;
            Index skip = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(remaining)));
            for (Index i = 0; i < n; ++i) {
                if (chosen[static_cast<std::size_t>(i)]) continue;
                if (skip-- == 0) {
                    pick = i;
                    break;
                }
            }
        }
        centers.row(c) = points.row(pick);
        chosen[static_cast<std::size_t>(pick)] = 1;
        for (Index i = 0; i < n; ++i) {
            const double d = static_cast<double>((points.row(i) - centers.row(c)).squaredNorm());
            nearest[static_cast<std::size_t>(i)] = std::min(nearest[static_cast<std::size_t>(i)], d);
        }
    }
    return centers;
}

/// Lloyd iterations from the given centers. Stops when the largest center
/// shift drops below tol, when assignments stop changing, or at max_iter.
/// An emptied cluster takes the point farthest from its current center.
template <typename Scalar>
KmeansResult<Scalar> lloyd(const MatrixX<Scalar>& points, MatrixX<Scalar> centers, const KmeansOptions& options = {}) {
    const Index n = points.rows();
    const Index k = centers.rows();
    const Index d = points.cols();
    require(k >= 1 && k <= n, "lloyd: need 1 <= K <= n");
    require(centers.cols() == d, "lloyd: centroid dimension mismatch");

    KmeansResult<Scalar> result;
    std::vector<Scalar> sq_dist;
    result.inertia = assign_nearest(points, centers, result.assignment, sq_dist);
    result.inertia_trace.push_back(result.inertia);

    std::vector<Index> counts(static_cast<std::size_t>(k));
    for (Index it = 1; it <= options.max_iter; ++it) {
        auto& labels = result.assignment;
        // Empty-cluster repair.
        std::fill(counts.begin(), counts.end(), 0);
        for (Index l : labels) ++counts[static_cast<std::size_t>(l)];
        for (Index c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            Index far = -1;
            for (Index i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] < 2) continue;
                if (far < 0 || sq_dist[static_cast<std::size_t>(i)] > sq_dist[static_cast<std::size_t>(far)]) far = i;
            }
            if (far < 0) break;
            --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
            labels[static_cast<std::size_t>(far)] = c;
            sq_dist[static_cast<std::size_t>(far)] = 0;
            counts[static_cast<std::size_t>(c)] = 1;
        }

        MatrixX<Scalar> updated = MatrixX<Scalar>::Zero(k, d);
        for (Index i = 0; i < n; ++i) updated.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
        for (Index c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                updated.row(c) /= static_cast<Scalar>(counts[static_cast<std::size_t>(c)]);
            } else {
                updated.row(c) = centers.row(c);
            }
        }
        Scalar shift = 0;
        for (Index c = 0; c < k; ++c) shift = std::max(shift, (updated.row(c) - centers.row(c)).norm());
        centers = std::move(updated);

        const std::vector<Index> previous = labels;
        result.inertia = assign_nearest(points, centers, labels, sq_dist);
        result.inertia_trace.push_back(result.inertia);
        result.iterations = it;
        if (static_cast<double>(shift) < options.tol || previous == labels) break;
    }
    result.centroids = std::move(centers);
    return result;
}

/// Best of `n_init` k-means++ seeded Lloyd runs by inertia (ties to the
/// earlier restart). Seeds are drawn sequentially from `rng` before the runs
/// start, so the outcome does not depend on how restarts are scheduled.
template <typename Scalar>
KmeansResult<Scalar> kmeans(const MatrixX<Scalar>& points, Index k, Rng& rng, const KmeansOptions& options = {}) {
    require(k >= 1, "kmeans: K must be >= 1");
    require(k <= points.rows(), "kmeans: K exceeds point count");
    require(options.n_init >= 1, "kmeans: n_init must be >= 1");
    std::vector<MatrixX<Scalar>> seeds;
    seeds.reserve(static_cast<std::size_t>(options.n_init));
    for (Index r = 0; r < options.n_init; ++r) seeds.push_back(kmeans_pp_init(points, k, rng));

    std::vector<KmeansResult<Scalar>> runs(seeds.size());
    parallel_for(static_cast<Index>(seeds.size()), [&](Index begin, Index end) {
        for (Index r = begin; r < end; ++r) {
            runs[static_cast<std::size_t>(r)] = lloyd(points, std::move(seeds[static_cast<std::size_t>(r)]), options);
        }
    }, 1);

    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r].inertia < runs[best].inertia) best = r;
    }
    return std::move(runs[best]);
}

/// Warm-started Lloyd from `previous` when given, else a full kmeans.
template <typename Scalar>
KmeansResult<Scalar> refresh_centroids(const MatrixX<Scalar>& points, Index k,
                                       const std::optional<MatrixX<Scalar>>& previous, Rng& rng,
                                       const KmeansOptions& options = {}) {
    if (previous) {
        require(previous->rows() == k, "refresh_centroids: previous centroids have wrong K");
        return lloyd(points, *previous, options);
    }
    return kmeans(points, k, rng, options);
}

} // namespace gaeco
