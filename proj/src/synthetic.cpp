#include "gaeco/synthetic.hpp"

#include "gaeco/rng.hpp"

namespace gaeco {

DatasetBundle make_synthetic(const SyntheticSpec& spec, const LoadOptions& options) {
    require(spec.nodes >= spec.communities && spec.communities >= 1, "make_synthetic: need nodes >= communities >= 1");
    require(spec.features >= spec.communities, "make_synthetic: need at least one feature per community");
    Rng rng(spec.seed);
    const Index n = spec.nodes;
    const Index k = spec.communities;

    std::vector<Index> labels(static_cast<std::size_t>(n));
    std::vector<std::vector<Index>> members(static_cast<std::size_t>(k));
    for (Index i = 0; i < n; ++i) {
        labels[static_cast<std::size_t>(i)] = i % k;
        members[static_cast<std::size_t>(i % k)].push_back(i);
    }

    const Index block = spec.features / k;
    Matrix x = Matrix::Zero(n, spec.features);
    for (Index i = 0; i < n; ++i) {
        const Index c = labels[static_cast<std::size_t>(i)];
        for (Index w = 0; w < spec.words_per_node; ++w) {
            const Index word = uniform01(rng) < spec.topic_strength
                                   ? c * block + static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(block)))
                                   : static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(spec.features)));
            x(i, word) = 1.0;
        }
    }

    const auto m = static_cast<Index>(static_cast<Real>(n) * spec.average_degree / 2.0);
    std::vector<EdgePair> edges;
    edges.reserve(static_cast<std::size_t>(m));
    while (static_cast<Index>(edges.size()) < m) {
        const auto i = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
        Index j = 0;
        if (uniform01(rng) < spec.homophily || k == 1) {
            const auto& pool = members[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
            j = pool[uniform_index(rng, pool.size())];
        } else {
            j = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
        }
        if (i != j) edges.emplace_back(i, j);
    }

    DatasetBundle bundle;
    bundle.name = "synthetic";
    bundle.raw_edge_lines = static_cast<Index>(edges.size());
    bundle.graph = Graph::build(n, edges, options.add_self_loops);
    bundle.features = FeatureMatrix(std::move(x));
    bundle.truth = Partition(std::move(labels), k);
    bundle.k_truth = bundle.truth.num_distinct();
    for (Index i = 0; i < n; ++i) bundle.node_ids.push_back(std::to_string(i));
    return bundle;
}

} // namespace gaeco
