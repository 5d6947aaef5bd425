#pragma once

#include <cstdint>

#include "gaeco/ingest.hpp"

namespace gaeco {

/// Planted-partition attributed graph: homophilous edges plus sparse binary
/// bag-of-words features drawn mostly from a per-community vocabulary block.
struct SyntheticSpec {
    Index nodes = 300;
    Index communities = 3;
    Index features = 60;
    Real average_degree = 4.0;
    Real homophily = 0.8;        // probability an edge stays inside the community
    Index words_per_node = 8;
    Real topic_strength = 0.7;   // probability a word comes from the community's block
    std::uint64_t seed = 1;
};

DatasetBundle make_synthetic(const SyntheticSpec& spec, const LoadOptions& options = {});

} // namespace gaeco
