#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gaeco/graph.hpp"

namespace gaeco {

/// What to do with citation lines naming an id absent from the node file.
enum class DanglingPolicy {
    kDrop,     // skip the edge and count it
    kAddNode,  // append a node with zero features and label 0
};

struct LoadOptions {
    bool add_self_loops = true;
    DanglingPolicy dangling = DanglingPolicy::kDrop;
};

struct DatasetBundle {
    std::string name;
    Graph graph;
    FeatureMatrix features;
    Partition truth;
    Index k_truth = 0;

    /// Raw node ids in dense-id order (dense id i <-> node_ids[i]).
    std::vector<std::string> node_ids;
    /// Raw class names in label order; empty for the generic format.
    std::vector<std::string> class_names;

    Index raw_edge_lines = 0;
    Index dropped_edges = 0;
    Index added_nodes = 0;
};

DatasetBundle load_content_cites(const std::filesystem::path& content_path,
                                 const std::filesystem::path& cites_path, const LoadOptions& options = {});

/// Edges are `src<TAB>dst` over dense ids 0..n-1, features one CSV row per
/// node, labels one integer per line. `#` lines are comments.
DatasetBundle load_generic(const std::filesystem::path& edges_path, const std::filesystem::path& features_path,
                           const std::filesystem::path& labels_path, const LoadOptions& options = {});

/// PubMed-Diabetes release layout (`*.NODE.paper.tab`, `*.DIRECTED.cites.tab`).
DatasetBundle load_pubmed_tab(const std::filesystem::path& node_path, const std::filesystem::path& cites_path,
                              const LoadOptions& options = {});

/// Writes the three generic-format files into `dir` as edges.tsv,
/// features.csv and labels.txt.
void save_generic(const DatasetBundle& bundle, const std::filesystem::path& dir);

/// Divides each row with nonzero sum by its L1 norm.
FeatureMatrix row_normalize(const FeatureMatrix& features);

} // namespace gaeco
