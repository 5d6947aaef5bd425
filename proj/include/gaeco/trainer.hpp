#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaeco/gat.hpp"
#include "gaeco/ingest.hpp"
#include "gaeco/kmeans.hpp"
#include "gaeco/losses.hpp"

namespace gaeco {

enum class DatasetFormat { kContentCites, kGeneric, kPubmedTab };
enum class ReconMode { kAuto, kDense, kSampled };
/// Reconstruction reduction: mean over target entries, or sum divided by
/// the node count (n times larger in dense mode, which shrinks the
/// effective weight of the clustering term accordingly).
enum class ReconNorm { kEntries, kNodes };
enum class Ablation { kWithClust, kNoClust };

struct DatasetSpec {
    std::string name;
    DatasetFormat format = DatasetFormat::kContentCites;
    // content/cites, or nodes/cites for the PubMed tab format
    std::filesystem::path content;
    std::filesystem::path cites;
    // generic format
    std::filesystem::path edges;
    std::filesystem::path features;
    std::filesystem::path labels;
};

struct TrainConfig {
    DatasetSpec dataset;
    Real beta = 10.0;
    Index k = 0;  // 0: ground-truth community count
    Index epochs = 400;
    Index warmup_epochs = 50;
    Index centroid_refresh_period = 1;
    Real lr = 0.005;
    Real clip_norm = 0.0;
    Real input_dropout = 0.4;
    Real attention_dropout = 0.2;
    Index heads = 8;
    Index hidden = 256;
    Index embed = 64;
    std::uint64_t seed = 42;
    ReconMode recon_mode = ReconMode::kAuto;
    Index neg_per_pos = 5;
    ReconNorm recon_norm = ReconNorm::kEntries;
    Index dense_cap = kDefaultDenseCap;
    /// Positive-class BCE weight; nullopt balances positives against the
    /// zero entries (dense: zeros / ones, sampled: neg_per_pos).
    std::optional<Real> pos_weight;
    bool unit_diagonal = true;
    bool add_self_loops = true;
    bool row_normalize = true;
    Ablation ablation = Ablation::kWithClust;
    KmeansOptions kmeans{};

    /// beta actually applied after warmup (0 for the no_clust ablation).
    Real effective_beta() const { return ablation == Ablation::kNoClust ? 0.0 : beta; }
    void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

/// β for the benchmarks this model was tuned on; nullopt for other names.
std::optional<Real> default_beta(const std::string& dataset_name);

struct DatasetStats {
    std::string name;
    Index nodes = 0;
    Index features = 0;
    Index k_truth = 0;
    Index raw_edge_lines = 0;
    Index dropped_edges = 0;
    Index undirected_edges = 0;
    Index self_loops = 0;

    static DatasetStats of(const DatasetBundle& bundle);
};

void to_json(nlohmann::json& j, const DatasetStats& s);

struct RunReport {
    TrainConfig config;
    DatasetStats dataset;
    std::string recon_mode;  // resolved: dense | sampled
    Real pos_weight = 1.0;   // resolved
    bool sparse_features = false;
    std::vector<LossReport> epochs;
    double nmi = 0;
    double ari = 0;
    Index k_pred = 0;
    double final_inertia = 0;
    double wall_time_seconds = 0;

    /// Report without the wall-clock field, for byte-level comparisons.
    nlohmann::json to_json(bool include_wall_time = true) const;
};

struct TrainResult {
    RunReport report;
    EncoderParams params;
    Matrix embeddings;          // eval-mode Z after training
    std::vector<Index> labels;  // final k-means communities
};

DatasetBundle load_dataset(const DatasetSpec& spec, const LoadOptions& options = {});

/// Runs the joint reconstruction + clustering optimization on an already
/// loaded dataset. Metrics in the report are computed from `labels`.
TrainResult train(const TrainConfig& config, const DatasetBundle& bundle);

/// Trains and writes report.json, losses.jsonl, embeddings.csv, labels.csv
/// and checkpoint.bin into out_dir. Final metrics are recomputed from the
/// written labels.csv.
RunReport train_to_directory(const TrainConfig& config, const DatasetBundle& bundle,
                             const std::filesystem::path& out_dir);

struct SweepRow {
    Real beta = 0;
    double nmi = 0;
    double ari = 0;
};

/// One full training per beta with the shared seed. With out_dir set, each
/// run goes to out_dir/beta_<i>/ and the table to sweep.csv / sweep.json.
std::vector<SweepRow> beta_sweep(const TrainConfig& config, const DatasetBundle& bundle,
                                 std::span<const Real> betas,
                                 const std::optional<std::filesystem::path>& out_dir = std::nullopt);

} // namespace gaeco
