#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gaeco/io.hpp"
#include "gaeco/metrics.hpp"
#include "gaeco/synthetic.hpp"
#include "gaeco/trainer.hpp"

namespace {

using namespace gaeco;

struct DatasetFlags {
    std::string name;
    std::string format = "content";
    std::string content, cites, edges, features, labels;
    bool no_self_loops = false;
    bool keep_dangling = false;

    void attach(CLI::App* app) {
        app->add_option("--dataset", name, "Dataset name (cora, citeseer, pubmed select default beta)");
        app->add_option("--format", format, "Input format")
            ->check(CLI::IsMember({"content", "generic", "pubmed"}));
        app->add_option("--content", content, "`.content` file, or `.NODE.paper.tab` with --format pubmed");
        app->add_option("--cites", cites, "`.cites` file, or `.DIRECTED.cites.tab` with --format pubmed");
        app->add_option("--edges", edges, "Generic format: TSV edge list");
        app->add_option("--features", features, "Generic format: CSV features");
        app->add_option("--labels", labels, "Generic format: one label per line");
        app->add_flag("--no-self-loops", no_self_loops, "Do not add self-loops for attention");
        app->add_flag("--keep-dangling", keep_dangling,
                      "Keep citations to unknown ids as zero-feature nodes (label 0) instead of dropping them");
    }

    DatasetSpec spec() const {
        DatasetSpec s;
        s.name = name;
        if (format == "generic") {
            s.format = DatasetFormat::kGeneric;
            s.edges = edges;
            s.features = features;
            s.labels = labels;
        } else {
            s.format = format == "pubmed" ? DatasetFormat::kPubmedTab : DatasetFormat::kContentCites;
            s.content = content;
            s.cites = cites;
        }
        return s;
    }

    LoadOptions load_options() const {
        return {!no_self_loops, keep_dangling ? DanglingPolicy::kAddNode : DanglingPolicy::kDrop};
    }
};

struct TrainFlags {
    TrainConfig config;
    std::optional<double> beta;
    std::optional<Index> warmup;
    std::string recon = "auto";
    std::string recon_norm = "entries";
    std::string ablation = "with_clust";
    bool no_unit_diagonal = false;
    bool no_row_normalize = false;
    std::string pos_weight = "auto";
    std::string out = "runs/out";

    void attach(CLI::App* app) {
        app->add_option("--beta", beta, "Clustering-loss weight (default: 10 cora, 0.1 citeseer/pubmed, else 10)");
        app->add_option("--k", config.k, "Cluster count (default: ground-truth community count)");
        app->add_option("--epochs", config.epochs, "Training epochs")->capture_default_str();
        app->add_option("--warmup", warmup, "Epochs with beta forced to 0 (default: min(50, epochs))");
        app->add_option("--refresh", config.centroid_refresh_period, "Centroid refresh period")->capture_default_str();
        app->add_option("--lr", config.lr, "Adam learning rate")->capture_default_str();
        app->add_option("--clip", config.clip_norm, "Global gradient-norm clip, 0 = off")->capture_default_str();
        app->add_option("--input-dropout", config.input_dropout, "Dropout on layer inputs")->capture_default_str();
        app->add_option("--attention-dropout", config.attention_dropout, "Dropout on attention coefficients")
            ->capture_default_str();
        app->add_option("--heads", config.heads, "Attention heads")->capture_default_str();
        app->add_option("--hidden", config.hidden, "Hidden width (concatenated heads)")->capture_default_str();
        app->add_option("--embed", config.embed, "Embedding size")->capture_default_str();
        app->add_option("--seed", config.seed, "Run seed")->capture_default_str();
        app->add_option("--recon", recon, "Reconstruction mode")->check(CLI::IsMember({"auto", "dense", "sampled"}));
        app->add_option("--recon-norm", recon_norm, "Reconstruction reduction: mean over entries, or sum / nodes")
            ->check(CLI::IsMember({"entries", "nodes"}))
            ->capture_default_str();
        app->add_option("--neg-per-pos", config.neg_per_pos, "Negatives per positive in sampled mode")
            ->capture_default_str();
        app->add_option("--dense-cap", config.dense_cap, "Max n^2 entries for dense reconstruction")
            ->capture_default_str();
        app->add_option("--pos-weight", pos_weight, "Positive-class BCE weight, or 'auto' to balance classes")
            ->capture_default_str();
        app->add_flag("--no-unit-diagonal", no_unit_diagonal, "Reconstruction target diagonal = 0");
        app->add_flag("--no-row-normalize", no_row_normalize, "Skip L1 row normalization of features");
        app->add_option("--ablation", ablation, "with_clust | no_clust")
            ->check(CLI::IsMember({"with_clust", "no_clust"}));
        app->add_option("--n-init", config.kmeans.n_init, "k-means restarts")->capture_default_str();
        app->add_option("--out", out, "Output directory")->capture_default_str();
    }

    TrainConfig resolve(const DatasetFlags& dataset) const {
        TrainConfig c = config;
        c.dataset = dataset.spec();
        c.beta = beta ? *beta : default_beta(dataset.name).value_or(10.0);
        c.warmup_epochs = warmup ? *warmup : std::min<Index>(50, c.epochs);
        c.recon_mode = recon == "dense" ? ReconMode::kDense : recon == "sampled" ? ReconMode::kSampled : ReconMode::kAuto;
        c.recon_norm = recon_norm == "nodes" ? ReconNorm::kNodes : ReconNorm::kEntries;
        c.ablation = ablation == "no_clust" ? Ablation::kNoClust : Ablation::kWithClust;
        if (pos_weight != "auto") c.pos_weight = std::stod(pos_weight);
        c.unit_diagonal = !no_unit_diagonal;
        c.add_self_loops = !dataset.no_self_loops;
        c.row_normalize = !no_row_normalize;
        return c;
    }
};

std::vector<double> parse_betas(const std::string& list) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        const auto end = list.find(',', start);
        const auto token = list.substr(start, end == std::string::npos ? std::string::npos : end - start);
        if (!token.empty()) out.push_back(std::stod(token));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph attention autoencoder with k-means loss for community detection"};
    app.require_subcommand(1);

    DatasetFlags dataset;
    TrainFlags train_flags;
    auto* train_cmd = app.add_subcommand("train", "Train on one dataset and write report + artifacts");
    dataset.attach(train_cmd);
    train_flags.attach(train_cmd);

    DatasetFlags sweep_dataset;
    TrainFlags sweep_flags;
    std::string betas = "0.01,0.1,1,10";
    auto* sweep_cmd = app.add_subcommand("sweep", "Train once per beta with a shared seed");
    sweep_dataset.attach(sweep_cmd);
    sweep_flags.attach(sweep_cmd);
    sweep_cmd->add_option("--betas", betas, "Comma-separated beta values")->capture_default_str();

    std::string truth_path, pred_path;
    auto* score_cmd = app.add_subcommand("score", "NMI/ARI between two label files");
    score_cmd->add_option("--truth", truth_path, "Ground-truth labels")->required();
    score_cmd->add_option("--pred", pred_path, "Predicted labels")->required();

    DatasetFlags stats_dataset;
    auto* stats_cmd = app.add_subcommand("stats", "Load a dataset and print its statistics");
    stats_dataset.attach(stats_cmd);

    SyntheticSpec synth;
    std::string synth_out = "data/synthetic";
    auto* synth_cmd = app.add_subcommand("synth", "Write a planted-partition attributed graph in the generic format");
    synth_cmd->add_option("--nodes", synth.nodes)->capture_default_str();
    synth_cmd->add_option("--communities", synth.communities)->capture_default_str();
    synth_cmd->add_option("--features", synth.features)->capture_default_str();
    synth_cmd->add_option("--degree", synth.average_degree)->capture_default_str();
    synth_cmd->add_option("--homophily", synth.homophily)->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
    synth_cmd->add_option("--out", synth_out)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) {
            const auto config = train_flags.resolve(dataset);
            const auto bundle = load_dataset(config.dataset, dataset.load_options());
            const auto report = train_to_directory(config, bundle, train_flags.out);
            std::cout << nlohmann::json{{"nmi", report.nmi},
                                        {"ari", report.ari},
                                        {"k_pred", report.k_pred},
                                        {"wall_time_seconds", report.wall_time_seconds},
                                        {"out", train_flags.out}}
                             .dump()
                      << '\n';
        } else if (sweep_cmd->parsed()) {
            const auto config = sweep_flags.resolve(sweep_dataset);
            const auto bundle = load_dataset(config.dataset, sweep_dataset.load_options());
            const auto values = parse_betas(betas);
            const auto rows = beta_sweep(config, bundle, values, std::filesystem::path(sweep_flags.out));
            for (const auto& r : rows) {
                std::cout << nlohmann::json{{"beta", r.beta}, {"nmi", r.nmi}, {"ari", r.ari}}.dump() << '\n';
            }
        } else if (score_cmd->parsed()) {
            const auto truth = read_labels(truth_path);
            const auto pred = read_labels(pred_path);
            std::cout << nlohmann::json{{"nmi", nmi(truth, pred)},
                                        {"ari", ari(truth, pred)},
                                        {"n", truth.size()},
                                        {"k_truth", Partition(truth).num_distinct()},
                                        {"k_pred", Partition(pred).num_distinct()}}
                             .dump()
                      << '\n';
        } else if (stats_cmd->parsed()) {
            const auto bundle = load_dataset(stats_dataset.spec(), stats_dataset.load_options());
            nlohmann::json j = DatasetStats::of(bundle);
            j["added_nodes"] = bundle.added_nodes;
            std::cout << j.dump() << '\n';
        } else if (synth_cmd->parsed()) {
            save_generic(make_synthetic(synth), synth_out);
            std::cout << synth_out << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "gaeco: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
