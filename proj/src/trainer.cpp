#include "gaeco/trainer.hpp"

#include <chrono>
#include <fstream>

#include "gaeco/adam.hpp"
#include "gaeco/io.hpp"
#include "gaeco/metrics.hpp"
#include "gaeco/text.hpp"

namespace gaeco {
namespace {

namespace fs = std::filesystem;

const char* to_string(DatasetFormat f) {
    switch (f) {
    case DatasetFormat::kContentCites: return "content_cites";
    case DatasetFormat::kGeneric: return "generic";
    case DatasetFormat::kPubmedTab: return "pubmed_tab";
    }
    return "?";
}

const char* to_string(ReconMode m) {
    switch (m) {
    case ReconMode::kAuto: return "auto";
    case ReconMode::kDense: return "dense";
    case ReconMode::kSampled: return "sampled";
    }
    return "?";
}

template <typename E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> table, const char* what) {
    for (const auto& [name, value] : table) {
        if (s == name) return value;
    }
    throw InvalidArgument(std::string("unknown ") + what + " '" + s + "'");
}

} // namespace

void TrainConfig::validate() const {
    require(beta >= 0, "beta must be >= 0");
    require(k >= 0, "K must be >= 0");
    require(epochs >= 0, "epochs must be >= 0");
    require(warmup_epochs >= 0 && warmup_epochs <= epochs, "warmup epochs must lie in [0, epochs]");
    require(centroid_refresh_period >= 1, "centroid refresh period must be >= 1");
    require(lr > 0, "learning rate must be positive");
    require(clip_norm >= 0, "clip norm must be >= 0");
    require(neg_per_pos >= 1, "neg_per_pos must be >= 1");
    require(dense_cap > 0, "dense cap must be positive");
    require(!pos_weight || *pos_weight > 0, "pos_weight must be positive");
    EncoderConfig{1, hidden, embed, heads, input_dropout, attention_dropout}.validate();
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = nlohmann::json{
        {"dataset",
         {{"name", c.dataset.name},
          {"format", to_string(c.dataset.format)},
          {"content", c.dataset.content.string()},
          {"cites", c.dataset.cites.string()},
          {"edges", c.dataset.edges.string()},
          {"features", c.dataset.features.string()},
          {"labels", c.dataset.labels.string()}}},
        {"beta", c.beta},
        {"k", c.k},
        {"epochs", c.epochs},
        {"warmup_epochs", c.warmup_epochs},
        {"centroid_refresh_period", c.centroid_refresh_period},
        {"lr", c.lr},
        {"clip_norm", c.clip_norm},
        {"input_dropout", c.input_dropout},
        {"attention_dropout", c.attention_dropout},
        {"heads", c.heads},
        {"hidden", c.hidden},
        {"embed", c.embed},
        {"seed", c.seed},
        {"recon_mode", to_string(c.recon_mode)},
        {"neg_per_pos", c.neg_per_pos},
        {"recon_norm", c.recon_norm == ReconNorm::kNodes ? "nodes" : "entries"},
        {"dense_cap", c.dense_cap},
        {"pos_weight", c.pos_weight ? nlohmann::json(*c.pos_weight) : nlohmann::json("auto")},
        {"unit_diagonal", c.unit_diagonal},
        {"add_self_loops", c.add_self_loops},
        {"row_normalize", c.row_normalize},
        {"ablation", c.ablation == Ablation::kNoClust ? "no_clust" : "with_clust"},
        {"kmeans", {{"max_iter", c.kmeans.max_iter}, {"tol", c.kmeans.tol}, {"n_init", c.kmeans.n_init}}},
    };
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
    const auto& d = j.at("dataset");
    c.dataset.name = d.at("name").get<std::string>();
    c.dataset.format = parse_enum<DatasetFormat>(d.at("format").get<std::string>(),
                                                 {{"content_cites", DatasetFormat::kContentCites},
                                                  {"generic", DatasetFormat::kGeneric},
                                                  {"pubmed_tab", DatasetFormat::kPubmedTab}},
                                                 "dataset format");
    c.dataset.content = d.at("content").get<std::string>();
    c.dataset.cites = d.at("cites").get<std::string>();
    c.dataset.edges = d.at("edges").get<std::string>();
    c.dataset.features = d.at("features").get<std::string>();
    c.dataset.labels = d.at("labels").get<std::string>();
    j.at("beta").get_to(c.beta);
    j.at("k").get_to(c.k);
    j.at("epochs").get_to(c.epochs);
    j.at("warmup_epochs").get_to(c.warmup_epochs);
    j.at("centroid_refresh_period").get_to(c.centroid_refresh_period);
    j.at("lr").get_to(c.lr);
    j.at("clip_norm").get_to(c.clip_norm);
    j.at("input_dropout").get_to(c.input_dropout);
    j.at("attention_dropout").get_to(c.attention_dropout);
    j.at("heads").get_to(c.heads);
    j.at("hidden").get_to(c.hidden);
    j.at("embed").get_to(c.embed);
    j.at("seed").get_to(c.seed);
    c.recon_mode = parse_enum<ReconMode>(
        j.at("recon_mode").get<std::string>(),
        {{"auto", ReconMode::kAuto}, {"dense", ReconMode::kDense}, {"sampled", ReconMode::kSampled}}, "recon mode");
    j.at("neg_per_pos").get_to(c.neg_per_pos);
    c.recon_norm = parse_enum<ReconNorm>(j.value("recon_norm", std::string("entries")),
                                         {{"entries", ReconNorm::kEntries}, {"nodes", ReconNorm::kNodes}},
                                         "recon norm");
    j.at("dense_cap").get_to(c.dense_cap);
    if (j.at("pos_weight").is_string()) {
        c.pos_weight.reset();
    } else {
        c.pos_weight = j.at("pos_weight").get<Real>();
    }
    j.at("unit_diagonal").get_to(c.unit_diagonal);
    j.at("add_self_loops").get_to(c.add_self_loops);
    j.at("row_normalize").get_to(c.row_normalize);
    c.ablation = parse_enum<Ablation>(j.at("ablation").get<std::string>(),
                                      {{"with_clust", Ablation::kWithClust}, {"no_clust", Ablation::kNoClust}},
                                      "ablation");
    const auto& km = j.at("kmeans");
    km.at("max_iter").get_to(c.kmeans.max_iter);
    km.at("tol").get_to(c.kmeans.tol);
    km.at("n_init").get_to(c.kmeans.n_init);
}

std::optional<Real> default_beta(const std::string& dataset_name) {
    if (dataset_name == "cora") return 10.0;
    if (dataset_name == "citeseer") return 0.1;
    if (dataset_name == "pubmed") return 0.1;
    return std::nullopt;
}

DatasetStats DatasetStats::of(const DatasetBundle& bundle) {
    DatasetStats s;
    s.name = bundle.name;
    s.nodes = bundle.graph.num_nodes();
    s.features = bundle.features.dim();
    s.k_truth = bundle.k_truth;
    s.raw_edge_lines = bundle.raw_edge_lines;
    s.dropped_edges = bundle.dropped_edges;
    s.undirected_edges = bundle.graph.num_undirected_edges();
    s.self_loops = bundle.graph.num_self_loops();
    return s;
}

void to_json(nlohmann::json& j, const DatasetStats& s) {
    j = nlohmann::json{{"name", s.name},
                       {"nodes", s.nodes},
                       {"features", s.features},
                       {"k_truth", s.k_truth},
                       {"raw_edge_lines", s.raw_edge_lines},
                       {"dropped_edges", s.dropped_edges},
                       {"undirected_edges", s.undirected_edges},
                       {"self_loops", s.self_loops}};
}

nlohmann::json RunReport::to_json(bool include_wall_time) const {
    nlohmann::json j{{"config", config},
                     {"dataset", dataset},
                     {"recon_mode", recon_mode},
                     {"pos_weight", pos_weight},
                     {"sparse_features", sparse_features},
                     {"epochs", epochs},
                     {"final", {{"nmi", nmi}, {"ari", ari}, {"k_pred", k_pred}, {"inertia", final_inertia}}}};
    if (include_wall_time) j["wall_time_seconds"] = wall_time_seconds;
    return j;
}

DatasetBundle load_dataset(const DatasetSpec& spec, const LoadOptions& options) {
    DatasetBundle bundle;
    switch (spec.format) {
    case DatasetFormat::kContentCites: bundle = load_content_cites(spec.content, spec.cites, options); break;
    case DatasetFormat::kGeneric: bundle = load_generic(spec.edges, spec.features, spec.labels, options); break;
    case DatasetFormat::kPubmedTab: bundle = load_pubmed_tab(spec.content, spec.cites, options); break;
    }
    if (!spec.name.empty()) bundle.name = spec.name;
    return bundle;
}

TrainResult train(const TrainConfig& config, const DatasetBundle& bundle) {
    const auto start = std::chrono::steady_clock::now();
    config.validate();
    const Graph& graph = bundle.graph;
    const Index n = graph.num_nodes();
    require(bundle.features.rows() == n, "train: feature rows differ from node count");
    const Index k = config.k > 0 ? config.k : bundle.k_truth;
    require(k >= 1 && k <= n, "train: cluster count must lie in [1, n]");

    const Matrix x = config.row_normalize ? row_normalize(bundle.features).values() : bundle.features.values();
    // Bag-of-words inputs are mostly zeros; the first layer then runs as a sparse product.
    const Real density = x.size() > 0 ? static_cast<Real>((x.array() != 0).count()) / static_cast<Real>(x.size()) : 1.0;
    std::shared_ptr<const SparseMatrix> x_sparse;
    if (density <= 0.5) {
        auto sp = std::make_shared<SparseMatrix>(x.sparseView());
        sp->makeCompressed();
        x_sparse = std::move(sp);
    }
    const EncoderConfig enc{x.cols(), config.hidden, config.embed, config.heads, config.input_dropout,
                            config.attention_dropout};

    Rng init_rng = derive_rng(config.seed, Stream::kInit);
    Rng dropout_rng = derive_rng(config.seed, Stream::kDropout);
    Rng kmeans_rng = derive_rng(config.seed, Stream::kKmeans);
    Rng negative_rng = derive_rng(config.seed, Stream::kNegativeSampling);

    TrainResult result;
    result.params = EncoderParams::init(enc, init_rng);

    const bool fits_dense = n * n <= config.dense_cap;
    bool dense = false;
    switch (config.recon_mode) {
    case ReconMode::kAuto: dense = fits_dense; break;
    case ReconMode::kSampled: dense = false; break;
    case ReconMode::kDense:
        if (!fits_dense) {
            throw InvalidArgument("dense reconstruction needs n^2 = " + std::to_string(n * n) +
                                  " entries, above the cap of " + std::to_string(config.dense_cap) +
                                  "; use sampled reconstruction (--recon sampled) or raise --dense-cap");
        }
        dense = true;
        break;
    }
    std::shared_ptr<const Matrix> adjacency;
    Real pos_weight = 1.0;
    if (dense) {
        adjacency = std::make_shared<const Matrix>(dense_adjacency(graph, config.unit_diagonal, config.dense_cap));
        const Real ones = adjacency->sum();
        const Real zeros = static_cast<Real>(adjacency->size()) - ones;
        pos_weight = config.pos_weight ? *config.pos_weight : (zeros > 0 && ones > 0 ? zeros / ones : 1.0);
    } else {
        pos_weight = config.pos_weight ? *config.pos_weight : static_cast<Real>(config.neg_per_pos);
    }
    const SampledReconOptions sampled{config.neg_per_pos, config.unit_diagonal, pos_weight};

    const auto edges = ad::EdgeIndex::from_graph(graph);
    const auto names = EncoderParams::tensor_names();
    Adam adam(AdamOptions{config.lr, 0.9, 0.999, 1e-8, config.clip_norm});
    KmeansOptions warm = config.kmeans;
    warm.n_init = 1;
    std::optional<Matrix> centroids;

    auto& report = result.report;
    report.config = config;
    report.dataset = DatasetStats::of(bundle);
    report.recon_mode = dense ? "dense" : "sampled";
    report.pos_weight = pos_weight;
    report.sparse_features = x_sparse != nullptr;

    for (Index epoch = 0; epoch < config.epochs; ++epoch) {
        ad::Tape tape;
        const auto vars = EncoderVars::bind(tape, result.params);
        const ad::Var z = x_sparse ? encode(enc, vars, edges, x_sparse, &dropout_rng, true)
                                   : encode(enc, vars, edges, tape.constant(x), &dropout_rng, true);
        Index terms = n * n;
        ad::Var l_recon = dense ? recon_loss(adjacency, decode(z, config.dense_cap), pos_weight)
                                : sampled_recon_loss(graph, z, sampled, negative_rng, &terms);
        if (config.recon_norm == ReconNorm::kNodes) {
            l_recon = ad::scale(l_recon, static_cast<Real>(terms) / static_cast<Real>(n));
        }

        // Fresh multi-restart clustering on the first epoch and when the
        // clustering term switches on; warm-started Lloyd otherwise.
        if (!centroids || epoch == config.warmup_epochs) {
            centroids = kmeans<Real>(z.value(), k, kmeans_rng, config.kmeans).centroids;
        } else if (epoch % config.centroid_refresh_period == 0) {
            centroids = lloyd<Real>(z.value(), *centroids, warm).centroids;
        }
        const ad::Var l_clust = kmeans_loss(z, *centroids);

        const Real beta = epoch < config.warmup_epochs ? 0.0 : config.effective_beta();
        LossReport loss;
        loss.epoch = epoch;
        const ad::Var total = total_loss(l_recon, l_clust, beta, &loss);
        report.epochs.push_back(loss);

        tape.backward(total);
        std::vector<Matrix> grads{vars.hidden.weight.grad(), vars.hidden.att_self.grad(),
                                  vars.hidden.att_neighbor.grad(), vars.output.weight.grad(),
                                  vars.output.att_self.grad(), vars.output.att_neighbor.grad()};
        const auto params = result.params.tensors();
        adam.step(params, grads, names);
    }

    result.embeddings =
        x_sparse ? encode_eval(enc, result.params, graph, x_sparse) : encode_eval(enc, result.params, graph, x);
    const auto final = kmeans<Real>(result.embeddings, k, kmeans_rng, config.kmeans);
    result.labels = final.assignment;
    report.nmi = nmi(bundle.truth.labels(), result.labels);
    report.ari = ari(bundle.truth.labels(), result.labels);
    report.k_pred = Partition(result.labels).num_distinct();
    report.final_inertia = final.inertia;
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

RunReport train_to_directory(const TrainConfig& config, const DatasetBundle& bundle, const fs::path& out_dir) {
    auto result = train(config, bundle);
    fs::create_directories(out_dir);
    export_embeddings(result.embeddings, out_dir / "embeddings.csv");
    export_labels(result.labels, out_dir / "labels.csv");
    save_checkpoint(result.params, out_dir / "checkpoint.bin");
    {
        std::ofstream losses(out_dir / "losses.jsonl");
        for (const auto& l : result.report.epochs) losses << nlohmann::json(l).dump() << '\n';
    }

    const auto written = read_labels(out_dir / "labels.csv");
    auto& report = result.report;
    report.nmi = nmi(bundle.truth.labels(), written);
    report.ari = ari(bundle.truth.labels(), written);
    report.k_pred = Partition(written).num_distinct();

    std::ofstream out(out_dir / "report.json");
    out << report.to_json().dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write report.json in " + out_dir.string());
    return report;
}

std::vector<SweepRow> beta_sweep(const TrainConfig& config, const DatasetBundle& bundle, std::span<const Real> betas,
                                 const std::optional<fs::path>& out_dir) {
    require(!betas.empty(), "beta_sweep: need at least one beta value");
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        TrainConfig run = config;
        run.beta = betas[i];
        const RunReport report = out_dir ? train_to_directory(run, bundle, *out_dir / ("beta_" + std::to_string(i)))
                                         : train(run, bundle).report;
        rows.push_back({betas[i], report.nmi, report.ari});
    }
    if (out_dir) {
        std::ofstream csv(*out_dir / "sweep.csv");
        csv << "beta,nmi,ari\n";
        nlohmann::json table = nlohmann::json::array();
        for (const auto& r : rows) {
            csv << text::format_real(r.beta) << ',' << text::format_real(r.nmi) << ',' << text::format_real(r.ari)
                << '\n';
            table.push_back({{"beta", r.beta}, {"nmi", r.nmi}, {"ari", r.ari}});
        }
        std::ofstream json(*out_dir / "sweep.json");
        json << table.dump(2) << '\n';
    }
    return rows;
}

} // namespace gaeco
