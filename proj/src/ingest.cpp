#include "gaeco/ingest.hpp"

#include <fstream>
#include <unordered_map>

#include "gaeco/text.hpp"

namespace gaeco {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!text::trim(line).empty()) lines.push_back(std::move(line));
    }
    return lines;
}

std::string where(const fs::path& path, std::size_t line_no) {
    return path.string() + ":" + std::to_string(line_no);
}

/// Dense ids in first-seen order.
class IdMap {
public:
    Index insert(std::string_view key) {
        auto [it, inserted] = ids_.try_emplace(std::string(key), static_cast<Index>(names_.size()));
        if (inserted) names_.emplace_back(key);
        return it->second;
    }
    std::optional<Index> find(std::string_view key) const {
        auto it = ids_.find(std::string(key));
        if (it == ids_.end()) return std::nullopt;
        return it->second;
    }
    bool contains(std::string_view key) const { return ids_.count(std::string(key)) != 0; }
    Index size() const { return static_cast<Index>(names_.size()); }
    std::vector<std::string>& names() { return names_; }

private:
    std::unordered_map<std::string, Index> ids_;
    std::vector<std::string> names_;
};

struct RawNodes {
    IdMap nodes;
    IdMap classes;
    std::vector<std::vector<Real>> rows;
    std::vector<Index> labels;
    Index dim = 0;
};

/// Resolves citation pairs against the node table and assembles the bundle.
DatasetBundle assemble(std::string name, RawNodes raw, const std::vector<std::pair<std::string, std::string>>& cites,
                       const LoadOptions& options) {
    DatasetBundle bundle;
    bundle.name = std::move(name);
    bundle.raw_edge_lines = static_cast<Index>(cites.size());

    std::vector<EdgePair> edges;
    edges.reserve(cites.size());
    for (const auto& [a, b] : cites) {
        auto ia = raw.nodes.find(a);
        auto ib = raw.nodes.find(b);
        if (!ia || !ib) {
            if (options.dangling == DanglingPolicy::kDrop) {
                ++bundle.dropped_edges;
                continue;
            }
            for (const std::string* id : {&a, &b}) {
                if (!raw.nodes.contains(*id)) {
                    raw.nodes.insert(*id);
                    raw.rows.emplace_back(static_cast<std::size_t>(raw.dim), 0.0);
                    raw.labels.push_back(0);
                    ++bundle.added_nodes;
                }
            }
            ia = raw.nodes.find(a);
            ib = raw.nodes.find(b);
        }
        edges.emplace_back(*ia, *ib);
    }

    const Index n = raw.nodes.size();
    Matrix x(n, raw.dim);
    for (Index i = 0; i < n; ++i) {
        const auto& row = raw.rows[static_cast<std::size_t>(i)];
        for (Index j = 0; j < raw.dim; ++j) x(i, j) = row[static_cast<std::size_t>(j)];
    }
    bundle.graph = Graph::build(n, edges, options.add_self_loops);
    bundle.features = FeatureMatrix(std::move(x));
    bundle.truth = Partition(std::move(raw.labels), std::max<Index>(raw.classes.size(), 1));
    bundle.k_truth = bundle.truth.num_distinct();
    bundle.node_ids = std::move(raw.nodes.names());
    bundle.class_names = std::move(raw.classes.names());
    return bundle;
}

} // namespace

DatasetBundle load_content_cites(const fs::path& content_path, const fs::path& cites_path,
                                 const LoadOptions& options) {
    const auto content = read_lines(content_path);
    if (content.empty()) throw ParseError(content_path.string() + ": empty content file");

    RawNodes raw;
    std::size_t columns = 0;
    for (std::size_t ln = 0; ln < content.size(); ++ln) {
        const auto fields = text::split_ws(content[ln]);
        if (columns == 0) {
            columns = fields.size();
            if (columns < 3) throw ParseError(where(content_path, ln + 1) + ": expected id, features, class");
            raw.dim = static_cast<Index>(columns) - 2;
        }
        if (fields.size() != columns) {
            throw ParseError(where(content_path, ln + 1) + ": expected " + std::to_string(columns) + " columns, got " +
                             std::to_string(fields.size()));
        }
        if (raw.nodes.contains(fields.front())) {
            throw ParseError(where(content_path, ln + 1) + ": duplicate node id '" + std::string(fields.front()) + "'");
        }
        raw.nodes.insert(fields.front());
        std::vector<Real> row(static_cast<std::size_t>(raw.dim));
        for (std::size_t c = 1; c + 1 < columns; ++c) {
            const auto v = text::parse_real(fields[c]);
            if (!v) throw ParseError(where(content_path, ln + 1) + ": non-numeric feature '" + std::string(fields[c]) + "'");
            row[c - 1] = *v;
        }
        raw.rows.push_back(std::move(row));
        raw.labels.push_back(raw.classes.insert(fields.back()));
    }

    const auto cite_lines = read_lines(cites_path);
    if (cite_lines.empty()) throw ParseError(cites_path.string() + ": empty cites file");
    std::vector<std::pair<std::string, std::string>> cites;
    cites.reserve(cite_lines.size());
    for (std::size_t ln = 0; ln < cite_lines.size(); ++ln) {
        const auto fields = text::split_ws(cite_lines[ln]);
        if (fields.size() != 2) throw ParseError(where(cites_path, ln + 1) + ": expected '<cited> <citing>'");
        cites.emplace_back(std::string(fields[0]), std::string(fields[1]));
    }

    return assemble(content_path.stem().string(), std::move(raw), cites, options);
}

DatasetBundle load_pubmed_tab(const fs::path& node_path, const fs::path& cites_path, const LoadOptions& options) {
    const auto lines = read_lines(node_path);
    if (lines.size() < 2) throw ParseError(node_path.string() + ": missing header lines");

    // Line 2 declares features as `numeric:<name>:<default>` (first one prefixed by `cat=...`).
    RawNodes raw;
    std::unordered_map<std::string, Index> feature_index;
    for (auto decl : text::split(lines[1], '\t')) {
        decl = text::trim(decl);
        const auto parts = text::split(decl, ':');
        if (parts.size() != 3 || parts[0].find("numeric") == std::string_view::npos) continue;
        feature_index.emplace(std::string(parts[1]), static_cast<Index>(feature_index.size()));
    }
    if (feature_index.empty()) throw ParseError(where(node_path, 2) + ": no feature declarations");
    raw.dim = static_cast<Index>(feature_index.size());

    for (std::size_t ln = 2; ln < lines.size(); ++ln) {
        const auto fields = text::split(lines[ln], '\t');
        if (fields.size() < 2) throw ParseError(where(node_path, ln + 1) + ": expected id and label");
        const auto id = text::trim(fields[0]);
        if (raw.nodes.contains(id)) throw ParseError(where(node_path, ln + 1) + ": duplicate node id");
        raw.nodes.insert(id);
        std::vector<Real> row(static_cast<std::size_t>(raw.dim), 0.0);
        std::optional<Index> label;
        for (std::size_t c = 1; c < fields.size(); ++c) {
            const auto field = text::trim(fields[c]);
            const auto eq = field.find('=');
            if (field.empty() || eq == std::string_view::npos) continue;
            const auto key = field.substr(0, eq);
            const auto value = field.substr(eq + 1);
            if (key == "label") {
                label = raw.classes.insert(value);
            } else if (key != "summary") {
                auto it = feature_index.find(std::string(key));
                if (it == feature_index.end()) {
                    throw ParseError(where(node_path, ln + 1) + ": undeclared feature '" + std::string(key) + "'");
                }
                const auto v = text::parse_real(value);
                if (!v) throw ParseError(where(node_path, ln + 1) + ": non-numeric feature value");
                row[static_cast<std::size_t>(it->second)] = *v;
            }
        }
        if (!label) throw ParseError(where(node_path, ln + 1) + ": missing label");
        raw.rows.push_back(std::move(row));
        raw.labels.push_back(*label);
    }
    if (raw.nodes.size() == 0) throw ParseError(node_path.string() + ": no nodes");

    const auto cite_lines = read_lines(cites_path);
    std::vector<std::pair<std::string, std::string>> cites;
    const auto strip = [](std::string_view s) {
        s = text::trim(s);
        if (s.rfind("paper:", 0) == 0) s.remove_prefix(6);
        return std::string(s);
    };
    for (std::size_t ln = 0; ln < cite_lines.size(); ++ln) {
        const auto fields = text::split(cite_lines[ln], '\t');
        // Header lines: "DIRECTED<TAB>cites", "NO_FEATURES".
        if (fields.size() < 4) continue;
        if (text::trim(fields[2]) != "|") throw ParseError(where(cites_path, ln + 1) + ": malformed citation");
        cites.emplace_back(strip(fields[1]), strip(fields[3]));
    }
    if (cites.empty()) throw ParseError(cites_path.string() + ": no citations");

    return assemble("pubmed", std::move(raw), cites, options);
}

DatasetBundle load_generic(const fs::path& edges_path, const fs::path& features_path, const fs::path& labels_path,
                           const LoadOptions& options) {
    const auto strip_comments = [](std::vector<std::string> lines) {
        std::erase_if(lines, [](const std::string& l) { return text::trim(l).front() == '#'; });
        return lines;
    };

    const auto feature_lines = strip_comments(read_lines(features_path));
    if (feature_lines.empty()) throw ParseError(features_path.string() + ": empty features file");
    const auto label_lines = strip_comments(read_lines(labels_path));
    if (label_lines.size() != feature_lines.size()) {
        throw ParseError("load_generic: " + std::to_string(feature_lines.size()) + " feature rows but " +
                         std::to_string(label_lines.size()) + " labels");
    }

    const Index n = static_cast<Index>(feature_lines.size());
    Index dim = -1;
    Matrix x;
    for (Index i = 0; i < n; ++i) {
        const auto fields = text::split(feature_lines[static_cast<std::size_t>(i)], ',');
        if (dim < 0) {
            dim = static_cast<Index>(fields.size());
            x.resize(n, dim);
        }
        if (static_cast<Index>(fields.size()) != dim) {
            throw ParseError(where(features_path, static_cast<std::size_t>(i) + 1) + ": expected " +
                             std::to_string(dim) + " values");
        }
        for (Index j = 0; j < dim; ++j) {
            const auto v = text::parse_real(text::trim(fields[static_cast<std::size_t>(j)]));
            if (!v) throw ParseError(where(features_path, static_cast<std::size_t>(i) + 1) + ": non-numeric feature");
            x(i, j) = *v;
        }
    }

    std::vector<Index> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (std::size_t ln = 0; ln < label_lines.size(); ++ln) {
        const auto v = text::parse_index(text::trim(label_lines[ln]));
        if (!v || *v < 0) throw ParseError(where(labels_path, ln + 1) + ": expected non-negative integer label");
        labels.push_back(*v);
    }

    std::vector<EdgePair> edges;
    for (const auto& line : strip_comments(read_lines(edges_path))) {
        const auto fields = text::split_ws(line);
        if (fields.size() != 2) throw ParseError(edges_path.string() + ": expected 'src<TAB>dst', got '" + line + "'");
        const auto a = text::parse_index(fields[0]);
        const auto b = text::parse_index(fields[1]);
        if (!a || !b) throw ParseError(edges_path.string() + ": non-integer node id in '" + line + "'");
        edges.emplace_back(*a, *b);
    }

    DatasetBundle bundle;
    bundle.name = features_path.parent_path().filename().string();
    bundle.raw_edge_lines = static_cast<Index>(edges.size());
    bundle.graph = Graph::build(n, edges, options.add_self_loops);
    bundle.features = FeatureMatrix(std::move(x));
    bundle.truth = Partition(std::move(labels));
    bundle.k_truth = bundle.truth.num_distinct();
    bundle.node_ids.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) bundle.node_ids.push_back(std::to_string(i));
    return bundle;
}

void save_generic(const DatasetBundle& bundle, const fs::path& dir) {
    fs::create_directories(dir);
    std::ofstream edges(dir / "edges.tsv");
    std::ofstream features(dir / "features.csv");
    std::ofstream labels(dir / "labels.txt");
    if (!edges || !features || !labels) throw std::runtime_error("save_generic: cannot write into " + dir.string());

    edges << "# src\tdst\n";
    for (const auto& [i, j] : bundle.graph.edge_list(!bundle.graph.self_loops_added())) edges << i << '\t' << j << '\n';

    const Matrix& x = bundle.features.values();
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) {
            if (j) features << ',';
            features << text::format_real(x(i, j));
        }
        features << '\n';
    }
    for (Index l : bundle.truth.labels()) labels << l << '\n';
}

FeatureMatrix row_normalize(const FeatureMatrix& features) {
    Matrix x = features.values();
    for (Index i = 0; i < x.rows(); ++i) {
        const Real norm = x.row(i).cwiseAbs().sum();
        if (norm > 0) x.row(i) /= norm;
    }
    return FeatureMatrix(std::move(x));
}

} // namespace gaeco
