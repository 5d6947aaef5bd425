#include "gaeco/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "gaeco/text.hpp"

namespace gaeco {
namespace {

namespace fs = std::filesystem;

constexpr char kMagic[8] = {'G', 'A', 'E', 'C', 'O', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ParseError("checkpoint: truncated file");
    return value;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

} // namespace

void export_embeddings(const Matrix& z, const fs::path& path) {
    auto out = open_out(path);
    out << "node_id";
    for (Index j = 0; j < z.cols(); ++j) out << ",z_" << j;
    out << '\n';
    for (Index i = 0; i < z.rows(); ++i) {
        out << i;
        for (Index j = 0; j < z.cols(); ++j) out << ',' << text::format_real(z(i, j));
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Matrix read_embeddings(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    const auto header = text::split(text::trim(line), ',');
    if (header.empty() || header.front() != "node_id") throw ParseError(path.string() + ": missing header");
    const Index d = static_cast<Index>(header.size()) - 1;
    std::vector<std::vector<Real>> rows;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        const auto fields = text::split(text::trim(line), ',');
        if (static_cast<Index>(fields.size()) != d + 1) throw ParseError(path.string() + ": ragged row");
        const auto id = text::parse_index(fields[0]);
        if (!id || *id != static_cast<Index>(rows.size())) throw ParseError(path.string() + ": node ids out of order");
        std::vector<Real> row;
        for (std::size_t j = 1; j < fields.size(); ++j) {
            const auto v = text::parse_real(fields[j]);
            if (!v) throw ParseError(path.string() + ": non-numeric value");
            row.push_back(*v);
        }
        rows.push_back(std::move(row));
    }
    Matrix z(static_cast<Index>(rows.size()), d);
    for (Index i = 0; i < z.rows(); ++i) {
        for (Index j = 0; j < d; ++j) z(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return z;
}

void export_labels(std::span<const Index> labels, const fs::path& path) {
    auto out = open_out(path);
    out << "node_id,community\n";
    for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << labels[i] << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<Index> read_labels(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::map<Index, Index> by_id;
    std::vector<Index> plain;
    bool csv = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto fields = text::split(t, ',');
        if (fields.size() == 2) {
            const auto id = text::parse_index(text::trim(fields[0]));
            const auto label = text::parse_index(text::trim(fields[1]));
            if (!id || !label) {
                if (line_no == 1) continue;  // header
                throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 'node_id,community'");
            }
            csv = true;
            if (!by_id.emplace(*id, *label).second) {
                throw ParseError(path.string() + ": node id " + std::to_string(*id) + " listed twice");
            }
        } else if (fields.size() == 1) {
            const auto label = text::parse_index(t);
            if (!label) throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected an integer label");
            plain.push_back(*label);
        } else {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": unexpected column count");
        }
    }
    if (csv && !plain.empty()) throw ParseError(path.string() + ": mixes CSV rows and bare labels");
    if (!csv) return plain;
    std::vector<Index> labels;
    labels.reserve(by_id.size());
    Index expected = 0;
    for (const auto& [id, label] : by_id) {
        if (id != expected++) throw ParseError(path.string() + ": node ids do not cover 0..n-1");
        labels.push_back(label);
    }
    return labels;
}

void save_checkpoint(const EncoderParams& params, const fs::path& path) {
    auto out = open_out(path);
    const auto names = EncoderParams::tensor_names();
    const auto tensors = params.tensors();
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(names[t].size()));
        out.write(names[t].data(), static_cast<std::streamsize>(names[t].size()));
        put<std::uint64_t>(out, static_cast<std::uint64_t>(tensors[t]->rows()));
        put<std::uint64_t>(out, static_cast<std::uint64_t>(tensors[t]->cols()));
        out.write(reinterpret_cast<const char*>(tensors[t]->data()),
                  static_cast<std::streamsize>(sizeof(Real) * static_cast<std::size_t>(tensors[t]->size())));
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

EncoderParams load_checkpoint(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw ParseError(path.string() + ": not a checkpoint");
    }
    const auto version = get<std::uint32_t>(in);
    if (version != kVersion) throw ParseError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
    const auto count = get<std::uint32_t>(in);

    std::map<std::string, Matrix> found;
    for (std::uint32_t t = 0; t < count; ++t) {
        const auto len = get<std::uint32_t>(in);
        std::string name(len, '\0');
        if (!in.read(name.data(), len)) throw ParseError("checkpoint: truncated name");
        const auto rows = get<std::uint64_t>(in);
        const auto cols = get<std::uint64_t>(in);
        Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
        if (!in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(Real) * rows * cols))) {
            throw ParseError("checkpoint: truncated tensor " + name);
        }
        found.emplace(std::move(name), std::move(m));
    }

    EncoderParams params;
    const auto names = EncoderParams::tensor_names();
    const auto tensors = params.tensors();
    for (std::size_t t = 0; t < names.size(); ++t) {
        auto it = found.find(names[t]);
        if (it == found.end()) throw ParseError(path.string() + ": missing tensor " + names[t]);
        *tensors[t] = std::move(it->second);
    }
    params.hidden.heads = params.hidden.att_self.rows();
    params.hidden.combine = HeadCombine::kConcat;
    params.output.heads = params.output.att_self.rows();
    params.output.combine = HeadCombine::kMean;
    return params;
}

} // namespace gaeco
