#pragma once

#include <filesystem>
#include <vector>

#include "gaeco/gat.hpp"
#include "gaeco/graph.hpp"

namespace gaeco {

/// CSV `node_id,z_0,...,z_{d-1}` with 17 significant digits.
void export_embeddings(const Matrix& z, const std::filesystem::path& path);
Matrix read_embeddings(const std::filesystem::path& path);

/// CSV `node_id,community`, one row per node in id order.
void export_labels(std::span<const Index> labels, const std::filesystem::path& path);

/// Reads a labels file: either `node_id,community` CSV (header optional,
/// ids must cover 0..n-1 exactly once) or one integer label per line.
std::vector<Index> read_labels(const std::filesystem::path& path);

/// Binary checkpoint, little-endian:
///   "GAECOCKP"  u32 version(=1)  u32 tensor_count
///   per tensor: u32 name_len, name bytes, u64 rows, u64 cols, rows*cols f64 (row-major)
void save_checkpoint(const EncoderParams& params, const std::filesystem::path& path);
EncoderParams load_checkpoint(const std::filesystem::path& path);

} // namespace gaeco
