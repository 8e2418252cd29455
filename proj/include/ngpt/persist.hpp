#pragma once

// Versioned little-endian index file:
//
//   header    "NGPT" | u32 version | u32 d | u64 n | config | u64 minpts |
//             u64 iterations | u64 leaves | u64 outliers | u32 node_count
//   nodes     per node: u32 id | u8 kind | u32 parent | u32 left | u32 right |
//             f64 split_offset | u8 has_direction [f64 x d] |
//             u8 reflection_kind [f64 x d] | f64 x d lo | f64 x d hi |
//             u64 member_count
//   row ids   per childless node, in id order: u32 node id | u64 count |
//             i64 x count
//   trailer   u64 dataset digest
//
// The file holds structure only; the vectors come from the dataset passed to
// load_tree, whose digest must match.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>

#include "ngpt/index.hpp"

namespace ngpt {

inline constexpr std::uint32_t kIndexFormatVersion = 1;

// FNV-1a over n, d, the row ids and the IEEE-754 bit patterns of the values.
std::uint64_t dataset_digest(const FeatureMatrix& m);

std::string serialize_tree(const Tree& tree);
Tree deserialize_tree(const std::string& bytes, std::shared_ptr<const FeatureMatrix> data);

void save_tree(const Tree& tree, const std::filesystem::path& path);
Tree load_tree(const std::filesystem::path& path, std::shared_ptr<const FeatureMatrix> data);

// Writes through a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace ngpt
