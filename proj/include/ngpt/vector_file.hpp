#pragma once

// Vector interchange files.
//
// packed-binary: records of [int32 LE d][d x float32 LE], repeated to EOF.
//                All records share d; a trailing partial record is an error.
// csv:           headerless rows of d decimal floats, '.' separator.
//
// Parse errors are FormatError and name the byte offset of the problem.

#include <filesystem>
#include <string>

#include "ngpt/feature_matrix.hpp"

namespace ngpt {

enum class VectorFormat { kPackedBinary, kCsv };

// ".csv" selects csv; anything else is packed-binary.
VectorFormat format_for_path(const std::filesystem::path& path);

FeatureMatrix parse_packed(const std::string& bytes);
FeatureMatrix parse_csv(const std::string& text);
std::string encode_packed(const FeatureMatrix& m);
std::string encode_csv(const FeatureMatrix& m);

FeatureMatrix read_vectors(const std::filesystem::path& path);
FeatureMatrix read_vectors(const std::filesystem::path& path, VectorFormat format);
void write_vectors(const std::filesystem::path& path, const FeatureMatrix& m);
void write_vectors(const std::filesystem::path& path, const FeatureMatrix& m,
                   VectorFormat format);

}  // namespace ngpt
