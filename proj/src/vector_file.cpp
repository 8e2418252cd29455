#include "ngpt/vector_file.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ngpt/error.hpp"
#include "ngpt/eval.hpp"
#include "ngpt/persist.hpp"

namespace ngpt {

namespace {

[[noreturn]] void bad(const std::string& what, std::size_t offset) {
  throw Error(Errc::kFormatError, what + " at byte offset " + std::to_string(offset));
}

}  // namespace

VectorFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? VectorFormat::kCsv : VectorFormat::kPackedBinary;
}

FeatureMatrix parse_packed(const std::string& bytes) {
  std::size_t pos = 0;
  std::size_t dim = 0;
  std::vector<double> values;
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 4) bad("truncated record header", pos);
    std::int32_t d;
    std::memcpy(&d, bytes.data() + pos, 4);
    if (d <= 0) bad("non-positive dimension " + std::to_string(d), pos);
    if (dim == 0) dim = static_cast<std::size_t>(d);
    if (static_cast<std::size_t>(d) != dim) {
      bad("dimension " + std::to_string(d) + " differs from " + std::to_string(dim), pos);
    }
    const std::size_t body = dim * 4;
    if (bytes.size() - pos - 4 < body) bad("trailing partial record", pos);
    pos += 4;
    for (std::size_t t = 0; t < dim; ++t, pos += 4) {
      float f;
      std::memcpy(&f, bytes.data() + pos, 4);
      if (!std::isfinite(f)) bad("non-finite value", pos);
      values.push_back(static_cast<double>(f));
    }
  }
  if (dim == 0) bad("file holds no vectors", 0);
  const std::size_t n = values.size() / dim;
  return FeatureMatrix(n, dim, std::move(values));
}

FeatureMatrix parse_csv(const std::string& text) {
  std::size_t dim = 0;
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::size_t stop = end;
    if (stop > pos && text[stop - 1] == '\r') --stop;
    if (stop > pos) {
      std::size_t fields = 0;
      std::size_t p = pos;
      for (;;) {
        while (p < stop && text[p] == ' ') ++p;
        double v;
        const auto res = std::from_chars(text.data() + p, text.data() + stop, v);
        if (res.ec != std::errc{}) bad("expected a number", p);
        if (!std::isfinite(v)) bad("non-finite value", p);
        values.push_back(v);
        ++fields;
        p = static_cast<std::size_t>(res.ptr - text.data());
        while (p < stop && text[p] == ' ') ++p;
        if (p == stop) break;
        if (text[p] != ',') bad("expected ','", p);
        ++p;
      }
      if (dim == 0) dim = fields;
      if (fields != dim) {
        bad("row has " + std::to_string(fields) + " fields, expected " + std::to_string(dim), pos);
      }
    }
    pos = end + 1;
  }
  if (dim == 0) bad("file holds no vectors", 0);
  const std::size_t n = values.size() / dim;
  return FeatureMatrix(n, dim, std::move(values));
}

std::string encode_packed(const FeatureMatrix& m) {
  static_assert(std::endian::native == std::endian::little);
  std::string out;
  out.reserve(m.rows() * (4 + 4 * m.dim()));
  const auto d = static_cast<std::int32_t>(m.dim());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out.append(reinterpret_cast<const char*>(&d), 4);
    for (double v : m.row(i)) {
      const auto f = static_cast<float>(v);
      out.append(reinterpret_cast<const char*>(&f), 4);
    }
  }
  return out;
}

std::string encode_csv(const FeatureMatrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t t = 0; t < r.size(); ++t) {
      if (t) out.push_back(',');
      out += format_double(r[t]);
    }
    out.push_back('\n');
  }
  return out;
}

FeatureMatrix read_vectors(const std::filesystem::path& path) {
  return read_vectors(path, format_for_path(path));
}

FeatureMatrix read_vectors(const std::filesystem::path& path, VectorFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return format == VectorFormat::kCsv ? parse_csv(ss.str()) : parse_packed(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void write_vectors(const std::filesystem::path& path, const FeatureMatrix& m) {
  write_vectors(path, m, format_for_path(path));
}

void write_vectors(const std::filesystem::path& path, const FeatureMatrix& m,
                   VectorFormat format) {
  write_file_atomic(path, format == VectorFormat::kCsv ? encode_csv(m) : encode_packed(m));
}

}  // namespace ngpt
