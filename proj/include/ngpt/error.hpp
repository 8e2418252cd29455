#pragma once

#include <stdexcept>
#include <string>

namespace ngpt {

enum class Errc {
  kZeroVariance,
  kDimensionMismatch,
  kDegenerateInput,
  kInvalidArgument,
  kNoSplittable,
  kEmptySide,
  kEmptyTree,
  kEmptyData,
  kEmptyRelevant,
  kInvalidSpec,
  kInvalidConfig,
  kInsufficientData,
  kIoError,
  kFormatError,
};

const char* errc_name(Errc code) noexcept;

// All recoverable failures in the library are reported with this type; the
// code lets callers (and the CLI exit-code mapping) branch without parsing
// the message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }
  // The message without the code-name prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace ngpt
