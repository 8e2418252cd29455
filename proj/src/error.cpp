#include "ngpt/error.hpp"

namespace ngpt {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::kZeroVariance: return "ZeroVariance";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kDegenerateInput: return "DegenerateInput";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kNoSplittable: return "NoSplittable";
    case Errc::kEmptySide: return "EmptySide";
    case Errc::kEmptyTree: return "EmptyTree";
    case Errc::kEmptyData: return "EmptyData";
    case Errc::kEmptyRelevant: return "EmptyRelevant";
    case Errc::kInvalidSpec: return "InvalidSpec";
    case Errc::kInvalidConfig: return "InvalidConfig";
    case Errc::kInsufficientData: return "InsufficientData";
    case Errc::kIoError: return "IoError";
    case Errc::kFormatError: return "FormatError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what),
      code_(code),
      detail_(what) {}

}  // namespace ngpt
