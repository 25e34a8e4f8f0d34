#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace recgame {

enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kNonStochasticRow,
  kNegativeProbability,
  kNoActiveState,
  kNonFiniteEntry,
  kNotRecursive,
  kCertificateNotValid,
  kUnknownName,
  kParse,
  kInternal,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kNonStochasticRow: return "NonStochasticRow";
    case ErrorKind::kNegativeProbability: return "NegativeProbability";
    case ErrorKind::kNoActiveState: return "NoActiveState";
    case ErrorKind::kNonFiniteEntry: return "NonFiniteEntry";
    case ErrorKind::kNotRecursive: return "NotRecursive";
    case ErrorKind::kCertificateNotValid: return "CertificateNotValid";
    case ErrorKind::kUnknownName: return "UnknownName";
    case ErrorKind::kParse: return "Parse";
    case ErrorKind::kInternal: return "Internal";
  }
  return "Unknown";
}

// Every failure surfaced by the library is an Error carrying its kind, so
// callers (and tests) can dispatch on the category rather than the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace recgame
