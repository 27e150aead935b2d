#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tubalcast {

enum class ErrorKind {
  DimMismatch,
  NonRealResult,
  ConvergenceFailure,
  RankOutOfRange,
  ZeroTensor,
  InvalidRate,
  InvalidArgument,
  EmptyObservation,
  NonFinite,
  GraphUnavailable,
  EmptyCorpus,
  ParseError,
  NegativeTraffic,
  ShapeError,
  DegenerateRange,
  InsufficientData,
  ZeroTruth,
  MissingCheckpoint,
  FormatError,
  IoError,
  IntegrityError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` distinguishes failure modes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace tubalcast
