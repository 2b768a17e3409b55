#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eegglt {

enum class ErrorCode {
  // graph-core
  ZeroVarianceChannel,
  DimensionMismatch,
  OffSphereCoordinate,
  ShapeMismatch,
  IsolatedNode,
  InvalidOrder,
  AsymmetricInput,
  // autodiff / layers
  NonFiniteValue,
  BatchTooSmall,
  InvalidRate,
  InvalidLabel,
  // model / training
  InvalidSpec,
  EmptySplit,
  InvalidConfig,
  NonFiniteLoss,
  EmptyMask,
  MissingSnapshot,
  // ingest
  TruncatedFile,
  BadMagic,
  InconsistentHeader,
  UnknownRun,
  MissingAnnotation,
  InvalidFrequency,
  EmptyInput,
  DegenerateSplit,
  // macs
  InvalidDensity,
  // files
  Io,
  ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Broad class used by the CLI to pick an exit code.
enum class ErrorKind { Argument, Data, Numeric };

ErrorKind kind_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace eegglt
