#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace repsim {

enum class Errc {
  // numerical degeneracy
  ZeroRow,
  DegenerateData,
  DegenerateRepresentation,
  ConstantRow,
  ConstantRdm,
  ConstantVector,
  NonFiniteLoss,
  // data / input problems
  DimensionMismatch,
  RepresentationTooNarrow,
  FormatError,
  ShapeMismatch,
  NonFiniteValue,
  UnknownModel,
  UnknownDataset,
  MissingEmbedding,
  MissingLabels,
  LabelMismatch,
  EmptyDataset,
  UnknownAttribute,
  EmptyResultSet,
  DuplicateMember,
  NoValidPairs,
  OrderMismatch,
  PairListMismatch,
  OutOfDomain,
  KTooLarge,
  TooFewSamples,
  InvalidArgument,
  // front-end
  ConfigError,
  IoError,
};

enum class ErrorCategory { Config, Data, Numerical, Io };

std::string_view errc_name(Errc code) noexcept;
ErrorCategory errc_category(Errc code) noexcept;

/// Library-wide exception. `location` carries structured payload such as
/// the offending row index or (row, col) pair.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::vector<std::size_t> location = {});

  Errc code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return errc_category(code_); }
  const std::vector<std::size_t>& location() const noexcept { return location_; }
  /// what() without the leading code name.
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
  std::vector<std::size_t> location_;
};

}  // namespace repsim
