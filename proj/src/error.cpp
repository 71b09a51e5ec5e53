#include "repsim/error.hpp"

namespace repsim {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::ZeroRow: return "ZeroRow";
    case Errc::DegenerateData: return "DegenerateData";
    case Errc::DegenerateRepresentation: return "DegenerateRepresentation";
    case Errc::ConstantRow: return "ConstantRow";
    case Errc::ConstantRdm: return "ConstantRDM";
    case Errc::ConstantVector: return "ConstantVector";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::RepresentationTooNarrow: return "RepresentationTooNarrow";
    case Errc::FormatError: return "FormatError";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::UnknownModel: return "UnknownModel";
    case Errc::UnknownDataset: return "UnknownDataset";
    case Errc::MissingEmbedding: return "MissingEmbedding";
    case Errc::MissingLabels: return "MissingLabels";
    case Errc::LabelMismatch: return "LabelMismatch";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::UnknownAttribute: return "UnknownAttribute";
    case Errc::EmptyResultSet: return "EmptyResultSet";
    case Errc::DuplicateMember: return "DuplicateMember";
    case Errc::NoValidPairs: return "NoValidPairs";
    case Errc::OrderMismatch: return "OrderMismatch";
    case Errc::PairListMismatch: return "PairListMismatch";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorCategory errc_category(Errc code) noexcept {
  switch (code) {
    case Errc::ZeroRow:
    case Errc::DegenerateData:
    case Errc::DegenerateRepresentation:
    case Errc::ConstantRow:
    case Errc::ConstantRdm:
    case Errc::ConstantVector:
    case Errc::NonFiniteLoss:
      return ErrorCategory::Numerical;
    case Errc::ConfigError:
      return ErrorCategory::Config;
    case Errc::IoError:
      return ErrorCategory::Io;
    default:
      return ErrorCategory::Data;
  }
}

Error::Error(Errc code, const std::string& what, std::vector<std::size_t> location)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what),
      code_(code),
      message_(what),
      location_(std::move(location)) {}

}  // namespace repsim
