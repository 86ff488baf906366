#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dcx {

enum class Errc {
  ParseError,
  ValidationError,
  UnknownSite,
  UnknownLink,
  OutOfRange,
  PowerOutOfRange,
  DegenerateDispersion,
  EmptyList,
  TrxDominated,
  Underdetermined,
  NonPhysical,
  NoFeasibleMode,
  NoCommonMode,
  NoAalAttachment,
  SpectrumExhausted,
  MissingSegmentData,
  UnknownFault,
  GridMismatch,
  InconsistentPriors,
  InfeasibleRanges,
  NoBaseline,
  NegativeLength,
  ProtocolViolation,
  NoInteroperableMode,
  AuthFailed,
  NotPending,
  SpectrumConflict,
  Timeout,
  BindFailure,
  StepFailure,
  UnknownTarget,
  CorruptLog,
  NotFound,
};

std::string_view to_string(Errc code) noexcept;
/// Inverse of to_string; nullopt for unknown names.
std::optional<Errc> parse_errc(std::string_view name) noexcept;

/// Error raised by every dcx module. `detail` carries the offending entity
/// (a document path, an element id, a step name) when one exists.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string detail);

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace dcx
